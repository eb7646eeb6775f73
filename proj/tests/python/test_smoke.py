import math

import pytest

import heatlab


def test_cauchy_density():
    m = heatlab.ProcessModel.stable(1, 1.0)
    for r in (0.0, 0.5, 3.0):
        assert heatlab.p_free(m, 1.0, r) == pytest.approx(1.0 / (math.pi * (1.0 + r * r)), rel=1e-6)


def test_renewal_and_envelope():
    m = heatlab.ProcessModel.stable(2, 1.5)
    table = heatlab.renewal_table(m, "exact-laplace")
    assert table.V(1.0) == pytest.approx(1.0 / math.gamma(1.75), rel=1e-3)
    env = heatlab.p_free_envelope(m, table, 1.0, 0.5)
    assert 0.0 < env.near_branch


def test_bounds_and_simulation():
    m = heatlab.ProcessModel.stable(1, 1.0)
    D = heatlab.Domain.interval(-1.0, 1.0)
    b = heatlab.DirichletBounds(m, heatlab.renewal_table(m), D)
    e = b.eigen_bracket()
    assert e.lambda_low <= e.lambda_high
    s = b.survival(0.1, [0.9])
    assert s.lower <= s.structural <= s.upper
    emp = heatlab.empirical_survival(m, D, [0.0], [0.05, 0.2], n_paths=2000, seed=5)
    assert emp[0].estimate >= emp[1].estimate
    again = heatlab.empirical_survival(m, D, [0.0], [0.05, 0.2], n_paths=2000, seed=5)
    assert [x.estimate for x in emp] == [x.estimate for x in again]


def test_campaign(tmp_path):
    cfg = "model:\n  kind: stable\n  dimension: 1\n  alpha: 1.0\nchecks: [free-kernel-oracle]\n"
    report = heatlab.run_campaign(cfg, tmp_path)
    assert report.passed()
    assert [r.check for r in report.rows] == ["free-kernel-oracle"]
    assert (tmp_path / "report.csv").read_text() == report.to_csv()


def test_errors():
    with pytest.raises(heatlab.ConfigError):
        heatlab.run_campaign("model:\n  kind: stable\n  dimension: 1\n  alpah: 1\n")
    m = heatlab.ProcessModel.stable(1, 1.0)
    with pytest.raises(heatlab.HeatlabError):
        heatlab.DirichletBounds(m, heatlab.renewal_table(m), heatlab.Domain.whole_space(1)).eigen_bracket()
