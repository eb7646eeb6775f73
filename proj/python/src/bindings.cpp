#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "heatlab/campaign.hpp"
#include "heatlab/config.hpp"
#include "heatlab/dirichlet_bounds.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/free_kernel.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/process_models.hpp"
#include "heatlab/profiles.hpp"
#include "heatlab/renewal.hpp"
#include "heatlab/simulator.hpp"

namespace py = pybind11;
using namespace heatlab;

namespace {

std::string csv_of(const ValidationReport& r) {
  std::ostringstream out;
  r.write_csv(out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dirichlet heat kernel estimates for isotropic unimodal Levy processes";

  auto base = py::register_exception<Error>(m, "HeatlabError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<UnsupportedRegime>(m, "UnsupportedRegime", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ModelInvalid>(m, "ModelInvalid", base.ptr());

  py::class_<ProcessModel>(m, "ProcessModel")
      .def_static("stable", &ProcessModel::stable, py::arg("d"), py::arg("alpha"), py::arg("scale") = 1.0)
      .def_static("truncated_stable", &ProcessModel::truncated_stable, py::arg("d"), py::arg("alpha"),
                  py::arg("beta") = 0.0)
      .def_static("sum_of_stables", &ProcessModel::sum_of_stables, py::arg("d"), py::arg("alpha1"), py::arg("alpha2"))
      .def_static("subordinate_bm", &ProcessModel::subordinate_bm, py::arg("d"), py::arg("alpha"))
      .def_property_readonly("dimension", &ProcessModel::dimension)
      .def_property_readonly("fingerprint", &ProcessModel::fingerprint)
      .def("psi", &ProcessModel::psi)
      .def("nu", &ProcessModel::nu)
      .def("tail_mass", &ProcessModel::tail_mass)
      .def("pruitt_h", &ProcessModel::pruitt_h)
      .def("support_radius", &ProcessModel::support_radius)
      .def("__repr__", &ProcessModel::describe);

  py::class_<RenewalTable>(m, "RenewalTable")
      .def("V", &RenewalTable::V)
      .def("Vprime", &RenewalTable::Vprime)
      .def("Vinverse", &RenewalTable::Vinverse)
      .def_property_readonly("rule", &RenewalTable::rule)
      .def("rescaled", &RenewalTable::rescaled);

  m.def(
      "renewal_table",
      [](const ProcessModel& model, const std::string& backend) {
        return build_renewal_table(model, renewal_backend_from_string(backend));
      },
      py::arg("model"), py::arg("backend") = "h-proxy");

  m.def("p_free", [](const ProcessModel& model, double t, double r) { return p_free(model, t, r); }, py::arg("model"),
        py::arg("t"), py::arg("r"));
  m.def("p0", [](const ProcessModel& model, double t) { return p0(model, t); });

  py::class_<KernelEnvelope>(m, "KernelEnvelope")
      .def_readonly("lower", &KernelEnvelope::lower)
      .def_readonly("upper", &KernelEnvelope::upper)
      .def_readonly("near_branch", &KernelEnvelope::near_branch)
      .def_readonly("far_branch", &KernelEnvelope::far_branch);
  m.def(
      "p_free_envelope",
      [](const ProcessModel& model, const RenewalTable& table, double t, double r, double theta) {
        return p_free_envelope(model, table, t, r, {}, theta);
      },
      py::arg("model"), py::arg("table"), py::arg("t"), py::arg("r"), py::arg("theta") = 0.0);

  py::class_<Domain>(m, "Domain")
      .def_static("ball", &Domain::ball)
      .def_static("exterior_ball", &Domain::exterior_ball)
      .def_static("halfspace", &Domain::halfspace)
      .def_static("halfspace_bump", &Domain::halfspace_bump)
      .def_static("union_two_balls", &Domain::union_two_balls)
      .def_static("interval", &Domain::interval)
      .def_static("whole_space", &Domain::whole_space)
      .def("dist", [](const Domain& d, const Point& x) { return d.dist(x); })
      .def("contains", [](const Domain& d, const Point& x) { return d.contains(x); })
      .def_property_readonly("inradius", &Domain::inradius)
      .def_property_readonly("diameter", &Domain::diameter)
      .def("__repr__", &Domain::describe);

  py::class_<SurvivalEnvelope>(m, "SurvivalEnvelope")
      .def_readonly("structural", &SurvivalEnvelope::structural)
      .def_readonly("lower", &SurvivalEnvelope::lower)
      .def_readonly("upper", &SurvivalEnvelope::upper)
      .def_property_readonly("regime", [](const SurvivalEnvelope& e) { return to_string(e.regime); });
  py::class_<KernelFactorization>(m, "KernelFactorization")
      .def_readonly("structural", &KernelFactorization::structural)
      .def_readonly("lower", &KernelFactorization::lower)
      .def_readonly("upper", &KernelFactorization::upper);
  py::class_<EigenBracket>(m, "EigenBracket")
      .def_readonly("lambda_low", &EigenBracket::lambda_low)
      .def_readonly("lambda_high", &EigenBracket::lambda_high);

  py::class_<DirichletBounds>(m, "DirichletBounds")
      .def(py::init([](const ProcessModel& model, const RenewalTable& table, const Domain& domain) {
             return DirichletBounds(model, table, domain);
           }),
           py::keep_alive<1, 3>())
      .def("survival", [](const DirichletBounds& b, double t, const Point& x) { return b.survival(t, x); })
      .def("kernel",
           [](const DirichletBounds& b, double t, const Point& x, const Point& y) { return b.kernel(t, x, y); })
      .def("eigen_bracket", &DirichletBounds::eigen_bracket)
      .def_property_readonly("t0", &DirichletBounds::t0);

  py::class_<EmpiricalStats>(m, "EmpiricalStats")
      .def_readonly("estimate", &EmpiricalStats::estimate)
      .def_readonly("lower", &EmpiricalStats::lower)
      .def_readonly("upper", &EmpiricalStats::upper)
      .def_readonly("n_paths", &EmpiricalStats::n_paths);

  m.def(
      "empirical_survival",
      [](const ProcessModel& model, const Domain& domain, const Point& x, const std::vector<double>& times,
         std::uint64_t n_paths, std::uint64_t seed) {
        SimConfig cfg;
        cfg.n_paths = n_paths;
        cfg.seed = seed;
        py::gil_scoped_release release;
        return empirical_survival(model, domain, x, times, cfg);
      },
      py::arg("model"), py::arg("domain"), py::arg("x"), py::arg("times"), py::arg("n_paths") = 10000,
      py::arg("seed") = 1);

  py::class_<ReportRow>(m, "ReportRow")
      .def_readonly("check", &ReportRow::check)
      .def_readonly("case", &ReportRow::case_name)
      .def_readonly("min_ratio", &ReportRow::min_ratio)
      .def_readonly("max_ratio", &ReportRow::max_ratio)
      .def_readonly("statistic", &ReportRow::statistic)
      .def_readonly("ceiling", &ReportRow::ceiling)
      .def_property_readonly("status", [](const ReportRow& r) { return to_string(r.status); })
      .def_readonly("detail", &ReportRow::detail);

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("rows", &ValidationReport::rows)
      .def_readonly("model", &ValidationReport::model)
      .def_readonly("config_hash", &ValidationReport::config_hash)
      .def("passed", &ValidationReport::passed)
      .def("to_csv", &csv_of);

  m.def(
      "run_campaign",
      [](const std::string& text, const std::optional<std::filesystem::path>& out_dir) {
        const auto cfg = parse_config(text, "<python>");
        CampaignResult res;
        {
          py::gil_scoped_release release;
          res = run_campaign(cfg);
        }
        if (out_dir) write_campaign(res, cfg, *out_dir);
        return res.report;
      },
      py::arg("config"), py::arg("out_dir") = py::none(),
      "Run a campaign from YAML text; optionally write its artifacts.");
}
