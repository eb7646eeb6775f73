"""Dirichlet heat kernel estimates for isotropic unimodal Levy processes."""

from ._core import (
    ConfigError,
    DirichletBounds,
    Domain,
    HeatlabError,
    ProcessModel,
    UnsupportedRegime,
    empirical_survival,
    p0,
    p_free,
    p_free_envelope,
    renewal_table,
    run_campaign,
)

__all__ = [
    "ConfigError",
    "DirichletBounds",
    "Domain",
    "HeatlabError",
    "ProcessModel",
    "UnsupportedRegime",
    "empirical_survival",
    "p0",
    "p_free",
    "p_free_envelope",
    "renewal_table",
    "run_campaign",
]
