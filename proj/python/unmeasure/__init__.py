"""Python front end for the unmeasure C++ library."""

from ._unmeasure import (
    ConvergenceError,
    DomainError,
    InfeasibleError,
    altmin,
    binom_divergence,
    classical_qq,
    dutchbook,
    f_divergence,
    g_statistic,
    inequality_scan,
    kl_extended,
    poisson_pmf,
    poisson_qq,
    project,
    thin_binomial,
    thin_identity,
    thin_poisson,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "InfeasibleError",
    "altmin",
    "binom_divergence",
    "classical_qq",
    "dutchbook",
    "f_divergence",
    "g_statistic",
    "inequality_scan",
    "kl_extended",
    "poisson_pmf",
    "poisson_qq",
    "project",
    "thin_binomial",
    "thin_identity",
    "thin_poisson",
]
