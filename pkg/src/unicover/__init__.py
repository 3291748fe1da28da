"""Uniform random covering of the circle: arc-set algebra, radius regimes,
dimension bounds, Monte Carlo experiments and estimators."""

__version__ = "0.1.0"

from .bounds import (
    GeometricSchedule,
    c_l_constant,
    c_star,
    cover_eigenvalue,
    k_lm,
    lower_bound,
    optimize_lower,
    optimize_upper_matrix,
    optimize_upper_weak,
    psi_exact,
    s_exponent,
    shepp_lower,
    shepp_upper,
    upper_bound_matrix,
    upper_bound_weak,
)
from .errors import *  # noqa: F401,F403
from .radius import (
    Constant,
    LogLogHalf,
    LogLogPlus,
    LogOverN,
    LogPlusLogLog,
    PowerLaw,
    RadiusFamily,
    classify,
    parse_family,
)
from .simulator import (
    DEFAULT_SEED,
    build_E,
    build_F,
    countability_experiment,
    coverage_experiment,
    measure_experiment,
    mu_lm_support,
    sample_path,
    uniform_set_approx,
)
from .torus import Arc, ArcSet, riesz_energy, riesz_potential
