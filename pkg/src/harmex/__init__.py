"""harmex: zonal-harmonic Bergman space numerics and level-set distance brackets."""

from .harmonic_model import (
    TestFunctionSpec,
    ZonalExpansion,
    bergman_kernel,
    evaluate,
    evaluate_grid,
    fractional_derivative,
    poisson_expansion,
    truncation_degree,
)
from .intervals import IntervalSet
from .norms import RadialProfile, SpaceParams, ball_average_profile, integral_mean, space_norm
from .extremal import (
    DistancePair,
    distance_report,
    finiteness_diagnostic_T4,
    finiteness_diagnostic_T6,
    level_set,
    log_measure,
    s2_threshold,
    split_decomposition,
)
from .quadrature import RadialGrid, SphereRule, radial_grid, radial_integral, sphere_integral, sphere_rule

__version__ = "0.1.0"

__all__ = [
    "TestFunctionSpec",
    "ZonalExpansion",
    "bergman_kernel",
    "evaluate",
    "evaluate_grid",
    "fractional_derivative",
    "poisson_expansion",
    "truncation_degree",
    "IntervalSet",
    "RadialProfile",
    "SpaceParams",
    "ball_average_profile",
    "integral_mean",
    "space_norm",
    "DistancePair",
    "distance_report",
    "finiteness_diagnostic_T4",
    "finiteness_diagnostic_T6",
    "level_set",
    "log_measure",
    "s2_threshold",
    "split_decomposition",
    "RadialGrid",
    "SphereRule",
    "radial_grid",
    "radial_integral",
    "sphere_integral",
    "sphere_rule",
    "__version__",
]
