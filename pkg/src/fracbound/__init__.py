"""Riemann-Liouville fractional integrals on uniform grids, function-space
norm estimators, and numerical checks of mapping properties of ``J^alpha``."""

from .errors import (
    ConfigParseError,
    DegenerateFit,
    EvalAtSingularity,
    FracboundError,
    GridTooCoarse,
    InvalidExponent,
    InvalidOrder,
    MissingManifest,
    NonIntegrableSpec,
    NotDifferentiable,
    ParamsOutOfScope,
)
from .frac_calculus import (
    FracParams,
    Scheme,
    ceil_strict,
    rl_derivative,
    rl_integral,
    rl_integral_power_oracle,
    semigroup_compose,
)
from .function_model import (
    Constant,
    Interval,
    LogPower,
    Polynomial,
    Power,
    SampledFunction,
    Step,
    Sum,
    Trig,
    evaluate,
    sample,
    spec_from_json,
    spec_to_json,
)
from .space_norms import (
    NormReport,
    Space,
    bk_norm,
    bmo_seminorm,
    holder_seminorm,
    kr_norm,
    lp_norm,
    sobolev_norm,
    weak_lp_seminorm,
    wrl_norm,
)

__version__ = "0.1.0"
