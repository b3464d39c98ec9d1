"""Riemann-Liouville fractional integral and derivative on sampled functions.

The integral of order ``alpha`` at ``t0``::

    J^alpha f(t) = 1/Gamma(alpha) * int_{t0}^{t} (t - s)**(alpha - 1) f(s) ds

is computed by product integration: the kernel is integrated exactly against
the piecewise-linear interpolant of the samples (see :mod:`fracbound.quadrature`).
The derivative is the literal composite definition, ``[alpha]`` ordinary
derivatives of ``J^([alpha] - alpha) f``, where ``[alpha]`` is the least
integer *strictly* greater than ``alpha``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse, InvalidExponent, InvalidOrder
from .function_model import Interval, SampledFunction, UNIT
from .quadrature import kernel_weights, toeplitz_lower_fft, toeplitz_lower_naive
from .special import gamma

__all__ = [
    "Scheme",
    "FracParams",
    "ceil_strict",
    "rl_integral",
    "rl_integral_power_oracle",
    "rl_derivative",
    "semigroup_compose",
    "finite_difference",
]


class Scheme(str, enum.Enum):
    """Evaluation strategy for the product-trapezoid sum; the weights are identical."""

    NAIVE = "naive"
    FFT = "fft"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        aliases = {"productTrapezoidNaive": "naive", "productTrapezoidFFT": "fft"}
        return cls(aliases.get(value, value))


def ceil_strict(alpha: float) -> int:
    """Least integer strictly greater than ``alpha`` (so ``ceil_strict(1) == 2``)."""
    return math.floor(alpha) + 1


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class FracParams:
    """Scalar parameters of an operator instance or a theorem check.

    Everything is optional: checks fill in what they use (``alpha`` is
    absent only for statements about raw functions).
    """

    alpha: float | None = None
    p: float | None = None
    gamma: float | None = None
    q: float | None = None
    n: int | None = None
    interval: Interval = UNIT
    extra: tuple = field(default=())

    def __post_init__(self):
        if self.alpha is not None and not self.alpha > 0:
            raise InvalidOrder(f"alpha must be positive, got {self.alpha}")
        if self.p is not None and not (1 <= self.p <= math.inf):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")

    @property
    def p_prime(self) -> float | None:
        return None if self.p is None else conjugate_exponent(self.p)

    @property
    def ceil_alpha(self) -> int:
        return ceil_strict(self.alpha)

    def describe(self) -> str:
        """Stable ``key=value;...`` rendering used in CSV rows."""
        parts = []
        for key in ("alpha", "p", "gamma", "q", "n"):
            val = getattr(self, key)
            if val is not None:
                parts.append(f"{key}={val!r}")
        parts.extend(f"{k}={v!r}" for k, v in self.extra)
        if self.interval != UNIT:
            parts.append(f"interval=[{self.interval.t0!r},{self.interval.t1!r}]")
        return ";".join(parts)


def _check_order(alpha):
    if not (alpha > 0 and math.isfinite(alpha)):
        raise InvalidOrder(f"order must be a positive finite number, got {alpha}")


def rl_integral(f: SampledFunction, alpha: float, scheme="fft") -> SampledFunction:
    """``J^alpha f`` at the nodes of ``f``; the value at ``t0`` is 0 by convention.

    Exact for piecewise-linear ``f`` (up to rounding), second order for smooth
    ``f``.  ``scheme`` selects direct ``O(n^2)`` summation (``"naive"``) or the
    FFT-based Toeplitz product (``"fft"``); both use the same weights.
    """
    _check_order(alpha)
    scheme = Scheme.parse(scheme)
    n = f.n
    c, b = kernel_weights(float(alpha), n)
    x = f.values
    if scheme is Scheme.NAIVE:
        y = toeplitz_lower_naive(c, x)
    else:
        y = toeplitz_lower_fft(c, x)
    y = y + np.outer(b - c, x[0])
    y *= f.h**alpha / gamma(alpha + 2.0)
    y[0] = 0.0
    return f.with_values(y)


def rl_integral_power_oracle(gamma_exp: float, alpha: float, t) -> float:
    """Closed form ``J^alpha t**g = Gamma(g+1)/Gamma(g+alpha+1) t**(g+alpha)`` with ``t0 = 0``."""
    _check_order(alpha)
    if gamma_exp <= -1:
        raise InvalidExponent(f"t**{gamma_exp} is not locally integrable at 0")
    c = math.exp(math.lgamma(gamma_exp + 1.0) - math.lgamma(gamma_exp + alpha + 1.0))
    return c * np.power(t, gamma_exp + alpha)


def finite_difference(values: np.ndarray, h: float, times: int = 1) -> np.ndarray:
    """``times`` successive second-order differences (central inside, one-sided at the ends)."""
    out = np.asarray(values, dtype=float)
    for _ in range(times):
        out = np.gradient(out, h, axis=0, edge_order=2)
    return out


def rl_derivative(f: SampledFunction, alpha: float, scheme="fft") -> SampledFunction:
    """``D^alpha f = d^m/dt^m J^(m - alpha) f`` with ``m = ceil_strict(alpha)``.

    For integer ``alpha`` this integrates once and differentiates
    ``alpha + 1`` times.
    """
    _check_order(alpha)
    m = ceil_strict(alpha)
    if f.n < 2 * m + 2:
        raise GridTooCoarse(f"D^{alpha} needs at least {2 * m + 2} cells, got {f.n}")
    g = rl_integral(f, m - alpha, scheme)
    return f.with_values(finite_difference(g.values, f.h, m))


def semigroup_compose(f: SampledFunction, alpha: float, beta: float, scheme="fft"):
    """Return ``(J^alpha J^beta f, J^(alpha+beta) f)`` on the grid of ``f``."""
    _check_order(alpha)
    _check_order(beta)
    nested = rl_integral(rl_integral(f, beta, scheme), alpha, scheme)
    direct = rl_integral(f, alpha + beta, scheme)
    return nested, direct
