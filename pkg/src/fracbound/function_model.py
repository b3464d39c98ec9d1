"""Analytic test functions and their samplings on uniform grids.

An :class:`AnalyticSpec` is a closed-form, vector-valued function
``f: [t0, t1] -> R^d``.  :func:`sample` turns it into a
:class:`SampledFunction`, the object every operator and norm estimator in
this package consumes.

Nodes where the closed form blows up (``t**gamma`` with ``gamma < 0`` at
``t = 0``, for instance) are given a finite surrogate, the analytic
integral over the first half cell divided by the step::

    values[0] = (1/h) * int_{t0}^{t0 + h/2} f(s) ds

so grid-based norms and quadratures stay finite while the mass near the
singularity is kept to first order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import integrate

from .errors import EvalAtSingularity, NonIntegrableSpec, NotDifferentiable

__all__ = [
    "Interval",
    "UNIT",
    "VectorNorm",
    "AnalyticSpec",
    "Power",
    "LogPower",
    "Polynomial",
    "Trig",
    "Step",
    "Constant",
    "Sum",
    "SampledFunction",
    "evaluate",
    "sample",
    "analytic_derivative",
    "pointwise_norm",
    "is_in_lp",
    "spec_to_json",
    "spec_from_json",
]


@dataclass(frozen=True)
class Interval:
    t0: float
    t1: float

    def __post_init__(self):
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t1", float(self.t1))
        if not (self.t0 < self.t1):
            raise ValueError(f"interval needs t0 < t1, got [{self.t0}, {self.t1}]")

    @property
    def length(self) -> float:
        return self.t1 - self.t0

    def __contains__(self, t) -> bool:
        return self.t0 <= t <= self.t1


UNIT = Interval(0.0, 1.0)

_NORM_KINDS = ("ell1", "ell2", "ellInf")


@dataclass(frozen=True)
class VectorNorm:
    """Norm on the value space ``R^d``."""

    kind: str = "ell2"
    dim: int = 1

    def __post_init__(self):
        if self.kind not in _NORM_KINDS:
            raise ValueError(f"unknown vector norm {self.kind!r}; expected one of {_NORM_KINDS}")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Norm along the last axis."""
        values = np.asarray(values, dtype=float)
        if self.dim == 1:
            return np.abs(values[..., 0])
        if self.kind == "ell1":
            return np.sum(np.abs(values), axis=-1)
        if self.kind == "ell2":
            return np.sqrt(np.sum(values * values, axis=-1))
        return np.max(np.abs(values), axis=-1)


def _vec(x) -> tuple:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)))


def _is_nonneg_int(x: float) -> bool:
    return x >= 0 and float(x).is_integer()


# --------------------------------------------------------------------------
# analytic specs
# --------------------------------------------------------------------------


class AnalyticSpec:
    """Base class for closed-form test functions.

    Subclasses implement ``_eval`` (vectorized, shape ``(m, d)``),
    ``_singular`` (boolean mask of points where the formula diverges),
    ``_derivative`` and ``validate``.
    """

    interval: Interval

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _singular(self, t: np.ndarray) -> np.ndarray:
        return np.zeros(t.shape, dtype=bool)

    def _half_cell_mass(self, h: float) -> np.ndarray:
        """``int_{t0}^{t0+h/2} f``; only needed by variants with a singular endpoint."""
        raise NotImplementedError

    def _derivative(self) -> "AnalyticSpec":
        raise NotImplementedError

    def validate(self) -> None:
        """Raise :class:`NonIntegrableSpec` unless the spec is integrable on its interval."""


@dataclass(frozen=True)
class Power(AnalyticSpec):
    """``coeff * t**gamma`` (plain ``t``, not ``t - t0``)."""

    gamma: float
    coeff: tuple = (1.0,)
    interval: Interval = UNIT

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "coeff", _vec(self.coeff))

    @property
    def dim(self):
        return len(self.coeff)

    def _eval(self, t):
        with np.errstate(divide="ignore", invalid="ignore"):
            base = np.power(t, self.gamma)
        return base[:, None] * np.asarray(self.coeff)[None, :]

    def _singular(self, t):
        if self.gamma < 0:
            return t == 0.0
        return np.zeros(t.shape, dtype=bool)

    def _half_cell_mass(self, h):
        a = self.gamma + 1.0
        if a <= 0:
            return np.full(self.dim, np.inf)
        return np.asarray(self.coeff) * (0.5 * h) ** a / a

    def _derivative(self):
        if self.gamma == 0.0 or all(c == 0.0 for c in self.coeff):
            return Constant(tuple(0.0 for _ in self.coeff), self.interval)
        return Power(self.gamma - 1.0, tuple(self.gamma * c for c in self.coeff), self.interval)

    def validate(self):
        if self.interval.t0 < 0 and not _is_nonneg_int(self.gamma):
            raise NonIntegrableSpec(
                f"t**{self.gamma} is not real-valued (or not integrable) on an interval "
                f"reaching below zero"
            )
        if self.interval.t0 == 0 and self.gamma <= -1:
            raise NonIntegrableSpec(f"t**{self.gamma} is not integrable at t = 0")


@dataclass(frozen=True)
class LogPower(AnalyticSpec):
    """``coeff * t**beta * log(1/t)**sigma`` on ``[0, t1]`` with ``t1 < 1``."""

    beta: float
    sigma: float
    coeff: tuple = (1.0,)
    interval: Interval = Interval(0.0, 0.5)

    def __post_init__(self):
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "coeff", _vec(self.coeff))

    @property
    def dim(self):
        return len(self.coeff)

    def _eval(self, t):
        with np.errstate(divide="ignore", invalid="ignore"):
            log_inv = -np.log(t)
            base = np.power(t, self.beta) * np.power(log_inv, self.sigma)
        # limits at t = 0 that the formula gets wrong (0 * inf)
        zero = t == 0.0
        if np.any(zero) and (self.beta > 0 or (self.beta == 0 and self.sigma < 0)):
            base = np.where(zero, 0.0, base)
        if np.any(zero) and self.beta == 0 and self.sigma == 0:
            base = np.where(zero, 1.0, base)
        return base[:, None] * np.asarray(self.coeff)[None, :]

    def _singular(self, t):
        if self.beta < 0 or (self.beta == 0 and self.sigma > 0):
            return t == 0.0
        return np.zeros(t.shape, dtype=bool)

    def _half_cell_mass(self, h):
        x = 0.5 * h
        lx = -math.log(x)
        if self.beta == -1.0:
            if self.sigma >= -1:
                return np.full(self.dim, np.inf)
            m = lx ** (self.sigma + 1.0) / (-(self.sigma + 1.0))
        else:
            # s = exp(-u):  int_0^x s^beta log(1/s)^sigma ds = int_{log 1/x}^inf e^{-(beta+1)u} u^sigma du
            k = self.beta + 1.0
            m, _ = integrate.quad(lambda u: math.exp(-k * u) * u**self.sigma, lx, np.inf,
                                  epsabs=0.0, epsrel=1e-13, limit=200)
        return np.asarray(self.coeff) * m

    def _derivative(self):
        # d/dt t^b L^s = b t^(b-1) L^s - s t^(b-1) L^(s-1),  L = log(1/t)
        terms = []
        if self.beta != 0.0:
            terms.append(LogPower(self.beta - 1, self.sigma,
                                  tuple(self.beta * c for c in self.coeff), self.interval))
        if self.sigma != 0.0:
            terms.append(LogPower(self.beta - 1, self.sigma - 1,
                                  tuple(-self.sigma * c for c in self.coeff), self.interval))
        if not terms:
            return Constant(tuple(0.0 for _ in self.coeff), self.interval)
        return terms[0] if len(terms) == 1 else Sum(tuple(terms), self.interval)

    def validate(self):
        if self.interval.t0 != 0.0:
            raise NonIntegrableSpec("LogPower is only defined on intervals starting at 0")
        if self.interval.t1 > 1.0 or (self.interval.t1 == 1.0 and self.sigma < 0):
            raise NonIntegrableSpec("LogPower needs t1 < 1 so that log(1/t) stays positive")
        if self.beta < -1:
            raise NonIntegrableSpec(f"t**{self.beta} log(1/t)**sigma is not integrable at 0")
        if self.beta == -1 and self.sigma >= -1:
            raise NonIntegrableSpec("t**-1 log(1/t)**sigma needs sigma < -1 to be integrable")


@dataclass(frozen=True)
class Polynomial(AnalyticSpec):
    """One coefficient list per component, lowest degree first."""

    coeffs: tuple
    interval: Interval = UNIT

    def __post_init__(self):
        rows = self.coeffs
        if len(rows) and np.ndim(rows[0]) == 0:
            rows = (rows,)
        object.__setattr__(self, "coeffs", tuple(_vec(r) for r in rows))

    @property
    def dim(self):
        return len(self.coeffs)

    def _eval(self, t):
        return np.stack([np.polynomial.polynomial.polyval(t, c) for c in self.coeffs], axis=-1)

    def _derivative(self):
        rows = []
        for c in self.coeffs:
            d = np.polynomial.polynomial.polyder(np.asarray(c)) if len(c) > 1 else np.zeros(1)
            rows.append(tuple(d) if len(d) else (0.0,))
        return Polynomial(tuple(rows), self.interval)


@dataclass(frozen=True)
class Trig(AnalyticSpec):
    """``amp * sin(freq * t + phase)`` per component."""

    freq: tuple
    phase: tuple
    amp: tuple = None
    interval: Interval = UNIT

    def __post_init__(self):
        object.__setattr__(self, "freq", _vec(self.freq))
        object.__setattr__(self, "phase", _vec(self.phase))
        amp = (1.0,) * len(self.freq) if self.amp is None else _vec(self.amp)
        object.__setattr__(self, "amp", amp)
        if not (len(self.freq) == len(self.phase) == len(self.amp)):
            raise ValueError("freq, phase and amp must have one entry per component")

    @property
    def dim(self):
        return len(self.freq)

    def _eval(self, t):
        w, ph, a = (np.asarray(x)[None, :] for x in (self.freq, self.phase, self.amp))
        return a * np.sin(w * t[:, None] + ph)

    def _derivative(self):
        return Trig(self.freq, tuple(p + math.pi / 2 for p in self.phase),
                    tuple(a * w for a, w in zip(self.amp, self.freq)), self.interval)


@dataclass(frozen=True)
class Step(AnalyticSpec):
    """Right-continuous piecewise constant: ``values[k]`` on ``[breaks[k-1], breaks[k])``."""

    breaks: tuple
    values: tuple
    interval: Interval = UNIT

    def __post_init__(self):
        object.__setattr__(self, "breaks", _vec(self.breaks) if len(self.breaks) else ())
        object.__setattr__(self, "values", tuple(_vec(v) for v in self.values))
        if len(self.values) != len(self.breaks) + 1:
            raise ValueError("a step function needs len(breaks) + 1 plateau values")
        if len({len(v) for v in self.values}) != 1:
            raise ValueError("all plateau values must have the same dimension")
        if any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def dim(self):
        return len(self.values[0])

    def _eval(self, t):
        idx = np.searchsorted(np.asarray(self.breaks), t, side="right")
        return np.asarray(self.values)[idx]

    def _derivative(self):
        raise NotDifferentiable("step functions have no classical derivative")


@dataclass(frozen=True)
class Constant(AnalyticSpec):
    value: tuple = (1.0,)
    interval: Interval = UNIT

    def __post_init__(self):
        object.__setattr__(self, "value", _vec(self.value))

    @property
    def dim(self):
        return len(self.value)

    def _eval(self, t):
        return np.broadcast_to(np.asarray(self.value), (t.size, self.dim)).copy()

    def _derivative(self):
        return Constant(tuple(0.0 for _ in self.value), self.interval)


@dataclass(frozen=True)
class Sum(AnalyticSpec):
    terms: tuple
    interval: Interval = field(default=None)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("Sum needs at least one term")
        object.__setattr__(self, "terms", terms)
        if self.interval is None:
            object.__setattr__(self, "interval", terms[0].interval)
        if any(t.interval != self.interval for t in terms):
            raise ValueError("all terms of a Sum must share its interval")
        if len({t.dim for t in terms}) != 1:
            raise ValueError("all terms of a Sum must have the same dimension")

    @property
    def dim(self):
        return self.terms[0].dim

    def _eval(self, t):
        out = self.terms[0]._eval(t)
        for term in self.terms[1:]:
            out = out + term._eval(t)
        return out

    def _singular(self, t):
        mask = np.zeros(t.shape, dtype=bool)
        for term in self.terms:
            mask |= term._singular(t)
        return mask

    def _derivative(self):
        return Sum(tuple(term._derivative() for term in self.terms), self.interval)

    def validate(self):
        for term in self.terms:
            term.validate()


# --------------------------------------------------------------------------
# sampled functions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of ``f: [t0, t1] -> R^d`` at ``n + 1`` uniform nodes.

    ``values`` has shape ``(n + 1, d)`` and is made read-only on
    construction.  ``source`` keeps the analytic spec, when there is one, so
    that norm estimators can take exact derivatives.
    """

    interval: Interval
    values: np.ndarray
    vnorm: VectorNorm = None
    source: AnalyticSpec | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] < 2:
            raise ValueError("values must have shape (n + 1, d) with n >= 1")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.vnorm is None:
            object.__setattr__(self, "vnorm", VectorNorm("ell2", vals.shape[1]))
        elif self.vnorm.dim != vals.shape[1]:
            object.__setattr__(self, "vnorm", VectorNorm(self.vnorm.kind, vals.shape[1]))

    @property
    def n(self) -> int:
        """Number of cells."""
        return self.values.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def h(self) -> float:
        return self.interval.length / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.interval.t0 + self.h * np.arange(self.n + 1)

    def with_values(self, values, source=None) -> "SampledFunction":
        """Same grid and vector norm, new values (the analytic source is dropped)."""
        return SampledFunction(self.interval, values, self.vnorm, source)

    def __mul__(self, c: float) -> "SampledFunction":
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        if other.interval != self.interval or other.n != self.n:
            raise ValueError("cannot add samplings on different grids")
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        return self + (-1.0) * other


def evaluate(spec: AnalyticSpec, t: float) -> np.ndarray:
    """Exact value of ``spec`` at a single point ``t``."""
    if t not in spec.interval:
        raise ValueError(f"t = {t} lies outside [{spec.interval.t0}, {spec.interval.t1}]")
    tt = np.array([float(t)])
    if spec._singular(tt)[0]:
        raise EvalAtSingularity(f"{type(spec).__name__} diverges at t = {t}")
    return spec._eval(tt)[0]


def _sample_values(spec: AnalyticSpec, nodes: np.ndarray, h: float) -> np.ndarray:
    if isinstance(spec, Sum):
        out = _sample_values(spec.terms[0], nodes, h)
        for term in spec.terms[1:]:
            out = out + _sample_values(term, nodes, h)
        return out
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = spec._eval(nodes)
    sing = spec._singular(nodes)
    if np.any(sing):
        if not sing[0] or np.count_nonzero(sing) > 1:
            raise EvalAtSingularity("only a singularity at the left endpoint is supported")
        vals[0] = spec._half_cell_mass(h) / h
    return vals


def sample(spec: AnalyticSpec, n: int, norm: str = "ell2", validate: bool = True) -> SampledFunction:
    """Sample ``spec`` on ``n + 1`` uniform nodes.

    With ``validate=False`` non-integrable specs are sampled anyway (their
    singular node then carries ``inf``); the norm estimators use this to
    report infinite Sobolev norms instead of raising.
    """
    if n < 2:
        raise ValueError("need n >= 2 cells")
    if validate:
        spec.validate()
    iv = spec.interval
    h = iv.length / n
    nodes = iv.t0 + h * np.arange(n + 1)
    vals = _sample_values(spec, nodes, h)
    return SampledFunction(iv, vals, VectorNorm(norm, spec.dim), spec)


def analytic_derivative(spec: AnalyticSpec, k: int) -> AnalyticSpec:
    """Exact ``k``-th derivative of ``spec``."""
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    out = spec
    for _ in range(k):
        out = out._derivative()
    return out


def pointwise_norm(f: SampledFunction) -> np.ndarray:
    return f.vnorm(f.values)


def is_in_lp(spec: AnalyticSpec, p: float) -> bool:
    """Whether ``spec`` belongs to ``L^p`` of its interval (``p = inf`` allowed).

    Only the left endpoint can be singular, so this reduces to the local
    exponent there.  For a Sum we require every term to be in ``L^p``,
    which is sufficient but ignores cancellations.
    """
    if isinstance(spec, Sum):
        return all(is_in_lp(t, p) for t in spec.terms)
    if isinstance(spec, Power):
        if spec.interval.t0 > 0 or spec.gamma >= 0 or all(c == 0 for c in spec.coeff):
            return True
        return math.isfinite(p) and spec.gamma * p > -1
    if isinstance(spec, LogPower):
        b, s = spec.beta, spec.sigma
        if b > 0 or (b == 0 and s <= 0):
            return True
        if b == 0:
            return math.isfinite(p)
        if not math.isfinite(p):
            return False
        return b * p > -1 or (b * p == -1 and s * p < -1)
    return True


# --------------------------------------------------------------------------
# JSON encoding
# --------------------------------------------------------------------------


def spec_to_json(spec: AnalyticSpec) -> dict:
    iv = [spec.interval.t0, spec.interval.t1]
    if isinstance(spec, Power):
        return {"kind": "power", "gamma": spec.gamma, "coeff": list(spec.coeff), "interval": iv}
    if isinstance(spec, LogPower):
        return {"kind": "logpower", "beta": spec.beta, "sigma": spec.sigma,
                "coeff": list(spec.coeff), "interval": iv}
    if isinstance(spec, Polynomial):
        return {"kind": "polynomial", "coeffs": [list(c) for c in spec.coeffs], "interval": iv}
    if isinstance(spec, Trig):
        return {"kind": "trig", "freq": list(spec.freq), "phase": list(spec.phase),
                "amp": list(spec.amp), "interval": iv}
    if isinstance(spec, Step):
        return {"kind": "step", "breaks": list(spec.breaks),
                "values": [list(v) for v in spec.values], "interval": iv}
    if isinstance(spec, Constant):
        return {"kind": "constant", "value": list(spec.value), "interval": iv}
    if isinstance(spec, Sum):
        return {"kind": "sum", "terms": [spec_to_json(t) for t in spec.terms], "interval": iv}
    raise TypeError(f"cannot encode {type(spec).__name__}")


def _interval(obj) -> Interval:
    iv = obj.get("interval", [0.0, 1.0])
    if len(iv) != 2:
        raise ValueError("interval must be a pair [t0, t1]")
    return Interval(*iv)


def spec_from_json(obj: Union[dict, Sequence]) -> AnalyticSpec:
    """Inverse of :func:`spec_to_json`.  Raises ``ValueError``/``KeyError`` on bad input."""
    kind = obj["kind"]
    iv = _interval(obj)
    if kind == "power":
        return Power(obj["gamma"], obj.get("coeff", [1.0]), iv)
    if kind == "logpower":
        return LogPower(obj["beta"], obj["sigma"], obj.get("coeff", [1.0]), iv)
    if kind == "polynomial":
        return Polynomial(obj["coeffs"], iv)
    if kind == "trig":
        return Trig(obj["freq"], obj["phase"], obj.get("amp"), iv)
    if kind == "step":
        return Step(obj["breaks"], obj["values"], iv)
    if kind == "constant":
        return Constant(obj.get("value", [1.0]), iv)
    if kind == "sum":
        terms = [t if "interval" in t else {**t, "interval": [iv.t0, iv.t1]} for t in obj["terms"]]
        return Sum(tuple(spec_from_json(t) for t in terms), iv)
    raise ValueError(f"unknown spec kind {kind!r}")
