"""Grid estimators for the norms and seminorms of the function spaces involved.

Every supremum over a continuum (levels ``r`` for weak-Lp, exponents ``r``
for the Karapetyants-Rubin norm, subintervals for BMO, point pairs for
Hoelder) is replaced by a maximum over an explicit finite candidate set, and
the size of that set is recorded in the returned :class:`NormReport`.

Derivatives are taken from the analytic source when the sampled function
carries one, from an explicit ``derivatives=`` argument when the caller has
exact derivative samples at hand (the theorem checks use
``d^j/dt^j J^a f = J^(a-j) f``), and from second-order finite differences
otherwise.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridTooCoarse, NonIntegrableSpec, NotDifferentiable
from .frac_calculus import ceil_strict, finite_difference, rl_derivative
from .function_model import SampledFunction, analytic_derivative, pointwise_norm, sample

__all__ = [
    "Space",
    "NormReport",
    "lp_norm",
    "distribution_function",
    "weak_lp_seminorm",
    "holder_seminorm",
    "sobolev_norm",
    "bmo_seminorm",
    "kr_norm",
    "wrl_norm",
    "bk_norm",
    "derivative_samples",
]

# finite-difference derivatives need this many cells
MIN_FD_CELLS = 16

KR_POINTS_PER_DECADE = 64
KR_MAX_EXPONENT = 1e8

BMO_DEFAULT_CAP = 2**10


@dataclass(frozen=True)
class Space:
    """Space descriptor: ``kind`` plus the parameters it needs."""

    kind: str
    params: tuple = ()

    def __str__(self):
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v!r}" for k, v in self.params)
        return f"{self.kind}({inner})"


@dataclass(frozen=True)
class NormReport:
    space: Space
    value: float
    n: int
    method: str = ""
    candidates: int = 0
    seconds: float = 0.0

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"norm value must be nonnegative, got {self.value}")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    def __float__(self):
        return float(self.value)

    def csv_row(self) -> list:
        """``space, params, n, value, candidates, seconds``."""
        params = ";".join(f"{k}={v!r}" for k, v in self.space.params)
        return [self.space.kind, params, self.n, repr(float(self.value)), self.candidates,
                f"{self.seconds:.6f}"]


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def _trapezoid(y: np.ndarray, h: float) -> float:
    return float(h * (np.sum(y) - 0.5 * (y[0] + y[-1])))


def _lp_of_norms(a: np.ndarray, p: float, h: float) -> float:
    if math.isinf(p):
        return float(np.max(a))
    if not np.all(np.isfinite(a)):
        return math.inf
    m = float(np.max(a))
    if m == 0.0:
        return 0.0
    # scale by the max so large p cannot overflow
    return m * _trapezoid((a / m) ** p, h) ** (1.0 / p)


def lp_norm(f: SampledFunction, p: float) -> NormReport:
    """Composite-trapezoid ``L^p`` norm; ``p = inf`` gives the largest node norm."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    with _Timer() as tm:
        val = _lp_of_norms(pointwise_norm(f), p, f.h)
    return NormReport(Space("Lp", (("p", p),)), val, f.n, "trapezoid", f.n + 1, tm.seconds)


def _midpoint_norms(f: SampledFunction) -> np.ndarray:
    mid = 0.5 * (f.values[1:] + f.values[:-1])
    return f.vnorm(mid)


def distribution_function(f: SampledFunction, r: float) -> float:
    """Measure of ``{t : |f(t)| > r}``: ``h`` times the number of cells whose
    midpoint value exceeds ``r`` in norm."""
    if not r > 0:
        raise ValueError("level r must be positive")
    return f.h * int(np.count_nonzero(_midpoint_norms(f) > r))


def weak_lp_seminorm(f: SampledFunction, p: float) -> NormReport:
    """``sup_{r>0} (r^p lambda(r))^(1/p)`` for the cell-midpoint distribution function.

    ``lambda`` is a right-continuous step function of ``r`` that drops at each
    distinct midpoint norm ``v``, and ``r^p lambda(r)`` increases between
    drops.  The supremum is therefore the largest left limit
    ``v^p * h * #{cells with norm >= v}`` over the distinct positive ``v``.
    """
    if not (1 <= p < math.inf):
        raise ValueError("weak Lp needs 1 <= p < inf")
    with _Timer() as tm:
        m = _midpoint_norms(f)
        if np.any(np.isinf(m)):
            val, cand = math.inf, 0
        else:
            v = np.sort(m)[::-1]
            distinct = np.concatenate([[True], v[1:] != v[:-1]])
            # number of cells with norm >= v[k] is the index of the last tie + 1
            last_of_run = np.concatenate([distinct[1:], [True]])
            counts = np.nonzero(last_of_run)[0] + 1
            levels = v[last_of_run]
            keep = levels > 0
            levels, counts = levels[keep], counts[keep]
            cand = int(levels.size)
            if cand == 0:
                val = 0.0
            else:
                val = float(np.max(levels * (f.h * counts) ** (1.0 / p)))
    return NormReport(Space("LpWeak", (("p", p),)), val, f.n, "left limits at distinct levels",
                      cand, tm.seconds)


def derivative_samples(f: SampledFunction, k: int) -> SampledFunction:
    """``k``-th derivative of ``f`` on its own grid, analytic when possible."""
    if k == 0:
        return f
    if f.source is not None:
        try:
            spec = analytic_derivative(f.source, k)
        except NotDifferentiable:
            spec = None
        if spec is not None:
            try:
                g = sample(spec, f.n, f.vnorm.kind, validate=False)
            except NonIntegrableSpec:
                g = None
            if g is not None:
                return g
    if f.n < MIN_FD_CELLS:
        raise GridTooCoarse(f"finite-difference derivatives need n >= {MIN_FD_CELLS}, got {f.n}")
    return f.with_values(finite_difference(f.values, f.h, k))


def _holder_max(values: np.ndarray, vnorm, h: float, exponent: float) -> float:
    N = values.shape[0]
    best = 0.0
    dist = (h * np.arange(1, N)) ** exponent
    for i in range(N - 1):
        diff = vnorm(values[i + 1:] - values[i])
        q = float(np.max(diff / dist[: N - 1 - i]))
        if q > best:
            best = q
    return best


def holder_seminorm(f: SampledFunction, n: int, gamma_h: float,
                    derivative: SampledFunction | None = None) -> NormReport:
    """``sup |f^(n)(t) - f^(n)(s)| / |t - s|^gamma`` over all node pairs."""
    if not (0 < gamma_h < 1):
        raise ValueError("Hoelder exponent must lie in (0, 1)")
    with _Timer() as tm:
        g = derivative if derivative is not None else derivative_samples(f, n)
        vals = g.values
        if not np.all(np.isfinite(vals)):
            val = math.inf
        else:
            val = _holder_max(vals, g.vnorm, g.h, gamma_h)
    pairs = f.n * (f.n + 1) // 2
    return NormReport(Space("Holder", (("n", n), ("gamma", gamma_h))), val, f.n,
                      "all node pairs", pairs, tm.seconds)


def sobolev_norm(f: SampledFunction, n: int, p: float,
                 derivatives: Sequence[SampledFunction] | None = None) -> NormReport:
    """``sum_{j=0}^{n} ||f^(j)||_{L^p}``; ``n = 0`` is the plain ``L^p`` norm."""
    with _Timer() as tm:
        total = 0.0
        for j in range(n + 1):
            g = derivatives[j] if derivatives is not None else derivative_samples(f, j)
            total += lp_norm(g, p).value
    return NormReport(Space("Sobolev", (("n", n), ("p", p))), total, f.n,
                      "sum of derivative Lp norms", n + 1, tm.seconds)


def _deviation_norms(seg: np.ndarray, avg: np.ndarray, vnorm) -> np.ndarray:
    """``out[k, i] = |seg_i - avg_k|`` without a (k, i, d) temporary where possible."""
    if seg.shape[1] == 1:
        out = seg[None, :, 0] - avg[:, None, 0]
        return np.abs(out, out=out)
    if vnorm.kind == "ell2":
        sq = np.einsum("id,id->i", seg, seg)[None, :] - 2.0 * (avg @ seg.T)
        sq += np.einsum("kd,kd->k", avg, avg)[:, None]
        np.maximum(sq, 0.0, out=sq)
        return np.sqrt(sq, out=sq)
    return vnorm(seg[None, :, :] - avg[:, None, :])


def _bmo_scan(values: np.ndarray, vnorm, h: float) -> tuple[float, int]:
    """Largest trapezoid mean oscillation over intervals ``[t_a, t_b]`` with
    ``1 <= a < b <= N - 2`` (closed subintervals of the open domain)."""
    N = values.shape[0]
    lo, hi = 1, N - 2
    if hi - lo < 1:
        return 0.0, 0
    # oscillation is translation invariant; centring keeps the Gram expansion accurate
    v = values[lo: hi + 1] - values[lo]
    M = v.shape[0]
    cs = np.concatenate([np.zeros((1, v.shape[1])), np.cumsum(v, axis=0)])
    tri = np.tri(M, M, dtype=bool)
    best = 0.0
    for a in range(M - 1):
        bs = np.arange(a + 1, M)
        span = bs - a
        lengths = span * h
        integ = h * (cs[bs + 1] - cs[a] - 0.5 * (v[a] + v[bs]))
        avg = integ / lengths[:, None]
        seg = v[a:]
        dev = _deviation_norms(seg, avg, vnorm)
        rows = np.arange(bs.size)
        ends = dev[rows, span]
        first = dev[:, 0].copy()
        # row k covers seg[0 .. k + 1]
        dev *= tri[1: M - a, : M - a]
        osc_int = h * (dev.sum(axis=1) - 0.5 * first - 0.5 * ends)
        cand = float(np.max(osc_int / lengths))
        if cand > best:
            best = cand
    return best, M * (M - 1) // 2


def bmo_seminorm(f: SampledFunction, cap: int | None = None) -> NormReport:
    """Mean oscillation supremum over grid-aligned subintervals.

    Cost is cubic in the number of nodes.  With ``cap`` set, grids finer
    than ``cap`` cells are subsampled by an integer stride first (the
    coarser grid is a subset of the finer one).
    """
    with _Timer() as tm:
        g = f
        stride = 1
        if cap is not None and f.n > cap:
            stride = -(-f.n // cap)
            while f.n % stride:
                stride += 1
            g = f.with_values(f.values[::stride])
        if not np.all(np.isfinite(g.values[1:-1])):
            val, cand = math.inf, 0
        else:
            val, cand = _bmo_scan(g.values, g.vnorm, g.h)
    method = "grid-aligned subintervals" + (f", stride {stride}" if stride > 1 else "")
    return NormReport(Space("BMO"), val, f.n, method, cand, tm.seconds)


def kr_norm(f: SampledFunction, gamma_kr: float) -> NormReport:
    """``sup_{r>=1} r^(-gamma) ||f||_{L^r}`` over ``r = 10**(k/64)``.

    The scan stops as soon as ``r^(-gamma) * max|f| * max(1, |I|)^(1/r)``,
    which bounds every later candidate, drops below the running maximum.
    """
    if not gamma_kr > 0:
        raise ValueError("KR exponent must be positive")
    with _Timer() as tm:
        a = pointwise_norm(f)
        length = f.interval.length
        top = float(np.max(a)) if a.size else 0.0
        best, count = 0.0, 0
        if math.isinf(top):
            best = math.inf
        elif top > 0:
            k = 0
            while True:
                r = 10.0 ** (k / KR_POINTS_PER_DECADE)
                val = r ** (-gamma_kr) * _lp_of_norms(a, r, f.h)
                count += 1
                best = max(best, val)
                bound = r ** (-gamma_kr) * top * max(1.0, length) ** (1.0 / r)
                if bound < best or r > KR_MAX_EXPONENT:
                    break
                k += 1
    return NormReport(Space("KR", (("gamma", gamma_kr),)), best, f.n,
                      f"{KR_POINTS_PER_DECADE} exponents per decade", count, tm.seconds)


def wrl_norm(f: SampledFunction, alpha: float, convention: str = "strict",
             scheme="fft") -> NormReport:
    """``||f||_{W^([alpha]-1, 1)} + ||D^alpha f||_{L^1}``.

    ``convention="strict"`` uses ``[alpha] = floor(alpha) + 1`` throughout.
    ``convention="integer"`` takes ``[alpha] = alpha`` for integer orders,
    so the norm becomes ``sum_{j<=alpha} ||f^(j)||_1``.
    """
    if convention not in ("strict", "integer"):
        raise ValueError("convention must be 'strict' or 'integer'")
    with _Timer() as tm:
        m = ceil_strict(alpha)
        if convention == "integer" and float(alpha).is_integer():
            m = int(alpha)
        sob = sobolev_norm(f, m - 1, 1.0).value
        if convention == "integer" and float(alpha).is_integer():
            top = lp_norm(derivative_samples(f, int(alpha)), 1.0).value
        else:
            top = lp_norm(rl_derivative(f, alpha, scheme), 1.0).value
    return NormReport(Space("WRL", (("alpha", alpha), ("convention", convention))), sob + top,
                      f.n, "Sobolev part + L1 of D^alpha", m + 1, tm.seconds)


def bk_norm(f: SampledFunction, n: int, p: float, gamma_kr: float,
            derivatives: Sequence[SampledFunction] | None = None,
            bmo_cap: int | None = BMO_DEFAULT_CAP) -> NormReport:
    """``||f||_{W^{n,p}} + [f^(n)]_BMO + ||f^(n)||_{K_gamma}``."""
    if n < 1:
        raise ValueError("BK spaces need n >= 1")
    with _Timer() as tm:
        if derivatives is None:
            derivatives = [derivative_samples(f, j) for j in range(n + 1)]
        top = derivatives[n]
        parts = (
            sobolev_norm(f, n, p, derivatives).value,
            bmo_seminorm(top, bmo_cap).value,
            kr_norm(top, gamma_kr).value,
        )
    return NormReport(Space("BK", (("n", n), ("p", p), ("gamma", gamma_kr))), float(sum(parts)),
                      f.n, "W^{n,p} + BMO + K_gamma of f^(n)", 3, tm.seconds)
