"""Named test functions used by the theorem bench and the CLI."""

from __future__ import annotations

from .function_model import (
    AnalyticSpec,
    Constant,
    Interval,
    LogPower,
    Polynomial,
    Power,
    Step,
    Sum,
    Trig,
)

__all__ = ["default_corpus", "smooth_corpus", "is_smooth", "label", "noninclusion_spec"]


def default_corpus() -> dict[str, AnalyticSpec]:
    """Eight functions on ``[0, 1]``: constant, powers (one singular), a cubic,
    a 2-vector of sines and a unit step."""
    return {
        "const1": Constant((1.0,)),
        "t": Power(1.0),
        "t2": Power(2.0),
        "sqrt_t": Power(0.5),
        "t^-0.4": Power(-0.4),
        "poly3": Polynomial(((0.0, 1.0, -3.0, 2.0),)),
        "sin3_sin5": Trig((3.0, 5.0), (0.0, 0.0)),
        "step0.5": Step((0.5,), ((0.0,), (1.0,))),
    }


def is_smooth(spec: AnalyticSpec) -> bool:
    """``C^infinity`` on the closed interval (so classical error orders apply)."""
    if isinstance(spec, (Polynomial, Trig, Constant)):
        return True
    if isinstance(spec, Power):
        g = spec.gamma
        return (g >= 0 and float(g).is_integer()) or spec.interval.t0 > 0
    if isinstance(spec, Sum):
        return all(is_smooth(t) for t in spec.terms)
    return False


def smooth_corpus() -> dict[str, AnalyticSpec]:
    return {k: v for k, v in default_corpus().items() if is_smooth(v) and k != "const1"}


def noninclusion_spec() -> AnalyticSpec:
    """``t^-1 log(1/t)^-2`` on ``(0, 1/2]``: in ``L^1`` but with a nonintegrable
    ``t^-1`` envelope, which is what the weak-space counterexample needs."""
    return LogPower(-1.0, -2.0, (1.0,), Interval(0.0, 0.5))


def label(spec: AnalyticSpec) -> str:
    """Short human-readable name for specs that are not in a named corpus."""
    if isinstance(spec, Constant):
        return "const" + ",".join(f"{v:g}" for v in spec.value)
    if isinstance(spec, Power):
        return f"t^{spec.gamma:g}" if spec.coeff == (1.0,) else f"{spec.coeff!r}t^{spec.gamma:g}"
    if isinstance(spec, LogPower):
        return f"t^{spec.beta:g}log^{spec.sigma:g}"
    if isinstance(spec, Polynomial):
        return f"poly{max(len(c) for c in spec.coeffs) - 1}"
    if isinstance(spec, Trig):
        return "sin" + ",".join(f"{w:g}" for w in spec.freq)
    if isinstance(spec, Step):
        return "step" + ",".join(f"{b:g}" for b in spec.breaks)
    if isinstance(spec, Sum):
        return "+".join(label(t) for t in spec.terms)
    return type(spec).__name__.lower()
