import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbound import theorem_bench as tb
from fracbound.corpus import default_corpus, noninclusion_spec
from fracbound.errors import DegenerateFit, ParamsOutOfScope
from fracbound.frac_calculus import FracParams
from fracbound.function_model import Constant, Polynomial, Power, Step, Trig

# oracle values computed with mpmath at 40 digits
K_075_2 = 1.1540674772329394
K_06_2 = 1.5015307656095990
K_15_2 = 1.2557007205916653
SUP_J06_TM04 = 1.6219156458328213  # Gamma(0.6) / Gamma(1.2)
NORM_TM04_2 = 2.2360679774997897  # ||t^-0.4||_2 = sqrt(5)
WRL_C_15_05 = 1.752252778063675
WRL_LHS_ONE = 0.80090111122547


def test_supercritical_constants():
    assert tb.supercritical_constant(0.75, 2.0) == pytest.approx(K_075_2, rel=1e-14)
    assert tb.supercritical_constant(0.6, 2.0) == pytest.approx(K_06_2, rel=1e-14)
    assert tb.supercritical_constant(1.5, 2.0) == pytest.approx(K_15_2, rel=1e-14)
    with pytest.raises(ParamsOutOfScope):
        tb.supercritical_constant(0.5, 2.0)


def test_supercritical_singular_example():
    c = tb.check_supercritical_sup(Power(-0.4), 0.6, 2.0, 4096)
    assert c.verdict == "pass"
    assert c.lhs == pytest.approx(SUP_J06_TM04, rel=5e-3)
    # the trapezoid L2 norm of t^-0.4 converges like h^0.2, from below
    assert 0.9 * K_06_2 * NORM_TM04_2 < c.rhs < K_06_2 * NORM_TM04_2


def test_supercritical_smooth_example():
    c = tb.check_supercritical_sup(Power(1.0), 0.75, 2.0, 4096)
    assert c.lhs == pytest.approx(0.6217515726462956, rel=1e-10)
    assert c.rhs == pytest.approx(K_075_2 / math.sqrt(3), rel=1e-6)
    assert c.passed and c.margin > 0


def test_wrl_example():
    assert tb.wrl_constant(1.5, 0.5) == pytest.approx(WRL_C_15_05, rel=1e-14)
    c = tb.check_wrl_bound(Constant((1.0,)), 1.5, 0.5, 4096)
    assert c.lhs == pytest.approx(WRL_LHS_ONE, rel=1e-6)
    assert c.rhs == pytest.approx(WRL_C_15_05, rel=1e-12)
    assert c.verdict == "pass"


def test_wrl_integer_convention_constant():
    # integer convention at gamma = 1: j = 0 term plus the gamma term
    C = tb.wrl_constant(2.0, 1.0, convention="integer")
    assert C == pytest.approx(1 / math.gamma(3) + 1 / math.gamma(2))
    assert tb.wrl_constant(2.0, 1.0) == pytest.approx(C + 1 / math.gamma(2))


def test_embedding_constant():
    assert tb.embedding_constant(2.0, 4.0) == pytest.approx(math.sqrt(2))
    assert tb.embedding_constant(1.0, 2.0, 4.0) == pytest.approx(2 * 4**0.5)
    with pytest.raises(ParamsOutOfScope):
        tb.embedding_constant(2.0, 2.0)


def test_linf_holder_tight_for_constant():
    c = tb.check_linf_holder(Constant((1.0,)), 0.5, 512)
    # pairs with w = t0 attain the bound exactly
    assert c.lhs / c.rhs == pytest.approx(1.0, abs=1e-10)
    assert c.verdict == "pass"


def test_linf_holder_step():
    assert tb.check_linf_holder(Step((0.5,), ((0.0,), (1.0,))), 0.25, 512).verdict == "pass"


def test_embedding_scope_filtering():
    checks = tb.check_embedding(Power(-0.4), 2.0, 4.0, 1024)
    assert [c.verdict for c in checks] == ["pass", "skip"]
    checks = tb.check_embedding(Power(-0.4), 2.0, 4.0, 1024, alpha=0.5)
    assert [c.verdict for c in checks] == ["pass", "pass"]
    assert checks[0].function == "J^0.5[t^-0.4]"


def test_holder_regularity_study():
    check, study = tb.check_holder_regularity(Power(1.0), 0.75, 2.0, grids=(128, 256, 512, 1024))
    assert check.verdict == "pass" and math.isinf(check.rhs)
    assert study.verdict == "bounded" and study.matches
    assert check.params.q == pytest.approx(0.25)


def test_holder_regularity_exponent_branch():
    check, _ = tb.check_holder_regularity(Power(1.0), 1.2, 2.0, grids=(64, 128, 256, 512))
    assert check.params.n == 0 and check.params.q == pytest.approx(0.7)
    check, _ = tb.check_holder_regularity(Power(1.0), 2.0, 2.0, grids=(64, 128, 256, 512))
    assert check.params.n == 1 and check.params.q == pytest.approx(0.5)


def test_critical_bk_small():
    check, ratio, resid = tb.check_critical_bk(Trig((3.0,), (0.0,)), 2.0, grids=(64, 128, 256, 512))
    assert check.verdict == "pass"
    assert ratio.verdict == "bounded"
    assert resid.verdict == "bounded"
    assert ("measure", "derivative-residual") in resid.params.extra


def test_linf_general_both_branches():
    _, s1 = tb.check_linf_general(Power(1.0), 1.5, grids=(64, 128, 256, 512))
    _, s2 = tb.check_linf_general(Step((0.5,), ((0.0,), (1.0,))), 2.0, grids=(64, 128, 256, 512))
    assert s1.verdict == "bounded" and s2.verdict == "bounded"


def test_holder_sharpness_diverges():
    s = tb.check_holder_sharpness(2.0, 0.75, 0.5, grids=(128, 256, 512, 1024))
    assert s.verdict == "diverging"
    assert s.params.gamma == pytest.approx(-0.375)
    assert s.slope == pytest.approx(0.125, abs=0.02)


def test_linf_sharpness_growth():
    s = tb.linf_holder_sharpness(0.5, 0.75, grids=(128, 256, 512, 1024))
    assert s.growth_factor >= 0.9 * 2 ** 0.25
    assert s.matches


def test_weak_noninclusion_marginal_is_bounded():
    # convergence is logarithmic at the endpoint; short ladders read slopes near 0.02
    s = tb.check_weak_noninclusion(0.5, 2.0)
    assert s.expected == "bounded" and s.verdict == "bounded"
    with pytest.raises(ParamsOutOfScope):
        tb.check_weak_noninclusion(0.5, 1.5)


def test_weak_noninclusion_bounded_control():
    s = tb.check_weak_noninclusion(0.5, 3.0, grids=(256, 512, 1024, 2048), spec=Power(1.0))
    assert s.expected == "bounded" and s.verdict == "bounded"


def test_noninclusion_spec_is_integrable_only():
    from fracbound.function_model import is_in_lp
    spec = noninclusion_spec()
    assert is_in_lp(spec, 1.0) and not is_in_lp(spec, 1.01)


@pytest.mark.parametrize("variant,spec", [
    ("inversion", Power(1.0)),
    ("inversion", Polynomial(((0.0, 1.0, -3.0, 2.0),))),
    ("commutation", Trig((3.0, 5.0), (0.0, 0.0))),
    ("semigroup", Power(2.0)),
])
def test_identities(variant, spec):
    checks, study = tb.check_identities(spec, 0.5, variant, grids=(256, 512, 1024, 2048))
    assert all(c.verdict == "pass" for c in checks)
    assert study.verdict == "bounded"


def test_identity_scope():
    with pytest.raises(ParamsOutOfScope):
        tb.check_identities(Power(-0.4), 0.5, "semigroup")
    with pytest.raises(ParamsOutOfScope):
        tb.check_identities(Trig((1.0,), (1.0,)), 0.5, "inversion")
    with pytest.raises(ParamsOutOfScope):
        tb.check_identities(Power(1.0), 1.5, "inversion")


@pytest.mark.parametrize("call", [
    lambda: tb.check_wrl_bound(Power(1.0), 0.5, 0.25),
    lambda: tb.check_linf_holder(Power(1.0), 1.0),
    lambda: tb.check_holder_regularity(Power(1.0), 1.5, 2.0),
    lambda: tb.check_critical_bk(Power(1.0), 2.0, gamma_kr=0.1),
    lambda: tb.check_holder_sharpness(2.0, 0.75, 0.2),
    lambda: tb.check_supercritical_sup(Power(-0.6), 0.75, 2.0, 64),
])
def test_out_of_scope(call):
    with pytest.raises(ParamsOutOfScope):
        call()


def test_schemes_give_same_verdicts():
    corpus = default_corpus()
    for name in ("t", "sqrt_t", "t^-0.4", "step0.5"):
        spec = corpus[name]
        a = tb.check_supercritical_sup(spec, 0.75, 2.0, 512, scheme="naive")
        b = tb.check_supercritical_sup(spec, 0.75, 2.0, 512, scheme="fft")
        assert a.verdict == b.verdict
        assert a.lhs == pytest.approx(b.lhs, rel=1e-11)
    a = tb.check_holder_sharpness(2.0, 0.75, 0.5, grids=(64, 128, 256, 512), scheme="naive")
    b = tb.check_holder_sharpness(2.0, 0.75, 0.5, grids=(64, 128, 256, 512), scheme="fft")
    assert a.verdict == b.verdict and a.slope == pytest.approx(b.slope, abs=1e-9)


# estimate_rate


def test_rate_power_law():
    grids = (64, 128, 256, 512)
    s = tb.estimate_rate(grids, [3.0 * n**0.5 for n in grids])
    assert s.slope == pytest.approx(0.5, abs=1e-12)
    assert s.verdict == "diverging" and s.growth_factor == pytest.approx(2**0.5)


def test_rate_bounded_and_degenerate():
    grids = (64, 128, 256, 512)
    assert tb.estimate_rate(grids, [1.0, 1.0, 1.0, 1.0]).verdict == "bounded"
    assert tb.estimate_rate(grids, [0.0] * 4).slope == 0.0
    assert tb.estimate_rate(grids, [1.0, 2.0, math.inf, math.inf]).verdict == "diverging"
    with pytest.raises(DegenerateFit):
        tb.estimate_rate(grids, [0.0, 1.0, 1.0, 1.0])
    with pytest.raises(DegenerateFit):
        tb.estimate_rate(grids, [1.0, math.nan, 1.0, 1.0])
    with pytest.raises(ValueError):
        tb.estimate_rate((64, 128, 256), [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        tb.estimate_rate((64, 128, 128, 256), [1.0] * 4)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 2), st.floats(0.01, 100))
def test_rate_recovers_exponent(e, c):
    grids = (32, 64, 128, 256, 512)
    s = tb.estimate_rate(grids, [c * n**e for n in grids])
    assert s.slope == pytest.approx(e, abs=1e-9)
    assert s.verdict == ("diverging" if e > tb.SLOPE_THRESHOLD + 1e-9 else "bounded") or \
        abs(e - tb.SLOPE_THRESHOLD) < 1e-9


def test_default_ladder():
    assert tb.default_ladder(4096) == (512, 1024, 2048, 4096)
    with pytest.raises(ValueError):
        tb.default_ladder(16)


# result records


def test_check_verdict_rules():
    p = FracParams(alpha=0.5)
    mk = lambda lhs, rhs, **kw: tb.TheoremCheck("x", p, "f", lhs, rhs, 64, **kw)
    assert mk(1.0005, 1.0).verdict == "pass"
    assert mk(1.002, 1.0).verdict == "fail"
    assert mk(math.nan, 1.0).verdict == "fail"
    assert mk(5.0, math.inf).verdict == "pass"
    assert mk(math.inf, math.inf).verdict == "fail"
    assert mk(0.0, 1.0, status="skip").verdict == "skip"
    assert mk(0.5, 1.0, tol=-1.0).verdict == "fail"


def test_csv_rows():
    c = tb.TheoremCheck("t", FracParams(alpha=0.5, p=2.0), "f", 1.0, 2.0, 64, seconds=1.5)
    assert c.csv_row() == ["t", "alpha=0.5;p=2.0", "f", "64", "1.0", "2.0", "1.0", "pass", ""]
    assert c.csv_row(True)[-1] == "1.500000"
    s = tb.estimate_rate((64, 128, 256, 512), [1.0] * 4, tag="t", params=FracParams(alpha=0.5),
                         function="f", expected="diverging")
    row = s.csv_row()
    assert row[1] == "alpha=0.5;study=slope;expected=diverging"
    assert row[3] == "512" and row[4] == "0.0" and row[7] == "bounded"
    assert not s.matches
    assert s.plot_data().splitlines()[0] == "64 1.0"
