import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_musielak import (
    InvalidInputError,
    MusielakFamily,
    ScalarField,
    check_conditions,
    conjugate_Phi,
    estimate_phi_bounds,
    eval_Phi,
    eval_phi,
    sobolev_conjugate_diag,
)
from nonlocal_musielak.musielak import dominated_by_sobolev_conjugate, monotone_inverse

X = np.array([0.5])


def simpson(f, a, b, tol=1e-12):
    """Adaptive Simpson quadrature, used as an independent oracle."""

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        if depth > 50 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return rec(a, m, fa, flm, fm, left, tol / 2, depth + 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth + 1)

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 0)


def test_power_phi_and_Phi():
    fam = MusielakFamily.power(3.0)
    assert eval_phi(fam, X, X, 2.0) == pytest.approx(12.0, rel=1e-15)
    assert eval_phi(fam, X, X, -2.0) == pytest.approx(-12.0, rel=1e-15)
    assert eval_Phi(fam, X, X, 2.0) == pytest.approx(8.0, rel=1e-15)


@pytest.mark.parametrize("kind", ["power", "power_over_log", "power_times_log"])
def test_zero_at_origin(kind):
    fam = getattr(MusielakFamily, kind)(2.5)
    assert eval_phi(fam, X, X, 0.0) == 0.0
    assert eval_Phi(fam, X, X, 0.0) == 0.0
    assert conjugate_Phi(fam, X, X, 0.0) == 0.0


def test_power_over_log_value():
    fam = MusielakFamily.power_over_log(3.0)
    assert eval_phi(fam, X, X, math.e - 1) == pytest.approx(3 * (math.e - 1) ** 2, rel=1e-13)


@pytest.mark.parametrize(
    "kind,p,alpha",
    [("power_times_log", 2.0, 0.0), ("power_times_log", 2.5, 1.0), ("power_over_log", 3.0, 0.0), ("power_over_log", 2.2, 0.0)],
)
@pytest.mark.parametrize("t", [1e-3, 0.5, 1.0, 7.0])
def test_Phi_matches_simpson_oracle(kind, p, alpha, t):
    fam = getattr(MusielakFamily, kind)(p, **({"alpha": alpha} if alpha else {}))
    oracle = simpson(lambda tau: eval_phi(fam, X, X, tau), 0.0, t, tol=1e-13 * max(1.0, t**p))
    assert eval_Phi(fam, X, X, t) == pytest.approx(oracle, rel=1e-10)


def test_power_times_log_Phi_at_one():
    fam = MusielakFamily.power_times_log(2.0)
    assert eval_Phi(fam, X, X, 1.0) == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("p,t,expected", [(2.0, 1.0, 0.25), (3.0, 3.0, 2.0)])
def test_power_conjugate_closed_form(p, t, expected):
    fam = MusielakFamily.power(p)
    assert conjugate_Phi(fam, X, X, t) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("kind", ["power", "power_over_log", "power_times_log"])
@pytest.mark.parametrize("t", [0.3, 2.0, 9.0])
def test_conjugate_equals_integral_of_inverse(kind, t):
    fam = getattr(MusielakFamily, kind)(2.7)
    b = fam.bind_diag(X[None, :])
    oracle = simpson(lambda tau: float(b.phi_inverse(np.array([tau]))[0]), 0.0, t, tol=1e-12)
    assert conjugate_Phi(fam, X, X, t) == pytest.approx(oracle, rel=1e-7)


@pytest.mark.parametrize("kind", ["power", "power_over_log", "power_times_log"])
@settings(max_examples=40, deadline=None)
@given(s=st.floats(1e-3, 1e2), t=st.floats(1e-3, 1e2))
def test_young_inequality(kind, s, t):
    fam = getattr(MusielakFamily, kind)(2.4)
    lhs = s * t
    rhs = eval_Phi(fam, X, X, s) + conjugate_Phi(fam, X, X, t)
    assert lhs <= rhs * (1 + 1e-9) + 1e-12


@settings(max_examples=50, deadline=None)
@given(t=st.floats(-1e3, 1e3), p=st.floats(1.2, 5.0))
def test_phi_odd(t, p):
    fam = MusielakFamily.power_over_log(p + 1.0)
    assert eval_phi(fam, X, X, -t) == -eval_phi(fam, X, X, t)


@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_non_finite_rejected(bad):
    fam = MusielakFamily.power(2.0)
    with pytest.raises(InvalidInputError):
        eval_phi(fam, X, X, bad)
    with pytest.raises(InvalidInputError):
        eval_Phi(fam, X, X, bad)


def test_negative_Phi_argument_rejected():
    with pytest.raises(InvalidInputError):
        eval_Phi(MusielakFamily.power(2.0), X, X, -1.0)


def test_family_validation():
    with pytest.raises(InvalidInputError):
        MusielakFamily.power(1.0)
    with pytest.raises(InvalidInputError):
        MusielakFamily("custom", kernel=None)
    with pytest.raises(InvalidInputError):
        MusielakFamily("custom", kernel=lambda x, y, t: t, phi_minus=2.0)


def test_custom_kernel_matches_power():
    kern = lambda x, y, t: 3.0 * np.abs(t)
    custom = MusielakFamily("custom", kernel=kern, phi_minus=3.0, phi_plus=3.0)
    power = MusielakFamily.power(3.0)
    for t in (0.1, 1.0, 4.0):
        assert eval_phi(custom, X, X, t) == pytest.approx(eval_phi(power, X, X, t), rel=1e-14)
        assert eval_Phi(custom, X, X, t) == pytest.approx(eval_Phi(power, X, X, t), rel=1e-12)


def test_symmetric_exponent_field():
    box = np.array([[0.0, 1.0]])
    fam = MusielakFamily.power(ScalarField("affine", value=2.0, slope=(1.0,)), box=box)
    x, y = np.array([[0.2]]), np.array([[0.9]])
    t = np.array([1.7])
    assert np.array_equal(fam.bind(x, y).phi(t), fam.bind(y, x).phi(t))
    # continuous extension to the collar: clipped onto the closed box
    assert fam.p(np.array([[1.4]]), np.array([[1.4]]))[0] == pytest.approx(3.0)


def test_bounds_power_exact():
    lo, hi = estimate_phi_bounds(MusielakFamily.power(3.0))
    assert lo == pytest.approx(3.0, abs=1e-12) and hi == pytest.approx(3.0, abs=1e-12)


def test_bounds_power_over_log_within_claimed_range():
    lo, hi = estimate_phi_bounds(MusielakFamily.power_over_log(3.0))
    assert 2.0 - 1e-9 <= lo <= hi <= 3.0 + 1e-9


def test_power_times_log_small_t_limit_alpha_zero():
    fam = MusielakFamily.power_times_log(2.0)
    b = fam.bind_diag(X[None, :])
    t = np.array([1e-6])
    ratio = float(np.ravel(t * b.phi(t) / b.Phi(t))[0])
    assert abs(ratio - 3.0) < 1e-3


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_power_times_log_large_t_ratio(alpha):
    # p + 1/log(t) asymptotics: 2.0751 at t = 1e6, far from the limit p
    fam = MusielakFamily.power_times_log(2.0, alpha=alpha)
    b = fam.bind_diag(X[None, :])
    t = np.array([1e6])
    ratio = float((t * b.phi(t) / b.Phi(t))[0])
    assert 2.0 < ratio < 2.1


@pytest.mark.parametrize(
    "fam",
    [
        MusielakFamily.power(ScalarField("affine", value=2.0, slope=(1.0,)), box=((0.0, 1.0),)),
        MusielakFamily.power(2.0),
        MusielakFamily.power_times_log(2.0, alpha=1.0),
        MusielakFamily.power_over_log(3.0),
    ],
    ids=["power-affine", "power2", "ptl", "pol"],
)
def test_conditions_hold(fam):
    rep = check_conditions(fam)
    assert rep.all_ok, rep.violations[:5]
    if fam.kind == "power":
        assert rep.delta2_constant <= 2.0**3 * (1 + 1e-12)


def test_conditions_detect_wrong_declared_bounds():
    fam = MusielakFamily.power(3.0, phi_minus=3.5, phi_plus=4.0)
    rep = check_conditions(fam)
    assert not rep.phi1_ok and rep.violations


@pytest.mark.parametrize("p", [2.0, 3.0])
@pytest.mark.parametrize("s", [0.3, 0.6, 0.9])
def test_sobolev_criterion_matrix_1d(p, s):
    diag = sobolev_conjugate_diag(MusielakFamily.power(p), s, 1, X[None, :])
    assert diag.integrable_at_zero[0] == (s * p < 1)


@pytest.mark.parametrize("p,s,N,expected", [(3.0, 0.3, 1, True), (2.0, 0.6, 1, False), (3.0, 0.5, 2, True)])
def test_sobolev_examples(p, s, N, expected):
    diag = sobolev_conjugate_diag(MusielakFamily.power(p), s, N, np.zeros((1, N)))
    assert diag.integrable_at_zero[0] is expected


def test_sobolev_conjugate_inverse_power_closed_form():
    # Phi_hat = t^p: inverse conjugate = int_0^t tau^{1/p - (N+s)/N} dtau = t^b / b
    p, s, N = 3.0, 0.3, 1
    diag = sobolev_conjugate_diag(MusielakFamily.power(p), s, N, X[None, :])
    b = 1 / p - s / N
    expected = diag.t_grid**b / b
    np.testing.assert_allclose(diag.conjugate_inverse[0], expected, rtol=1e-6)


def test_domination_by_sobolev_conjugate():
    fam = MusielakFamily.power(3.0)
    # Phi_hat*(t) = (t/30)^30 here, so t^4 is dominated only beyond t ~ 50
    ok, margins = dominated_by_sobolev_conjugate(lambda t: t**4, fam, X, 0.3, 1, 1.0, [100.0, 1000.0])
    assert ok and all(m >= 0 for m in margins)
    ok, _ = dominated_by_sobolev_conjugate(lambda t: t**4, fam, X, 0.3, 1, 1.0, [10.0])
    assert not ok


def test_sobolev_rejects_bad_s():
    with pytest.raises(InvalidInputError):
        sobolev_conjugate_diag(MusielakFamily.power(2.0), 1.2, 1, X[None, :])


def test_monotone_inverse_sqrt():
    t = np.array([0.0, 0.25, 4.0, 100.0])
    np.testing.assert_allclose(monotone_inverse(lambda s: s * s, t), np.sqrt(t), rtol=1e-12, atol=1e-300)
