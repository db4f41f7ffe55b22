import numpy as np
import pytest

from conftest import make_problem
from nonlocal_musielak import Ball, Global, InvalidInputError, MultiStart, estimate_constants, landscape_probes, minimize, sweep_lambda
from nonlocal_musielak.solver import (
    SWEEP_COLUMNS,
    bump_theta,
    energy_I2,
    energy_J,
    finite_difference_gradient,
    gradcheck,
    gradient_J,
    lambda_star_formula,
)
from nonlocal_musielak.spaces import energy_I1, modular_norm


@pytest.fixture(scope="module")
def prob():
    return make_problem(p=3.0, q=2.0, s=0.3, beta=1.0)


@pytest.fixture(scope="module")
def consts(prob):
    return estimate_constants(prob, rho=0.5, n_samples=50, t0=2.0, seed=0)


def test_energy_zero(prob):
    n = prob.mesh.n_cells
    assert energy_J(np.zeros(n), prob.with_lambda(3.0)) == 0.0
    assert np.all(gradient_J(np.zeros(n), prob.with_lambda(3.0)) == 0.0)


def test_energy_constant_power2():
    p = make_problem(p=2.0, q=1.5, beta=0.4, h=1 / 16, R=0.25)
    n = p.mesh.n_cells
    m = p.mesh
    assert energy_J(np.full(n, 1.5), p) == pytest.approx(2.25 * (m.omega_measure + 0.4 * m.collar_measure), rel=1e-14)


def test_energy_decomposition(prob, rng):
    p = prob.with_lambda(1.7)
    u = rng.uniform(-1, 1, p.mesh.n_cells)
    assert energy_J(u, p) == pytest.approx(energy_I1(u, p) - 1.7 * energy_I2(u, p), rel=1e-12)


@pytest.mark.parametrize(
    "kind,reaction,extra",
    [("power", "pure_power", {}), ("power_over_log", "power_plus_log", {}), ("power_times_log", "power_plus_sinsin", {"alpha": 0.5})],
)
def test_gradient_matches_finite_differences(kind, reaction, extra, rng):
    p = make_problem(kind=kind, reaction=reaction, p=3.2, q=2.0, lam=0.8, h=1 / 16, R=0.25, **extra)
    for _ in range(3):
        u = rng.uniform(-1, 1, p.mesh.n_cells)
        assert gradcheck(p, u) <= 1e-5


def test_fd_gradient_shape(prob, rng):
    u = rng.uniform(-1, 1, prob.mesh.n_cells)
    assert finite_difference_gradient(u, prob).shape == u.shape


def test_lambda_star_formula():
    assert lambda_star_formula(0.5, 1.0, 1.0, 3.0, 2.0) == pytest.approx(0.25)


def test_constants(prob, consts):
    assert consts.lambda_star_upper == pytest.approx(2.0, rel=1e-12)
    assert consts.q_exp == 2.0
    # c_emb dominates the ratio of any probe, e.g. the constant function
    from nonlocal_musielak.spaces import variable_exponent_norm

    one = np.ones(prob.mesh.n_cells)
    assert consts.c_emb >= variable_exponent_norm(one, prob) / modular_norm(one, prob) - 1e-9
    # the exact probe threshold includes the jump at the boundary
    u0 = 2.0 * prob.mesh.in_omega
    assert energy_J(u0, prob.with_lambda(consts.probe_threshold * 1.01)) < 0 < energy_J(u0, prob.with_lambda(consts.probe_threshold * 0.99))


def test_constants_bad_input(prob):
    with pytest.raises(InvalidInputError):
        estimate_constants(prob, rho=1.5)
    with pytest.raises(InvalidInputError):
        estimate_constants(prob, t0=0.5)


def test_landscape(prob, consts):
    rep0 = landscape_probes(prob, 0.5, n_sphere=30)
    assert rep0.sphere_min > 0
    p = prob.with_lambda(0.5 * consts.lambda_star)
    rep = landscape_probes(p, 0.5, n_sphere=30)
    assert rep.small_t_negative
    assert rep.coercive_growth >= 2.0**3 / 2


def test_theta(prob):
    th = bump_theta(prob)
    assert th.max() == 1.0 and th.min() == 0.0
    assert np.all(th[~prob.mesh.in_omega] == 0)
    bad = th.copy()
    bad[prob.mesh.collar_cells[0]] = 0.5
    with pytest.raises(InvalidInputError):
        landscape_probes(prob, 0.5, n_sphere=2, theta=bad)
    with pytest.raises(InvalidInputError):
        landscape_probes(prob, 0.5, n_sphere=2, theta=2 * th)


@pytest.mark.parametrize("mode", [Ball(0.5), Global()])
def test_lambda_zero_is_trivial(prob, mode):
    u0 = np.random.default_rng(7).uniform(-1, 1, prob.mesh.n_cells)
    res = minimize(prob, mode, init=u0, tol_grad=1e-18, max_iter=100000)
    assert res.classification == "Trivial"
    assert res.norm_u <= 1e-7 and abs(res.J) <= 1e-12


def test_ball_small_lambda(prob, consts):
    p = prob.with_lambda(0.5 * consts.lambda_star)
    res = minimize(p, Ball(0.5), tol_grad=1e-7, lambda_star=consts.lambda_star)
    assert res.classification == "Nontrivial"
    assert res.J < 0 and 0 < res.norm_u < 0.5 and res.converged
    assert res.neumann_residual_max <= 1e-3 * np.abs(res.u).max()
    assert res.warnings == []
    # stored grad_norm is reproducible from u
    assert res.grad_norm == pytest.approx(np.linalg.norm(gradient_J(res.u, p)), rel=1e-12)


def test_ball_warning_above_lambda_star(prob, consts):
    p = prob.with_lambda(2 * consts.lambda_star)
    res = minimize(p, Ball(0.5), max_iter=50, lambda_star=consts.lambda_star)
    assert res.warnings


def test_global_large_lambda(prob, consts):
    lam = 2 * consts.lambda_star_upper
    p = prob.with_lambda(lam)
    res = minimize(p, Global(2.0), MultiStart(4, 0))
    assert res.classification == "Nontrivial" and res.converged
    assert res.J <= energy_J(2.0 * prob.mesh.in_omega, p)
    assert len(res.start_energies) == 7


def test_minimize_rejects(prob):
    with pytest.raises(InvalidInputError):
        minimize(prob, Ball(1.5))
    with pytest.raises(InvalidInputError):
        minimize(prob, Global(), tol_grad=0)
    with pytest.raises(InvalidInputError):
        minimize(prob, "newton")


def test_sweep(prob, consts):
    rows = sweep_lambda(prob, [0.0, 0.5 * consts.lambda_star, 2 * consts.lambda_star_upper], consts, n_sphere=20)
    assert [r["mode"] for r in rows] == ["Ball", "Ball", "Global"]
    assert [r["classification"] for r in rows] == ["Trivial", "Nontrivial", "Nontrivial"]
    assert all(r["sphere_min"] > 0 for r in rows[:2])
    assert all(set(r) == set(SWEEP_COLUMNS) for r in rows)
    again = sweep_lambda(prob, [0.5 * consts.lambda_star], consts, n_sphere=20)
    assert again[0] == rows[1]
    assert sweep_lambda(prob, [], consts) == []
