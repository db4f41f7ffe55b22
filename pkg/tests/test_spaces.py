import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_problem
from nonlocal_musielak import InternalConsistencyError, InvalidInputError, luxemburg_norm, modular_norm, modular_rho_s, norms, relation_suite
from nonlocal_musielak.spaces import energy_I1, modular_psi, omega_modular, pair_modular


def naive_rho(u, prob, omega_only=False):
    """Ordered double loop over all cell pairs, independent of the pair list."""
    m = prob.mesh
    c, meas, om = m.centers, m.measures, m.in_omega
    p = 3.0
    total = 0.0
    for i in range(m.n_cells):
        for j in range(m.n_cells):
            if i == j or not (om[i] or om[j]):
                continue
            if omega_only and not (om[i] and om[j]):
                continue
            r = np.linalg.norm(c[i] - c[j])
            total += meas[i] * meas[j] / r ** m.dimension * (abs(u[i] - u[j]) / r**prob.s) ** p
    beta = np.where(om, 1.0, 0.0 if omega_only else prob.beta_cells)
    return total + float(np.sum(meas * beta * np.abs(u) ** p))


@pytest.fixture(scope="module")
def small():
    return make_problem(p=3.0, q=2.0, s=0.3, beta=0.7, h=1 / 8, R=0.25)


def hat(prob):
    x = prob.mesh.centers[:, 0]
    return np.maximum(0.0, 1.0 - np.abs(2 * x - 1))


def test_zero(small):
    assert modular_rho_s(np.zeros(small.mesh.n_cells), small) == 0.0
    assert modular_norm(np.zeros(small.mesh.n_cells), small) == 0.0


def test_hat_matches_double_loop(small):
    u = hat(small)
    assert modular_rho_s(u, small) == pytest.approx(naive_rho(u, small), rel=1e-12)
    assert modular_psi(u, small) == pytest.approx(naive_rho(u, small, omega_only=True), rel=1e-12)


def test_random_matches_double_loop(small, rng):
    u = rng.uniform(-2, 2, small.mesh.n_cells)
    assert modular_rho_s(u, small) == pytest.approx(naive_rho(u, small), rel=1e-12)


def test_constant_kills_seminorm():
    prob = make_problem(p=2.5, q=2.0, beta=0.5, h=1 / 16, R=0.25)
    u = np.full(prob.mesh.n_cells, 1.3)
    assert pair_modular(u, prob) == 0.0
    m = prob.mesh
    assert modular_rho_s(u, prob) == pytest.approx(1.3**2.5 * (m.omega_measure + 0.5 * m.collar_measure), rel=1e-14)


def test_luxemburg_closed_forms(small):
    assert luxemburg_norm(lambda lam: (2.0 / lam) ** 2) == pytest.approx(2.0, rel=1e-9)
    # Phi = t^2, u(x) = x on (0, 1): L^2 norm 1/sqrt(3), midpoint rule on 4096 cells
    x = (np.arange(4096) + 0.5) / 4096
    val = luxemburg_norm(lambda lam: float(np.sum((x / lam) ** 2)) / 4096, tol=1e-12)
    assert val == pytest.approx(np.sqrt(1 / 3 - 1 / (12 * 4096**2)), rel=1e-11)
    assert val == pytest.approx(1 / np.sqrt(3), abs=1e-7)


def test_luxemburg_power_homogeneity(small, rng):
    # for Phi = t^p: rho(u / lam) = rho(u) / lam^p, so ||u|| = rho(u)^(1/p)
    u = rng.uniform(-1, 1, small.mesh.n_cells)
    assert modular_norm(u, small, tol=1e-12) == pytest.approx(modular_rho_s(u, small) ** (1 / 3), rel=1e-10)


def test_luxemburg_detects_non_monotone():
    with pytest.raises(InternalConsistencyError):
        luxemburg_norm(lambda lam: lam)


def test_luxemburg_bad_tol():
    with pytest.raises(InvalidInputError):
        luxemburg_norm(lambda lam: 1 / lam, tol=0)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(0.05, 20.0), seed=st.integers(0, 2**16))
def test_norm_positive_homogeneity(small, c, seed):
    u = np.random.default_rng(seed).uniform(-1, 1, small.mesh.n_cells)
    tol = 1e-10
    assert modular_norm(c * u, small, tol) == pytest.approx(c * modular_norm(u, small, tol), rel=3 * tol)


def test_norms_report(small, rng):
    u = rng.uniform(-1, 1, small.mesh.n_cells)
    r = norms(u, small)
    assert r.norm_X == pytest.approx(r.seminorm + r.lux_omega + r.lux_collar)
    r2 = norms(2 * u, small)
    assert r2.modular_norm == pytest.approx(2 * r.modular_norm, abs=2 * 1e-9 * r2.modular_norm)
    assert all(v == 0 for v in norms(np.zeros_like(u), small).row())


def test_norm_equivalence_constants(small):
    rng = np.random.default_rng(5)
    ratios = [norms(u, small).norm_X / modular_norm(u, small) for u in rng.uniform(-1, 1, (100, small.mesh.n_cells))]
    assert 0 < min(ratios) <= max(ratios) < np.inf


def test_pinch_at_unit_norm(small, rng):
    u = rng.uniform(-1, 1, small.mesh.n_cells)
    u /= modular_norm(u, small, tol=1e-12)
    assert modular_rho_s(u, small) == pytest.approx(1.0, abs=1e-7)


def test_relation_suite_power3():
    prob = make_problem(p=3.0, h=1 / 16, R=0.25)
    rep = relation_suite(prob, n_samples=100, seed=42, tol=1e-7, norm_tol=1e-9)
    assert rep.count("modular_lower") == 200
    assert rep.violations == []


def test_relation_suite_variable_family():
    prob = make_problem(kind="power_times_log", p=2.5, q=1.8, alpha=0.5, h=1 / 16, R=0.25)
    rep = relation_suite(prob, n_samples=20, seed=1)
    assert rep.violations == []


def test_convexity_equality_at_u_equals_v(small, rng):
    u = rng.uniform(-1, 1, small.mesh.n_cells)
    lhs = 0.5 * energy_I1(u, small) * 2 - energy_I1(u, small)
    assert lhs == pytest.approx(0.0, abs=1e-15) and energy_I1(0 * u, small) == 0.0


def test_mesh_mismatch(small):
    with pytest.raises(InvalidInputError):
        omega_modular(np.zeros(3), small)
