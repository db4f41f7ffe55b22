"""Energy functional, its derivative, landscape probes and the two
minimization routes (constrained to a modular ball, or global multi-start).

The discrete energy is::

    J(u) = sum_pairs w Phi(|D^s u|) + sum_cells m_k Phi_hat(|u_k|)
           - lam * sum_Omega |c| F(x, u)

with ``m_k = |c_k|`` on Omega and ``beta_k |c_k|`` on the collar; the
unordered pair sum is the half of the ordered-pair integral.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .operators import accumulate_flux, identity_residuals
from .spaces import difference_quotient, energy_I1, modular_norm, modular_rho_s, variable_exponent_norm

__all__ = [
    "energy_J",
    "energy_I2",
    "gradient_J",
    "energy_and_gradient",
    "finite_difference_gradient",
    "gradcheck",
    "lambda_star_formula",
    "Constants",
    "estimate_constants",
    "bump_theta",
    "sphere_probe",
    "LandscapeReport",
    "landscape_probes",
    "Ball",
    "Global",
    "MultiStart",
    "SolveResult",
    "minimize",
    "SWEEP_COLUMNS",
    "sweep_lambda",
]

log = logging.getLogger(__name__)

ARMIJO_C = 1e-4
MAX_HALVINGS = 60


def energy_and_gradient(u, prob, grad=True):
    u = prob.values(u)
    q = prob.quad
    D = difference_quotient(u, prob)
    pf, cf = prob.pair_family, prob.cell_family
    f, F = prob.reaction(u, prob.q_cells)
    J = (
        float(np.dot(q.weight, pf.Phi(np.abs(D))))
        + float(np.dot(prob.mass_weight, cf.Phi(np.abs(u))))
        - prob.lam * float(np.dot(prob.omega_weight, F))
    )
    if not grad:
        return J
    g = accumulate_flux(q.weight * pf.phi(D) / q.dist_s, prob)
    g += prob.mass_weight * cf.phi(u) - prob.lam * prob.omega_weight * f
    return J, g


def energy_J(u, prob):
    return energy_and_gradient(u, prob, grad=False)


def energy_I2(u, prob):
    _, F = prob.reaction(prob.values(u), prob.q_cells)
    return float(np.dot(prob.omega_weight, F))


def gradient_J(u, prob):
    """Component k is <J'(u), e_k> with e_k the indicator of cell k."""
    return energy_and_gradient(u, prob)[1]


def finite_difference_gradient(u, prob, step=1e-6):
    u = np.array(prob.values(u), dtype=float)
    g = np.empty_like(u)
    for k in range(len(u)):
        h = step * max(1.0, abs(u[k]))
        up, um = u.copy(), u.copy()
        up[k] += h
        um[k] -= h
        g[k] = (energy_J(up, prob) - energy_J(um, prob)) / (2 * h)
    return g


def gradcheck(prob, u, step=1e-6):
    """Max componentwise |fd - exact|, relative to the largest exact component."""
    g = gradient_J(u, prob)
    fd = finite_difference_gradient(u, prob, step)
    return float(np.max(np.abs(fd - g)) / max(np.max(np.abs(g)), 1e-300))


def lambda_star_formula(rho, c_emb, c2, phi_plus, q_exp):
    return rho ** (phi_plus - q_exp) / (2.0 * c2 * c_emb**q_exp)


@dataclass
class Constants:
    c_emb: float
    lambda_star: float
    lambda_star_upper: float
    q_exp: float
    t0: float
    rho: float
    probe_threshold: float = float("nan")


def _smooth_probe(prob, rng, max_mode=3):
    """Random low-frequency cosine field over the whole mesh (offset included).

    Rough i.i.d. fields carry a large Gagliardo part and badly underestimate
    the embedding ratio, which peaks on slowly varying functions.
    """
    c = prob.mesh.centers
    lo, hi = c.min(axis=0), c.max(axis=0)
    z = (c - lo) / np.where(hi > lo, hi - lo, 1.0)
    u = np.zeros(len(c))
    for _ in range(4):
        k = rng.integers(0, max_mode + 1, size=c.shape[1])
        u += rng.standard_normal() / (1.0 + k.sum()) ** 2 * np.prod(np.cos(np.pi * k * z), axis=1)
    return u


def estimate_constants(prob, rho=0.5, n_samples=50, t0=2.0, seed=0, tol=1e-9):
    """Empirical embedding constant and the two lambda thresholds.

    ``c_emb`` is the largest observed ||u||_{q(x)} / ||u|| over random fields
    (alternating rough i.i.d. and smooth cosine fields) and every cell indicator, so it is a lower bound of the true constant.
    ``lambda_star_upper`` counts only the Omega mass of the probe
    u0 = t0 * 1_Omega; ``probe_threshold`` = I1(u0) / I2(u0) is the exact
    lambda beyond which J(u0) < 0 on this mesh, jump and collar terms included.
    """
    if not 0 < rho < 1:
        raise InvalidInputError("rho must lie in (0, 1)")
    if not t0 > 1:
        raise InvalidInputError("t0 must exceed 1")
    rng = np.random.default_rng(seed)
    n = prob.mesh.n_cells
    probes = [_smooth_probe(prob, rng) if k % 2 else rng.uniform(-1.0, 1.0, n) for k in range(n_samples)]
    probes += list(np.eye(n)[prob.mesh.omega_cells])
    c_emb = max(variable_exponent_norm(u, prob, tol) / modular_norm(u, prob, tol) for u in probes)
    fam, rf = prob.family, prob.reaction
    qmin, qmax = rf.q_bounds()
    q_exp = min((qmin, qmax), key=lambda q: lambda_star_formula(rho, c_emb, rf.c2, fam.phi_plus, q))
    lam_star = lambda_star_formula(rho, c_emb, rf.c2, fam.phi_plus, q_exp)
    L = float(np.dot(prob.omega_weight, prob.cell_family.Phi(np.full(n, t0))))
    upper = L / (rf.c2 * t0**qmin * prob.mesh.omega_measure)
    u0 = t0 * prob.mesh.in_omega.astype(float)
    threshold = energy_I1(u0, prob) / energy_I2(u0, prob)
    return Constants(c_emb, lam_star, upper, q_exp, t0, rho, threshold)


def bump_theta(prob, radius=None, center=None):
    """Cutoff equal to 1 on B_R(x0), 0 outside B_2R(x0), quintic blend between."""
    m = prob.mesh
    box = m.spec.box
    if center is None:
        center = box.mean(axis=1)
    if radius is None:
        radius = 0.2 * float(np.min(box[:, 1] - box[:, 0]))
    r = np.linalg.norm(m.centers - np.asarray(center, dtype=float), axis=-1)
    z = np.clip((2.0 * radius - r) / radius, 0.0, 1.0)
    theta = z**3 * (10.0 - 15.0 * z + 6.0 * z**2)
    theta[~m.in_omega] = 0.0
    return theta


def _check_theta(theta, prob):
    m = prob.mesh
    if np.any(theta < 0) or np.any(theta > 1):
        raise InvalidInputError("theta must take values in [0, 1]")
    if np.any(theta[~m.in_omega] != 0):
        raise InvalidInputError("theta must vanish outside Omega")
    if not np.any(theta > 0):
        raise InvalidInputError("theta is identically zero")


def sphere_probe(prob, rho, n, rng, tol=1e-9):
    """J on n random directions rescaled to modular norm rho."""
    vals = []
    for _ in range(n):
        d = rng.uniform(-1.0, 1.0, prob.mesh.n_cells)
        vals.append(energy_J(d * (rho / modular_norm(d, prob, tol)), prob))
    return np.array(vals)


@dataclass
class LandscapeReport:
    sphere_values: np.ndarray
    t_grid: np.ndarray
    small_t_values: np.ndarray
    k_grid: np.ndarray
    coercive_values: np.ndarray

    @property
    def sphere_min(self):
        return float(np.min(self.sphere_values))

    @property
    def small_t_negative(self):
        return bool(np.any(self.small_t_values < 0))

    @property
    def coercive_growth(self):
        """J(k_last) / J(k_prev) at the two largest k."""
        return float(self.coercive_values[-1] / self.coercive_values[-2])


def landscape_probes(prob, rho, n_sphere=200, theta=None, t_grid=None, k_grid=None, seed=0):
    if not 0 < rho < 1:
        raise InvalidInputError("rho must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    if theta is None:
        theta = bump_theta(prob)
    theta = prob.values(theta)
    _check_theta(theta, prob)
    if t_grid is None:
        t_grid = np.logspace(-4, 0, 41)
    if k_grid is None:
        k_grid = 2.0 ** np.arange(9)
    sphere = sphere_probe(prob, rho, n_sphere, rng)
    small = np.array([energy_J(t * theta, prob) for t in t_grid])
    u = rng.uniform(-1.0, 1.0, prob.mesh.n_cells)
    coer = np.array([energy_J(k * u, prob) for k in k_grid])
    return LandscapeReport(sphere, np.asarray(t_grid), small, np.asarray(k_grid), coer)


@dataclass(frozen=True)
class Ball:
    rho: float


@dataclass(frozen=True)
class Global:
    t0: float = 2.0


@dataclass(frozen=True)
class MultiStart:
    n: int = 4
    seed: int = 0


@dataclass
class SolveResult:
    u: np.ndarray
    J: float
    grad_norm: float
    norm_u: float
    mode: str
    classification: str
    iterations: int
    neumann_residual_max: float
    converged: bool
    stagnated: bool = False
    warnings: list = field(default_factory=list)
    start_energies: list = field(default_factory=list)

    ROW = ("mode", "J", "norm_u", "grad_norm", "neumann_residual_max", "classification", "iterations", "converged")

    def row(self):
        return [getattr(self, k) for k in self.ROW]


def _descend(prob, u, tol_grad, max_iter, project=None):
    """Steepest descent with Armijo backtracking; every accepted step lowers J.

    The trial step is the Barzilai-Borwein length of the previous step
    (twice the previous accepted step when undefined), halved at most
    MAX_HALVINGS times.
    """
    J, g = energy_and_gradient(u, prob)
    trial = 1.0
    it = 0
    while it < max_iter:
        if np.linalg.norm(g) <= tol_grad:
            return u, J, g, it, False
        alpha = trial
        for _ in range(MAX_HALVINGS):
            cand = u - alpha * g
            if project is not None:
                cand = project(cand)
            Jc = energy_J(cand, prob)
            if Jc < J and Jc <= J + ARMIJO_C * float(np.dot(g, cand - u)):
                break
            alpha *= 0.5
        else:
            return u, J, g, it, True
        Jc, gc = energy_and_gradient(cand, prob)
        s, y = cand - u, gc - g
        sy = float(np.dot(s, y))
        trial = float(np.dot(s, s)) / sy if sy > 0 else 2.0 * alpha
        trial = min(max(trial, 1e-12), 1e12)
        u, J, g = cand, Jc, gc
        it += 1
    return u, J, g, it, False


def _finish(prob, u, J, g, mode, it, stagnated, tol, tol_grad, warnings=(), starts=()):
    norm_u = modular_norm(u, prob)
    res = identity_residuals(u, u, prob).r3
    gn = float(np.linalg.norm(g))
    cls = "Nontrivial" if (norm_u > 10 * tol and J < 0) else "Trivial"
    return SolveResult(
        u=u,
        J=float(J),
        grad_norm=gn,
        norm_u=norm_u,
        mode=mode,
        classification=cls,
        iterations=it,
        neumann_residual_max=float(np.max(np.abs(res))) if res.size else 0.0,
        converged=gn <= tol_grad,
        stagnated=stagnated,
        warnings=list(warnings),
        start_energies=list(starts),
    )


def _ball_init(prob, rho):
    theta = bump_theta(prob)
    scale = rho / modular_norm(theta, prob)
    cands = [t * scale * theta for t in np.logspace(-4, 0, 41)[:-1]]
    return min(cands, key=lambda v: energy_J(v, prob))


def minimize(prob, mode, init=None, tol_grad=1e-6, max_iter=50000, tol=1e-8, lambda_star=None, seed=0):
    """Minimize J either over the modular ball (``Ball(rho)``) or globally.

    Ball mode projects radially onto ||u|| <= rho and, on line-search
    stagnation above ``tol_grad``, tries 8 random perturbations of modular
    norm 10*tol, keeping the best strict decrease. Global mode runs from the
    constant probe t0*1_Omega, four 0.1-scaled random fields and two bump
    multiples (or from ``init``) and returns the lowest energy.
    """
    if not tol_grad > 0:
        raise InvalidInputError("tol_grad must be positive")
    rng = np.random.default_rng(seed)
    n = prob.mesh.n_cells
    if isinstance(init, MultiStart):
        rng = np.random.default_rng(init.seed)

    if isinstance(mode, Ball):
        rho = mode.rho
        if not 0 < rho < 1:
            raise InvalidInputError("Ball radius must lie in (0, 1)")
        warnings = []
        if lambda_star is not None and prob.lam >= lambda_star:
            warnings.append("lambda >= lambda_star: ball-mode theory does not apply")
            log.warning(warnings[-1])

        def project(v):
            if modular_rho_s(v / rho, prob) <= 1.0:
                return v
            return v * (rho / modular_norm(v, prob))

        u0 = _ball_init(prob, rho) if init is None or isinstance(init, MultiStart) else project(np.array(prob.values(init), dtype=float))
        u, J, g, it, stag = _descend(prob, u0, tol_grad, max_iter, project)
        total = it
        gamma = 10.0 * tol
        for _ in range(50):
            if not stag or np.linalg.norm(g) <= tol_grad or total >= max_iter:
                break
            best = None
            for _ in range(8):
                d = rng.standard_normal(n)
                w = project(u + d * (gamma / modular_norm(d, prob)))
                Jw = energy_J(w, prob)
                if Jw < J and (best is None or Jw < best[1]):
                    best = (w, Jw)
            if best is None:
                break
            u, J, g, it, stag = _descend(prob, best[0], tol_grad, max_iter - total, project)
            total += it
        return _finish(prob, u, J, g, "Ball", total, stag, tol, tol_grad, warnings)

    if not isinstance(mode, Global):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if init is None or isinstance(init, MultiStart):
        k = init.n if isinstance(init, MultiStart) else 4
        omega = prob.mesh.in_omega.astype(float)
        theta = bump_theta(prob)
        starts = [mode.t0 * omega]
        starts += [0.1 * rng.uniform(-1.0, 1.0, n) for _ in range(k)]
        starts += [0.01 * theta, 0.1 * theta]
    else:
        starts = [np.array(prob.values(init), dtype=float)]
    best = None
    energies = []
    total = 0
    for u0 in starts:
        out = _descend(prob, u0, tol_grad, max_iter)
        energies.append(out[1])
        total += out[3]
        if best is None or out[1] < best[1]:
            best = out
    u, J, g, _, stag = best
    return _finish(prob, u, J, g, "Global", total, stag, tol, tol_grad, starts=energies)


SWEEP_COLUMNS = ("lambda", "mode", "J", "norm_u", "grad_norm", "sphere_min",
                 "neumann_residual_max", "classification", "iterations", "seed")


def sweep_lambda(prob, lambda_grid, constants, n_sphere=200, tol_grad=1e-6, max_iter=50000, seed=0):
    """One solve per lambda: Ball mode below lambda_star, Global otherwise."""
    rows = []
    for lam in lambda_grid:
        p = prob.with_lambda(lam)
        sphere_min = float(np.min(sphere_probe(p, constants.rho, n_sphere, np.random.default_rng(seed))))
        if lam < constants.lambda_star:
            mode = Ball(constants.rho)
        else:
            mode = Global(constants.t0)
        res = minimize(p, mode, MultiStart(4, seed), tol_grad=tol_grad, max_iter=max_iter,
                       lambda_star=constants.lambda_star, seed=seed)
        rows.append({
            "lambda": float(lam), "mode": res.mode, "J": res.J, "norm_u": res.norm_u,
            "grad_norm": res.grad_norm, "sphere_min": sphere_min,
            "neumann_residual_max": res.neumann_residual_max,
            "classification": res.classification, "iterations": res.iterations, "seed": seed,
        })
    return rows
