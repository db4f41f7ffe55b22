"""Discrete modulars and Luxemburg norms of the space X, and sampled
checks of the norm/modular relations, the Hoelder inequality and the
Clarkson-type convexity inequality."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InternalConsistencyError, InvalidInputError

__all__ = [
    "difference_quotient",
    "pair_modular",
    "omega_modular",
    "collar_modular",
    "modular_rho_s",
    "modular_psi",
    "energy_I1",
    "luxemburg_norm",
    "modular_norm",
    "variable_exponent_norm",
    "NormReport",
    "norms",
    "random_field",
    "RelationReport",
    "relation_suite",
]


def difference_quotient(u, prob):
    """D^s u on every stored pair: (u_i - u_j) / |x_i - x_j|^s."""
    u = prob.values(u)
    q = prob.quad
    return (u[q.i] - u[q.j]) / q.dist_s


def pair_modular(u, prob):
    """Integral of Phi(|D^s u|) d mu over ordered pairs (twice the unordered sum)."""
    D = difference_quotient(u, prob)
    return 2.0 * float(np.dot(prob.quad.weight, prob.pair_family.Phi(np.abs(D))))


def _mass(u, prob, weights):
    u = prob.values(u)
    return float(np.dot(weights, prob.cell_family.Phi(np.abs(u))))


def omega_modular(u, prob):
    return _mass(u, prob, prob.omega_weight)


def collar_modular(u, prob):
    return _mass(u, prob, prob.mass_weight - prob.omega_weight)


def modular_rho_s(u, prob):
    """rho_s(u): pair integral over R^{2N} minus (C Omega)^2 plus the Omega and
    beta-weighted collar terms."""
    return pair_modular(u, prob) + _mass(u, prob, prob.mass_weight)


def modular_psi(u, prob):
    """Omega-only modular: Omega x Omega pair integral plus the Omega term."""
    D = difference_quotient(u, prob)
    q, m = prob.quad, prob.mesh
    both = m.in_omega[q.i] & m.in_omega[q.j]
    pair = 2.0 * float(np.dot(q.weight[both], prob.pair_family.Phi(np.abs(D))[both]))
    return pair + omega_modular(u, prob)


def energy_I1(u, prob):
    """I_1(u): half the pair integral plus both mass terms."""
    return 0.5 * pair_modular(u, prob) + _mass(u, prob, prob.mass_weight)


def luxemburg_norm(modular, tol=1e-9):
    """inf{lam > 0 : modular(lam) <= 1} for a map lam -> modular(u / lam).

    The bracket starts at lam = 1 and doubles (or halves) until it straddles
    the unit level, then bisects to relative width ``tol``. A modular that
    increases with lam beyond ``tol`` raises InternalConsistencyError.
    """
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    seen = []

    def ev(lam):
        m = float(modular(lam))
        for l0, m0 in seen:
            if (lam > l0 and m > m0 * (1 + tol) + tol) or (lam < l0 and m0 > m * (1 + tol) + tol):
                raise InternalConsistencyError(f"modular not monotone: m({l0})={m0}, m({lam})={m}")
        seen.append((lam, m))
        return m

    if ev(1.0) == 0.0:
        return 0.0
    if seen[0][1] > 1.0:
        hi = 1.0
        for _ in range(2100):
            hi *= 2.0
            if ev(hi) <= 1.0:
                break
        else:
            raise InternalConsistencyError("modular does not decay as lam grows")
        lo = hi / 2.0
    else:
        lo = 1.0
        for _ in range(2100):
            lo /= 2.0
            if ev(lo) > 1.0:
                break
        else:
            return 0.0
        hi = 2.0 * lo
    seen.clear()
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if float(modular(mid)) <= 1.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def modular_norm(u, prob, tol=1e-9):
    """The modular norm ||u|| = inf{lam : rho_s(u / lam) <= 1}."""
    u = prob.values(u)
    return luxemburg_norm(lambda lam: modular_rho_s(u / lam, prob), tol)


def variable_exponent_norm(u, prob, tol=1e-9):
    """Luxemburg norm of u in L^{q(x)}(Omega)."""
    u = np.abs(prob.values(u))
    w, q = prob.omega_weight, prob.q_cells
    return luxemburg_norm(lambda lam: float(np.dot(w, (u / lam) ** q)), tol)


@dataclass
class NormReport:
    seminorm: float
    lux_omega: float
    lux_collar: float
    norm_X: float
    modular_norm: float
    modular: float

    FIELDS = ("seminorm", "lux_omega", "lux_collar", "norm_X", "modular_norm", "modular")

    def row(self):
        return [getattr(self, f) for f in self.FIELDS]


def norms(u, prob, tol=1e-9):
    u = prob.values(u)
    semi = luxemburg_norm(lambda lam: pair_modular(u / lam, prob), tol)
    om = luxemburg_norm(lambda lam: omega_modular(u / lam, prob), tol)
    col = luxemburg_norm(lambda lam: collar_modular(u / lam, prob), tol)
    return NormReport(
        seminorm=semi,
        lux_omega=om,
        lux_collar=col,
        norm_X=semi + om + col,
        modular_norm=modular_norm(u, prob, tol),
        modular=modular_rho_s(u, prob),
    )


def random_field(prob, rng, target_norm=None, tol=1e-9):
    """i.i.d. uniform[-1, 1] cell values, optionally rescaled to a modular norm."""
    u = rng.uniform(-1.0, 1.0, prob.mesh.n_cells)
    if target_norm is not None:
        u *= target_norm / modular_norm(u, prob, tol)
    return u


@dataclass
class RelationReport:
    """Per-sample margins; a negative ``margin`` beyond tolerance is a violation."""

    rows: list = field(default_factory=list)
    COLUMNS = ("sample", "check", "regime", "lhs", "rhs", "margin", "ok")

    @property
    def violations(self):
        return [r for r in self.rows if not r[-1]]

    def count(self, check):
        return sum(1 for r in self.rows if r[1] == check)


def _record(report, k, check, regime, lhs, rhs, tol):
    margin = rhs - lhs
    ok = margin >= -tol * max(1.0, abs(rhs))
    report.rows.append([k, check, regime, float(lhs), float(rhs), float(margin), bool(ok)])


def relation_suite(prob, n_samples=100, seed=0, tol=1e-7, norm_tol=1e-9, checks=("modular", "hoelder", "convexity")):
    """Sampled verification of the modular-norm relations and two inequalities.

    ``modular``: for each regime target in {2, 0.5}, n_samples random fields
    rescaled to that modular norm must satisfy
    ||u||^{phi-} <= rho_s(u) <= ||u||^{phi+} (norm > 1) or the swapped
    bounds (norm < 1). ``hoelder``: |sum_Omega u v| <= 2 ||u|| ||v||_conj.
    ``convexity``: I1(u)/2 + I1(v)/2 - I1((u+v)/2) >= I1((u-v)/2).
    """
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    fam = prob.family
    rep = RelationReport()
    k = 0
    if "modular" in checks:
        for regime, target in (("above", 2.0), ("below", 0.5)):
            for _ in range(n_samples):
                u = random_field(prob, rng)
                u *= target / modular_norm(u, prob, norm_tol)
                nrm = modular_norm(u, prob, norm_tol)
                rho = modular_rho_s(u, prob)
                lo_e, hi_e = (fam.phi_minus, fam.phi_plus) if nrm > 1 else (fam.phi_plus, fam.phi_minus)
                _record(rep, k, "modular_lower", regime, nrm**lo_e, rho, tol)
                _record(rep, k, "modular_upper", regime, rho, nrm**hi_e, tol)
                k += 1
    om = prob.omega_weight
    cf = prob.cell_family
    if "hoelder" in checks:
        for _ in range(n_samples):
            u = random_field(prob, rng) * rng.uniform(0.1, 10.0)
            v = random_field(prob, rng) * rng.uniform(0.1, 10.0)
            nu = luxemburg_norm(lambda lam: float(np.dot(om, cf.Phi(np.abs(u) / lam))), norm_tol)
            nv = luxemburg_norm(lambda lam: float(np.dot(om, cf.conjugate(np.abs(v) / lam))), norm_tol)
            _record(rep, k, "hoelder", "", abs(float(np.dot(om, u * v))), 2.0 * nu * nv, tol)
            k += 1
    if "convexity" in checks:
        for _ in range(n_samples):
            u = random_field(prob, rng) * rng.uniform(0.1, 3.0)
            v = random_field(prob, rng) * rng.uniform(0.1, 3.0)
            lhs = 0.5 * energy_I1(u, prob) + 0.5 * energy_I1(v, prob) - energy_I1(0.5 * (u + v), prob)
            _record(rep, k, "convexity", "", energy_I1(0.5 * (u - v), prob), lhs, tol)
            k += 1
    return rep
