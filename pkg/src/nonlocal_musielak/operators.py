"""Fractional a(x,.)-Laplacian, a(x,.)-Neumann operator and the weak form A_s.

All three are assembled from the same pair list as the modulars. For a
stored pair (i, j) the flux ``g_ij = w_ij phi(D^s u) / |x_i - x_j|^s`` is
added to cell i and subtracted from cell j. Since collar-collar pairs are
absent, the accumulated value at an Omega cell is the Laplacian (y over all
cells) and at a collar cell it is the Neumann operator (y over Omega only),
each times the cell measure. The Green-type identities then hold up to
round-off.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import difference_quotient

__all__ = [
    "OperatorField",
    "pair_flux",
    "accumulate_flux",
    "apply_fractional_laplacian",
    "apply_neumann",
    "form_A_s",
    "IdentityResiduals",
    "identity_residuals",
]


@dataclass(frozen=True, eq=False)
class OperatorField:
    """Operator values on a subset of cells (``cells`` are mesh indices)."""

    cells: np.ndarray
    values: np.ndarray
    region: str


def pair_flux(u, prob):
    D = difference_quotient(u, prob)
    q = prob.quad
    return q.weight * prob.pair_family.phi(D) / q.dist_s


def accumulate_flux(g, prob):
    """Per-cell sum of signed pair fluxes (not yet divided by cell measure)."""
    q = prob.quad
    n = prob.mesh.n_cells
    return np.bincount(q.i, g, minlength=n) - np.bincount(q.j, g, minlength=n)


def _operator_cells(u, prob):
    acc = accumulate_flux(pair_flux(u, prob), prob)
    return acc / prob.mesh.measures


def apply_fractional_laplacian(u, prob):
    m = prob.mesh
    cells = m.omega_cells
    return OperatorField(cells, _operator_cells(u, prob)[cells], "Omega")


def apply_neumann(u, prob):
    m = prob.mesh
    cells = m.collar_cells
    return OperatorField(cells, _operator_cells(u, prob)[cells], "Collar")


def _mass_term(u, prob):
    # a_hat(|u|) u = phi_hat(u)
    return prob.cell_family.phi(prob.values(u))


def form_A_s(u, v, prob):
    """A_s(u, v): pair part plus the Omega and beta-weighted collar mass parts."""
    u = prob.values(u)
    v = prob.values(v)
    pair = float(np.dot(pair_flux(u, prob), v[prob.quad.i] - v[prob.quad.j]))
    return pair + float(np.dot(prob.mass_weight, _mass_term(u, prob) * v))


@dataclass(frozen=True)
class IdentityResiduals:
    """``r1``/``r2`` with the sums of absolute summands they are compared to,
    and the per-collar-cell Neumann-Robin residual ``r3``."""

    r1: float
    r2: float
    r3: np.ndarray
    scale1: float
    scale2: float

    @property
    def rel1(self):
        return self.r1 / self.scale1 if self.scale1 > 0 else self.r1

    @property
    def rel2(self):
        return self.r2 / self.scale2 if self.scale2 > 0 else self.r2


def identity_residuals(u, v, prob):
    u = prob.values(u)
    v = prob.values(v)
    m = prob.mesh
    lap = apply_fractional_laplacian(u, prob)
    neu = apply_neumann(u, prob)
    t1 = np.concatenate([m.measures[lap.cells] * lap.values, m.measures[neu.cells] * neu.values])
    r1 = abs(float(np.sum(t1)))
    scale1 = float(np.sum(np.abs(t1)))

    g = pair_flux(u, prob)
    pair_terms = g * (v[prob.quad.i] - v[prob.quad.j])
    op_terms = np.concatenate([v[lap.cells] * t1[: len(lap.cells)], v[neu.cells] * t1[len(lap.cells):]])
    r2 = abs(float(np.sum(pair_terms)) - float(np.sum(op_terms)))
    scale2 = float(np.sum(np.abs(pair_terms)) + np.sum(np.abs(op_terms)))

    r3 = neu.values + prob.beta_cells[neu.cells] * _mass_term(u, prob)[neu.cells]
    return IdentityResiduals(r1, r2, r3, scale1, scale2)
