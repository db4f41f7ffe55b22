"""Problem data shared by the modular, operator and solver layers."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError, ValidationError
from .fields import ScalarField
from .mesh import DomainSpec, Mesh, PairQuadrature, build_mesh, pair_quadrature
from .musielak import BoundFamily, MusielakFamily
from .reaction import ReactionFamily

__all__ = ["DiscreteFunction", "ProblemSpec", "values_of"]


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """Cell values of a function on Omega and the collar (piecewise constant)."""

    values: np.ndarray
    mesh: Mesh

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.mesh.n_cells,):
            raise InvalidInputError(f"expected {self.mesh.n_cells} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("function values must be finite")
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def values_of(u, mesh):
    """Validated value array of ``u`` (a DiscreteFunction or array) on ``mesh``."""
    if isinstance(u, DiscreteFunction):
        if u.mesh is not mesh:
            raise InvalidInputError("function lives on a different mesh")
        return u.values
    v = np.asarray(u, dtype=float)
    if v.shape != (mesh.n_cells,):
        raise InvalidInputError(f"expected {mesh.n_cells} cell values, got shape {v.shape}")
    return v


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Discretized problem: mesh, pair quadrature, family, reaction, beta, s, lambda.

    Evaluation caches (family bound to every quadrature pair and to every
    cell, q and beta per cell) are computed once at construction.
    """

    mesh: Mesh
    quad: PairQuadrature
    family: MusielakFamily
    reaction: ReactionFamily
    beta: ScalarField
    lam: float = 0.0
    pair_family: BoundFamily = field(init=False, repr=False)
    cell_family: BoundFamily = field(init=False, repr=False)
    beta_cells: np.ndarray = field(init=False, repr=False)
    mass_weight: np.ndarray = field(init=False, repr=False)
    omega_weight: np.ndarray = field(init=False, repr=False)
    q_cells: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.quad.mesh is not self.mesh:
            raise InvalidInputError("quadrature was built on a different mesh")
        if not 0 < self.s < 1:
            raise ValidationError("s in (0,1) violated")
        if not self.lam >= 0:
            raise ValidationError("lambda must be nonnegative")
        m = self.mesh
        beta = np.where(m.in_omega, 0.0, self.beta(m.centers))
        if np.any(beta < 0):
            raise ValidationError("beta >= 0 on the collar violated")
        qmin, qmax = self.reaction.q_bounds()
        if not qmax < self.family.phi_minus:
            raise ValidationError(
                f"q+ < phi- violated: q+ = {qmax}, phi- = {self.family.phi_minus}"
            )
        c = m.centers
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("pair_family", self.family.bind(c[self.quad.i], c[self.quad.j]))
        set_("cell_family", self.family.bind_diag(c))
        set_("beta_cells", beta)
        set_("mass_weight", m.measures * np.where(m.in_omega, 1.0, beta))
        set_("omega_weight", m.measures * m.in_omega)
        set_("q_cells", np.asarray(self.reaction.q(c), dtype=float))

    @property
    def s(self):
        return self.quad.s

    @classmethod
    def build(cls, domain: DomainSpec, family, reaction, s, beta=0.0, lam=0.0):
        mesh = build_mesh(domain)
        if not 0 < s < 1:
            raise ValidationError("s in (0,1) violated")
        if isinstance(beta, (int, float)):
            beta = ScalarField.constant(beta)
        return cls(mesh, pair_quadrature(mesh, s), family, reaction, beta, float(lam))

    def with_lambda(self, lam):
        return replace(self, lam=float(lam))

    def function(self, values):
        return DiscreteFunction(values, self.mesh)

    def values(self, u):
        return values_of(u, self.mesh)

    def constant(self, c, omega_only=False):
        v = np.full(self.mesh.n_cells, float(c))
        if omega_only:
            v[~self.mesh.in_omega] = 0.0
        return v
