"""Structured grids over Omega plus a truncated exterior collar, and the
pairwise quadrature for the measure |x - y|^{-N} dx dy on R^{2N} minus (C Omega)^2."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import InvalidInputError

__all__ = ["DomainSpec", "Mesh", "PairQuadrature", "build_mesh", "pair_quadrature", "write_mesh_csv"]

OMEGA, COLLAR = "Omega", "Collar"


@dataclass(frozen=True)
class DomainSpec:
    """Omega = (a, b) or an axis-aligned rectangle, a collar of width
    ``collar_width`` around it, and a uniform mesh size ``h``."""

    omega: tuple
    collar_width: float = 0.5
    mesh_size: float = 1.0 / 32

    def __post_init__(self):
        box = np.atleast_2d(np.asarray(self.omega, dtype=float))
        if box.shape[1] != 2 or box.shape[0] not in (1, 2):
            raise InvalidInputError("omega must be [(a, b)] or [(a1, b1), (a2, b2)]")
        if np.any(box[:, 1] <= box[:, 0]):
            raise InvalidInputError("omega sides must have positive length")
        object.__setattr__(self, "omega", tuple(tuple(map(float, r)) for r in box))
        h, R = float(self.mesh_size), float(self.collar_width)
        if not h > 0 or not h < np.min(box[:, 1] - box[:, 0]):
            raise InvalidInputError("mesh_size must be positive and smaller than every side of omega")
        if not R >= h:
            raise InvalidInputError("collar_width must be at least mesh_size")

    @property
    def dimension(self):
        return len(self.omega)

    @property
    def box(self):
        return np.asarray(self.omega, dtype=float)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Cells (centres, measures, region) and vertices of a structured grid.

    Cell ``k`` is tagged Omega when its centre lies in Omega, Collar
    otherwise. Vertices are tagged Omega when they lie in the closure.
    """

    spec: DomainSpec
    centers: np.ndarray
    measures: np.ndarray
    in_omega: np.ndarray
    nodes: np.ndarray
    node_in_omega: np.ndarray

    @property
    def n_cells(self):
        return len(self.centers)

    @property
    def dimension(self):
        return self.spec.dimension

    @property
    def h(self):
        return self.spec.mesh_size

    @property
    def omega_cells(self):
        return np.flatnonzero(self.in_omega)

    @property
    def collar_cells(self):
        return np.flatnonzero(~self.in_omega)

    @property
    def regions(self):
        return np.where(self.in_omega, OMEGA, COLLAR)

    @property
    def omega_measure(self):
        return float(self.measures[self.in_omega].sum())

    @property
    def collar_measure(self):
        return float(self.measures[~self.in_omega].sum())


def build_mesh(spec: DomainSpec) -> Mesh:
    box = spec.box
    h, R = spec.mesh_size, spec.collar_width
    counts = (box[:, 1] - box[:, 0]) / h
    if np.any(np.abs(counts - np.round(counts)) > 1e-9 * np.maximum(1.0, counts)):
        raise InvalidInputError(f"mesh_size {h} does not divide the sides of omega {spec.omega}")
    counts = np.round(counts).astype(int)
    ext = int(np.ceil(R / h - 1e-12))

    axes = [box[d, 0] + h * (np.arange(-ext, counts[d] + ext) + 0.5) for d in range(spec.dimension)]
    grid = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([g.ravel() for g in grid], axis=-1)
    dist = np.linalg.norm(centers - np.clip(centers, box[:, 0], box[:, 1]), axis=-1)
    inside = np.all((centers > box[:, 0]) & (centers < box[:, 1]), axis=-1)
    keep = inside | (dist <= R + 1e-12)
    centers = centers[keep]
    inside = inside[keep]
    measures = np.full(len(centers), h**spec.dimension)

    corners = np.array(list(product((-0.5, 0.5), repeat=spec.dimension))) * h
    verts = (centers[:, None, :] + corners[None]).reshape(-1, spec.dimension)
    nodes = np.unique(np.round(verts / h, 9), axis=0) * h
    node_in = np.all((nodes >= box[:, 0] - 1e-12) & (nodes <= box[:, 1] + 1e-12), axis=-1)
    return Mesh(spec, centers, measures, inside, nodes, node_in)


@dataclass(frozen=True, eq=False)
class PairQuadrature:
    """Unordered distinct cell pairs (i < j) with midpoint weights.

    ``weight = |c_i||c_j| / |x_i - x_j|^N``; pairs of two collar cells are
    excluded. Arrays are sorted by (i, j).
    """

    mesh: Mesh
    s: float
    i: np.ndarray
    j: np.ndarray
    weight: np.ndarray
    dist: np.ndarray
    dist_s: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.i)

    def lookup(self, a, b):
        """Weight of the unordered pair {a, b}."""
        a, b = min(a, b), max(a, b)
        k = np.flatnonzero((self.i == a) & (self.j == b))
        if k.size == 0:
            raise KeyError((a, b))
        return float(self.weight[k[0]])


def pair_quadrature(mesh: Mesh, s: float) -> PairQuadrature:
    if not 0 < s < 1:
        raise InvalidInputError("s must lie in (0, 1)")
    i, j = np.triu_indices(mesh.n_cells, k=1)
    keep = mesh.in_omega[i] | mesh.in_omega[j]
    i, j = i[keep], j[keep]
    dist = np.linalg.norm(mesh.centers[i] - mesh.centers[j], axis=-1)
    w = mesh.measures[i] * mesh.measures[j] / dist**mesh.dimension
    return PairQuadrature(mesh, float(s), i, j, w, dist, dist**s)


def write_mesh_csv(mesh: Mesh, path):
    dims = ["x", "y"][: mesh.dimension]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["cell_id", *dims, "measure", "region"])
        for k in range(mesh.n_cells):
            out.writerow([k, *map(repr, mesh.centers[k].tolist()), repr(float(mesh.measures[k])), mesh.regions[k]])
