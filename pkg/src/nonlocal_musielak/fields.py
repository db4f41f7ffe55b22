"""Closed-form scalar fields over coordinates.

Exponent fields p(x, y), q(x) and the Robin weight beta(x) are all built
from :class:`ScalarField`. A pair field is the average of a point field
at the projections of both arguments onto the closed box, which makes it
symmetric by construction and extends it continuously outside the box.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

__all__ = ["ScalarField", "PairField", "box_sample_points"]

_KINDS = ("constant", "affine", "bump")


@dataclass(frozen=True)
class ScalarField:
    """g(x) = value + <slope, x> (affine), value + amp*exp(-|x-c|^2/w^2) (bump),
    or just value (constant)."""

    kind: str = "constant"
    value: float = 0.0
    slope: tuple = ()
    amp: float = 0.0
    center: tuple = ()
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidInputError(f"unknown field kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "bump" and not self.width > 0:
            raise InvalidInputError("bump width must be positive")
        object.__setattr__(self, "slope", tuple(float(v) for v in self.slope))
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @classmethod
    def constant(cls, value):
        return cls("constant", value=float(value))

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, (int, float)):
            return cls.constant(d)
        d = dict(d)
        kind = d.pop("kind", "constant")
        try:
            return cls(kind=kind, **d)
        except TypeError as exc:
            raise InvalidInputError(f"bad field specification {d!r}: {exc}") from None

    def to_dict(self):
        d = {"kind": self.kind, "value": self.value}
        if self.kind == "affine":
            d["slope"] = list(self.slope)
        elif self.kind == "bump":
            d.update(amp=self.amp, center=list(self.center), width=self.width)
        return d

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(x.shape[:-1], self.value)
        if self.kind == "affine":
            slope = np.asarray(self.slope)
            if slope.shape != (x.shape[-1],):
                raise InvalidInputError(f"affine slope has length {slope.size}, points have dimension {x.shape[-1]}")
            return self.value + x @ slope
        center = np.asarray(self.center)
        if center.shape != (x.shape[-1],):
            raise InvalidInputError(f"bump center has length {center.size}, points have dimension {x.shape[-1]}")
        r2 = np.sum((x - center) ** 2, axis=-1)
        return self.value + self.amp * np.exp(-r2 / self.width**2)

    def bounds(self, box):
        """(min, max) over the closed box, exact for constant/affine fields."""
        if self.kind == "constant":
            return self.value, self.value
        vals = self(box_sample_points(box, 33))
        return float(vals.min()), float(vals.max())


@dataclass(frozen=True)
class PairField:
    """Symmetric two-point field p(x, y) = (g(pi x) + g(pi y)) / 2."""

    point_field: ScalarField
    box: np.ndarray | None = field(default=None, compare=False)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        if self.box is None:
            return x
        return np.clip(x, self.box[:, 0], self.box[:, 1])

    def __call__(self, x, y):
        return 0.5 * (self.point_field(self.project(x)) + self.point_field(self.project(y)))

    def diag(self, x):
        return self.point_field(self.project(x))

    def bounds(self):
        if self.box is None:
            if self.point_field.kind != "constant":
                raise InvalidInputError("a non-constant exponent field needs the domain box for its bounds")
            return self.point_field.value, self.point_field.value
        return self.point_field.bounds(self.box)


def box_sample_points(box, n):
    """Tensor grid of n points per axis over the closed box, shape (n**N, N)."""
    box = np.asarray(box, dtype=float)
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
