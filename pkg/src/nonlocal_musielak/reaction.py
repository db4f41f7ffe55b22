"""Reaction terms f(x, t) with antiderivative F(x, t) satisfying the growth
conditions |f| <= c1 |t|^{q-1} and F >= c2 |t|^q."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ValidationError
from .fields import ScalarField

__all__ = ["ReactionFamily", "eval_reaction", "REACTION_KINDS"]

log = logging.getLogger(__name__)
_WARNED = set()

REACTION_KINDS = ("pure_power", "power_plus_log", "power_plus_sinsin")

# sampled grid used for the growth-condition validation
_T_CHECK = np.concatenate([-np.logspace(3, -3, 61), np.logspace(-3, 3, 61)])


def _f_F(kind, t, q):
    a = np.abs(t)
    sg = np.sign(t)
    if kind == "pure_power":
        return q * sg * a ** (q - 1.0), a**q
    if kind == "power_plus_log":
        l = np.log1p(t * t)
        with np.errstate(divide="ignore", invalid="ignore"):
            l_over = np.where(a > 0, l / (t * t), 1.0)
        F = a**q + l_over * a**q
        f = q * sg * a ** (q - 1.0) + (q - 2.0) * l_over * sg * a ** (q - 1.0) + 2.0 * sg * a ** (q - 1.0) / (1.0 + t * t)
        return f, F
    if kind == "power_plus_sinsin":
        ss = np.sin(np.sin(t))
        F = a**q + ss * a ** (q - 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ss_over = np.where(a > 0, ss / t, 1.0)
        f = q * sg * a ** (q - 1.0) + np.cos(np.sin(t)) * np.cos(t) * a ** (q - 1.0) + (q - 1.0) * ss_over * a ** (q - 1.0)
        return f, F
    raise InvalidInputError(f"unknown reaction kind {kind!r}")


@dataclass(frozen=True)
class ReactionFamily:
    """One of the three reaction families of the existence theory.

    F is taken as stated and f = dF/dt exactly. Default growth constants:
    c1 = q+ (pure power) or 2 q+ (the other two); c2 = 1, except the
    sin-sin family, whose ratio F/|t|^q tends to 0 as t -> 0-, so its
    default c2 is the sampled infimum on the validation grid.
    """

    kind: str = "pure_power"
    q: ScalarField = ScalarField.constant(2.0)
    c1: float | None = None
    c2: float | None = None
    box: tuple | None = None

    def __post_init__(self):
        if self.kind not in REACTION_KINDS:
            raise InvalidInputError(f"unknown reaction kind {self.kind!r}; expected one of {REACTION_KINDS}")
        q = self.q
        if isinstance(q, (int, float)):
            object.__setattr__(self, "q", ScalarField.constant(q))
        qmin, qmax = self.q_bounds()
        if qmin <= 1.0:
            raise ValidationError(f"q must exceed 1 on Omega, got q- = {qmin}")
        if self.c1 is None:
            object.__setattr__(self, "c1", float(qmax if self.kind == "pure_power" else 2.0 * qmax))
        if self.c2 is None:
            if self.kind == "power_plus_sinsin":
                c2 = self._sampled_c2()
                if c2 not in _WARNED:
                    _WARNED.add(c2)
                    log.warning("sin-sin reaction: F/|t|^q -> 0 as t -> 0-, using sampled c2 = %.3g", c2)
            else:
                c2 = 1.0
            object.__setattr__(self, "c2", float(c2))
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValidationError("growth constants c1, c2 must be positive")
        self.validate()

    def q_bounds(self):
        if self.q.kind == "constant":
            return self.q.value, self.q.value
        if self.box is None:
            raise InvalidInputError("a non-constant q field needs the domain box")
        return self.q.bounds(np.asarray(self.box, dtype=float))

    def _sample_points(self):
        if self.box is None:
            return np.zeros((1, 1))
        from .fields import box_sample_points

        return box_sample_points(np.asarray(self.box, dtype=float), 5)

    def _sampled_c2(self):
        q = self.q(self._sample_points())[:, None]
        _, F = _f_F(self.kind, _T_CHECK[None, :], q)
        return float(np.min(F / np.abs(_T_CHECK) ** q))

    def validate(self):
        """Sampled check of the two growth conditions for the declared constants."""
        q = self.q(self._sample_points())[:, None]
        t = _T_CHECK[None, :]
        f, F = _f_F(self.kind, t, q)
        a = np.abs(t)
        if np.any(np.abs(f) > self.c1 * a ** (q - 1.0) * (1 + 1e-12)):
            raise ValidationError(f"growth bound |f| <= c1 |t|^(q-1) violated for c1 = {self.c1} ({self.kind})")
        if np.any(F < self.c2 * a**q * (1 - 1e-12)):
            raise ValidationError(f"lower bound F >= c2 |t|^q violated for c2 = {self.c2} ({self.kind})")

    def __call__(self, t, q):
        """(f, F) at values t with exponents q (broadcasting arrays)."""
        return _f_F(self.kind, np.asarray(t, dtype=float), np.asarray(q, dtype=float))

    def to_dict(self):
        return {"kind": self.kind, "q": self.q.to_dict(), "c1": self.c1, "c2": self.c2}


def eval_reaction(rf: ReactionFamily, x, t):
    """(f(x, t), F(x, t)) at a single point."""
    t = float(t)
    if not np.isfinite(t):
        raise InvalidInputError("t must be finite")
    q = rf.q(np.atleast_2d(np.asarray(x, dtype=float)))[0]
    f, F = rf(t, q)
    return float(f), float(F)
