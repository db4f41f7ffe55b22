"""Spatially dependent Musielak functions and checks of their structural conditions.

A family is described by its kernel ``a(x, y, t)``; everything else is
derived from it::

    phi_{x,y}(t) = a(x, y, |t|) t
    Phi_{x,y}(t) = int_0^t phi_{x,y}
    Phi_hat_x    = Phi_{x,x}

Closed forms are used where the antiderivative is elementary (the power
family); otherwise ``Phi`` is integrated numerically with a graded
Gauss-Legendre rule, so ``phi`` is the single source of truth.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from .errors import InvalidInputError
from .fields import PairField, ScalarField, box_sample_points

__all__ = [
    "KINDS",
    "MusielakFamily",
    "BoundFamily",
    "ConditionReport",
    "SobolevDiagnostics",
    "eval_phi",
    "eval_Phi",
    "conjugate_Phi",
    "estimate_phi_bounds",
    "check_conditions",
    "sobolev_conjugate_diag",
    "dominated_by_sobolev_conjugate",
    "graded_rule",
    "monotone_inverse",
]

log = logging.getLogger(__name__)

KINDS = ("power", "power_over_log", "power_times_log", "custom")


def graded_rule(levels=40, npts=12):
    """Nodes and weights on (0, 1] geometrically graded towards 0.

    Panels [2^-(k+1), 2^-k] for k < levels plus [0, 2^-levels], each carrying
    an ``npts``-point Gauss-Legendre rule. Handles integrands behaving like
    sigma^a or with a log singularity just left of 0.
    """
    x, w = roots_legendre(npts)
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1)])
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w
    return nodes.ravel(), weights.ravel()


_SIGMA, _WEIGHTS = graded_rule()


def monotone_inverse(func, target, iters=64):
    """Vectorised generalized inverse sup{s >= 0 : func(s) <= target}.

    ``func`` must be nondecreasing with func(0) = 0. The bracket starts at
    s = 1 and is doubled (or halved) until it straddles the target, then
    bisected ``iters`` times.
    """
    target = np.asarray(target, dtype=float)
    out = np.zeros_like(target)
    live = target > 0
    if not np.any(live):
        return out
    tv = target[live]
    hi = np.ones_like(tv)
    for _ in range(1100):
        low = func_masked(func, hi, live) <= tv
        if not np.any(low):
            break
        hi = np.where(low, 2.0 * hi, hi)
    for _ in range(1100):
        high = func_masked(func, 0.5 * hi, live) > tv
        if not np.any(high):
            break
        hi = np.where(high, 0.5 * hi, hi)
    lo = 0.5 * hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = func_masked(func, mid, live) <= tv
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out[live] = 0.5 * (lo + hi)
    return out


def func_masked(func, s, mask):
    # func may carry per-element parameters shaped like the full target
    full = np.zeros(mask.shape)
    full[mask] = s
    return func(full)[mask]


def _positive_phi(kind, tau, p, alpha):
    """phi(tau) for tau >= 0 of the built-in kinds (broadcasting)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "power":
            val = p * tau ** (p - 1.0)
        elif kind == "power_over_log":
            ratio = np.where(tau > 0, tau / np.log1p(tau), 1.0)
            val = p * tau ** (p - 2.0) * ratio
        elif kind == "power_times_log":
            val = p * np.log1p(alpha + tau) * tau ** (p - 1.0)
        else:  # pragma: no cover - guarded by MusielakFamily
            raise InvalidInputError(kind)
    return np.where(tau > 0, val, 0.0)


@dataclass(frozen=True)
class MusielakFamily:
    """A family ``a(x, y, t)`` together with its declared (Phi_1) exponents.

    ``p`` is the symmetric exponent field. ``phi_minus``/``phi_plus`` default
    to the exponents each built-in kind is known to satisfy: (p-, p+) for
    ``power``, (p- - 1, p+) for ``power_over_log`` and (p-, p+ + 1) for
    ``power_times_log``. ``custom`` families supply a vectorised
    ``kernel(x, y, t)`` and must declare both exponents.
    """

    kind: str = "power"
    p: PairField = field(default_factory=lambda: PairField(ScalarField.constant(2.0)))
    alpha: float = 0.0
    phi_minus: float | None = None
    phi_plus: float | None = None
    kernel: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown family kind {self.kind!r}")
        p = self.p
        if isinstance(p, (int, float)):
            p = PairField(ScalarField.constant(p))
        elif isinstance(p, ScalarField):
            p = PairField(p)
        object.__setattr__(self, "p", p)
        if self.alpha < 0:
            raise InvalidInputError("alpha must be nonnegative")
        if self.kind == "custom":
            if self.kernel is None:
                raise InvalidInputError("custom family needs a kernel a(x, y, t)")
            if self.phi_minus is None or self.phi_plus is None:
                raise InvalidInputError("custom family must declare phi_minus and phi_plus")
        else:
            pmin, pmax = p.bounds()
            if pmin <= 1.0:
                raise InvalidInputError(f"exponent field must exceed 1, got min {pmin}")
            lo, hi = {
                "power": (pmin, pmax),
                "power_over_log": (pmin - 1.0, pmax),
                "power_times_log": (pmin, pmax + 1.0),
            }[self.kind]
            if self.phi_minus is None:
                object.__setattr__(self, "phi_minus", float(lo))
            if self.phi_plus is None:
                object.__setattr__(self, "phi_plus", float(hi))
        if not 1.0 < self.phi_minus <= self.phi_plus < np.inf:
            raise InvalidInputError(
                f"need 1 < phi_minus <= phi_plus < inf, got ({self.phi_minus}, {self.phi_plus})"
            )

    @classmethod
    def power(cls, p, box=None, **kw):
        return cls("power", _pair_field(p, box), **kw)

    @classmethod
    def power_over_log(cls, p, box=None, **kw):
        return cls("power_over_log", _pair_field(p, box), **kw)

    @classmethod
    def power_times_log(cls, p, alpha=0.0, box=None, **kw):
        return cls("power_times_log", _pair_field(p, box), alpha=alpha, **kw)

    def bind(self, x, y):
        """Freeze the spatial arguments; returns a :class:`BoundFamily`."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.kind == "custom":
            return BoundFamily(self, None, x, y)
        return BoundFamily(self, np.asarray(self.p(x, y), dtype=float), x, y)

    def bind_diag(self, x):
        return self.bind(x, x)

    def a(self, x, y, t):
        t = np.abs(np.asarray(t, dtype=float))
        b = self.bind(x, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            return b.phi(t) / t

    def exponent_bounds(self):
        return self.p.bounds()


def _pair_field(p, box):
    if isinstance(p, PairField):
        return p
    if isinstance(p, (int, float)):
        p = ScalarField.constant(p)
    return PairField(p, None if box is None else np.asarray(box, dtype=float))


@dataclass
class BoundFamily:
    """phi, Phi, their inverses and the conjugate at fixed spatial arguments.

    Arrays of ``t`` broadcast against the exponent array ``p`` (one entry per
    (x, y) pair), which is how the hot loops evaluate all quadrature pairs at
    once.
    """

    family: MusielakFamily
    p: np.ndarray | None
    x: np.ndarray
    y: np.ndarray

    def _phi_pos(self, tau, quad_axis=False):
        # quad_axis: tau carries a trailing quadrature axis beyond the pair axis
        fam = self.family
        if fam.kind == "custom":
            xs = self.x[..., None, :] if quad_axis else self.x
            ys = self.y[..., None, :] if quad_axis else self.y
            val = np.asarray(fam.kernel(xs, ys, tau), dtype=float) * tau
            return np.where(tau > 0, val, 0.0)
        p = self.p
        if quad_axis and np.ndim(p) > 0:
            p = p[..., None]
        return _positive_phi(fam.kind, tau, p, fam.alpha)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * self._phi_pos(np.abs(t))

    def Phi(self, t):
        """Phi(t) for t >= 0 (callers pass |t|)."""
        t = np.asarray(t, dtype=float)
        if self.family.kind == "power":
            return t**self.p
        tau = t[..., None] * _SIGMA
        return t * np.sum(self._phi_pos(tau, quad_axis=True) * _WEIGHTS, axis=-1)

    def phi_inverse(self, t):
        """Generalized inverse sup{s : phi(s) <= t}, t >= 0."""
        t = np.asarray(t, dtype=float)
        if self.family.kind == "power":
            return (t / self.p) ** (1.0 / (self.p - 1.0))
        return monotone_inverse(lambda s: self._phi_pos(s), np.broadcast_to(t, np.broadcast_shapes(t.shape, np.shape(self.p) if self.p is not None else ())).copy())

    def Phi_inverse(self, v):
        v = np.asarray(v, dtype=float)
        if self.family.kind == "power":
            return v ** (1.0 / self.p)
        shape = np.broadcast_shapes(v.shape, np.shape(self.p) if self.p is not None else ())
        return monotone_inverse(self.Phi, np.broadcast_to(v, shape).copy())

    def conjugate(self, t):
        """Complementary function via the Young equality t*inv(t) - Phi(inv(t))."""
        t = np.asarray(t, dtype=float)
        if self.family.kind == "power":
            p = self.p
            q = p / (p - 1.0)
            return (p - 1.0) * (t / p) ** q
        s = self.phi_inverse(t)
        return t * s - self.Phi(s)


def _scalar_check(t, name="t"):
    t = float(t)
    if not np.isfinite(t):
        raise InvalidInputError(f"{name} must be finite, got {t}")
    return t


def eval_phi(family, x, y, t):
    """phi_{x,y}(t) = a(x, y, |t|) t; odd in t, zero at 0."""
    t = _scalar_check(t)
    return float(family.bind(x, y).phi(np.array(t)))


def eval_Phi(family, x, y, t):
    t = _scalar_check(t)
    if t < 0:
        raise InvalidInputError("Phi is evaluated at |t|; got negative t")
    return float(family.bind(x, y).Phi(np.array(t)))


def conjugate_Phi(family, x, y, t):
    t = _scalar_check(t)
    if t < 0:
        raise InvalidInputError("conjugate is evaluated at t >= 0")
    return float(family.bind(x, y).conjugate(np.array(t)))


def default_xy_samples(family, n=5):
    box = family.p.box
    if box is None:
        pts = np.zeros((1, 1))
    else:
        pts = box_sample_points(box, n)
    i, j = np.meshgrid(np.arange(len(pts)), np.arange(len(pts)), indexing="ij")
    keep = i.ravel() <= j.ravel()
    return pts[i.ravel()[keep]], pts[j.ravel()[keep]]


def _ratio_table(family, t_grid, xy_samples):
    xs, ys = xy_samples
    b = family.bind(xs, ys)
    t = np.broadcast_to(np.asarray(t_grid, dtype=float)[:, None], (len(t_grid), len(xs)))
    return t * b.phi(t) / b.Phi(t)


def estimate_phi_bounds(family, t_grid=None, xy_samples=None):
    """Sampled (min, max) of t phi(t) / Phi(t) over the grid and point pairs."""
    if t_grid is None:
        t_grid = np.logspace(-6, 6, 121)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise InvalidInputError("t_grid is empty")
    if np.any(t_grid <= 0) or not np.all(np.isfinite(t_grid)):
        raise InvalidInputError("t_grid must lie in (0, inf)")
    if xy_samples is None:
        xy_samples = default_xy_samples(family)
    xs, ys = (np.atleast_2d(np.asarray(a, dtype=float)) for a in xy_samples)
    r = _ratio_table(family, t_grid, (xs, ys))
    return float(r.min()), float(r.max())


@dataclass
class ConditionReport:
    phi1_ok: bool
    phi2_ok: bool
    phi3_ok: bool
    delta2_ok: bool
    sampled_ratio_range: tuple
    delta2_constant: float
    symmetric: bool = True
    monotone: bool = True
    phi3_sup: float = 0.0
    violations: list = field(default_factory=list)

    @property
    def all_ok(self):
        return self.phi1_ok and self.phi2_ok and self.phi3_ok and self.delta2_ok and self.symmetric and self.monotone


def check_conditions(family, tol=1e-8, t_grid=None, xy_samples=None):
    """Sampled verification of (Phi_1), (Phi_2), (Phi_3), Delta_2, symmetry and monotonicity."""
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    if t_grid is None:
        t_grid = np.logspace(-6, 6, 121)
    t_grid = np.asarray(t_grid, dtype=float)
    if xy_samples is None:
        xy_samples = default_xy_samples(family)
    xs, ys = (np.atleast_2d(np.asarray(a, dtype=float)) for a in xy_samples)
    violations = []
    b = family.bind(xs, ys)
    T = np.broadcast_to(t_grid[:, None], (len(t_grid), len(xs)))

    phi_vals = b.phi(T)
    Phi_vals = b.Phi(T)
    ratio = T * phi_vals / Phi_vals
    rmin, rmax = float(ratio.min()), float(ratio.max())
    phi1_ok = rmin >= family.phi_minus - tol and rmax <= family.phi_plus + tol
    for k, m in zip(*np.nonzero((ratio < family.phi_minus - tol) | (ratio > family.phi_plus + tol))):
        violations.append((xs[m].tolist(), ys[m].tolist(), float(t_grid[k]), "phi1_ratio"))

    sym = family.bind(ys, xs).phi(T)
    symmetric = bool(np.all(sym == phi_vals))
    if not symmetric:
        violations.append((None, None, None, "symmetry"))
    monotone = bool(np.all(np.diff(phi_vals, axis=0) > 0)) and bool(np.all(family.bind(xs, ys).phi(np.zeros(len(xs))) == 0))
    if not monotone:
        violations.append((None, None, None, "phi_monotonicity"))

    # (Phi_2): second divided differences of s -> Phi(sqrt(s)) on a log grid
    s = t_grid**2
    F = Phi_vals
    slope = np.diff(F, axis=0) / np.diff(s)[:, None]
    curv = np.diff(slope, axis=0)
    scale = np.abs(slope[1:]) + np.abs(slope[:-1])
    bad2 = curv < -tol * scale
    phi2_ok = not bool(np.any(bad2))
    for k, m in zip(*np.nonzero(bad2)):
        violations.append((xs[m].tolist(), ys[m].tolist(), float(t_grid[k + 1]), "phi2_convexity"))

    phi3_sup = float(np.max(b.Phi(np.ones(len(xs)))))
    phi3_ok = bool(np.isfinite(phi3_sup))

    d2 = b.Phi(2.0 * T) / Phi_vals
    K = float(d2.max())
    bound = 2.0**family.phi_plus
    delta2_ok = K <= bound * (1.0 + tol)
    for k, m in zip(*np.nonzero(d2 > bound * (1.0 + tol))):
        violations.append((xs[m].tolist(), ys[m].tolist(), float(t_grid[k]), "delta2"))

    return ConditionReport(
        phi1_ok=bool(phi1_ok),
        phi2_ok=phi2_ok,
        phi3_ok=phi3_ok,
        delta2_ok=bool(delta2_ok),
        sampled_ratio_range=(rmin, rmax),
        delta2_constant=K,
        symmetric=symmetric,
        monotone=monotone,
        phi3_sup=phi3_sup,
        violations=violations,
    )


@dataclass
class SobolevDiagnostics:
    s: float
    N: int
    x: list
    exponent_at_zero: list
    exponent_at_infinity: list
    integrable_at_zero: list
    divergent_at_infinity: list
    t_grid: np.ndarray | None = None
    conjugate_inverse: list = field(default_factory=list)

    @property
    def all_hold(self):
        return all(self.integrable_at_zero) and all(self.divergent_at_infinity)


def _log_slope(f, taus):
    lt = np.log(taus)
    lv = np.log(f(taus))
    return float(np.polyfit(lt, lv, 1)[0])


def _conjugate_inverse_integral(inv, s, N, t, slope0, tau0=1e-10):
    """int_0^t inv(tau) tau^{-(N+s)/N} dtau; analytic power-law tail below tau0."""
    e = (N + s) / N
    a0 = slope0 - e
    tail = float(inv(np.array([tau0]))[0]) * tau0 ** (1.0 - e) / (a0 + 1.0)
    if t <= tau0:
        return tail * (t / tau0) ** (a0 + 1.0)
    g = lambda v: float(inv(np.array([np.exp(v)]))[0]) * np.exp(v * (1.0 - e))
    body, _ = integrate.quad(g, np.log(tau0), np.log(t), epsrel=1e-10, limit=200)
    return tail + body


def sobolev_conjugate_diag(family, s, N, x_samples, t_grid=None, margin=1e-6):
    """Integrability tests for the inverse of Phi_hat_x near 0 and infinity.

    The integrand Phi_hat_x^{-1}(tau) tau^{-(N+s)/N} is fitted by a power law
    at tau in [1e-14, 1e-10] and [1e10, 1e14]; convergence at 0 needs the
    exponent > -1, divergence at infinity needs it >= -1. When both hold the
    inverse Sobolev conjugate (Phi_hat*_{x,s})^{-1} is tabulated on t_grid.
    """
    if not 0 < s < 1:
        raise InvalidInputError("s must lie in (0, 1)")
    if int(N) != N or N < 1:
        raise InvalidInputError("N must be a positive integer")
    x_samples = np.atleast_2d(np.asarray(x_samples, dtype=float))
    if t_grid is None:
        t_grid = np.logspace(-2, 2, 9)
    e = (N + s) / N
    out = SobolevDiagnostics(s=s, N=int(N), x=[], exponent_at_zero=[], exponent_at_infinity=[],
                             integrable_at_zero=[], divergent_at_infinity=[], t_grid=np.asarray(t_grid, dtype=float))
    for x in x_samples:
        b = family.bind_diag(x[None, :])
        inv = lambda v, b=b: np.ravel(b.Phi_inverse(np.asarray(v, dtype=float)[:, None]))
        slope0 = _log_slope(inv, np.logspace(-14, -10, 9))
        slope_inf = _log_slope(inv, np.logspace(10, 14, 9))
        a0, ainf = slope0 - e, slope_inf - e
        integrable = a0 > -1.0 + margin
        divergent = ainf >= -1.0 - margin
        out.x.append(x.tolist())
        out.exponent_at_zero.append(a0)
        out.exponent_at_infinity.append(ainf)
        out.integrable_at_zero.append(bool(integrable))
        out.divergent_at_infinity.append(bool(divergent))
        if integrable and divergent:
            out.conjugate_inverse.append([_conjugate_inverse_integral(inv, s, N, t, slope0) for t in out.t_grid])
        else:
            out.conjugate_inverse.append(None)
    return out


def dominated_by_sobolev_conjugate(B, family, x, s, N, a, t_samples):
    """Sampled check of B(t) <= Phi_hat*_{x,s}(a t) for the given large t.

    Uses monotonicity of the inverse conjugate: the inequality is equivalent
    to (Phi_hat*)^{-1}(B(t)) <= a t. Returns (ok, margins).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    b = family.bind_diag(x[None, :])
    inv = lambda v: np.ravel(b.Phi_inverse(np.asarray(v, dtype=float)[:, None]))
    slope0 = _log_slope(inv, np.logspace(-14, -10, 9))
    if slope0 - (N + s) / N <= -1.0:
        raise InvalidInputError("integrability condition at 0 fails; the Sobolev conjugate is undefined")
    margins = []
    for t in np.asarray(t_samples, dtype=float):
        lhs = _conjugate_inverse_integral(inv, s, N, float(B(t)), slope0)
        margins.append(a * t - lhs)
    margins = np.array(margins)
    return bool(np.all(margins >= 0)), margins
