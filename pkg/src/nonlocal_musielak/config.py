"""Run configuration: JSON parsing, defaults and cross-field validation."""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import InvalidInputError, ValidationError
from .fields import ScalarField
from .mesh import DomainSpec
from .musielak import MusielakFamily
from .reaction import ReactionFamily

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_lambda_entry"]


class ConfigError(Exception):
    """Configuration failure carrying the process exit code (2 I/O/parse, 3 validation)."""

    def __init__(self, message, exit_code):
        super().__init__(message)
        self.exit_code = exit_code


_LAMBDA_RE = re.compile(r"^\s*([0-9.eE+-]+)\s*\*\s*(lambda_star|lambda_star_upper)\s*$")


def parse_lambda_entry(entry):
    """A grid entry is a number or ``"<factor>*lambda_star[_upper]"``; returns (factor, ref)."""
    if isinstance(entry, bool):
        raise ValidationError(f"bad lambda grid entry {entry!r}")
    if isinstance(entry, (int, float)):
        return float(entry), None
    m = _LAMBDA_RE.match(str(entry))
    if not m:
        raise ValidationError(f"bad lambda grid entry {entry!r}; use a number or '<c>*lambda_star[_upper]'")
    return float(m.group(1)), m.group(2)


@dataclass
class RunConfig:
    omega: list
    family: dict
    reaction: dict
    s: float
    collar_width: float = 0.5
    mesh_size: float = 1.0 / 32
    beta: object = 0.0
    lam: float = 0.0
    rho: float = 0.5
    t0: float = 2.0
    tol: float = 1e-8
    tol_grad: float = 1e-6
    norm_tol: float = 1e-9
    max_iter: int = 50000
    seed: int = 0
    mode: str = "auto"
    n_samples: int = 100
    n_sphere: int = 200
    n_fields: int = 50
    n_const_samples: int = 50
    lambda_grid: list = field(default_factory=list)

    REQUIRED = ("omega", "family", "reaction", "s")
    ALIASES = {"lambda": "lam", "R_col": "collar_width", "h": "mesh_size"}

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ValidationError("config must be a JSON object")
        d = {cls.ALIASES.get(k, k): v for k, v in d.items()}
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        missing = [k for k in cls.REQUIRED if k not in d]
        if missing:
            raise ValidationError(f"missing required config keys: {missing}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def digest(self):
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    # typed views ---------------------------------------------------------

    def domain(self):
        return DomainSpec(self.omega, self.collar_width, self.mesh_size)

    def box(self):
        return np.atleast_2d(np.asarray(self.omega, dtype=float))

    def musielak_family(self):
        d = dict(self.family)
        kind = d.pop("kind", "power")
        p = ScalarField.from_dict(d.pop("p", 2.0))
        alpha = float(d.pop("alpha", 0.0))
        extra = {k: float(d.pop(k)) for k in ("phi_minus", "phi_plus") if k in d}
        if d:
            raise ValidationError(f"unknown family keys: {sorted(d)}")
        if kind == "custom":
            raise ValidationError("custom families are available from Python only")
        box = self.box()
        if kind == "power_times_log":
            return MusielakFamily.power_times_log(p, alpha=alpha, box=box, **extra)
        if kind not in ("power", "power_over_log"):
            raise ValidationError(f"unknown family kind {kind!r}")
        return getattr(MusielakFamily, kind)(p, box=box, **extra)

    def reaction_family(self):
        d = dict(self.reaction)
        kind = d.pop("kind", "pure_power")
        q = ScalarField.from_dict(d.pop("q", 2.0))
        c = {k: float(d.pop(k)) for k in ("c1", "c2") if k in d}
        if d:
            raise ValidationError(f"unknown reaction keys: {sorted(d)}")
        return ReactionFamily(kind, q, box=tuple(map(tuple, self.box())), **c)

    def beta_field(self):
        return ScalarField.from_dict(self.beta)

    def lambda_values(self, constants=None):
        out = []
        for e in self.lambda_grid:
            c, ref = parse_lambda_entry(e)
            if ref is None:
                out.append(c)
            else:
                if constants is None:
                    raise InvalidInputError("relative lambda entries need the estimated constants")
                out.append(c * getattr(constants, ref))
        return out

    def validate(self):
        """Cross-field checks; raises ValidationError naming the violated constraint."""
        try:
            s = float(self.s)
        except (TypeError, ValueError):
            raise ValidationError("s must be a number") from None
        if not 0 < s < 1:
            raise ValidationError(f"s in (0,1) violated: s = {self.s}")
        try:
            dom = self.domain()
            box = dom.box
            ratio = (box[:, 1] - box[:, 0]) / dom.mesh_size
            if not np.allclose(ratio, np.round(ratio), rtol=0, atol=1e-9):
                raise ValidationError(f"commensurate mesh violated: h = {dom.mesh_size} does not divide the sides of omega")
            fam = self.musielak_family()
            rf = self.reaction_family()
            beta = self.beta_field()
        except ValidationError:
            raise
        except (InvalidInputError, TypeError) as exc:
            raise ValidationError(str(exc)) from None
        qmin, qmax = rf.q_bounds()
        if not qmax < fam.phi_minus:
            raise ValidationError(f"q+ < phi- violated: q+ = {qmax}, phi- = {fam.phi_minus}")
        if beta.kind == "constant" and beta.value < 0:
            raise ValidationError("beta >= 0 on the collar violated")
        if not self.lam >= 0:
            raise ValidationError("lambda >= 0 violated")
        if not 0 < self.rho < 1:
            raise ValidationError("rho in (0,1) violated")
        if not self.t0 > 1:
            raise ValidationError("t0 > 1 violated")
        for k in ("tol", "tol_grad", "norm_tol"):
            if not getattr(self, k) > 0:
                raise ValidationError(f"{k} > 0 violated")
        for k in ("max_iter", "n_samples", "n_sphere", "n_fields", "n_const_samples", "seed"):
            v = getattr(self, k)
            if isinstance(v, bool) or not isinstance(v, int) or v < (0 if k == "seed" else 1):
                raise ValidationError(f"{k} must be a {'nonnegative' if k == 'seed' else 'positive'} integer")
        if self.mode not in ("auto", "ball", "global"):
            raise ValidationError("mode must be one of auto, ball, global")
        if not isinstance(self.lambda_grid, list):
            raise ValidationError("lambda_grid must be a list")
        for e in self.lambda_grid:
            parse_lambda_entry(e)


def parse_config(path):
    """Read and validate a JSON run configuration.

    Missing or unreadable files and JSON syntax errors raise ConfigError
    with exit code 2 (syntax errors report line and column); validation
    failures raise ConfigError with exit code 3.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", 2) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}", 2) from None
    try:
        return RunConfig.from_dict(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid config: {exc}", 3) from None
    except TypeError as exc:
        raise ConfigError(f"invalid config: {exc}", 3) from None
