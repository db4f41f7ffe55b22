"""Deterministic result emission: CSV tables, a schema README and a run manifest."""
from __future__ import annotations

import csv
import os
import platform
from importlib import metadata

import numpy as np

__all__ = ["format_value", "write_csv", "write_manifest", "write_schema_readme", "SCHEMAS", "emit_results"]

# column descriptions for every CSV a command can emit
SCHEMAS = {
    "conditions.csv": {
        "check": "condition name",
        "ok": "True when the sampled check passed",
        "value": "associated sampled quantity (ratio bound, Delta2 constant, sup of Phi at 1)",
    },
    "condition_violations.csv": {
        "x": "first spatial argument (space separated)",
        "y": "second spatial argument (space separated)",
        "t": "t at which the check failed",
        "check": "failed condition",
    },
    "sobolev.csv": {
        "x": "sample point (space separated)",
        "exponent_at_zero": "fitted log-slope of the integrand near tau = 0",
        "exponent_at_infinity": "fitted log-slope of the integrand near tau = infinity",
        "integrable_at_zero": "integrability at 0 holds",
        "divergent_at_infinity": "divergence at infinity holds",
    },
    "relations.csv": {
        "sample": "sample index",
        "check": "modular_lower | modular_upper | hoelder | convexity",
        "regime": "above / below (norm > 1 or < 1) for modular checks",
        "lhs": "left-hand side",
        "rhs": "right-hand side",
        "margin": "rhs - lhs",
        "ok": "margin within tolerance",
    },
    "green.csv": {
        "sample": "random field index",
        "r1": "|sum of Laplacian plus Neumann terms|",
        "scale1": "sum of absolute summands of r1",
        "rel1": "r1 / scale1",
        "r2": "|A_s(u, v) pair part - operator pairing|",
        "scale2": "sum of absolute summands of r2",
        "rel2": "r2 / scale2",
        "max_rel": "max(rel1, rel2)",
    },
    "gradcheck.csv": {
        "sample": "random draw index",
        "max_rel_error": "max |finite difference - gradient| / max |gradient|",
        "grad_norm": "Euclidean norm of the gradient",
    },
    "constants.csv": {
        "c_emb": "empirical embedding constant",
        "lambda_star": "small-lambda threshold",
        "lambda_star_upper": "large-lambda threshold from the Omega mass of t0 * 1_Omega",
        "probe_threshold": "exact lambda where J(t0 * 1_Omega) turns negative",
        "q_exp": "exponent used in lambda_star",
        "t0": "constant probe level",
        "rho": "ball radius",
    },
    "solution.csv": {
        "cell_id": "cell index",
        "x, y": "cell center coordinates",
        "region": "Omega or Collar",
        "u": "solution value",
    },
    "result.csv": {
        "lambda": "lambda",
        "mode": "Ball or Global",
        "J": "energy at the returned u",
        "norm_u": "modular norm of u",
        "grad_norm": "Euclidean norm of the energy gradient",
        "neumann_residual_max": "max over collar cells of |N u + beta phi_hat(u)|",
        "classification": "Nontrivial iff norm_u > 10 tol and J < 0",
        "iterations": "accepted descent steps",
        "converged": "grad_norm <= tol_grad",
        "stagnated": "line search failed after 60 halvings",
        "seed": "seed",
    },
    "sweep.csv": {
        "lambda": "lambda",
        "mode": "Ball below lambda_star, Global otherwise",
        "J": "energy at the returned u",
        "norm_u": "modular norm of u",
        "grad_norm": "Euclidean norm of the energy gradient",
        "sphere_min": "min of J over random directions on the sphere of radius rho",
        "neumann_residual_max": "max over collar cells of |N u + beta phi_hat(u)|",
        "classification": "Trivial or Nontrivial",
        "iterations": "accepted descent steps",
        "seed": "seed",
    },
}


def format_value(v):
    """Shortest round-tripping text for floats; plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(format_value(x) for x in v)
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format_value(v) for v in r])


def _version(pkg):
    try:
        return metadata.version(pkg)
    except metadata.PackageNotFoundError:
        return "unknown"


def write_manifest(path, cfg, command, files):
    entries = [
        ("command", command),
        ("config_sha256", cfg.digest()),
        ("seed", cfg.seed),
        ("package_version", _version("artifact")),
        ("numpy_version", np.__version__),
        ("scipy_version", _version("scipy")),
        ("python_version", platform.python_version()),
        ("files", " ".join(sorted(files))),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in entries:
            fh.write(f"{k}={v}\n")


def write_schema_readme(path, files):
    lines = ["Column schemas of the CSV files in this directory.", ""]
    for name in sorted(files):
        schema = SCHEMAS.get(name)
        if schema is None:
            continue
        lines.append(name)
        lines += [f"  {col}: {desc}" for col, desc in schema.items()]
        lines.append("")
    lines += ["manifest.txt: flat key=value run manifest (config hash, seed, versions).", ""]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def emit_results(tables, out_dir, cfg, command):
    """Write ``tables`` ({filename: (header, rows)}), README.txt and manifest.txt.

    Raises OSError when the directory cannot be created or written.
    """
    os.makedirs(out_dir, exist_ok=True)
    for name, (header, rows) in tables.items():
        write_csv(os.path.join(out_dir, name), header, rows)
    write_schema_readme(os.path.join(out_dir, "README.txt"), tables)
    write_manifest(os.path.join(out_dir, "manifest.txt"), cfg, command, tables)
    return sorted(tables)
