"""Command-line entry point: ``nlmusielak <command> -c config.json -o outdir``.

Exit codes: 0 all asserted properties pass, 1 property failure (witnesses
in witness.txt), 2 I/O or parse error, 3 validation error, 4 internal error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .config import ConfigError, parse_config
from .errors import InternalConsistencyError, InvalidInputError
from .fields import box_sample_points
from .io import emit_results, format_value
from .musielak import check_conditions, sobolev_conjugate_diag
from .operators import identity_residuals
from .problem import ProblemSpec
from .solver import (
    SWEEP_COLUMNS,
    Ball,
    Global,
    MultiStart,
    estimate_constants,
    gradcheck,
    gradient_J,
    minimize,
    sweep_lambda,
)
from .spaces import relation_suite

__all__ = ["main", "run_command", "COMMANDS", "EXIT_OK", "EXIT_PROPERTY", "EXIT_IO", "EXIT_VALIDATION", "EXIT_INTERNAL"]

EXIT_OK, EXIT_PROPERTY, EXIT_IO, EXIT_VALIDATION, EXIT_INTERNAL = 0, 1, 2, 3, 4

GREEN_TOL = 1e-12
GRADCHECK_TOL = 1e-5
RELATION_TOL = 1e-7

log = logging.getLogger("nonlocal_musielak")


def _problem(cfg, lam=None):
    return ProblemSpec.build(
        cfg.domain(), cfg.musielak_family(), cfg.reaction_family(), float(cfg.s),
        beta=cfg.beta_field(), lam=cfg.lam if lam is None else lam,
    )


def _constants_table(c):
    cols = ("c_emb", "lambda_star", "lambda_star_upper", "probe_threshold", "q_exp", "t0", "rho")
    return cols, [[getattr(c, k) for k in cols]]


def cmd_verify_family(cfg):
    fam = cfg.musielak_family()
    box = cfg.box()
    rep = check_conditions(fam)
    cond = [
        ["phi1", rep.phi1_ok, list(rep.sampled_ratio_range)],
        ["phi2", rep.phi2_ok, ""],
        ["phi3", rep.phi3_ok, rep.phi3_sup],
        ["delta2", rep.delta2_ok, rep.delta2_constant],
        ["symmetry", rep.symmetric, ""],
        ["monotonicity", rep.monotone, ""],
    ]
    pts = box_sample_points(box, 3)
    diag = sobolev_conjugate_diag(fam, float(cfg.s), box.shape[0], pts)
    sob = [
        [x, z, i, h9, h10]
        for x, z, i, h9, h10 in zip(diag.x, diag.exponent_at_zero, diag.exponent_at_infinity, diag.integrable_at_zero, diag.divergent_at_infinity)
    ]
    tables = {
        "conditions.csv": (("check", "ok", "value"), cond),
        "sobolev.csv": (("x", "exponent_at_zero", "exponent_at_infinity", "integrable_at_zero", "divergent_at_infinity"), sob),
        "condition_violations.csv": (("x", "y", "t", "check"), [list(v) for v in rep.violations]),
    }
    witnesses = [f"{v[3]} failed at x={v[0]} y={v[1]} t={v[2]}" for v in rep.violations]
    if not rep.all_ok and not witnesses:
        witnesses = [f"{r[0]} failed" for r in cond if not r[1]]
    return tables, witnesses


def cmd_verify_space(cfg):
    prob = _problem(cfg)
    rep = relation_suite(prob, n_samples=cfg.n_samples, seed=cfg.seed, tol=RELATION_TOL, norm_tol=cfg.norm_tol)
    witnesses = [" ".join(format_value(v) for v in r) for r in rep.violations]
    return {"relations.csv": (rep.COLUMNS, rep.rows)}, witnesses


def cmd_green_check(cfg):
    prob = _problem(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = prob.mesh.n_cells
    rows, witnesses = [], []
    for k in range(cfg.n_fields):
        u, v = rng.uniform(-1.0, 1.0, n), rng.uniform(-1.0, 1.0, n)
        r = identity_residuals(u, v, prob)
        worst = max(r.rel1, r.rel2)
        rows.append([k, r.r1, r.scale1, r.rel1, r.r2, r.scale2, r.rel2, worst])
        if worst > GREEN_TOL:
            witnesses.append(f"sample {k}: rel1={r.rel1!r} rel2={r.rel2!r}")
    header = ("sample", "r1", "scale1", "rel1", "r2", "scale2", "rel2", "max_rel")
    return {"green.csv": (header, rows)}, witnesses


def cmd_gradcheck(cfg):
    prob = _problem(cfg)
    rng = np.random.default_rng(cfg.seed)
    rows, witnesses = [], []
    for k in range(cfg.n_fields):
        u = rng.uniform(-1.0, 1.0, prob.mesh.n_cells)
        err = gradcheck(prob, u)
        rows.append([k, err, float(np.linalg.norm(gradient_J(u, prob)))])
        if not err <= GRADCHECK_TOL:
            witnesses.append(f"sample {k}: max relative error {err!r}")
    return {"gradcheck.csv": (("sample", "max_rel_error", "grad_norm"), rows)}, witnesses


def _result_row(cfg, lam, res):
    return [lam, res.mode, res.J, res.norm_u, res.grad_norm, res.neumann_residual_max,
            res.classification, res.iterations, res.converged, res.stagnated, cfg.seed]


def cmd_solve(cfg):
    prob = _problem(cfg)
    const = estimate_constants(prob, cfg.rho, cfg.n_const_samples, cfg.t0, cfg.seed, cfg.norm_tol)
    if cfg.mode == "ball" or (cfg.mode == "auto" and prob.lam < const.lambda_star):
        mode = Ball(cfg.rho)
    else:
        mode = Global(cfg.t0)
    res = minimize(prob, mode, MultiStart(4, cfg.seed), tol_grad=cfg.tol_grad, max_iter=cfg.max_iter,
                   tol=cfg.tol, lambda_star=const.lambda_star, seed=cfg.seed)
    m = prob.mesh
    dims = ["x", "y"][: m.dimension]
    sol = [[k, *m.centers[k].tolist(), m.regions[k], res.u[k]] for k in range(m.n_cells)]
    header = ("lambda", "mode", "J", "norm_u", "grad_norm", "neumann_residual_max",
              "classification", "iterations", "converged", "stagnated", "seed")
    tables = {
        "solution.csv": (("cell_id", *dims, "region", "u"), sol),
        "result.csv": (header, [_result_row(cfg, prob.lam, res)]),
        "constants.csv": _constants_table(const),
    }
    witnesses = [] if res.converged else [f"grad_norm {res.grad_norm!r} > tol_grad {cfg.tol_grad!r}"]
    return tables, witnesses


def cmd_sweep(cfg):
    prob = _problem(cfg)
    const = estimate_constants(prob, cfg.rho, cfg.n_const_samples, cfg.t0, cfg.seed, cfg.norm_tol)
    grid = cfg.lambda_values(const)
    rows = sweep_lambda(prob, grid, const, n_sphere=cfg.n_sphere, tol_grad=cfg.tol_grad,
                        max_iter=cfg.max_iter, seed=cfg.seed)
    table = [[r[c] for c in SWEEP_COLUMNS] for r in rows]
    witnesses = [f"lambda {r['lambda']!r}: grad_norm {r['grad_norm']!r} > tol_grad" for r in rows
                 if not r["grad_norm"] <= cfg.tol_grad]
    return {"sweep.csv": (SWEEP_COLUMNS, table), "constants.csv": _constants_table(const)}, witnesses


COMMANDS = {
    "verify-family": cmd_verify_family,
    "verify-space": cmd_verify_space,
    "green-check": cmd_green_check,
    "gradcheck": cmd_gradcheck,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
}


def run_command(cmd, cfg, out_dir):
    """Run ``cmd`` and emit its artifacts; returns the exit code."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise PermissionError(f"{out_dir} is not writable")
    except OSError as exc:
        print(f"cannot write results to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        tables, witnesses = COMMANDS[cmd](cfg)
    except InvalidInputError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InternalConsistencyError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    try:
        emit_results(tables, out_dir, cfg, cmd)
        if witnesses:
            with open(os.path.join(out_dir, "witness.txt"), "w", encoding="utf-8") as fh:
                fh.write("\n".join(witnesses) + "\n")
    except OSError as exc:
        print(f"cannot write results to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    if witnesses:
        print(f"{cmd}: {len(witnesses)} property failure(s)", file=sys.stderr)
        for w in witnesses[:10]:
            print(f"  {w}", file=sys.stderr)
        return EXIT_PROPERTY
    print(f"{cmd}: ok ({', '.join(sorted(tables))} written to {out_dir})")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="nlmusielak", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("-c", "--config", required=True, help="JSON run configuration")
    ap.add_argument("-o", "--out", required=True, help="output directory")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    try:
        return run_command(args.command, cfg, args.out)
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
