"""Batch front-end: ``solve``, ``converge``, ``diagnose`` and ``sc-lemma``.

Exit codes: 0 success, 1 usage or configuration error, 2 solver failure.
All CSV files carry a header row and write floats with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .config import ConfigError, load_config
from .oracle import final_trace_error
from .problems import reference_solution
from .solver import NonConvergence, RunState, advance, slab_top_integrals

logger = logging.getLogger("stdg")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2

# entropy residuals and L1 errors below this are treated as round-off
ROUNDOFF = 1e-13


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, header, rows):
    """Write atomically: a temporary file is renamed over ``path``."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    os.replace(tmp, path)


def make_run(cfg, n_x, refinement=1):
    return RunState(cfg.u0, cfg.scheme(), cfg["domain.x_left"], cfg["domain.x_right"],
                    n_x, cfg.pattern, cfg.dt(n_x, refinement), cfg.newton())


def run_ladder(cfg, levels):
    runs = []
    for i in range(levels):
        n_x = cfg["n_x"] * 2 ** i
        logger.info("level %d: n_x = %d", i, n_x)
        runs.append(advance(make_run(cfg, n_x, 2 ** i), cfg["T"]))
    return runs


def default_test_function(cfg):
    """Bump over the middle of the run, centred on the shock of Riemann data."""
    T, xl, xr = cfg["T"], cfg["domain.x_left"], cfg["domain.x_right"]
    if cfg["diagnostics.phi"]:
        return dg.BumpFunction(*cfg["diagnostics.phi"])
    u0 = cfg.u0
    xc = 0.5 * (xl + xr)
    if u0.kind == "riemann":
        a, b, x0 = u0.params
        speed = float(cfg.flux().f(np.array(a)) - cfg.flux().f(np.array(b))) / (a - b) \
            if a != b else 0.0
        xc = x0 + speed * 0.5 * T
    r_x = 0.3 * min(xc - xl, xr - xc, 0.5 * (xr - xl))
    return dg.BumpFunction(0.5 * T, xc, 0.4 * T, r_x)


# -- subcommands -------------------------------------------------------------------

def cmd_solve(args):
    cfg = load_config(args.config)
    out = Path(args.out or cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    run = advance(make_run(cfg, cfg["n_x"]), cfg["T"])
    for n, sol in enumerate(run.slabs):
        mesh_file = f"slab_{n:04d}.mesh"
        sol.mesh.write(out / mesh_file)
        sol.write(out / f"slab_{n:04d}.sol", mesh_file, (sol.mesh.t_lo, sol.mesh.t_hi))
    rows = [(n, t, mass, l2) for n, (t, mass, l2) in enumerate(slab_top_integrals(run))]
    write_csv(out / "series.csv", ["slab", "t", "mass", "l2_squared"], rows)
    print(f"solved {len(run.slabs)} slabs to T = {run.t:g}; output in {out}")
    return EXIT_OK


def cmd_converge(args):
    cfg = load_config(args.config)
    if args.levels < 2:
        raise ConfigError("--levels must be at least 2 for a convergence study")
    out = Path(args.out or cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    runs = run_ladder(cfg, args.levels)
    ref = reference_solution(cfg.flux(), cfg.u0, cfg["T"], cfg["domain.x_left"],
                             cfg["domain.x_right"], runs[-1].n_x)
    rows, prev = [], None
    for run in runs:
        l1, l2 = final_trace_error(run, ref.fun, ref.breakpoints)
        n_elems = run.slabs[0].mesh.n_elements * len(run.slabs)
        order = math.log(prev[1] / l1) / math.log(prev[0] / run.h) if prev else math.nan
        rows.append((run.h, n_elems, l1, l2, order))
        prev = (run.h, l1)
    write_csv(out / "convergence.csv", ["h", "n_elems", "l1_error", "l2_error", "observed_order"],
              rows)
    print(f"reference: {ref.source}; final observed L1 order {rows[-1][-1]:.3f}")
    return EXIT_OK


def diagnose(cfg, runs, seed=42):
    """Run every check over a refinement ladder and collect a report."""
    rep = dg.DiagnosticsReport()
    u0 = cfg.u0
    beta = cfg["viscosity.beta"]
    l2_0 = max(2.0 * dg.l2_balance_terms(runs[0]).initial_energy, 1e-300)

    worst_bal, worst_sign, worst_mass = 0.0, math.inf, 0.0
    for run in runs:
        bal = dg.l2_balance_terms(run)
        worst_bal = max(worst_bal, bal.residual / l2_0)
        worst_sign = min(worst_sign, bal.min_interface_term, bal.min_shock_capturing_term,
                         bal.min_temporal_jump_term, bal.min_boundary_term)
        worst_mass = max(worst_mass, dg.mass_balance(run).defect)
    rep.add("energy_balance.balance_residual", worst_bal, 1e-8, worst_bal <= 1e-8,
            "relative to |u0|^2")
    rep.add("energy_balance.min_dissipation_term", worst_sign, -1e-12, worst_sign >= -1e-12)
    rep.add("mass.defect", worst_mass, 1e-10, worst_mass <= 1e-10,
            "includes the time-integrated boundary flux")

    jb = dg.jump_bound_estimate(runs[-1])
    rep.add("jump_bound.constant", jb.constant if not jb.vacuous else math.inf, 0.0,
            jb.vacuous or jb.constant > 0, "vacuous" if jb.vacuous else f"{jb.n_facets} facets")

    if len(runs) >= 3:
        fit = dg.residual_scaling(runs)
        need = 4.0 * beta / 3.0 - 0.25
        rep.add("residual_scaling.order", fit.order if not fit.skipped else math.inf, need,
                fit.passes(need), "zero at all levels" if fit.skipped else "")
        fit = dg.viscosity_scaling(runs)
        need = beta - 0.5 - 0.25
        rep.add("viscosity_scaling.order", fit.order if not fit.skipped else math.inf, need,
                fit.passes(need), "zero at all levels" if fit.skipped else "")
        lr = dg.linf_check(runs, u0.sup)
        rep.add("linf.max_sup", max(lr.sups), lr.bound, lr.passed,
                f"finest/coarsest = {lr.sups[-1] / max(lr.sups[0], 1e-300):.4f}")

    phi = default_test_function(cfg)
    try:
        phi.check_support(cfg["T"], cfg["domain.x_left"], cfg["domain.x_right"])
    except ValueError as exc:
        rep.add("entropy", math.nan, 0.0, False, str(exc))
    else:
        flux = cfg.flux()
        for k in cfg["diagnostics.k"]:
            pair = dg.MollifiedKruzkov(flux, k, cfg["diagnostics.delta"])
            E = [dg.entropy_residual(r, pair, phi) for r in runs]
            neg = [max(-e, 0.0) if abs(e) > ROUNDOFF else 0.0 for e in E]
            ok = neg[-1] <= 0.5 * neg[0] if neg[0] > 0 else neg[-1] == 0.0
            note = "E_h >= 0 at every level" if max(neg) == 0 else ""
            rep.add(f"entropy.k={k:g}.negative_part_finest", neg[-1], 0.5 * neg[0], ok,
                    note)
            rep.add(f"entropy.k={k:g}.E_finest", E[-1], 0.0, E[-1] >= -neg[0] or ok)

    ref = reference_solution(cfg.flux(), u0, cfg["T"], cfg["domain.x_left"],
                             cfg["domain.x_right"], runs[-1].n_x)
    errs = [final_trace_error(r, ref.fun, ref.breakpoints)[0] for r in runs]
    decreasing = all(b < a or max(a, b) <= ROUNDOFF for a, b in zip(errs[:-1], errs[1:]))
    rep.add("convergence.l1_finest", errs[-1], errs[0], decreasing or len(errs) == 1,
            f"reference: {ref.source}")

    if cfg["diagnostics.probe"]:
        for p in cfg["diagnostics.p"]:
            pr = dg.sc_coercivity_probe(cfg["q"], int(p), cfg["diagnostics.trials"], seed)
            rep.add(f"coercivity.q={cfg['q']}.p={int(p)}.drift", pr.drift, 0.1, pr.drift <= 0.1,
                    f"max ratio {pr.max_ratio:.6g}, min denominator {pr.min_denominator:.3g}")
    return rep


def cmd_diagnose(args):
    cfg = load_config(args.config)
    if args.levels < 1:
        raise ConfigError("--levels must be at least 1")
    out = Path(args.out or cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg["seed"] if args.seed is None else args.seed
    runs = run_ladder(cfg, args.levels)
    rep = diagnose(cfg, runs, seed)
    tmp = out / "diagnostics.csv.tmp"
    rep.write_csv(tmp)
    os.replace(tmp, out / "diagnostics.csv")
    print(rep.summary())
    return EXIT_OK


def cmd_sc_lemma(args):
    if args.p % 2:
        raise ConfigError(f"p must be even, got {args.p}")
    if args.p < 2:
        raise ConfigError("p must be at least 2")
    if not 1 <= args.q <= 4:
        raise ConfigError("q must lie in [1, 4]")
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    seed = 42 if args.seed is None else args.seed
    pr = dg.sc_coercivity_probe(args.q, args.p, args.trials, seed)
    write_csv(out / "sc_lemma.csv",
              ["q", "p", "max_ratio", "scale_halved_max_ratio", "relative_drift",
               "min_denominator", "skipped"],
              [(args.q, args.p, pr.max_ratio, pr.max_ratio_half, pr.drift,
                pr.min_denominator, pr.n_skipped)])
    print(f"q={args.q} p={args.p}: max ratio {pr.max_ratio:.6g}, drift {pr.drift:.3g}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="stdg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, levels):
        p.add_argument("--config", required=True, help="key = value configuration file")
        p.add_argument("--out", help="output directory (default: output.dir)")
        p.add_argument("--seed", type=int, help="seed for random probes")
        if levels:
            p.add_argument("--levels", type=int, default=4, help="refinement levels")

    common(sub.add_parser("solve", help="march one run to T"), False)
    common(sub.add_parser("converge", help="refinement study against a reference"), True)
    common(sub.add_parser("diagnose", help="stability and entropy checks"), True)
    p = sub.add_parser("sc-lemma", help="coercivity probe of the projected diffusion form")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    return parser


_COMMANDS = {"solve": cmd_solve, "converge": cmd_converge, "diagnose": cmd_diagnose,
             "sc-lemma": cmd_sc_lemma}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergence as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
