"""Command line interface.

Exit codes: 0 success, 2 failed assertion, 3 configuration error.
"""

import argparse
import json
import math
from pathlib import Path
import sys

import numpy as np

from .experiments.config import (ConfigError, kernel_s, load_raw, set_section,
                                 sweep_config_from_dict)
from .experiments.report import emit_report, write_profile
from .experiments.sweeps import (THREADS_ENV, PreconditionError, default_threads,
                                 run_detachment_sweep, run_stickiness_sweep)

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG = 0, 2, 3


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment configuration")
    common.add_argument("--out", help="output directory (overrides [output] dir)")
    common.add_argument("--grid-h", type=float, help="grid spacing (overrides [domain] h)")
    common.add_argument("--tol", type=float, help="optimality tolerance (overrides [sweep] tol)")
    common.add_argument("--threads", type=int,
                        help=f"parallel solves (default: ${THREADS_ENV} or 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    p = argparse.ArgumentParser(prog="fracplateau", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve one obstacle problem")
    sub.add_parser("sweep-stickiness", parents=[common], help="s-sweep with a cone of kappa > 0")
    sub.add_parser("sweep-detachment", parents=[common], help="s-sweep with a cone of kappa < 0")
    sub.add_parser("alpha", parents=[common], help="mass at infinity of a described set")
    sub.add_parser("check", parents=[common], help="run the invariant suites")
    return p


def _raw(args):
    return load_raw(args.config) if args.config else {}


def _config(args, raw):
    return sweep_config_from_dict(raw, {"h": args.grid_h, "tol": args.tol, "out_dir": args.out})


def _threads(args):
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
        return args.threads
    return default_threads()


def _print_report(rep):
    print(f"{rep.kind} sweep (eps={rep.eps:g}):")
    for r in rep.rows:
        flag = "" if r.ok else f"  [{r.error}]"
        print(f"  s={r.s:<6g} coincidence={r.coincidence_fraction:.3f} "
              f"min_off_A={r.min_off_A:.6g} min={r.min_on_Omega:.6g} "
              f"max={r.max_on_Omega:.6g} residual={r.kkt_residual:.2e}{flag}")
    for a in rep.assertions:
        print(f"  [{'PASS' if a.passed else 'FAIL'}] {a.name}: {a.detail}")
    for r in rep.bound_violations():
        print(f"  [WARN] s={r.s:g}: sup|u| = {r.sup_norm:.6g} exceeds the a priori bound "
              f"{r.apriori_bound:.6g}")
    print(f"  thresholds: {rep.thresholds}")


def cmd_solve(args):
    from .solver import apriori_bounds_check, complementarity_check, solve

    raw = _raw(args)
    cfg = _config(args, raw)
    s = kernel_s(raw)
    problem = cfg.template.problem(s)
    rep = solve(problem, tol=cfg.tol, max_iters=cfg.max_iters, method=cfg.method)
    b = apriori_bounds_check(rep)
    c = complementarity_check(rep)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    class _Row:
        x = problem.grid.x
        u = rep.dofs
        psi = np.where(rep.obstacle_mask, rep.lower, np.nan)

    write_profile(_Row, out / "profile.csv")
    summary = {
        "s": s, "certified": rep.certified, "kkt_residual": rep.kkt_residual,
        "iterations": rep.iterations, "energy": rep.energy.total,
        "coincidence_fraction": rep.coincidence_fraction, "sup_norm": rep.sup_norm,
        "apriori_bound": rep.apriori_bound, "jbond_holds": b.jbond_holds,
        "psi_feasible": b.psi_feasible, "complementarity_violations": len(c.violations),
        "M": problem.M, "h": problem.grid.h, "W": problem.domain.W, "message": rep.message,
    }
    with open(out / "report.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for k, v in summary.items():
        print(f"{k}: {v}")
    return EXIT_OK if rep.certified and b.psi_feasible else EXIT_ASSERT


def _sweep(args, kind):
    raw = _raw(args)
    cfg = _config(args, raw)
    threads = _threads(args)
    if kind == "stickiness":
        reports = [run_stickiness_sweep(cfg, threads=threads)]
        for e in cfg.paired_eps:
            reports.append(run_stickiness_sweep(cfg, threads=threads, eps=e))
    else:
        reports = [run_detachment_sweep(cfg, threads=threads)]
    ok = True
    for i, rep in enumerate(reports):
        d = Path(cfg.out_dir) if i == 0 else Path(cfg.out_dir) / f"eps_{rep.eps:g}"
        emit_report(rep, d)
        _print_report(rep)
        ok = ok and rep.passed
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_alpha(args):
    from .domain import ExteriorData
    from .geometry.curvature import alpha_at_infinity
    from .geometry.shapes import Subgraph, shape_from_dict
    from .kernel import KernelSpec

    raw = _raw(args)
    sec = set_section(raw)
    try:
        if "shape" in sec:
            shape = shape_from_dict(sec["shape"])
        else:
            cfg = _config(args, raw)
            shape = Subgraph.of(cfg.template.phi)
        s_seq = tuple(sec.get("s_sequence", (0.1, 0.05, 0.02)))
        a = alpha_at_infinity(KernelSpec(1, 0.5), shape, s_seq, method=sec.get("method", "auto"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    res = {"alpha_bar": a.alpha_bar, "alpha_lower": a.alpha_lower, "exact": a.exact,
           "exists": a.exists, "s_values": list(map(float, a.s_values)),
           "values": list(map(float, a.values)), "half_omega": math.pi}
    print(json.dumps(res, indent=2))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        with open(Path(args.out) / "alpha.json", "w") as fh:
            json.dump(res, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if not a.exists:
        print("upper and lower limits disagree; the limit may not exist")
    return EXIT_OK


def cmd_check(args):
    from .checks import run_checks

    if args.config:
        _raw(args)  # validate only
    results = run_checks(seed=args.seed)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.suite}: {r.name} {r.detail}".rstrip())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_ASSERT


COMMANDS = {
    "solve": cmd_solve,
    "sweep-stickiness": lambda a: _sweep(a, "stickiness"),
    "sweep-detachment": lambda a: _sweep(a, "detachment"),
    "alpha": cmd_alpha,
    "check": cmd_check,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PreconditionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
