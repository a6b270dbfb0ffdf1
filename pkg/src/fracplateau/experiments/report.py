"""CSV tables, run manifest and SVG plots for a sweep."""

import csv
import json
import math
from pathlib import Path
import platform

import numpy as np

ROW_COLUMNS = ("s", "coincidence_fraction", "min_off_A", "max_on_Omega", "kkt_residual",
               "energy", "wall_ms")


def _num(v):
    """Round-trip float formatting; blank for None."""
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return _jsonable(v.item())
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _versions():
    import matplotlib
    import scipy

    from .. import __version__

    return {"fracplateau": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__, "python": platform.python_version()}


def profile_name(s):
    return f"profile_{s:g}.csv"


def write_rows(report, path):
    rec = report.config.record_wall_time
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_COLUMNS)
        for r in report.rows:
            w.writerow([_num(r.s), _num(r.coincidence_fraction), _num(r.min_off_A),
                        _num(r.max_on_Omega), _num(r.kkt_residual), _num(r.energy),
                        _num(r.wall_ms) if rec else ""])


def write_profile(row, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "u", "psi"))
        if row.x is None:
            return
        for x, u, p in zip(row.x, row.u, row.psi):
            w.writerow([_num(x), _num(u), "" if not np.isfinite(p) else _num(p)])


def manifest(report):
    cfg = report.config
    tpl = cfg.template
    return _jsonable({
        "kind": report.kind,
        "config": cfg.source,
        "resolved": {
            "problem": tpl.to_dict(),
            "eps": report.eps,
            "s_values": list(cfg.s_values),
            "k_levels": list(cfg.k_levels),
            "k0": cfg.k0,
        },
        "tolerances": {"kkt": cfg.tol, "max_iters": cfg.max_iters, "method": cfg.method,
                       "window_doubling": cfg.window_tol if cfg.window_check else None},
        "grid": {"h": tpl.h, "W": tpl.domain.W, "ncell": int(round(tpl.domain.diam / tpl.h))},
        "alpha": list(report.alpha) if report.alpha else None,
        "versions": _versions(),
        "thresholds": report.thresholds,
        "assertions": [{"name": a.name, "passed": a.passed, "detail": a.detail}
                       for a in report.assertions],
        "rows": [{"s": r.s, "certified": r.certified, "iterations": r.iterations,
                  "min_on_Omega": r.min_on_Omega, "sup_norm": r.sup_norm,
                  "apriori_bound": r.apriori_bound, "jbond_holds": r.jbond_holds,
                  "psi_feasible": r.psi_feasible, "error": r.error,
                  "W": r.W, "window_doubling_change": r.window_diff,
                  "profile": profile_name(r.s)} for r in report.rows],
        "assumptions": ["the obstacle profile is taken to be C^2 where the theory asks for it; "
                        "this is not verified"],
    })


def write_plots(report, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fracplateau"
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    ax = axes[0]
    for r in report.rows:
        if r.x is not None:
            ax.plot(r.x, r.u, label=f"s={r.s:g}")
    ax.set_yscale("symlog")
    ax.set_xlabel("x")
    ax.set_ylabel("u_s")
    ax.set_title("profiles")
    if report.rows:
        ax.legend(fontsize=7)
    s = np.array([r.s for r in report.rows])
    ax = axes[1]
    ax.plot(s, [r.coincidence_fraction for r in report.rows], "o-")
    ax.set_xscale("log")
    ax.set_xlabel("s")
    ax.set_title("coincidence fraction on A")
    ax = axes[2]
    key = "min_on_Omega" if report.kind == "detachment" else "min_off_A"
    ax.plot(s, [getattr(r, key) for r in report.rows], "o-", label=key)
    ax.plot(s, [r.max_on_Omega for r in report.rows], "s--", label="max_on_Omega")
    ax.set_xscale("log")
    ax.set_yscale("symlog")
    ax.set_xlabel("s")
    ax.legend(fontsize=7)
    ax.set_title("extrema")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(report, out_dir):
    """Write rows.csv, one profile per s, manifest.json and plots.svg into ``out_dir``.

    Returns the list of written paths.
    """
    d = Path(out_dir)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {d}: {exc}") from exc
    written = []

    def target(name):
        p = d / name
        written.append(p)
        return p

    try:
        write_rows(report, target("rows.csv"))
        for r in report.rows:
            write_profile(r, target(profile_name(r.s)))
        with open(target("manifest.json"), "w") as fh:
            json.dump(manifest(report), fh, indent=2, sort_keys=True)
            fh.write("\n")
        if report.config.plots:
            write_plots(report, target("plots.svg"))
    except OSError as exc:
        raise OSError(f"failed writing {written[-1]}: {exc}") from exc
    return written
