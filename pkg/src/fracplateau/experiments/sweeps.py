"""Sweeps in the fractional order s for the stickiness and detachment experiments."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import math
import os
import time

import numpy as np

from ..domain import Domain1D
from ..geometry.curvature import alpha_at_infinity
from ..geometry.shapes import Subgraph, UnsupportedFarFieldError
from ..kernel import KernelSpec
from ..solver import apriori_bounds_check, solve
from .config import SweepConfig

THREADS_ENV = "FRACPLATEAU_THREADS"


class PreconditionError(ValueError):
    """The exterior datum does not satisfy the mass-at-infinity hypothesis of the sweep."""


def default_threads():
    """Worker count from the environment, 1 when unset or invalid."""
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class SweepRow:
    s: float
    coincidence_fraction: float
    min_off_A: float
    max_on_Omega: float
    min_on_Omega: float
    kkt_residual: float
    energy: float
    wall_ms: float
    certified: bool
    iterations: int
    sup_norm: float
    apriori_bound: float
    jbond_holds: bool
    psi_feasible: bool
    x: np.ndarray = field(repr=False, default=None)
    u: np.ndarray = field(repr=False, default=None)
    psi: np.ndarray = field(repr=False, default=None)
    error: str = ""
    W: float = math.nan
    window_diff: float = math.nan

    @property
    def ok(self):
        return not self.error


@dataclass
class Assertion:
    name: str
    passed: bool
    detail: str


@dataclass
class SweepReport:
    """Per-s rows sorted by decreasing s, detected thresholds and trend assertions."""

    kind: str
    config: SweepConfig
    rows: list
    thresholds: dict
    assertions: list
    alpha: tuple = None
    eps: float = 1.0

    @property
    def passed(self):
        return all(a.passed for a in self.assertions)

    def failures(self):
        return [a for a in self.assertions if not a.passed]

    def bound_violations(self):
        """Rows that break the sup bound or obstacle feasibility."""
        return [r for r in self.rows if r.ok and not (r.jbond_holds and r.psi_feasible)]


def _alpha_bar(phi):
    try:
        shape = Subgraph.of(phi)
    except UnsupportedFarFieldError:
        return None
    return alpha_at_infinity(KernelSpec(1, 0.5), shape, method="exact")


def _solve_one(config, template, s):
    problem = template.problem(s)
    t0 = time.perf_counter()
    try:
        rep = solve(problem, tol=config.tol, max_iters=config.max_iters, method=config.method)
    except Exception as exc:  # recorded, the sweep continues
        nan = math.nan
        return SweepRow(s, nan, nan, nan, nan, nan, nan, 1e3 * (time.perf_counter() - t0),
                        False, 0, nan, problem.apriori_bound, False, False,
                        error=f"{type(exc).__name__}: {exc}")
    wall = 1e3 * (time.perf_counter() - t0)
    x = problem.grid.x
    U = rep.dofs
    onA = rep.obstacle_mask
    offA = ~onA
    psi = np.where(onA, problem.lower, np.nan)
    b = apriori_bounds_check(rep)
    err = "" if rep.certified else f"not certified: {rep.message}, residual {rep.kkt_residual:.3e}"
    wdiff = math.nan
    if config.window_check and rep.certified:
        wdiff = _window_change(config, template, s, U)
    return SweepRow(
        s=float(s),
        coincidence_fraction=rep.coincidence_fraction if onA.any() else 0.0,
        min_off_A=float(np.min(U[offA])) if offA.any() else math.nan,
        max_on_Omega=float(np.max(U)),
        min_on_Omega=float(np.min(U)),
        kkt_residual=float(rep.kkt_residual),
        energy=float(rep.energy.total),
        wall_ms=wall,
        certified=rep.certified,
        iterations=rep.iterations,
        sup_norm=rep.sup_norm,
        apriori_bound=rep.apriori_bound,
        jbond_holds=b.jbond_holds,
        psi_feasible=b.psi_feasible,
        x=x.copy(), u=U.copy(), psi=psi,
        error=err,
        W=problem.domain.W,
        window_diff=wdiff,
    )


def _window_change(config, template, s, U):
    """Relative sup change of the solution when the window half width is doubled."""
    om = template.domain
    wide = replace(template, domain=Domain1D(om.a, om.b, 2.0 * om.W))
    try:
        rep = solve(wide.problem(s), tol=config.tol, max_iters=config.max_iters,
                    method=config.method, u0=U)
    except Exception:  # reported as a failed check
        return math.inf
    if not rep.certified:
        return math.inf
    return float(np.max(np.abs(rep.dofs - U)) / max(1.0, float(np.max(np.abs(U)))))


def _run(config, template, threads):
    threads = default_threads() if threads is None else max(1, int(threads))
    s_values = sorted(config.s_values, reverse=True)
    if threads == 1:
        rows = [_solve_one(config, template, s) for s in s_values]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda s: _solve_one(config, template, s), s_values))
    rows.sort(key=lambda r: -r.s)
    return rows


def _threshold(rows, pred):
    """Largest tested s from which ``pred`` holds at every smaller tested s (None if never)."""
    best = None
    for r in reversed(rows):  # increasing s
        if r.ok and pred(r):
            best = r.s
        else:
            break
    return best


def _monotone(vals, increasing, strict=False):
    v = np.asarray(vals, dtype=float)
    if v.size < 2 or np.any(~np.isfinite(v)):
        return v.size < 2
    d = np.diff(v)
    if increasing:
        return bool(np.all(d > 0)) if strict else bool(np.all(d >= 0))
    return bool(np.all(d < 0)) if strict else bool(np.all(d <= 0))


def window_assertion(rows, tol):
    bad = [r.s for r in rows if r.ok and not r.window_diff <= tol]
    diffs = [r.window_diff for r in rows]
    return Assertion("doubling the window changes the solutions below tolerance", not bad,
                     f"relative changes {diffs}, tolerance {tol:g}, failed s: {bad}")


def stickiness_assertions(rows):
    """Trend checks over the tested s grid (rows sorted by decreasing s)."""
    out = []
    failed = [r.s for r in rows if not r.ok]
    out.append(Assertion("all solves certified", not failed, f"failed s: {failed}"))
    cf = [r.coincidence_fraction for r in rows]
    out.append(Assertion("coincidence fraction nondecreasing as s decreases",
                         _monotone(cf, True), f"{cf}"))
    last = rows[-1] if rows else None
    out.append(Assertion("full coincidence at the smallest s",
                         bool(last and last.ok and last.coincidence_fraction == 1.0),
                         f"{last.coincidence_fraction if last else None}"))
    mins = [r.min_off_A for r in rows]
    if rows and all(math.isnan(m) for m in mins):
        out.append(Assertion("minimum off the obstacle", True, "obstacle covers Omega"))
        return out
    out.append(Assertion("min off A nonincreasing as s decreases", _monotone(mins, False),
                         f"{mins}"))
    out.append(Assertion("min off A strictly decreasing over the last three s",
                         len(mins) >= 3 and _monotone(mins[-3:], False, strict=True),
                         f"{mins[-3:]}"))
    return out


def detachment_assertions(rows, levels):
    out = []
    failed = [r.s for r in rows if not r.ok]
    out.append(Assertion("all solves certified", not failed, f"failed s: {failed}"))
    mins = [r.min_on_Omega for r in rows]
    out.append(Assertion("min on Omega nondecreasing as s decreases", _monotone(mins, True),
                         f"{mins}"))
    last = rows[-1] if rows else None
    k = max(levels)
    out.append(Assertion(f"min on Omega >= {k:g} at the smallest s",
                         bool(last and last.ok and last.min_on_Omega >= k),
                         f"{last.min_on_Omega if last else None}"))
    has_A = bool(last and last.psi is not None and np.isfinite(last.psi).any())
    out.append(Assertion("no coincidence at the smallest s",
                         bool(last and last.ok and (not has_A or last.coincidence_fraction == 0.0)),
                         f"{last.coincidence_fraction if last else None}"))
    return out


def run_stickiness_sweep(config, threads=None, eps=None, alpha_certified=False):
    """Solve for every s and check the stickiness trends.

    Parameters
    ----------
    config : SweepConfig
    threads : int, optional
        Parallel solves; defaults to the FRACPLATEAU_THREADS environment value.
    eps : float, optional
        Override the obstacle scaling of the template.
    alpha_certified : bool
        Accept exterior data whose mass at infinity cannot be computed exactly.

    Raises
    ------
    PreconditionError
        When the upper mass at infinity of the subgraph of phi is not below pi.
    """
    tpl = config.template if eps is None else config.template.with_eps(eps)
    a = _alpha_bar(tpl.phi)
    if a is None:
        if not alpha_certified:
            raise PreconditionError("mass at infinity of the exterior datum is unknown")
    elif not a.alpha_bar < math.pi:
        raise PreconditionError(f"alpha_bar = {a.alpha_bar} is not below pi")
    rows = _run(config, tpl, threads)
    th = {"coincidence": _threshold(rows, lambda r: r.coincidence_fraction == 1.0)}
    for k in config.k_levels:
        th[f"min_off_A<=-{k:g}"] = _threshold(rows, lambda r, k=k: r.min_off_A <= -k)
    checks = stickiness_assertions(rows)
    if config.window_check:
        checks.append(window_assertion(rows, config.window_tol))
    return SweepReport("stickiness", config, rows, th, checks,
                       None if a is None else (a.alpha_bar, a.alpha_lower), tpl.obstacle.eps)


def run_detachment_sweep(config, threads=None, alpha_certified=False):
    """Solve for every s and check that the solutions rise above every k level.

    Raises
    ------
    PreconditionError
        When the lower mass at infinity of the subgraph of phi is not above pi.
    """
    tpl = config.template
    a = _alpha_bar(tpl.phi)
    if a is None:
        if not alpha_certified:
            raise PreconditionError("mass at infinity of the exterior datum is unknown")
    elif not a.alpha_lower > math.pi:
        raise PreconditionError(f"alpha_lower = {a.alpha_lower} is not above pi")
    rows = _run(config, tpl, threads)
    th = {"no_coincidence": _threshold(rows, lambda r: r.coincidence_fraction == 0.0)}
    for k in config.k_levels:
        th[f"min_on_Omega>={k:g}"] = _threshold(rows, lambda r, k=k: r.min_on_Omega >= k)
    checks = detachment_assertions(rows, config.k_levels)
    if config.window_check:
        checks.append(window_assertion(rows, config.window_tol))
    return SweepReport("detachment", config, rows, th, checks,
                       None if a is None else (a.alpha_bar, a.alpha_lower), tpl.obstacle.eps)
