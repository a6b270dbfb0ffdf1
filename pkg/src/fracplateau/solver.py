"""Discrete obstacle problem: minimize F^M with u = phi outside Omega and
u >= eps*psi on the obstacle region, with a first-order optimality certificate."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import linalg

from .domain import Domain1D, ExteriorData, Grid1D, ObstacleSpec
from .functional import (EnergyBreakdown, Functional, ScalarField, apriori_bound,
                         default_M, default_R_far)
from .kernel import KernelSpec


class NotCertifiedWarning(RuntimeWarning):
    pass


@dataclass
class ObstacleProblem:
    """Full instance: kernel, interval, grid, exterior datum, obstacle and truncation M."""

    spec: KernelSpec
    domain: Domain1D
    grid: Grid1D
    phi: ExteriorData
    obstacle: ObstacleSpec = field(default_factory=ObstacleSpec)
    M: float = None

    def __post_init__(self):
        self.obstacle.check_inside(self.domain)
        if self.grid.omega is not self.domain and self.grid.omega != self.domain:
            raise ValueError("grid was built for a different domain")
        if self.M is None:
            self.M = default_M(self.domain, self.phi, self.obstacle)
        if self.M < self.obstacle.sup_abs():
            raise ValueError("M must be at least sup |eps psi|")

    @classmethod
    def build(cls, s, a=-1.0, b=1.0, W=None, h=1.0 / 64, phi=None, obstacle=None, M=None, n=1):
        omega = Domain1D(a, b, W)
        obstacle = obstacle if obstacle is not None else ObstacleSpec()
        grid = Grid1D(omega, h, obstacle)
        phi = phi if phi is not None else ExteriorData.constant(0.0)
        return cls(KernelSpec(n, s), omega, grid, phi, obstacle, M)

    @property
    def lower(self):
        """Lower bound per unknown: eps*psi on obstacle nodes, -inf elsewhere."""
        lb = np.full(self.grid.ndof, -np.inf)
        mask = self.grid.dof_obstacle_mask
        lb[mask] = self.obstacle.values(self.grid.x[mask])
        return lb

    @property
    def apriori_bound(self):
        return apriori_bound(self.domain, self.phi, self.obstacle)

    def functional(self, umax=0.0):
        R = default_R_far(self.domain, self.phi, self.M, umax)
        return Functional(self.spec, self.grid, self.phi, self.M, R_far=R)


@dataclass(frozen=True)
class SolveReport:
    solution: ScalarField
    energy: EnergyBreakdown
    kkt_residual: float
    coincidence_mask: np.ndarray
    ambiguous_mask: np.ndarray
    iterations: int
    sup_norm: float
    apriori_bound: float
    certified: bool
    tau0: float
    tol: float
    gradient: np.ndarray
    lower: np.ndarray
    gap: np.ndarray
    energy_history: tuple
    message: str
    method: str
    R_far: float
    contact_threshold: float
    offset: float = 0.0

    @property
    def dofs(self):
        return self.solution.dofs

    @property
    def obstacle_mask(self):
        return np.isfinite(self.lower)

    @property
    def coincidence_fraction(self):
        m = self.obstacle_mask
        if not m.any():
            return 0.0
        return float(np.mean(self.coincidence_mask[m]))


def project(u, obstacle):
    """Pointwise max(u, eps*psi) on obstacle nodes; every other node unchanged."""
    grid = u.grid
    vals = u.values.copy()
    if not obstacle.empty:
        mask = _obstacle_node_mask(grid, obstacle)
        vals[mask] = np.maximum(vals[mask], obstacle.values(grid.nodes[mask]))
    return ScalarField(grid, vals, u.exterior)


def _obstacle_node_mask(grid, obstacle):
    if obstacle is grid.obstacle or obstacle == grid.obstacle:
        return grid.obstacle_mask
    lo, hi = obstacle.region
    return grid.interior_mask & (grid.nodes >= lo) & (grid.nodes <= hi)


def kkt_residual(U, g, lower, tau):
    """|| U - P(U - tau g) ||_inf / tau for the projection onto {U >= lower}."""
    return float(np.max(np.abs(U - np.maximum(U - tau * g, lower))) / tau)


class _Rebuild(Exception):
    pass


def _line_search(slope, s0, t_max, eta=0.5, max_evals=40):
    """Step t in (0, t_max] at which the directional derivative ``slope(t)`` is nonpositive.

    Uses only derivatives, so it stays reliable when energy values are too
    large for differences to be resolved.  By convexity a nonpositive
    derivative at t guarantees F(U + t d) <= F(U).
    """
    lo, slo = 0.0, s0
    hi, shi = None, None
    t = min(1.0, t_max)
    side = 0
    for _ in range(max_evals):
        st = slope(t)
        if st <= 0.0:
            if st >= eta * s0 or t >= t_max:
                return t
            lo, slo = t, st
            if hi is None:
                t = min(2.0 * t, t_max)
                continue
            if side == -1:
                shi *= 0.5  # Illinois modification against one-sided stagnation
            side = -1
        else:
            hi, shi = t, st
            if side == 1:
                slo *= 0.5
            side = 1
        if hi - lo <= 1e-6 * hi:
            break
        t = lo - slo * (hi - lo) / (shi - slo)
        if lo == 0.0:
            # the step may overshoot by orders of magnitude: shrink geometrically
            t = max(t, 0.1 * hi)
        t = min(max(t, lo + 1e-3 * (hi - lo)), hi - 1e-3 * (hi - lo))
    return lo


def _spd_solve(H, b):
    try:
        return linalg.solve(H, b, assume_a="pos", check_finite=False)
    except (linalg.LinAlgError, ValueError):
        w, V = linalg.eigh(H)
        w = np.maximum(w, 1e-14 * max(1.0, w.max()))
        return V @ ((V.T @ b) / w)


def _plateau_step(F, U, g, free, plateau):
    """Newton step with the common shift of the far plateau as a separate unknown.

    The curvature of F along the plateau indicator is many orders of
    magnitude below the other Hessian entries once the plateau is far
    from the data, and is lost to cancellation in the assembled matrix.
    Here it is assembled pair by pair and the step is d = gam * chi + w,
    with w = 0 at one plateau node r, obtained by a Schur complement.
    """
    chi_p = plateau.astype(float)
    (gc,), (Hc,) = F.slopes(U, (chi_p,), hess=True)
    r = int(np.flatnonzero(plateau)[0])
    others = free.copy()
    others[r] = False
    a = float(chi_p @ Hc)
    K = F.hessian(U)[np.ix_(others, others)]
    b = Hc[others]
    y = _spd_solve(K, np.column_stack([b, g[others]]))
    schur = a - float(b @ y[:, 0])
    if not schur > 0:
        return None, None
    gam = (-gc + float(b @ y[:, 1])) / schur
    w = np.zeros_like(U)
    w[others] = -y[:, 1] - gam * y[:, 0]
    d = gam * chi_p + w
    d[~free] = 0.0
    return d, (gam, chi_p, w)


def _newton(F, U, lower, tol, tau, max_iters, history, limit):
    n_it = 0
    msg = "max iterations reached"
    fin = np.isfinite(lower)
    for n_it in range(1, max_iters + 1):
        g = F.gradient(U)
        r = kkt_residual(U, g, lower, tau)
        if r <= tol:
            msg = "converged"
            n_it -= 1
            break
        btol = 1e-12 * (1.0 + np.abs(np.where(fin, lower, 0.0)))
        at = fin & (U - lower <= btol)
        U = np.where(at, lower, U)
        active = at & (g > 0)
        free = ~active
        plateau = free & (F.chi > 0)
        d, split = None, None
        if plateau.any():
            d, split = _plateau_step(F, U, g, free, plateau)
        if d is None:
            d = np.zeros_like(U)
            d[free] = _spd_solve(F.hessian(U)[np.ix_(free, free)], -g[free])
        if not np.all(np.isfinite(d)) or g @ d >= 0:
            d = np.where(free, -g, 0.0)
            split = None
        neg = fin & (d < 0)
        t_max = np.inf
        if neg.any():
            t_max = float(np.min((lower[neg] - U[neg]) / d[neg]))
        t_cap = np.inf
        if np.any(d != 0):
            # keep iterates where the far-field expansion of F is accurate
            room = limit - np.max(np.abs(F.full(U)))
            t_cap = max(room, 0.0) / np.max(np.abs(d))
        if split is None:
            def slope(t, U=U, d=d):
                return float(F.gradient(U + t * d) @ d)
            s0 = float(g @ d)
        else:
            gam, chi_p, w = split

            def slope(t, U=U, d=d):
                a, b = F.slopes(U + t * d, (chi_p, w))
                return gam * a + b
            s0 = slope(0.0)
        t = _line_search(slope, s0, min(t_max, t_cap, 1e300))
        if t == 0.0:
            msg = "line search failed"
            break
        if t * np.max(np.abs(d)) <= 64 * np.finfo(float).eps * np.max(np.abs(U)):
            msg = "stalled at rounding level"
            break
        Un = U + t * d
        if np.isfinite(t_max) and t >= t_max * (1 - 1e-12):
            Un = np.where(neg & (Un - lower <= 1e-12 * (1 + np.abs(lower))), lower, Un)
        U = np.maximum(Un, lower)
        history.append(F.energy(U))
        if t >= t_cap * (1 - 1e-9) and t_cap < t_max:
            raise _Rebuild(U)
    return U, n_it, msg


def _pgd(F, U, lower, tol, tau, max_iters, history, limit, c1=1e-4):
    """Projected gradient with Barzilai-Borwein trial steps and Armijo backtracking."""
    msg = "max iterations reached"
    g = F.gradient(U)
    E = F.energy(U)
    step = tau
    prev = None
    n_it = 0
    for n_it in range(1, max_iters + 1):
        r = kkt_residual(U, g, lower, tau)
        if r <= tol:
            msg = "converged"
            n_it -= 1
            break
        if prev is not None:
            sv, yv = U - prev[0], g - prev[1]
            sy = float(sv @ yv)
            if sy > 0:
                step = float(sv @ sv) / sy
        accepted = False
        for _ in range(60):
            Un = np.maximum(U - step * g, lower)
            dU = Un - U
            gn = F.gradient(Un)
            En = F.energy(Un)
            if En <= E + c1 * float(g @ dU) or float(gn @ dU) <= 0.0:
                # sufficient decrease, or (by convexity) monotone decrease
                # certified by the derivative at the new point
                accepted = True
                break
            step *= 0.5
        if not accepted:
            msg = "backtracking failed"
            break
        if np.max(np.abs(F.full(Un))) > limit:
            prev = None
            U, g, E = Un, gn, En
            history.append(E)
            raise _Rebuild(U)
        prev = (U, g)
        U, g, E = Un, gn, En
        history.append(E)
    return U, n_it, msg


def initial_guess(problem, kind="zero"):
    """Feasible start: the projection of 0 or of the linear blend of the boundary data."""
    x = problem.grid.x
    if kind == "zero":
        U = np.zeros_like(x)
    elif kind == "phi":
        a, b = problem.domain.a, problem.domain.b
        pa, pb = problem.phi(a), problem.phi(b)
        U = pa + (pb - pa) * (x - a) / (b - a)
    else:
        raise ValueError(f"unknown initial guess {kind!r}")
    return np.maximum(U, problem.lower)


def _rigid_presolve(problem, U0, max_doublings=80, max_iters=200):
    """Move U0 along the projected rigid path U(c) = max(U0 + c, lower) to a zero slope.

    For small s the minimizer sits at a level growing like exp(C/s) while
    its shape stays bounded; reaching that level by damped Newton steps
    lets shape errors grow with it.  The slope of F along the path is
    evaluated pair by pair at the offset level c, so it stays exact for
    any |c|, and its zero is bracketed by doubling and refined by the
    Illinois rule.
    """
    lower = problem.lower
    cache = {}

    def slope(c):
        chi = (U0 + c > lower).astype(float)
        V = np.where(chi > 0, U0, np.maximum(U0 + c, lower))
        reach = abs(c) + float(np.max(np.abs(U0)))
        F = cache.get("F")
        if F is None or reach > 0.005 * F.R_far - F.series_scale:
            F = problem.functional(4.0 * reach + 10.0)
            cache["F"] = F
        F.set_offset(c, chi)
        return float(F.slopes(V, (chi,))[0]) if chi.any() else 0.0

    s0 = slope(0.0)
    if s0 == 0.0:
        return U0
    direction = -1.0 if s0 > 0 else 1.0
    lo, slo = 0.0, s0
    hi, shi = None, None
    c = 1.0
    for _ in range(max_doublings):
        sc = slope(direction * c)
        if (sc > 0) == (s0 > 0) and sc != 0.0:
            lo, slo = direction * c, sc
            c *= 2.0
        else:
            hi, shi = direction * c, sc
            break
    if hi is None:
        return U0
    side = 0
    for _ in range(max_iters):
        if abs(hi - lo) <= 1e-12 * max(1.0, abs(hi)):
            break
        m = hi - shi * (hi - lo) / (shi - slo)
        sm = slope(m)
        if sm == 0.0:
            lo = hi = m
            break
        if (sm > 0) == (slo > 0):
            lo, slo = m, sm
            if side == -1:
                shi *= 0.5
            side = -1
        else:
            hi, shi = m, sm
            if side == 1:
                slo *= 0.5
            side = 1
    c = 0.5 * (lo + hi)
    return np.maximum(U0 + c, lower)


def solve(problem, tol=1e-8, max_iters=200, method="newton", init="zero", u0=None,
          presolve=True):
    """Minimize the discrete F^M over feasible fields.

    Parameters
    ----------
    problem : ObstacleProblem
    tol : float
        Target for the projected-gradient residual
        ``||U - P(U - tau0 grad)||_inf / tau0`` with ``tau0 = h**s``.
    max_iters : int
        Iteration cap (per far-field rebuild).
    method : {"newton", "pgd"}
        Projected Newton active-set iteration with exact Hessian, or
        projected gradient with Armijo backtracking.
    init : {"zero", "phi"}
        Starting field when ``u0`` is not given.
    presolve : bool
        Shift the start rigidly to the minimum along max(U + c, lower)
        before the main iteration.

    Returns
    -------
    SolveReport
        ``certified`` is False when the residual target was not met.
    """
    lower = problem.lower
    U = np.maximum(np.asarray(u0, dtype=float), lower) if u0 is not None else initial_guess(problem, init)
    if presolve:
        U = _rigid_presolve(problem, U)
    tau = problem.grid.h ** problem.spec.s
    history = []
    iters = 0
    msg = ""
    run = _newton if method == "newton" else _pgd
    if method not in ("newton", "pgd"):
        raise ValueError(f"unknown method {method!r}")
    F = None
    polish = 0
    for _ in range(40):
        F = problem.functional(4.0 * float(np.max(np.abs(U))) + 10.0)
        c, chi = _offset(U)
        F.set_offset(c, chi)
        V = U - c * chi
        lowV = lower - c * chi
        limit = 0.005 * F.R_far - F.series_scale
        if not history:
            history.append(F.energy(V))
        try:
            V, n_it, msg = run(F, V, lowV, tol, tau, max_iters, history, limit)
            iters += n_it
        except _Rebuild as exc:
            U = F.full(exc.args[0])
            iters += 1
            history.append(float("nan"))  # the energy is redefined after a rebuild
            continue
        Un = F.full(V)
        c2, chi2 = _offset(Un)
        if (msg == "converged" or polish >= 3 or
                (np.array_equal(chi2, chi) and abs(c2 - c) <= 1e-3 * abs(c))):
            break
        # refresh the offset once the large level has settled
        polish += 1
        U = Un
        history.append(float("nan"))
    return _report(problem, F, V, lowV, tol, tau, iters, history, msg, method)


def _offset(U, big=1e6):
    """Common level of the nodes whose magnitude exceeds ``big``."""
    chi = (np.abs(U) > big).astype(float)
    if not chi.any():
        return 0.0, chi
    return float(np.median(U[chi > 0])), chi


def _report(problem, F, V, lowV, tol, tau, iters, history, msg, method):
    lower = problem.lower
    g = F.gradient(V)
    r = kkt_residual(V, g, lowV, tau)
    thr = 1e-6 * (1.0 + problem.obstacle.sup_abs())
    gap = V - lowV
    fin = np.isfinite(lower)
    coincide = fin & (gap <= thr)
    ambiguous = fin & (gap > thr) & (gap <= 10.0 * thr)
    U = F.full(V)
    field_ = ScalarField.from_dofs(problem.grid, U, problem.phi)
    return SolveReport(
        solution=field_,
        energy=F.breakdown(V),
        kkt_residual=r,
        coincidence_mask=coincide,
        ambiguous_mask=ambiguous,
        iterations=iters,
        sup_norm=float(np.max(np.abs(U))),
        apriori_bound=problem.apriori_bound,
        certified=bool(r <= tol),
        tau0=tau,
        tol=tol,
        gradient=g,
        lower=lower,
        gap=gap,
        energy_history=tuple(history),
        message=msg,
        method=method,
        R_far=F.R_far,
        contact_threshold=thr,
        offset=F.c,
    )


@dataclass(frozen=True)
class ComplementarityDiagnostics:
    supersolution_ok: np.ndarray
    solution_ok: np.ndarray
    off_obstacle_ok: np.ndarray
    contact: np.ndarray
    ambiguous: np.ndarray
    violations: tuple
    ctol: float

    @property
    def ok(self):
        return not self.violations


def complementarity_check(report, ctol=None, delta=None):
    """Sign conditions of the gradient implied by the variational inequality.

    On obstacle nodes the gradient must be >= -ctol; where ``u - eps psi >= delta``
    and off the obstacle it must vanish within ctol.  Violations are returned,
    not raised.
    """
    g = report.gradient
    U = report.dofs
    ctol = report.tol if ctol is None else ctol
    delta = 10.0 * report.contact_threshold if delta is None else delta
    onA = report.obstacle_mask
    gap = np.where(onA, report.gap, np.inf)
    supersol = ~onA | (g >= -ctol)
    away = onA & (gap >= delta)
    sol = ~away | (np.abs(g) <= ctol)
    off = onA | (np.abs(g) <= ctol)
    viol = []
    for name, ok in (("supersolution", supersol), ("solution", sol), ("off-obstacle", off)):
        for i in np.flatnonzero(~ok):
            viol.append((name, int(i), float(g[i])))
    return ComplementarityDiagnostics(supersol, sol, off, report.coincidence_mask,
                                      report.ambiguous_mask, tuple(viol), ctol)


@dataclass(frozen=True)
class BoundsRecord:
    jbond_holds: bool
    sup_norm: float
    bound: float
    margin: float
    psi_feasible: bool
    min_gap_on_A: float
    inf_on_A: float
    sup_on_omega: float


def apriori_bounds_check(report, atol=1e-8):
    """Check sup|u| against diam + max(window sup|phi|, sup|eps psi|) and obstacle feasibility."""
    U = report.dofs
    onA = report.obstacle_mask
    gap = float(np.min(report.gap[onA])) if onA.any() else math.inf
    return BoundsRecord(
        jbond_holds=bool(report.sup_norm <= report.apriori_bound + atol),
        sup_norm=report.sup_norm,
        bound=report.apriori_bound,
        margin=report.apriori_bound - report.sup_norm,
        psi_feasible=bool(gap >= -1e-12),
        min_gap_on_A=gap,
        inf_on_A=float(np.min(U[onA])) if onA.any() else math.nan,
        sup_on_omega=float(np.max(U)),
    )
