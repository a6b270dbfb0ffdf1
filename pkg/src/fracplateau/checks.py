"""Quick invariant suites run by the ``check`` command."""

from dataclasses import dataclass
import math

import numpy as np

from .domain import (Domain1D, ExteriorData, Grid1D, ObstacleSpec, PsiSpec, delta_neighborhood,
                     signed_distance)
from .functional import Functional
from .kernel import KernelSpec
from .solver import ObstacleProblem, apriori_bounds_check, complementarity_check, project, solve


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _res(suite, name, ok, detail=""):
    return CheckResult(suite, name, bool(ok), detail)


def kernel_suite(rng):
    out = []
    for s in (0.3, 0.7):
        k = KernelSpec(1, s)
        t = np.linspace(-50.0, 50.0, 1000)
        err = max(float(np.max(np.abs(k.g(t) - k.g(-t)))),
                  float(np.max(np.abs(k.G(t) + k.G(-t)))),
                  float(np.max(np.abs(k.GG(t) - k.GG(-t)))),
                  float(np.max(np.abs(k.Gbar(t) + k.Gbar(-t) - 2.0 * k.Lambda))))
        out.append(_res("kernel", f"parity s={s}", err <= 1e-9, f"max error {err:.2e}"))
        t1, t2 = rng.uniform(-20, 20, (2, 1000))
        th = rng.uniform(0, 1, 1000)
        gap = k.GG(th * t1 + (1 - th) * t2) - th * k.GG(t1) - (1 - th) * k.GG(t2)
        out.append(_res("kernel", f"convexity s={s}", np.all(gap <= 1e-12),
                        f"max gap {float(gap.max()):.2e}"))
        tt = np.linspace(-1e3, 1e3, 1001)
        lo = k.Lambda * np.abs(tt) - k.lambda_small - 1e-9
        hi = k.Lambda * np.abs(tt) + 1e-9
        gg = k.GG(tt)
        out.append(_res("kernel", f"Lipschitz bracket s={s}", np.all((gg >= lo) & (gg <= hi))))
        x = rng.uniform(0.1, 5.0, 50) * rng.choice([-1, 1], 50)
        step = 1e-5
        d1 = (k.GG(x + step) - k.GG(x - step)) / (2 * step)
        d2 = (k.G(x + step) - k.G(x - step)) / (2 * step)
        r1 = float(np.max(np.abs(d1 - k.G(x)) / np.abs(k.G(x))))
        r2 = float(np.max(np.abs(d2 - k.g(x)) / k.g(x)))
        out.append(_res("kernel", f"derivative chain s={s}", max(r1, r2) <= 1e-6,
                        f"relative errors {r1:.1e}, {r2:.1e}"))
    return out


def domain_suite(rng):
    om = Domain1D(-1.0, 1.0)
    d = np.sort(rng.uniform(-0.4, 2.0, 20))
    nested = all(delta_neighborhood(om, a).a >= delta_neighborhood(om, b).a
                 for a, b in zip(d, d[1:]))
    x, y = rng.uniform(-4, 4, (2, 500))
    lip = np.abs(signed_distance(om, x) - signed_distance(om, y)) <= np.abs(x - y) + 1e-15
    return [_res("domain", "neighborhoods nested", nested),
            _res("domain", "signed distance 1-Lipschitz", np.all(lip))]


def functional_suite(rng):
    out = []
    om = Domain1D(-1.0, 1.0, 4.0)
    grid = Grid1D(om, 1.0 / 16)
    phi = ExteriorData.cone(1.0, 0.3)
    for s in (0.3, 0.7):
        k = KernelSpec(1, s)
        F = Functional(k, grid, phi, 6.0)
        U = rng.uniform(-1, 1, grid.ndof)
        V = rng.uniform(-1, 1, grid.ndof)
        g = F.gradient(U)
        t = 1e-5
        fd = (F.energy(U + t * V) - F.energy(U - t * V)) / (2 * t)
        rel = abs(fd - g @ V) / abs(fd)
        out.append(_res("functional", f"gradient vs differences s={s}", rel <= 1e-6,
                        f"relative error {rel:.1e}"))
        U2 = rng.uniform(-1, 1, grid.ndof)
        th = 0.37
        gap = F.energy(th * U + (1 - th) * U2) - th * F.energy(U) - (1 - th) * F.energy(U2)
        out.append(_res("functional", f"convexity s={s}", gap <= 1e-10, f"gap {gap:.2e}"))
    return out


def solver_suite(rng):
    out = []
    P = ObstacleProblem.build(0.5, W=4.0, h=1.0 / 16, phi=ExteriorData.constant(0.25),
                              obstacle=ObstacleSpec((-0.4, 0.4), PsiSpec("constant", 0.0)))
    r = solve(P)
    out.append(_res("solver", "constant data gives constant solution",
                    r.certified and np.max(np.abs(r.dofs - 0.25)) <= 1e-8,
                    f"residual {r.kkt_residual:.1e}"))
    ob = ObstacleSpec((-0.4, 0.4), PsiSpec("quadratic", 0.6, 0.0, -2.0))
    P = ObstacleProblem.build(0.5, W=4.0, h=1.0 / 16, phi=ExteriorData.cone(2.0), obstacle=ob)
    r = solve(P)
    b = apriori_bounds_check(r)
    c = complementarity_check(r)
    out.append(_res("solver", "certified obstacle solve", r.certified,
                    f"residual {r.kkt_residual:.1e}"))
    out.append(_res("solver", "feasible and bounded", b.psi_feasible and b.jbond_holds,
                    f"sup {b.sup_norm:.3f} bound {b.bound:.3f}"))
    out.append(_res("solver", "complementarity", c.ok, f"{len(c.violations)} violations"))
    hist = np.array([e for e in r.energy_history if np.isfinite(e)])
    out.append(_res("solver", "energy nonincreasing",
                    np.all(np.diff(hist) <= 1e-10 * (1 + np.abs(hist[:-1])))))
    u = project(r.solution, ob)
    out.append(_res("solver", "projection idempotent",
                    np.array_equal(project(u, ob).values, u.values)))
    return out


def geometry_suite(rng):
    from .geometry import (Disk, HalfPlane, PixelGrid, PixelSet, Subgraph, alpha_at_infinity,
                           default_geometry, equivalence_offset, interaction, mean_curvature)

    out = []
    k = KernelSpec(1, 0.5)
    a = alpha_at_infinity(k, HalfPlane.below(0.0))
    out.append(_res("geometry", "alpha of a half-plane is pi", a.alpha_bar == math.pi))
    a = alpha_at_infinity(k, Disk(0.0, 0.0, 1.0))
    out.append(_res("geometry", "alpha of a bounded set is 0", a.alpha_bar == 0.0))
    a = alpha_at_infinity(k, Subgraph.of(ExteriorData.cone(1.0)))
    out.append(_res("geometry", "alpha of the right-angle cone",
                    abs(a.alpha_bar - 0.5 * math.pi) <= 1e-15))
    h = mean_curvature(k, HalfPlane.below(0.0), (0.0, 0.0)).value
    out.append(_res("geometry", "half-plane curvature vanishes", abs(h) <= 1e-10, f"{h:.1e}"))
    g = PixelGrid.around(-2, 2, -2, 2, 1.0 / 8)
    A = PixelSet.box(g, -1, -0.25, -1, 1)
    B = PixelSet.box(g, 0.25, 1, -0.5, 0.5)
    lab, lba = interaction(k, A, B), interaction(k, B, A)
    out.append(_res("geometry", "interaction symmetric", lab == lba, f"{lab!r} {lba!r}"))
    grid, om = default_geometry(h=1.0 / 8)
    n = round(om.diam / grid.h)
    u1 = rng.integers(-8, 9, n) / 8.0
    u2 = rng.integers(-8, 9, n) / 8.0
    off, err = equivalence_offset(k, u1, u2, 1.0, om, ExteriorData.constant(0.25), grid,
                                  return_error=True)
    out.append(_res("geometry", "perimeter minus functional is field independent",
                    abs(off) <= 2.0 * err, f"offset {off:.1e}, tolerance {2 * err:.1e}"))
    return out


def appendix_suite(rng):
    from .geometry import (SmoothFunction, dome_profile, osculating_identity_check,
                           paraboloid_bound_check, verify_osculating_ball)

    q = np.linspace(-1.0, 1.0, 1000)
    sn = SmoothFunction(np.sin, np.cos, 1.0)
    dome = dome_profile(Domain1D(-1.0, 1.0), 2, 0.2, lambda x: 0.3 + 0.1 * np.cos(x))
    return [
        _res("appendix", "osculating identity", osculating_identity_check(q) == q.size),
        _res("appendix", "osculating ball above paraboloid",
             verify_osculating_ball(2.0, 0.5, 0.1, seed=int(rng.integers(1 << 30))).passed),
        _res("appendix", "paraboloid bound for sin",
             paraboloid_bound_check(sn, 0.5, (-1, 1), seed=int(rng.integers(1 << 30))).passed),
        _res("appendix", "dome gluing", dome.verify(seed=int(rng.integers(1 << 30))).passed),
    ]


SUITES = {
    "kernel": kernel_suite,
    "domain": domain_suite,
    "functional": functional_suite,
    "solver": solver_suite,
    "geometry": geometry_suite,
    "appendix": appendix_suite,
}


def run_checks(seed=0, suites=None):
    """Run the named suites (all by default) and return their CheckResults."""
    names = list(SUITES) if suites is None else list(suites)
    out = []
    for i, name in enumerate(names):
        rng = np.random.default_rng([seed, i])
        out.extend(SUITES[name](rng))
    return out
