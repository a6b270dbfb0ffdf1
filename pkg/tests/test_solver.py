import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracplateau.domain import ExteriorData, Grid1D, ObstacleSpec, PsiSpec
from fracplateau.functional import ScalarField
from fracplateau.solver import (ObstacleProblem, apriori_bounds_check, complementarity_check,
                                kkt_residual, project, solve)

QUAD = ObstacleSpec((-0.4, 0.4), PsiSpec("quadratic", 0.6, 0.0, -2.0))


def small(s=0.5, phi=None, obstacle=None, h=1.0 / 16, W=4.0):
    return ObstacleProblem.build(s, W=W, h=h, phi=phi or ExteriorData.cone(2.0),
                                 obstacle=obstacle)


@pytest.fixture(scope="module")
def quad_report():
    return solve(small(obstacle=QUAD))


def test_problem_validation():
    with pytest.raises(ValueError):
        small(obstacle=ObstacleSpec((-2.0, 0.4)))
    with pytest.raises(ValueError):
        ObstacleProblem.build(0.5, W=4.0, h=1.0 / 16, obstacle=QUAD, M=0.1)
    P = small(obstacle=QUAD)
    assert np.isneginf(P.lower[~P.grid.dof_obstacle_mask]).all()
    assert P.M == P.apriori_bound + 1.0


def test_constant_data_gives_constant_solution():
    P = small(phi=ExteriorData.constant(0.25),
              obstacle=ObstacleSpec((-0.4, 0.4), PsiSpec("constant", 0.0)))
    r = solve(P)
    assert r.certified
    assert np.max(np.abs(r.dofs - 0.25)) <= 1e-8


def test_certified_obstacle_solve(quad_report):
    r = quad_report
    assert r.certified and r.kkt_residual <= 1e-8 and r.message == "converged"
    b = apriori_bounds_check(r)
    assert b.psi_feasible and b.jbond_holds
    assert complementarity_check(r).ok
    assert 0.0 < r.coincidence_fraction <= 1.0


def test_energy_history_nonincreasing(quad_report):
    h = np.array([e for e in quad_report.energy_history if np.isfinite(e)])
    assert np.all(np.diff(h) <= 1e-10 * (1 + np.abs(h[:-1])))


def test_symmetric_data_gives_symmetric_solution(quad_report):
    U = quad_report.dofs
    assert np.allclose(U, U[::-1], atol=1e-7)


def test_pgd_agrees_with_newton(quad_report):
    r = solve(small(obstacle=QUAD), method="pgd", max_iters=20000, tol=1e-6)
    assert r.certified
    assert np.max(np.abs(r.dofs - quad_report.dofs)) <= 1e-4
    assert r.energy.total >= quad_report.energy.total - 1e-9


def test_presolve_does_not_change_the_minimizer(quad_report):
    r = solve(small(obstacle=QUAD), presolve=False)
    assert r.certified
    assert np.max(np.abs(r.dofs - quad_report.dofs)) <= 1e-7


def test_unknown_method():
    with pytest.raises(ValueError):
        solve(small(), method="bfgs")


def test_comparison_principle():
    lo = solve(small(phi=ExteriorData.cone(1.0, 0.0)))
    hi = solve(small(phi=ExteriorData.cone(1.0, 0.5)))
    assert np.all(hi.dofs >= lo.dofs - 1e-9)


def test_complementarity_reports_violations(quad_report):
    c = complementarity_check(quad_report, ctol=-1.0)
    assert not c.ok and c.violations


def test_kkt_residual_zero_at_constrained_point():
    U = np.array([0.0, 1.0])
    lower = np.array([0.0, -np.inf])
    assert kkt_residual(U, np.array([2.0, 0.0]), lower, 0.5) == 0.0
    assert kkt_residual(U, np.array([-2.0, 0.0]), lower, 0.5) == pytest.approx(2.0)


@given(st.integers(0, 2 ** 31))
def test_projection_properties(seed):
    rng = np.random.default_rng(seed)
    from fracplateau.domain import Domain1D
    g = Grid1D(Domain1D(-1.0, 1.0, 1.0), 0.125, QUAD)
    vals = rng.uniform(-1, 1, g.nodes.size)
    u = ScalarField(g, vals, ExteriorData.constant(0.0))
    p = project(u, QUAD)
    m = g.obstacle_mask
    assert np.all(p.values[m] >= QUAD.values(g.nodes[m]))
    assert np.array_equal(p.values[~m], vals[~m])
    assert np.array_equal(project(p, QUAD).values, p.values)


def test_small_s_stickiness_solution_is_flat_off_obstacle():
    P = ObstacleProblem.build(0.05, W=20.0, h=1.0 / 32, phi=ExteriorData.cone(2.0),
                              obstacle=ObstacleSpec((-0.4, 0.4), PsiSpec("constant", 0.5)))
    r = solve(P)
    assert r.certified and r.coincidence_fraction == 1.0
    off = r.dofs[~r.obstacle_mask]
    assert off.max() < -1e4 and np.ptp(off) < 1e-3 * abs(off.min())


def test_minimizer_independent_of_the_initial_guess(quad_report):
    r = solve(small(obstacle=QUAD), init="phi")
    assert r.certified
    assert np.max(np.abs(r.dofs - quad_report.dofs)) <= 10 * 1e-8 * max(1.0, np.max(np.abs(r.dofs)))
