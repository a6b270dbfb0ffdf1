"""Stickiness and detachment of fractional minimal graphs as s decreases.

Two exterior data on Omega = (-1, 1):

* a cone opening downwards (kappa = 2).  Its subgraph fills less than half
  of the plane at infinity, so the minimizers are pulled towards -infinity
  off the obstacle and cling to the obstacle on A = [-0.4, 0.4];
* a cone opening upwards (kappa = -2).  Now the subgraph fills more than
  half of the plane at infinity and the minimizers lift off the obstacle
  and rise without bound.

Run with ``python demos/stickiness_and_detachment.py``.  A coarser grid
than the default experiments keeps the run under a minute.
"""

import numpy as np

from fracplateau.domain import ExteriorData, ObstacleSpec, PsiSpec
from fracplateau.solver import ObstacleProblem, solve

H = 1.0 / 32
S_VALUES = (0.5, 0.25, 0.1, 0.05, 0.02)
A = (-0.4, 0.4)


def run(kappa, psi_level):
    obstacle = ObstacleSpec(A, PsiSpec("constant", psi_level))
    print(f"cone kappa = {kappa:+g}, obstacle psi = {psi_level} on {A}")
    print(f"{'s':>6} {'contact on A':>13} {'min off A':>14} {'max on Omega':>14} {'kkt':>9}")
    for s in S_VALUES:
        P = ObstacleProblem.build(s, W=20.0, h=H, phi=ExteriorData.cone(kappa),
                                  obstacle=obstacle)
        r = solve(P)
        x = P.grid.x
        off = (x < A[0]) | (x > A[1])
        U = r.dofs
        print(f"{s:>6g} {r.coincidence_fraction:>13.2f} {U[off].min():>14.5g} "
              f"{U.max():>14.5g} {r.kkt_residual:>9.1e}")
    print()


if __name__ == "__main__":
    # sticks: full contact on A, the rest of the graph plunges
    run(2.0, 0.5)
    # detaches: no contact, the whole graph rises
    run(-2.0, 0.0)
    print("The a-priori sup bound diam + sup|phi| on the window is",
          ObstacleProblem.build(0.5, W=20.0, h=H, phi=ExteriorData.cone(2.0)).apriori_bound,
          "\nwhich the small-s minimizers exceed by many orders of magnitude.")
