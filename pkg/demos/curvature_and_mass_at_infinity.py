"""Fractional mean curvature and the mass at infinity of planar sets.

* s * H_s of the unit disk at a boundary point tends to 2 pi as s -> 0, and
  a closed form is available to compare against.
* The mass at infinity alpha of a set counts the angle of its escape
  directions: pi for a half-plane, 0 for bounded sets, the opening angle
  for cones.
* For a set whose mass at infinity is below pi, points with an exterior
  tangent ball of radius delta_s have curvature of order beta / s.

Run with ``python demos/curvature_and_mass_at_infinity.py``.
"""

import math

import numpy as np
from scipy.special import beta as beta_fn

from fracplateau.domain import ExteriorData
from fracplateau.geometry import (Disk, HalfPlane, Rectangle, Subgraph, alpha_at_infinity,
                                  alpha_numeric, curvature_bound_params, mean_curvature,
                                  tangent_ball_check)
from fracplateau.kernel import KernelSpec


def disk_curvature():
    print("unit disk at (1, 0)")
    print(f"{'s':>6} {'s*H_s':>10} {'closed form':>12} {'2 pi':>8}")
    for s in (0.5, 0.1, 0.02):
        h = mean_curvature(KernelSpec(1, s), Disk(0.0, 0.0, 1.0), (1.0, 0.0)).value
        closed = (2.0 / s) * 2.0 ** (-s) * beta_fn(0.5, 0.5 * (1 - s))
        print(f"{s:>6g} {s * h:>10.6f} {s * closed:>12.6f} {2 * math.pi:>8.5f}")
    print()


def mass_at_infinity():
    k = KernelSpec(1, 0.5)
    sets = {
        "half-plane": HalfPlane.below(0.0),
        "disk": Disk(0.0, 0.0, 2.0),
        "cone kappa=2": Subgraph.of(ExteriorData.cone(2.0)),
        "cone kappa=-2": Subgraph.of(ExteriorData.cone(-2.0)),
    }
    print("mass at infinity: exact angle and the weighted mass at s = 0.02")
    for name, E in sets.items():
        a = alpha_at_infinity(k, E, method="exact").alpha_bar
        print(f"  {name:<14} exact {a:8.5f}   numeric {alpha_numeric(E, 0.02):8.5f}")
    # the disk of radius 2 carries 2 pi (1 - 2^-s), which vanishes only in the limit
    print()


def tangent_balls():
    cone = Subgraph.of(ExteriorData.cone(2.0))
    alpha_bar = alpha_at_infinity(KernelSpec(1, 0.5), cone).alpha_bar
    E0 = cone - Rectangle.strip(-1.0, 1.0)
    print(f"cone kappa=2 with the strip over Omega carved out, alpha = {alpha_bar:.5f}")
    for s in (0.1, 0.05):
        k = KernelSpec(1, s)
        p = curvature_bound_params(k, alpha_bar)
        d = p.delta(s)
        E = E0 | (Rectangle.strip(-1.0, 1.0) - Disk(0.0, 0.0, d))
        rec = tangent_ball_check(k, E, (0.0, d), (0.0, 0.0), p,
                                 rhos=0.2 * d * 0.5 ** np.arange(6))
        print(f"  s = {s:g}: delta_s = {d:.3e}, H_s = {rec.extrapolated:.4g}, "
              f"beta/s = {rec.bound:.4g}, bound holds: {rec.passed}")


if __name__ == "__main__":
    disk_curvature()
    mass_at_infinity()
    tangent_balls()
