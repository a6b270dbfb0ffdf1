"""Vertical rearrangement and the link between perimeter and the area functional.

A set confined to the cylinder over Omega between heights -M and M is
rearranged column by column into the subgraph of a function.  The
fractional perimeter inside the cylinder never grows.  For subgraphs the
perimeter and the truncated functional F^M differ by a constant that does
not depend on the function.

Run with ``python demos/rearrangement_and_equivalence.py``.
"""

import numpy as np

from fracplateau.domain import ExteriorData
from fracplateau.geometry import (PixelSet, Subgraph, default_geometry, equivalence_offset,
                                  fractional_perimeter, slab_region, vertical_rearrangement)
from fracplateau.kernel import KernelSpec

K = KernelSpec(1, 0.5)
M = 1.0
PHI = 0.25


def random_confined_set(grid, omega, rng):
    """Subgraph of phi outside Omega; random cells in the slab over Omega."""
    E = PixelSet.from_shape(grid, Subgraph.of(ExteriorData.constant(PHI)))
    occ = E.occ.copy()
    X, Y = grid.centers()
    cols = np.flatnonzero((X[:, 0] > omega.a) & (X[:, 0] < omega.b))
    rows = Y[0]
    slab = np.flatnonzero((rows > -M) & (rows < M))
    occ[np.ix_(cols, slab)] = rng.random((cols.size, slab.size)) < 0.5
    occ[np.ix_(cols, np.flatnonzero(rows < -M))] = True
    occ[np.ix_(cols, np.flatnonzero(rows > M))] = False
    return PixelSet(grid, occ, E.far)


if __name__ == "__main__":
    grid, omega = default_geometry(h=1.0 / 16)
    O = slab_region(grid, omega, M)
    rng = np.random.default_rng(7)
    print("perimeter in the cylinder before and after rearrangement (s = 0.5)")
    for _ in range(5):
        F = random_confined_set(grid, omega, rng)
        w, S = vertical_rearrangement(F, M, omega)
        before = fractional_perimeter(K, F, O)
        after = fractional_perimeter(K, S, O)
        print(f"  {before:10.4f} -> {after:10.4f}")
    print()
    print("Per_s(Sg u) - F^M(u) for pairs of random pixel functions (offset should vanish)")
    n = round(omega.diam / grid.h)
    phi = ExteriorData.constant(PHI)
    for _ in range(3):
        u1, u2 = rng.integers(-16, 17, (2, n)) / 16.0
        off, err = equivalence_offset(K, u1, u2, M, omega, phi, grid, return_error=True)
        print(f"  offset {off:+.2e}  (quadrature error estimate {err:.1e})")
