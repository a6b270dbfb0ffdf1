"""Vertical rearrangement of confined pixel sets and the functional offset.

For a set F with Omega x (-inf, -M) inside F and F cap (Omega x R) inside
Omega x (-inf, M), the rearranged function is w_F(x) = -M + |{t in (-M, M) :
(x, t) in F}|, and its subgraph has the same column measures as F.
"""

from dataclasses import dataclass

import numpy as np

from ..domain import Domain1D, Grid1D
from ..functional import Functional
from .pixels import PixelGrid, PixelSet, fractional_perimeter
from .shapes import Subgraph


class ConfinementError(ValueError):
    """Raised when a set is not confined in the slab required by the rearrangement."""


@dataclass(frozen=True)
class ColumnFunction:
    """A function constant on the pixel columns covering Omega.

    ``values[k]`` is the value on the column (x_k - h/2, x_k + h/2).
    """

    x: np.ndarray
    values: np.ndarray
    h: float


def _columns(grid, omega):
    i0 = (omega.a - grid.x0) / grid.h
    i1 = (omega.b - grid.x0) / grid.h
    if abs(i0 - round(i0)) > 1e-9 or abs(i1 - round(i1)) > 1e-9:
        raise ValueError("the endpoints of Omega must lie on pixel column edges")
    return int(round(i0)), int(round(i1))


def _rows(grid, M):
    j0 = (-M - grid.y0) / grid.h
    j1 = (M - grid.y0) / grid.h
    if abs(j0 - round(j0)) > 1e-9 or abs(j1 - round(j1)) > 1e-9:
        raise ValueError("the levels -M and M must lie on pixel row edges")
    j0, j1 = int(round(j0)), int(round(j1))
    if j0 < 0 or j1 > grid.ny:
        raise ValueError("the slab |t| < M must fit in the window")
    return j0, j1


def slab_region(grid, omega, M):
    """The pixel set Omega x (-M, M)."""
    i0, i1 = _columns(grid, omega)
    j0, j1 = _rows(grid, M)
    occ = np.zeros((grid.nx, grid.ny), dtype=bool)
    occ[i0:i1, j0:j1] = True
    return PixelSet(grid, occ)


def check_confined(F, omega, M):
    """Raise ConfinementError unless Omega x (-inf,-M) c F c Omega x (-inf, M) on Omega columns."""
    g = F.grid
    i0, i1 = _columns(g, omega)
    j0, j1 = _rows(g, M)
    cols = F.occ[i0:i1]
    if not cols[:, :j0].all():
        raise ConfinementError("F does not contain Omega x (-inf, -M)")
    if cols[:, j1:].any():
        raise ConfinementError("F reaches above level M over Omega")
    xs = np.linspace(omega.a, omega.b, 9)[1:-1]
    below = F.far.contains(xs, np.full(xs.size, g.y0 - 1.0))
    above = F.far.contains(xs, np.full(xs.size, g.y1 + 1.0))
    if not below.all() or above.any():
        raise ConfinementError("far field of F is not confined over Omega")


def vertical_rearrangement(F, M, omega):
    """Column-wise rearrangement of F into a subgraph.

    Parameters
    ----------
    F : PixelSet
    M : float
        Confinement level; -M and M must be pixel row edges.
    omega : Domain1D
        Base interval, with endpoints on pixel column edges.

    Returns
    -------
    w : ColumnFunction
        w = -M + h * (occupied cells of the column inside the slab).
    Sg_w : PixelSet
        Equal to F outside the Omega columns, the subgraph of w on them.
    """
    check_confined(F, omega, M)
    g = F.grid
    i0, i1 = _columns(g, omega)
    j0, j1 = _rows(g, M)
    counts = F.occ[i0:i1, j0:j1].sum(axis=1)
    occ = F.occ.copy()
    rows = np.arange(g.ny)[None, :]
    occ[i0:i1] = rows < (j0 + counts)[:, None]
    x = g.x0 + (np.arange(i0, i1) + 0.5) * g.h
    w = ColumnFunction(x, -M + g.h * counts.astype(float), g.h)
    return w, PixelSet(g, occ, F.far, check=False)


def subgraph_pixels(grid, omega, phi, values):
    """Pixel subgraph of the field equal to ``values`` on the Omega columns and phi outside.

    ``values`` must be multiples of the pixel size so that the subgraph is
    exactly a union of cells; ``phi`` must be pixel-exact inside the window
    (a constant on a row edge, for instance).
    """
    g = grid
    values = np.asarray(values, dtype=float)
    k = values / g.h
    if np.any(np.abs(k - np.round(k)) > 1e-9):
        raise ValueError("values must be integer multiples of the pixel size")
    far = Subgraph.of(phi)
    i0, i1 = _columns(g, omega)
    if values.size != i1 - i0:
        raise ValueError("one value per Omega column is required")
    return PixelSet.subgraph_of_columns(g, [omega.a], values, far)


def cellwise_functional(spec, omega, phi, M, h, boost=0):
    grid = Grid1D(omega, h)
    return Functional(spec, grid, phi, M, boost=boost)


def equivalence_offset(spec, u1, u2, M, omega, phi, grid, return_error=False, boost=2):
    """(Per_s(Sg u1, Omega^M) - F^M(u1)) - (Per_s(Sg u2, Omega^M) - F^M(u2)).

    ``u1``, ``u2`` hold one value per pixel column of Omega (multiples of
    the pixel size, bounded by M); both sides of the difference are exact
    integrals of the same piecewise constant fields, so the result should
    vanish up to quadrature error.  With ``return_error`` the pair
    (offset, error estimate) is returned, the estimate combining the
    perimeter error bound and the change of the functional under a finer
    rule (``boost`` extra Gauss points per panel).
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    for u in (u1, u2):
        if np.max(np.abs(u)) > M:
            raise ValueError("fields must be bounded by M")
    O = slab_region(grid, omega, M)
    F = cellwise_functional(spec, omega, phi, M, grid.h)
    Fb = cellwise_functional(spec, omega, phi, M, grid.h, boost=boost) if return_error else None
    diffs, err = [], 0.0
    for u in (u1, u2):
        E = subgraph_pixels(grid, omega, phi, u)
        per, perr = fractional_perimeter(spec, E, O, return_error=True)
        f = F.cellwise_breakdown(u).total
        diffs.append(per - f)
        if return_error:
            err += perr + abs(Fb.cellwise_breakdown(u).total - f)
    off = diffs[0] - diffs[1]
    return (off, err) if return_error else off


def default_geometry(h=1.0 / 16.0, half_width=2.0, a=-1.0, b=1.0):
    """Window [-half_width, half_width]^2 and Omega = (a, b) for the geometric checks."""
    grid = PixelGrid.around(-half_width, half_width, -half_width, half_width, h)
    return grid, Domain1D(a, b)
