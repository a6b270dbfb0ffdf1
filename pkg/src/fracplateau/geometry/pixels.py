"""Pixel sets in the plane and their fractional interactions.

A pixel set is an occupancy grid on a rectangular window together with an
exact far-field shape describing the set outside the window.

Interactions between window cells are sums of the exact cell-pair
integrals

    J(D) = int_{[-1,1]^2} (1-|z1|)(1-|z2|) |D + z|^(-2-s) dz

(cells of unit size, scaled by h^(2-s)), applied to whole grids by FFT
convolution.  Interactions with a polygonal far region F use the identity

    int_F |X-Y|^(-2-s) dY = -(1/s) sum_edges sign(d) |d|^(-s) [G_s(t1/|d|) - G_s(t0/|d|)],

obtained from the divergence theorem, where d is the signed distance from
X to an edge of F and G_s the kernel primitive.
"""

from dataclasses import dataclass
from functools import lru_cache
import json
import math
from pathlib import Path

import numpy as np
from scipy.ndimage import minimum_filter, maximum_filter
from scipy.signal import fftconvolve

from ..kernel import KernelSpec
from ..quadrature import gauss01, gauss_jacobi01
from .shapes import Empty, Rectangle, Shape, shape_from_dict


class OverlapError(ValueError):
    """Raised when an interaction is requested between intersecting sets."""


@dataclass(frozen=True)
class PixelGrid:
    """Window [x0, x0 + nx h] x [y0, y0 + ny h] split into square cells."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.h <= 0 or self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs h > 0 and at least one cell per axis")

    @classmethod
    def around(cls, xlo, xhi, ylo, yhi, h):
        nx = int(round((xhi - xlo) / h))
        ny = int(round((yhi - ylo) / h))
        if abs(nx * h - (xhi - xlo)) > 1e-9 * h or abs(ny * h - (yhi - ylo)) > 1e-9 * h:
            raise ValueError("h must divide the window sides")
        return cls(float(xlo), float(ylo), float(h), nx, ny)

    @property
    def x1(self):
        return self.x0 + self.nx * self.h

    @property
    def y1(self):
        return self.y0 + self.ny * self.h

    @property
    def rectangle(self):
        return Rectangle(self.x0, self.x1, self.y0, self.y1)

    def centers(self):
        xc = self.x0 + (np.arange(self.nx) + 0.5) * self.h
        yc = self.y0 + (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(xc, yc, indexing="ij")

    def index(self, x, y):
        """Cell indices (i, j) of points, without bounds checking."""
        i = np.floor((np.asarray(x) - self.x0) / self.h).astype(int)
        j = np.floor((np.asarray(y) - self.y0) / self.h).astype(int)
        return i, j


def _inside(bounds, grid):
    x0, x1, y0, y1 = bounds
    return x0 >= grid.x0 and x1 <= grid.x1 and y0 >= grid.y0 and y1 <= grid.y1


def _bounds(shape):
    """Bounding box of a bounded shape, or None."""
    from .shapes import Disk, Intersection, Union
    if isinstance(shape, Empty):
        return (0.0, 0.0, 0.0, 0.0)
    if isinstance(shape, Rectangle) and shape.bounded:
        return (shape.x0, shape.x1, shape.y0, shape.y1)
    if isinstance(shape, Disk):
        return (shape.cx - shape.r, shape.cx + shape.r, shape.cy - shape.r, shape.cy + shape.r)
    if isinstance(shape, Union):
        a, b = _bounds(shape.a), _bounds(shape.b)
        if a is None or b is None:
            return None
        return (min(a[0], b[0]), max(a[1], b[1]), min(a[2], b[2]), max(a[3], b[3]))
    if isinstance(shape, Intersection):
        for part in (shape.a, shape.b):
            bb = _bounds(part)
            if bb is not None:
                return bb
    return None


class PixelSet:
    """Occupancy grid on a window plus an exact shape for the outside.

    Parameters
    ----------
    grid : PixelGrid
    occ : (nx, ny) bool array, ``occ[i, j]`` for the cell at column i, row j.
    far : Shape or None
        The set outside the window is ``far`` minus the window.  ``None``
        means empty.
    check : bool
        Verify that the outermost ring of cells agrees with ``far`` at the
        cell centres.
    """

    def __init__(self, grid, occ, far=None, check=True):
        occ = np.asarray(occ, dtype=bool)
        if occ.shape != (grid.nx, grid.ny):
            raise ValueError("occupancy shape does not match the grid")
        far = Empty() if far is None else far
        bb = _bounds(far) if far.bounded else None
        if bb is not None and _inside(bb, grid):
            far = Empty()
        self.grid, self.occ, self.far = grid, occ, far
        if check:
            self.check_farfield()

    # constructors -------------------------------------------------------

    @classmethod
    def from_shape(cls, grid, shape):
        X, Y = grid.centers()
        return cls(grid, shape.contains(X, Y), shape)

    @classmethod
    def empty(cls, grid):
        return cls(grid, np.zeros((grid.nx, grid.ny), dtype=bool))

    @classmethod
    def box(cls, grid, x0, x1, y0, y1):
        """Cells whose centres lie in (x0, x1) x (y0, y1)."""
        return cls.from_shape(grid, Rectangle(x0, x1, y0, y1))

    @classmethod
    def subgraph_of_columns(cls, grid, xcols, heights, far):
        """Subgraph of a function constant on the columns covering [xcols).

        ``heights[k]`` is the value on column ``k`` of the columns starting
        at ``xcols[0]``; cells outside those columns follow ``far``.
        """
        X, Y = grid.centers()
        occ = far.contains(X, Y)
        i0 = int(round((xcols[0] - grid.x0) / grid.h))
        for k, w in enumerate(heights):
            occ[i0 + k, :] = Y[i0 + k, :] < w
        return cls(grid, occ, far)

    # set algebra --------------------------------------------------------

    def _same(self, other):
        if self.grid != other.grid:
            raise ValueError("pixel sets live on different grids")

    def __and__(self, other):
        self._same(other)
        if isinstance(self.far, Empty) or isinstance(other.far, Empty):
            far = Empty()
        else:
            far = self.far & other.far
        return PixelSet(self.grid, self.occ & other.occ, far, check=False)

    def __or__(self, other):
        self._same(other)
        if isinstance(self.far, Empty):
            far = other.far
        elif isinstance(other.far, Empty):
            far = self.far
        else:
            far = self.far | other.far
        return PixelSet(self.grid, self.occ | other.occ, far, check=False)

    def __invert__(self):
        return PixelSet(self.grid, ~self.occ, ~self.far, check=False)

    def __sub__(self, other):
        return self & ~other

    @property
    def has_far(self):
        return not isinstance(self.far, Empty)

    @property
    def area(self):
        """Area of the window part."""
        return float(np.count_nonzero(self.occ)) * self.grid.h ** 2

    def check_farfield(self):
        X, Y = self.grid.centers()
        ring = np.zeros_like(self.occ)
        ring[0, :] = ring[-1, :] = ring[:, 0] = ring[:, -1] = True
        ref = self.far.contains(X[ring], Y[ring])
        if np.any(ref != self.occ[ring]):
            raise ValueError("boundary ring of the window disagrees with the far-field shape")

    def contains(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        g = self.grid
        i, j = g.index(x, y)
        win = (i >= 0) & (i < g.nx) & (j >= 0) & (j < g.ny)
        out = self.far.contains(x, y)
        out = np.where(win, self.occ[np.clip(i, 0, g.nx - 1), np.clip(j, 0, g.ny - 1)], out)
        return out

    def classify(self):
        """Discrete interior (1), exterior (-1) or boundary (0) per cell.

        A cell is interior when its 3x3 neighbourhood is fully occupied and
        exterior when it is fully empty; cells outside the window count
        according to the far field.
        """
        g = self.grid
        pad = np.zeros((g.nx + 2, g.ny + 2), dtype=bool)
        pad[1:-1, 1:-1] = self.occ
        xc = g.x0 + (np.arange(-1, g.nx + 1) + 0.5) * g.h
        yc = g.y0 + (np.arange(-1, g.ny + 1) + 0.5) * g.h
        X, Y = np.meshgrid(xc, yc, indexing="ij")
        ring = np.ones_like(pad)
        ring[1:-1, 1:-1] = False
        pad[ring] = self.far.contains(X[ring], Y[ring])
        lo = minimum_filter(pad.astype(np.int8), size=3)[1:-1, 1:-1]
        hi = maximum_filter(pad.astype(np.int8), size=3)[1:-1, 1:-1]
        return np.where(lo == 1, 1, np.where(hi == 0, -1, 0))

    def asymptotic_directions(self):
        return self.far.asymptotic_directions()

    # rays ---------------------------------------------------------------

    def ray_intervals(self, px, py, theta):
        """Exact ray intervals through the cells, continued by the far field."""
        from .shapes import _normalize, _rays, complement_intervals, intersect_intervals, union_intervals

        px, py, cs, sn = _rays(px, py, theta)
        th = np.arctan2(sn, cs)
        g = self.grid
        win = g.rectangle.ray_intervals(px, py, th)
        far = intersect_intervals(self.far.ray_intervals(px, py, th), complement_intervals(*win))
        cells = []
        for k in range(px.size):
            a, b = win[0][k, 0], win[1][k, 0]
            cells.append(self._ray_cells(px[k], py[k], cs[k], sn[k], a, b) if np.isfinite(a) else [])
        K = max(1, max(len(v) for v in cells))
        lo = np.full((px.size, K), np.inf)
        hi = np.full((px.size, K), np.inf)
        for k, ivs in enumerate(cells):
            for m, (a, b) in enumerate(ivs):
                lo[k, m], hi[k, m] = a, b
        return union_intervals(_normalize(lo, hi), far)

    def _ray_cells(self, px, py, c, s, a, b):
        g = self.grid
        ts = [np.array([a, b])]
        with np.errstate(divide="ignore", invalid="ignore"):
            if c != 0.0:
                t = (g.x0 + g.h * np.arange(g.nx + 1) - px) / c
                ts.append(t[(t > a) & (t < b)])
            if s != 0.0:
                t = (g.y0 + g.h * np.arange(g.ny + 1) - py) / s
                ts.append(t[(t > a) & (t < b)])
        t = np.unique(np.concatenate(ts))
        mid = 0.5 * (t[:-1] + t[1:])
        i, j = g.index(px + mid * c, py + mid * s)
        on = self.occ[np.clip(i, 0, g.nx - 1), np.clip(j, 0, g.ny - 1)]
        edge = np.diff(np.concatenate([[False], on, [False]]).astype(np.int8))
        starts = np.nonzero(edge == 1)[0]
        stops = np.nonzero(edge == -1)[0]
        return list(zip(t[starts], t[stops]))

    # serialization ------------------------------------------------------

    def save(self, path):
        """Write ``path`` (binary PGM) and ``path`` + '.json' (geometry, far field)."""
        path = Path(path)
        g = self.grid
        img = np.where(self.occ.T[::-1, :], 255, 0).astype(np.uint8)
        try:
            with open(path, "wb") as fh:
                fh.write(f"P5\n{g.nx} {g.ny}\n255\n".encode("ascii"))
                fh.write(img.tobytes())
            meta = {"x0": g.x0, "y0": g.y0, "h": g.h, "nx": g.nx, "ny": g.ny,
                    "far": self.far.to_dict()}
            Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True))
        except OSError as exc:
            raise OSError(f"cannot write pixel set to {path}: {exc}") from exc

    @classmethod
    def load(cls, path):
        path = Path(path)
        meta = json.loads(Path(str(path) + ".json").read_text())
        data = path.read_bytes()
        tokens, pos = [], 0
        while len(tokens) < 4:
            while data[pos:pos + 1].isspace():
                pos += 1
            if data[pos:pos + 1] == b"#":
                while data[pos:pos + 1] not in (b"\n", b""):
                    pos += 1
                continue
            end = pos
            while not data[end:end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
        if tokens[0] != b"P5":
            raise ValueError(f"{path} is not a binary PGM file")
        nx, ny = int(tokens[1]), int(tokens[2])
        img = np.frombuffer(data[pos + 1:pos + 1 + nx * ny], dtype=np.uint8).reshape(ny, nx)
        grid = PixelGrid(meta["x0"], meta["y0"], meta["h"], meta["nx"], meta["ny"])
        if (nx, ny) != (grid.nx, grid.ny):
            raise ValueError("image size disagrees with the sidecar metadata")
        return cls(grid, img[::-1, :].T > 127, shape_from_dict(meta["far"]))


# ------------------------------------------------------------ cell integrals

def _tent_rule(n):
    """Gauss points on [-1, 1] split at 0, as (nodes, weights * tent)."""
    x, w = gauss01(n)
    z = np.concatenate([x - 1.0, x])
    wt = np.concatenate([w, w]) * (1.0 - np.abs(z))
    return z, wt


def _duffy_corner(s, corner, sx, sy, n_u=16, n_v=24):
    """Integral over the unit square {corner + (sx a, sy b)} of tent * r^(-2-s), r from corner."""
    u, wu = gauss_jacobi01(n_u, s)
    v, wv = gauss01(n_v)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu, wv)
    total = 0.0
    for swap in (False, True):
        a, b = (U * V, U) if swap else (U, U * V)
        z1 = corner[0] + sx * a
        z2 = corner[1] + sy * b
        w = (1.0 - np.abs(z1)) * (1.0 - np.abs(z2))
        # integrand w * u^(-2-s) (1+v^2)^(-1-s/2) * u, with w = O(u)
        total += np.sum(W * (w / U) * (1.0 + V * V) ** (-1.0 - 0.5 * s))
    return total


def _j_near(s, di, dj, n=16):
    """J(D) for a small offset D by splitting into the four tent quadrants."""
    zs = -np.array([di, dj], dtype=float)
    total = 0.0
    x, w = gauss01(n)
    for qx in (-1.0, 0.0):
        for qy in (-1.0, 0.0):
            corners = [(qx + a, qy + b) for a in (0.0, 1.0) for b in (0.0, 1.0)]
            hit = [c for c in corners if c[0] == zs[0] and c[1] == zs[1]]
            if hit:
                c = hit[0]
                sx = 1.0 if c[0] == qx else -1.0
                sy = 1.0 if c[1] == qy else -1.0
                total += _duffy_corner(s, c, sx, sy)
            else:
                Z1, Z2 = np.meshgrid(qx + x, qy + x, indexing="ij")
                W = np.outer(w, w) * (1.0 - np.abs(Z1)) * (1.0 - np.abs(Z2))
                total += np.sum(W * ((Z1 - zs[0]) ** 2 + (Z2 - zs[1]) ** 2) ** (-1.0 - 0.5 * s))
    return total


@lru_cache(maxsize=8)
def cell_pair_table(s, nx, ny):
    """Table J over all offsets (i, j), |i| < nx, |j| < ny; centre entry 0."""
    z, wt = _tent_rule(8)
    W = np.outer(wt, wt)
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    ii = np.arange(nx)
    jj = np.arange(ny)
    quad = np.empty((nx, ny))
    for i0 in range(0, nx, 32):
        I = ii[i0:i0 + 32, None, None, None]
        D1 = (I + Z1[None, None]) ** 2
        for j in range(ny):
            quad[i0:i0 + 32, j] = np.sum(W * (D1 + (j + Z2) ** 2) ** (-1.0 - 0.5 * s), axis=(1, 2, 3))
    for i in range(min(nx, 3)):
        for j in range(min(ny, 3)):
            if i or j:
                quad[i, j] = _j_near(s, i, j)
    quad[0, 0] = 0.0
    full = np.empty((2 * nx - 1, 2 * ny - 1))
    full[nx - 1:, ny - 1:] = quad
    full[:nx - 1, ny - 1:] = quad[:0:-1, :]
    full[:, :ny - 1] = full[:, ny:][:, ::-1]
    full.setflags(write=False)
    return full


def _window_sum(A, B, table):
    """sum_{p in A, q in B} table[p - q], symmetrized."""
    nx, ny = A.shape
    if not A.any() or not B.any():
        return 0.0
    cb = fftconvolve(B.astype(float), table, mode="full")[nx - 1:2 * nx - 1, ny - 1:2 * ny - 1]
    ca = fftconvolve(A.astype(float), table, mode="full")[nx - 1:2 * nx - 1, ny - 1:2 * ny - 1]
    return 0.5 * (float(np.sum(cb[A])) + float(np.sum(ca[B])))


# ------------------------------------------------------------ far potential

def _lines_of(shape):
    """Boundary lines (nx, ny, c) of a polygonal shape: nx*x + ny*y = c."""
    from .shapes import Complement, Disk, HalfPlane, Intersection, Subgraph, Union
    if isinstance(shape, Empty):
        return []
    if isinstance(shape, HalfPlane):
        return [(shape.nx, shape.ny, shape.c)]
    if isinstance(shape, Rectangle):
        out = []
        for v, l in ((shape.x0, (1.0, 0.0)), (shape.x1, (1.0, 0.0)),
                     (shape.y0, (0.0, 1.0)), (shape.y1, (0.0, 1.0))):
            if math.isfinite(v):
                out.append((l[0], l[1], v))
        return out
    if isinstance(shape, Subgraph):
        out = []
        for m, b in zip(shape.slope, shape.icpt):
            nrm = math.hypot(m, 1.0)
            out.append((-m / nrm, 1.0 / nrm, b / nrm))
        return out
    if isinstance(shape, Complement):
        return _lines_of(shape.inner)
    if isinstance(shape, (Union, Intersection)):
        return _lines_of(shape.a) + _lines_of(shape.b)
    if isinstance(shape, Disk):
        raise NotImplementedError("far-field potentials need polygonal far regions")
    raise NotImplementedError(f"no boundary description for {type(shape).__name__}")


def _dedupe(lines, tol=1e-12):
    out = []
    for nx, ny, c in lines:
        if nx < 0 or (nx == 0 and ny < 0):
            nx, ny, c = -nx, -ny, -c
        if not any(abs(nx - a) < tol and abs(ny - b) < tol and abs(c - d) < tol * (1 + abs(c))
                   for a, b, d in out):
            out.append((nx, ny, c))
    return out


def boundary_edges(region, scale=1.0):
    """Oriented boundary pieces of a polygonal region.

    Returns a list of (px, py, ex, ey, t0, t1, nx, ny): the piece is
    {(px, py) + t (ex, ey), t0 < t < t1} (t may be infinite) and (nx, ny)
    its outward unit normal.
    """
    lines = _dedupe(_lines_of(region))
    eps = 1e-7 * scale
    edges = []
    for k, (nx, ny, c) in enumerate(lines):
        px, py = nx * c, ny * c
        ex, ey = -ny, nx
        ts = []
        for m, (mx, my, mc) in enumerate(lines):
            if m == k:
                continue
            den = mx * ex + my * ey
            if abs(den) > 1e-14:
                ts.append((mc - mx * px - my * py) / den)
        ts = np.unique(np.array(ts, dtype=float))
        knots = np.concatenate([[-np.inf], ts, [np.inf]])
        for t0, t1 in zip(knots[:-1], knots[1:]):
            if np.isinf(t0) and np.isinf(t1):
                tm = 0.0
            elif np.isinf(t0):
                tm = t1 - scale
            elif np.isinf(t1):
                tm = t0 + scale
            else:
                if t1 - t0 <= 1e-12 * scale:
                    continue
                tm = 0.5 * (t0 + t1)
            qx, qy = px + tm * ex, py + tm * ey
            plus = bool(region.contains(qx + eps * nx, qy + eps * ny))
            minus = bool(region.contains(qx - eps * nx, qy - eps * ny))
            if plus != minus:
                sgn = -1.0 if plus else 1.0
                edges.append((px, py, ex, ey, t0, t1, sgn * nx, sgn * ny))
    return edges


def polygon_potential(spec, edges, X, Y):
    """int_F |P - Y'|^(-2-s) dY' at points P = (X, Y) outside the closure of F."""
    s = spec.s
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    out = np.zeros(np.broadcast(X, Y).shape)
    lam = spec.Lambda
    for px, py, ex, ey, t0, t1, nx, ny in edges:
        d = (px - X) * nx + (py - Y) * ny
        tf = (X - px) * ex + (Y - py) * ey
        ad = np.abs(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            g1 = lam if np.isposinf(t1) else spec.G((t1 - tf) / ad)
            g0 = -lam if np.isneginf(t0) else spec.G((t0 - tf) / ad)
            term = np.where(ad > 0, np.sign(d) * ad ** (-s) * (g1 - g0), 0.0)
        out -= term / s
    return out


def _far_cell_integral(spec, P, far, order):
    """sum over occupied cells of P of int_cell V(X) dX, V the far-region potential."""
    g = P.grid
    region = far - g.rectangle
    scale = max(g.x1 - g.x0, g.y1 - g.y0)
    edges = boundary_edges(region, scale)
    if not edges:
        return 0.0
    ii, jj = np.nonzero(P.occ)
    dist = np.minimum.reduce([ii, g.nx - 1 - ii, jj, g.ny - 1 - jj])
    if np.any(dist < 2):
        raise ValueError("bounded set reaches within two cells of the window edge; "
                         "enlarge the window")
    x, w = gauss01(order)
    cx = g.x0 + (ii[:, None] + x[None, :]) * g.h
    cy = g.y0 + (jj[:, None] + x[None, :]) * g.h
    Xq = cx[:, :, None]
    Yq = cy[:, None, :]
    V = polygon_potential(spec, edges, Xq, Yq)
    return float(np.sum(V * np.outer(w, w)[None])) * g.h ** 2


def interaction(spec, A, B, return_error=False):
    """L_s(A, B) = int_A int_B |X - Y|^(-2-s) dX dY for disjoint pixel sets.

    At most one of the sets may extend beyond the window.  With
    ``return_error`` the pair (value, estimated quadrature error) is
    returned.
    """
    if spec.n != 1:
        raise NotImplementedError("pixel sets live in the plane (n = 1)")
    A._same(B)
    if np.any(A.occ & B.occ):
        raise OverlapError("sets overlap on the window")
    if A.has_far and B.has_far:
        raise ValueError("both sets extend beyond the window; the interaction is not "
                         "supported between two unbounded sets")
    g = A.grid
    s = spec.s
    table = cell_pair_table(s, g.nx, g.ny)
    val = g.h ** (2.0 - s) * _window_sum(A.occ, B.occ, table)
    err = 1e-12 * abs(val)
    for P, Q in ((A, B), (B, A)):
        if Q.has_far and P.occ.any():
            lo = _far_cell_integral(spec, P, Q.far, 4)
            hi = _far_cell_integral(spec, P, Q.far, 6)
            val += hi
            err += abs(hi - lo)
    return (val, err) if return_error else val


def fractional_perimeter(spec, E, O, method="decomposition", return_error=False):
    """Per_s(E, O) = L(E & O, ~E) + L(E - O, O - E).

    ``O`` is a pixel set inside the window.  ``method="direct"`` evaluates
    the window part as one sum over all pairs of (E, ~E) cells minus the
    pairs lying entirely outside O.
    """
    if O.has_far:
        raise ValueError("the region O must lie inside the window")
    E._same(O)
    notE = ~E
    if method == "decomposition":
        v1, e1 = interaction(spec, E & O, notE, return_error=True)
        v2, e2 = interaction(spec, E - O, O - E, return_error=True)
        val, err = v1 + v2, e1 + e2
    elif method == "direct":
        g = E.grid
        s = spec.s
        table = cell_pair_table(s, g.nx, g.ny)
        out = ~O.occ
        win = (_window_sum(E.occ, notE.occ, table)
               - _window_sum(E.occ & out, notE.occ & out, table))
        val = g.h ** (2.0 - s) * win
        err = 1e-12 * abs(val)
        for P, Q in ((E & O, notE), (O - E, E)):
            if Q.has_far and P.occ.any():
                lo = _far_cell_integral(spec, P, Q.far, 4)
                hi = _far_cell_integral(spec, P, Q.far, 6)
                val += hi
                err += abs(hi - lo)
    else:
        raise ValueError(f"unknown method {method!r}")
    return (val, err) if return_error else val
