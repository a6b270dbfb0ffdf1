"""Planar sets described by their intersections with rays.

Every shape answers two questions exactly:

* ``ray_intervals(px, py, theta)``: the parameter intervals ``r >= 0`` on
  which ``(px, py) + r (cos theta, sin theta)`` lies in the set;
* ``asymptotic_directions()``: the directions (up to a null set) in which
  the set reaches infinity, as a list of angular intervals.

Interval families are padded arrays ``lo, hi`` of shape ``(N, K)`` with
``N`` rays and at most ``K`` disjoint intervals per ray.  Empty slots hold
``lo = hi = inf``.  Set operations act on these arrays, so composite sets
built with ``|``, ``&``, ``-`` and ``~`` stay exact.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


class UnsupportedFarFieldError(ValueError):
    """Raised when a set has no exact description of its far field."""


# ---------------------------------------------------------------- intervals

def _normalize(lo, hi):
    """Mark empty intervals with inf, sort by start and drop all-empty columns."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    empty = ~(hi > lo)
    lo[empty] = np.inf
    hi[empty] = np.inf
    order = np.argsort(lo, axis=1, kind="stable")
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    keep = np.isfinite(lo).any(axis=0)
    if not keep.any():
        return lo[:, :1], hi[:, :1]
    return lo[:, keep], hi[:, keep]


def complement_intervals(lo, hi):
    """Complement in [0, inf) of normalized disjoint intervals."""
    n = lo.shape[0]
    zero = np.zeros((n, 1))
    inf = np.full((n, 1), np.inf)
    return _normalize(np.hstack([zero, hi]), np.hstack([lo, inf]))


def intersect_intervals(a, b):
    lo = np.maximum(a[0][:, :, None], b[0][:, None, :]).reshape(a[0].shape[0], -1)
    hi = np.minimum(a[1][:, :, None], b[1][:, None, :]).reshape(a[0].shape[0], -1)
    return _normalize(lo, hi)


def union_intervals(a, b):
    ca = complement_intervals(*a)
    cb = complement_intervals(*b)
    return complement_intervals(*intersect_intervals(ca, cb))


def clip_intervals(lo, hi, rmin):
    """Restrict intervals to r >= rmin (rmin broadcastable to (N, 1))."""
    rmin = np.broadcast_to(np.asarray(rmin, dtype=float).reshape(-1, 1), (lo.shape[0], 1))
    return _normalize(np.maximum(lo, rmin), hi)


def power_mass(lo, hi, s):
    """Sum over intervals of r_lo^(-s) - r_hi^(-s), per ray (all lo > 0)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(np.isfinite(lo), lo ** (-s), 0.0)
        b = np.where(np.isfinite(hi), hi ** (-s), 0.0)
    return np.sum(np.where(hi > lo, a - b, 0.0), axis=1)


# --------------------------------------------------------- angular intervals

def _arc_norm(arcs):
    """Split arcs on [0, 2pi), merge overlaps, return a sorted list."""
    pieces = []
    for a, b in arcs:
        if b - a >= TWO_PI:
            return [(0.0, TWO_PI)]
        if b <= a:
            continue
        a0 = a % TWO_PI
        b0 = a0 + (b - a)
        if b0 > TWO_PI:
            pieces += [(a0, TWO_PI), (0.0, b0 - TWO_PI)]
        else:
            pieces.append((a0, b0))
    pieces.sort()
    out = []
    for a, b in pieces:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def arc_complement(arcs):
    arcs = _arc_norm(arcs)
    out, cur = [], 0.0
    for a, b in arcs:
        if a > cur:
            out.append((cur, a))
        cur = b
    if cur < TWO_PI:
        out.append((cur, TWO_PI))
    return out


def arc_intersection(a, b):
    out = []
    for a0, a1 in _arc_norm(a):
        for b0, b1 in _arc_norm(b):
            lo, hi = max(a0, b0), min(a1, b1)
            if hi > lo:
                out.append((lo, hi))
    return _arc_norm(out)


def arc_union(a, b):
    return _arc_norm(list(a) + list(b))


def arc_measure(arcs):
    return float(sum(b - a for a, b in _arc_norm(arcs)))


# -------------------------------------------------------------------- shapes

def _rays(px, py, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    px = np.broadcast_to(np.asarray(px, dtype=float), theta.shape).ravel()
    py = np.broadcast_to(np.asarray(py, dtype=float), theta.shape).ravel()
    theta = theta.ravel()
    return px, py, np.cos(theta), np.sin(theta)


class Shape:
    """Base class of exact planar sets."""

    bounded = False

    def contains(self, x, y):
        raise NotImplementedError

    def ray_intervals(self, px, py, theta):
        raise NotImplementedError

    def asymptotic_directions(self):
        """Angular intervals of escape directions, or None when unknown."""
        return None

    def to_dict(self):
        raise NotImplementedError

    def __or__(self, other):
        return Union(self, other)

    def __and__(self, other):
        return Intersection(self, other)

    def __sub__(self, other):
        return Intersection(self, Complement(other))

    def __invert__(self):
        return Complement(self)


class Empty(Shape):
    bounded = True

    def contains(self, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=bool)

    def ray_intervals(self, px, py, theta):
        n = _rays(px, py, theta)[0].size
        return np.full((n, 1), np.inf), np.full((n, 1), np.inf)

    def asymptotic_directions(self):
        return []

    def to_dict(self):
        return {"kind": "empty"}


class HalfPlane(Shape):
    """Open half-plane {X : nx*x + ny*y < c}."""

    def __init__(self, nx, ny, c=0.0):
        norm = math.hypot(nx, ny)
        if norm == 0.0:
            raise ValueError("normal must be nonzero")
        self.nx, self.ny, self.c = nx / norm, ny / norm, c / norm

    @classmethod
    def below(cls, level=0.0):
        return cls(0.0, 1.0, level)

    def contains(self, x, y):
        return self.nx * np.asarray(x) + self.ny * np.asarray(y) < self.c

    def ray_intervals(self, px, py, theta):
        px, py, c, s = _rays(px, py, theta)
        g0 = self.nx * px + self.ny * py - self.c
        gd = self.nx * c + self.ny * s
        with np.errstate(divide="ignore", invalid="ignore"):
            r = -g0 / gd
        lo = np.where(gd > 0, 0.0, np.where(gd < 0, np.maximum(r, 0.0), np.where(g0 < 0, 0.0, np.inf)))
        hi = np.where(gd > 0, r, np.inf)
        hi = np.where((gd == 0) & (g0 >= 0), np.inf, hi)
        return _normalize(lo[:, None], hi[:, None])

    def asymptotic_directions(self):
        a = math.atan2(-self.ny, -self.nx)
        return _arc_norm([(a - 0.5 * math.pi, a + 0.5 * math.pi)])

    def to_dict(self):
        return {"kind": "halfplane", "nx": self.nx, "ny": self.ny, "c": self.c}


class Disk(Shape):
    """Open disk of radius r centred at (cx, cy)."""

    bounded = True

    def __init__(self, cx, cy, r):
        if r <= 0:
            raise ValueError("radius must be positive")
        self.cx, self.cy, self.r = float(cx), float(cy), float(r)

    def contains(self, x, y):
        return (np.asarray(x) - self.cx) ** 2 + (np.asarray(y) - self.cy) ** 2 < self.r ** 2

    def ray_intervals(self, px, py, theta):
        px, py, c, s = _rays(px, py, theta)
        ox, oy = px - self.cx, py - self.cy
        b = c * ox + s * oy
        cc = ox * ox + oy * oy - self.r ** 2
        disc = b * b - cc
        root = np.sqrt(np.maximum(disc, 0.0))
        # stable roots of r^2 + 2 b r + cc = 0
        q = -b - np.copysign(root, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(q != 0, q, 0.0)
            r2 = np.where(q != 0, cc / q, 0.0)
        lo = np.maximum(np.minimum(r1, r2), 0.0)
        hi = np.maximum(r1, r2)
        lo = np.where(disc > 0, lo, np.inf)
        hi = np.where(disc > 0, hi, np.inf)
        return _normalize(lo[:, None], hi[:, None])

    def asymptotic_directions(self):
        return []

    def to_dict(self):
        return {"kind": "disk", "cx": self.cx, "cy": self.cy, "r": self.r}


class Rectangle(Shape):
    """Open box (x0, x1) x (y0, y1); infinite bounds give strips and quadrants."""

    def __init__(self, x0, x1, y0, y1):
        if not (x0 < x1 and y0 < y1):
            raise ValueError("empty rectangle")
        self.x0, self.x1, self.y0, self.y1 = map(float, (x0, x1, y0, y1))
        self.bounded = all(map(math.isfinite, (self.x0, self.x1, self.y0, self.y1)))

    @classmethod
    def strip(cls, a, b):
        """The vertical cylinder (a, b) x R."""
        return cls(a, b, -math.inf, math.inf)

    def contains(self, x, y):
        x, y = np.asarray(x), np.asarray(y)
        return (x > self.x0) & (x < self.x1) & (y > self.y0) & (y < self.y1)

    @staticmethod
    def _slab(p, d, lo, hi):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - p) / d
            t2 = (hi - p) / d
        inside = (p > lo) & (p < hi)
        a = np.where(d == 0, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
        b = np.where(d == 0, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
        return a, b

    def ray_intervals(self, px, py, theta):
        px, py, c, s = _rays(px, py, theta)
        ax, bx = self._slab(px, c, self.x0, self.x1)
        ay, by = self._slab(py, s, self.y0, self.y1)
        lo = np.maximum(np.maximum(ax, ay), 0.0)
        hi = np.minimum(bx, by)
        return _normalize(lo[:, None], hi[:, None])

    def asymptotic_directions(self):
        def axis(lo, hi, neg, pos):
            if math.isinf(lo) and math.isinf(hi):
                return [(0.0, TWO_PI)]
            if math.isinf(lo):
                return [neg]
            if math.isinf(hi):
                return [pos]
            return []
        h = math.pi
        ax = axis(self.x0, self.x1, (0.5 * h, 1.5 * h), (-0.5 * h, 0.5 * h))
        ay = axis(self.y0, self.y1, (h, 2 * h), (0.0, h))
        return arc_intersection(ax, ay)

    def to_dict(self):
        return {"kind": "rectangle", "x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1}


class Subgraph(Shape):
    """Open subgraph {(x, y) : y < f(x)} of a continuous piecewise-affine f.

    Parameters
    ----------
    func : callable
        Vectorized function, affine between consecutive ``kinks`` and
        beyond the outermost ones.
    kinks : sequence of float
    """

    def __init__(self, func, kinks=(), descriptor=None):
        self.func = func
        self.kinks = np.array(sorted(set(float(k) for k in kinks)))
        self.descriptor = descriptor
        edges = np.concatenate([[-np.inf], self.kinks, [np.inf]])
        mids = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if np.isinf(lo) and np.isinf(hi):
                mids.append((0.0, 1.0))
            elif np.isinf(lo):
                mids.append((hi - 2.0, hi - 1.0))
            elif np.isinf(hi):
                mids.append((lo + 1.0, lo + 2.0))
            else:
                mids.append((lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)))
        mids = np.array(mids)
        f0, f1 = func(mids[:, 0]), func(mids[:, 1])
        self.slope = (f1 - f0) / (mids[:, 1] - mids[:, 0])
        self.icpt = f0 - self.slope * mids[:, 0]
        self.edges = edges

    @classmethod
    def of(cls, phi):
        """Subgraph of an analytic exterior datum."""
        if not phi.analytic:
            raise UnsupportedFarFieldError("tabulated data has no analytic far field")
        d = {"kind": phi.kind, "c": phi.c, "m": phi.m, "kappa": phi.kappa}
        return cls(phi, phi.kinks(), descriptor=d)

    @classmethod
    def piecewise_linear(cls, xs, ys, left_slope=0.0, right_slope=0.0):
        """Interpolant of (xs, ys) continued affinely with the given end slopes."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)

        def f(x):
            x = np.asarray(x, dtype=float)
            v = np.interp(x, xs, ys)
            v = np.where(x < xs[0], ys[0] + left_slope * (x - xs[0]), v)
            return np.where(x > xs[-1], ys[-1] + right_slope * (x - xs[-1]), v)

        d = {"kind": "piecewise_linear", "xs": xs.tolist(), "ys": ys.tolist(),
             "left_slope": left_slope, "right_slope": right_slope}
        return cls(f, xs, descriptor=d)

    def contains(self, x, y):
        return np.asarray(y) < self.func(np.asarray(x, dtype=float))

    def ray_intervals(self, px, py, theta):
        px, py, c, s = _rays(px, py, theta)
        n = px.size
        npc = self.slope.size
        lo = np.full((n, npc), np.inf)
        hi = np.full((n, npc), np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(npc):
                e0, e1 = self.edges[k], self.edges[k + 1]
                # r-range where x(r) lies in the piece
                ra, rb = Rectangle._slab(px, c, e0, e1)
                if np.isinf(e0) and np.isinf(e1):
                    ra, rb = np.full(n, -np.inf), np.full(n, np.inf)
                # g(r) = y - f(x) = g0 + r gd < 0
                g0 = py - (self.icpt[k] + self.slope[k] * px)
                gd = s - self.slope[k] * c
                r = -g0 / gd
                a = np.where(gd > 0, -np.inf, np.where(gd < 0, r, np.where(g0 < 0, -np.inf, np.inf)))
                b = np.where(gd > 0, r, np.where(gd < 0, np.inf, np.where(g0 < 0, np.inf, -np.inf)))
                lo[:, k] = np.maximum(np.maximum(ra, a), 0.0)
                hi[:, k] = np.minimum(rb, b)
        return _normalize(lo, hi)

    def asymptotic_directions(self):
        mr, ml = self.slope[-1], self.slope[0]
        return _arc_norm([(-math.pi + math.atan(ml), math.atan(mr))])

    def to_dict(self):
        if self.descriptor is None:
            raise ValueError("subgraph of an arbitrary callable is not serializable")
        return {"kind": "subgraph", "data": self.descriptor}


class Complement(Shape):
    def __init__(self, inner):
        self.inner = inner

    def contains(self, x, y):
        return ~self.inner.contains(x, y)

    def ray_intervals(self, px, py, theta):
        return complement_intervals(*self.inner.ray_intervals(px, py, theta))

    def asymptotic_directions(self):
        a = self.inner.asymptotic_directions()
        return None if a is None else arc_complement(a)

    def to_dict(self):
        return {"kind": "complement", "inner": self.inner.to_dict()}


class Union(Shape):
    def __init__(self, a, b):
        self.a, self.b = a, b
        self.bounded = a.bounded and b.bounded

    def contains(self, x, y):
        return self.a.contains(x, y) | self.b.contains(x, y)

    def ray_intervals(self, px, py, theta):
        return union_intervals(self.a.ray_intervals(px, py, theta),
                               self.b.ray_intervals(px, py, theta))

    def asymptotic_directions(self):
        a, b = self.a.asymptotic_directions(), self.b.asymptotic_directions()
        return None if a is None or b is None else arc_union(a, b)

    def to_dict(self):
        return {"kind": "union", "a": self.a.to_dict(), "b": self.b.to_dict()}


class Intersection(Shape):
    def __init__(self, a, b):
        self.a, self.b = a, b
        self.bounded = a.bounded or b.bounded

    def contains(self, x, y):
        return self.a.contains(x, y) & self.b.contains(x, y)

    def ray_intervals(self, px, py, theta):
        return intersect_intervals(self.a.ray_intervals(px, py, theta),
                                   self.b.ray_intervals(px, py, theta))

    def asymptotic_directions(self):
        a, b = self.a.asymptotic_directions(), self.b.asymptotic_directions()
        return None if a is None or b is None else arc_intersection(a, b)

    def to_dict(self):
        return {"kind": "intersection", "a": self.a.to_dict(), "b": self.b.to_dict()}


def Whole():
    """The whole plane."""
    return Complement(Empty())


def Sector(ax, ay, theta0, theta1):
    """Open angular sector with apex (ax, ay) between directions theta0 < theta1."""
    width = theta1 - theta0
    if not 0.0 < width < TWO_PI:
        raise ValueError("sector opening must lie in (0, 2 pi)")
    if width > math.pi:
        return Complement(Sector(ax, ay, theta1, theta0 + TWO_PI))

    def side(t, sign):
        # points on the inner side of the ray from the apex in direction t
        nx, ny = -sign * math.sin(t), sign * math.cos(t)
        return HalfPlane(-nx, -ny, -(nx * ax + ny * ay))

    if width == math.pi:
        return side(theta0, 1.0)
    return Intersection(side(theta0, 1.0), side(theta1, -1.0))


def shape_from_dict(d):
    """Inverse of ``Shape.to_dict``."""
    from ..domain import ExteriorData

    kind = d["kind"]
    if kind == "empty":
        return Empty()
    if kind == "halfplane":
        return HalfPlane(d["nx"], d["ny"], d["c"])
    if kind == "disk":
        return Disk(d["cx"], d["cy"], d["r"])
    if kind == "rectangle":
        return Rectangle(d["x0"], d["x1"], d["y0"], d["y1"])
    if kind == "subgraph":
        data = d["data"]
        if data["kind"] == "piecewise_linear":
            return Subgraph.piecewise_linear(data["xs"], data["ys"], data["left_slope"],
                                             data["right_slope"])
        return Subgraph.of(ExteriorData(data["kind"], c=data["c"], m=data["m"],
                                        kappa=data["kappa"]))
    if kind == "complement":
        return Complement(shape_from_dict(d["inner"]))
    if kind == "union":
        return Union(shape_from_dict(d["a"]), shape_from_dict(d["b"]))
    if kind == "intersection":
        return Intersection(shape_from_dict(d["a"]), shape_from_dict(d["b"]))
    raise ValueError(f"unknown shape kind {kind!r}")
