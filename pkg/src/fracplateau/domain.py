"""Base interval, obstacle, exterior data, grids and the tail integral."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate

from .kernel import KernelSpec


class DivergenceError(ValueError):
    """Raised when an integral over an unbounded region does not converge."""


@dataclass(frozen=True)
class Domain1D:
    """The interval Omega = (a, b) and the half width W of the computational window."""

    a: float = -1.0
    b: float = 1.0
    W: float = None

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if self.W is None:
            object.__setattr__(self, "W", 10.0 * (self.b - self.a))
        if self.W <= 0:
            raise ValueError("window half width must be positive")

    @property
    def diam(self):
        return self.b - self.a

    @property
    def window(self):
        return (self.a - self.W, self.b + self.W)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.a) & (x < self.b)


def signed_distance(omega, x):
    """Signed distance to (a, b): negative inside, zero on the endpoints."""
    x = np.asarray(x, dtype=float)
    return -np.minimum(x - omega.a, omega.b - x)


def delta_neighborhood(omega, delta):
    """{x : signed_distance(x) < delta} as a new Domain1D (same window)."""
    if delta <= -0.5 * omega.diam:
        raise ValueError(f"delta={delta} leaves an empty neighborhood")
    return Domain1D(omega.a - delta, omega.b + delta, omega.W)


_EXTERIOR_KINDS = ("constant", "affine", "cone", "tabulated")


@dataclass(frozen=True)
class ExteriorData:
    """Exterior datum phi(x) = c + m*x - kappa*|x| (or a table).

    ``kind`` is one of ``constant``, ``affine``, ``cone`` or ``tabulated``.
    A tabulated datum is linearly interpolated on ``table_x`` and is zero
    outside the tabulated range (hard cutoff).
    """

    kind: str = "constant"
    c: float = 0.0
    m: float = 0.0
    kappa: float = 0.0
    table_x: tuple = ()
    table_y: tuple = ()

    def __post_init__(self):
        if self.kind not in _EXTERIOR_KINDS:
            raise ValueError(f"unknown exterior kind {self.kind!r}")
        if self.kind == "constant" and (self.m != 0 or self.kappa != 0):
            raise ValueError("constant data takes no slope or opening")
        if self.kind == "affine" and self.kappa != 0:
            raise ValueError("affine data takes no opening coefficient")
        if self.kind == "cone" and self.kappa == 0:
            raise ValueError("cone data needs kappa != 0")
        if self.kind == "tabulated":
            if len(self.table_x) < 2 or len(self.table_x) != len(self.table_y):
                raise ValueError("tabulated data needs matching x/y tables")
            if np.any(np.diff(self.table_x) <= 0):
                raise ValueError("table_x must be increasing")

    @classmethod
    def constant(cls, c):
        return cls("constant", c=float(c))

    @classmethod
    def affine(cls, c, m):
        return cls("affine", c=float(c), m=float(m))

    @classmethod
    def cone(cls, kappa, c=0.0, m=0.0):
        return cls("cone", c=float(c), m=float(m), kappa=float(kappa))

    @classmethod
    def tabulated(cls, x, y):
        return cls("tabulated", table_x=tuple(map(float, x)), table_y=tuple(map(float, y)))

    @property
    def analytic(self):
        return self.kind != "tabulated"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "tabulated":
            return np.interp(x, self.table_x, self.table_y, left=0.0, right=0.0)
        return self.c + self.m * x - self.kappa * np.abs(x)

    def slopes(self):
        """Slopes (left, right) of the affine pieces at -inf and +inf."""
        if self.kind == "tabulated":
            return (0.0, 0.0)
        return (self.m + self.kappa, self.m - self.kappa)

    def kinks(self):
        """Points where the datum is not smooth."""
        if self.kind == "cone":
            return (0.0,)
        if self.kind == "tabulated":
            return tuple(self.table_x)
        return ()

    def level_crossings(self, level, lo, hi):
        """Points in (lo, hi) where |phi| = level (analytic kinds only)."""
        out = []
        if not self.analytic:
            return out
        kl, kr = self.slopes()
        for sl, side in ((kl, -1), (kr, 1)):
            if sl == 0:
                continue
            for target in (level, -level):
                x = (target - self.c) / sl
                if (side < 0 and x < 0) or (side > 0 and x > 0) or self.kind != "cone":
                    if lo < x < hi:
                        out.append(float(x))
        return sorted(set(out))

    def sup_abs(self, intervals):
        """Sup of |phi| over a union of closed bounded intervals."""
        best = 0.0
        for lo, hi in intervals:
            pts = [lo, hi] + [k for k in self.kinks() if lo < k < hi]
            best = max(best, float(np.max(np.abs(self(np.array(pts))))))
        return best

    def grows_at_infinity(self):
        kl, kr = self.slopes()
        return kl != 0 or kr != 0


_PSI_KINDS = ("constant", "quadratic", "tabulated")


@dataclass(frozen=True)
class PsiSpec:
    """Obstacle profile: constant ``c0``; quadratic ``c0 + c1 (x-x0) + c2/2 (x-x0)^2``;
    or a linearly interpolated table."""

    kind: str = "constant"
    c0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    x0: float = 0.0
    table_x: tuple = ()
    table_y: tuple = ()

    def __post_init__(self):
        if self.kind not in _PSI_KINDS:
            raise ValueError(f"unknown obstacle kind {self.kind!r}")
        if self.kind == "tabulated" and (
            len(self.table_x) < 2 or len(self.table_x) != len(self.table_y)
        ):
            raise ValueError("tabulated obstacle needs matching x/y tables")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "tabulated":
            return np.interp(x, self.table_x, self.table_y)
        z = x - self.x0
        return self.c0 + self.c1 * z + 0.5 * self.c2 * z * z

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "tabulated":
            raise ValueError("tabulated obstacles have no derivative")
        return self.c1 + self.c2 * (x - self.x0)

    @property
    def hessian_bound(self):
        if self.kind == "tabulated":
            raise ValueError("tabulated obstacles have no Hessian bound")
        return abs(self.c2)


@dataclass(frozen=True)
class ObstacleSpec:
    """Obstacle eps*psi imposed on the closed interval ``region`` (None for no obstacle)."""

    region: tuple = None
    psi: PsiSpec = field(default_factory=PsiSpec)
    eps: float = 1.0

    def __post_init__(self):
        if self.region is not None:
            lo, hi = self.region
            if not lo < hi:
                raise ValueError(f"empty obstacle region {self.region}")
            object.__setattr__(self, "region", (float(lo), float(hi)))
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"eps must lie in [0, 1], got {self.eps}")

    @property
    def empty(self):
        return self.region is None

    def values(self, x):
        """eps*psi(x); only meaningful on the region."""
        return self.eps * self.psi(x)

    def sup_abs(self, n_samples=2001):
        """sup over the region of |eps*psi|."""
        if self.empty:
            return 0.0
        lo, hi = self.region
        x = np.linspace(lo, hi, n_samples)
        if self.psi.kind == "tabulated":
            inner = [t for t in self.psi.table_x if lo < t < hi]
            x = np.concatenate([x, inner])
        elif self.psi.kind == "quadratic" and lo < self.psi.x0 < hi:
            x = np.append(x, self.psi.x0)
        if self.psi.kind == "quadratic" and self.psi.c2 != 0:
            xv = self.psi.x0 - self.psi.c1 / self.psi.c2
            if lo < xv < hi:
                x = np.append(x, xv)
        return float(np.max(np.abs(self.values(x))))

    def check_inside(self, omega):
        if not self.empty:
            lo, hi = self.region
            if lo < omega.a or hi > omega.b:
                raise ValueError(f"obstacle region {self.region} not inside ({omega.a}, {omega.b})")


class Grid1D:
    """Uniform nodes covering the window [a - W, b + W] with spacing h.

    Both endpoints of Omega are nodes.  The unknowns live on the nodes of the
    closed interval [a, b]; the endpoint values are the one-sided traces from
    inside, so jumps across the boundary are allowed.
    """

    def __init__(self, omega, h, obstacle=None):
        ncell = (omega.b - omega.a) / h
        if abs(ncell - round(ncell)) > 1e-9 * max(1.0, ncell):
            raise ValueError(f"h={h} does not divide the interval length {omega.diam}")
        self.omega = omega
        self.ncell = int(round(ncell))
        self.h = omega.diam / self.ncell
        next_ = int(math.ceil(omega.W / self.h - 1e-9))
        k = np.arange(-next_, self.ncell + next_ + 1)
        self.nodes = omega.a + self.h * k
        self.nodes[next_] = omega.a
        self.nodes[next_ + self.ncell] = omega.b
        self.first = next_
        self.interior_mask = np.zeros(len(self.nodes), dtype=bool)
        self.interior_mask[next_ : next_ + self.ncell + 1] = True
        self.obstacle = obstacle if obstacle is not None else ObstacleSpec()
        self.obstacle.check_inside(omega)
        self.obstacle_mask = np.zeros(len(self.nodes), dtype=bool)
        if not self.obstacle.empty:
            lo, hi = self.obstacle.region
            tol = 1e-12 * max(1.0, abs(lo), abs(hi))
            self.obstacle_mask = (
                self.interior_mask & (self.nodes >= lo - tol) & (self.nodes <= hi + tol)
            )

    @property
    def x(self):
        """Coordinates of the unknowns (nodes of [a, b])."""
        return self.nodes[self.interior_mask]

    @property
    def ndof(self):
        return self.ncell + 1

    @property
    def dof_obstacle_mask(self):
        return self.obstacle_mask[self.interior_mask]


def _intervals_minus(intervals, lo, hi):
    """Remove (lo, hi) from a list of intervals."""
    out = []
    for a, b in intervals:
        if b <= lo or a >= hi:
            out.append((a, b))
            continue
        if a < lo:
            out.append((a, lo))
        if b > hi:
            out.append((hi, b))
    return out


def tail(spec, phi, region, x, omega=None, epsabs=1e-12, epsrel=1e-10):
    """Tail integral of |phi| over a union of intervals O disjoint from Omega.

    Parameters
    ----------
    spec : KernelSpec
        Only ``n = 1`` is supported.
    phi : ExteriorData
    region : sequence of (lo, hi)
        Intervals making up O; endpoints may be infinite.
    x : float
        Evaluation point inside Omega.
    omega : Domain1D, optional
        When given, ``x`` is checked to lie in Omega and O to avoid it.

    Returns
    -------
    float
        The integral of |phi(y)| |x - y|^(-1-s) over O.  For tabulated data
        the datum vanishes beyond its table (see :func:`tail_truncation_bound`).

    Raises
    ------
    DivergenceError
        When O is unbounded and |phi| grows linearly in that direction.
    """
    if spec.n != 1:
        raise NotImplementedError("tail is implemented for n = 1")
    s = spec.s
    if omega is not None:
        if not omega.contains(x):
            raise ValueError(f"x={x} is not in Omega")
        for lo, hi in region:
            if hi > omega.a and lo < omega.b:
                raise ValueError(f"region piece ({lo}, {hi}) meets Omega")
    total = 0.0
    for lo, hi in region:
        if not lo < hi:
            continue
        if lo < x < hi:
            raise ValueError("x lies inside the region")
        if phi.kind == "tabulated":
            lo = max(lo, phi.table_x[0])
            hi = min(hi, phi.table_x[-1])
            if not lo < hi:
                continue
        if math.isinf(hi) or math.isinf(lo):
            kl, kr = phi.slopes()
            if (math.isinf(hi) and kr != 0) or (math.isinf(lo) and kl != 0):
                raise DivergenceError("|phi| grows linearly; the tail integral diverges")
        # beyond the outermost kink a constant far field is integrated exactly
        marks = [x, *phi.kinks()]
        if math.isinf(hi):
            cut = max(max(marks), lo) + 1.0
            total += abs(phi(cut)) * (cut - x) ** (-s) / s
            hi = cut
        if math.isinf(lo):
            cut = min(min(marks), hi) - 1.0
            total += abs(phi(cut)) * (x - cut) ** (-s) / s
            lo = cut
        pieces = [(lo, hi)]
        for a, b in pieces:
            if not a < b:
                continue
            brk = sorted({k for k in phi.kinks() if a < k < b}
                         | set(phi.level_crossings(0.0, a, b)))
            edges = [a] + brk + [b]
            for e0, e1 in zip(edges[:-1], edges[1:]):
                val, _ = integrate.quad(
                    lambda y: abs(phi(y)) * abs(x - y) ** (-1.0 - s),
                    e0, e1, epsabs=epsabs, epsrel=epsrel, limit=200,
                )
                total += val
    return float(total)


def tail_truncation_bound(spec, phi, x):
    """Upper bound for the part of a tail lost by cutting tabulated data at its table.

    Assumes |phi| beyond the table does not exceed its largest tabulated
    magnitude, giving 2 sup|phi| D^(-s)/s with D the distance to the cut.
    """
    if phi.kind != "tabulated":
        return 0.0
    sup = float(np.max(np.abs(phi.table_y)))
    d = min(abs(x - phi.table_x[0]), abs(phi.table_x[-1] - x))
    return 2.0 * sup * d ** (-spec.s) / spec.s
