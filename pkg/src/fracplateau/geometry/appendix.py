"""Tangent paraboloids, osculating balls and smooth domes over intervals."""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from ..domain import Domain1D, signed_distance


def osculating_ball_radius(a):
    """Radius 1/a of the exterior tangent ball of the subgraph of c + b x + a/2 x^2."""
    if not a > 0:
        raise ValueError(f"the opening coefficient must be positive, got {a}")
    return 1.0 / a


def osculating_identity_check(q_values):
    """Check (2 - q^2)^2 - (4 - 4 q^2) == q^4 in exact rational arithmetic.

    Returns the number of q values for which the identity and the
    inequality 2 - q^2 >= sqrt(4 - 4 q^2) (for |q| <= 1) hold.
    """
    ok = 0
    for q in q_values:
        r = Fraction(q)
        lhs = (2 - r * r) ** 2 - (4 - 4 * r * r)
        if lhs == r ** 4 and lhs >= 0 and (abs(r) > 1 or 2 - r * r >= 0):
            ok += 1
    return ok


@dataclass(frozen=True)
class BallCheck:
    passed: bool
    radius: float
    center: tuple
    min_gap: float
    samples: int


def verify_osculating_ball(a, b=0.0, c=0.0, x0=0.0, samples=1000, seed=0):
    """Sample the ball of radius 1/a resting on the vertex of P and test it lies above P.

    P(x) = c + b (x - x0) + a/2 (x - x0)^2.  ``min_gap`` is the smallest
    value of y - P(x) over the sampled points, scaled by the radius.
    """
    r = osculating_ball_radius(a)
    xv = x0 - b / a
    yv = c - 0.5 * b * b / a
    rng = np.random.default_rng(seed)
    rad = r * np.sqrt(rng.uniform(0.0, 1.0, samples))
    th = rng.uniform(0.0, 2.0 * math.pi, samples)
    # include the lower half-circle exactly
    th_b = np.linspace(math.pi, 2.0 * math.pi, samples)
    x = np.concatenate([xv + rad * np.cos(th), xv + r * np.cos(th_b)])
    y = np.concatenate([yv + r + rad * np.sin(th), yv + r + r * np.sin(th_b)])
    P = c + b * (x - x0) + 0.5 * a * (x - x0) ** 2
    gap = float(np.min(y - P)) / r
    return BallCheck(gap >= -1e-12, r, (xv, yv + r), gap, x.size)


@dataclass(frozen=True)
class SmoothFunction:
    """A C^2 function with its first derivative and a bound on |f''|."""

    f: callable
    df: callable
    hessian_bound: float

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))

    def derivative(self, x):
        return self.df(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ParaboloidCheck:
    passed: bool
    min_slack: float
    witness: tuple
    pairs: int
    boundary_passed: bool = True
    boundary_witness: tuple = None


def _slack(psi, a, x0, x, values):
    upper = psi(x0) + psi.derivative(x0) * (x - x0) + 0.5 * a * (x - x0) ** 2
    return upper - values


def paraboloid_bound_check(psi, varrho, region, hessian_bound=None, phi=None, omega=None,
                           samples=1000, seed=0, atol=1e-12):
    """Test psi(x) <= psi(x0) + psi'(x0)(x - x0) + a/2 |x - x0|^2 on sampled pairs.

    Parameters
    ----------
    psi : object with ``__call__``, ``derivative`` and ``hessian_bound``
        PsiSpec or SmoothFunction.
    varrho : float
        Pairs satisfy |x - x0| <= varrho, both points in ``region``.
    region : (lo, hi)
    hessian_bound : float, optional
        The coefficient a; defaults to ``psi.hessian_bound``.
    phi : callable, optional
        Exterior datum.  With ``omega`` given, the same paraboloid centred
        at each endpoint x0 of Omega must lie above phi on B_varrho(x0) minus Omega.

    Returns
    -------
    ParaboloidCheck
        Failure is a result; ``witness`` holds the worst pair (x0, x).
    """
    a = psi.hessian_bound if hessian_bound is None else float(hessian_bound)
    lo, hi = map(float, region)
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(lo, hi, samples)
    x = np.clip(x0 + rng.uniform(-varrho, varrho, samples), lo, hi)
    scale = 1.0 + np.abs(psi(x))
    sl = _slack(psi, a, x0, x, psi(x)) / scale
    k = int(np.argmin(sl))
    passed = bool(sl[k] >= -atol)
    b_ok, b_wit = True, None
    if phi is not None:
        if omega is None:
            raise ValueError("the boundary variant needs omega")
        worst = math.inf
        for e, side in ((omega.a, -1.0), (omega.b, 1.0)):
            xs = e + side * np.linspace(0.0, varrho, samples)[1:]
            xe = np.full(xs.size, e)
            bs = _slack(psi, a, xe, xs, phi(xs)) / (1.0 + np.abs(phi(xs)))
            j = int(np.argmin(bs))
            if bs[j] < worst:
                worst, b_wit = float(bs[j]), (float(e), float(xs[j]))
        b_ok = bool(worst >= -atol)
    return ParaboloidCheck(passed and b_ok, float(sl[k]), (float(x0[k]), float(x[k])),
                           samples, b_ok, b_wit if not b_ok else None)


def _smooth_step(z):
    """C-infinity step: 0 for z <= 0, 1 for z >= 1."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)
        f1 = np.where(z < 1, np.exp(-1.0 / np.where(z < 1, 1.0 - z, 1.0)), 0.0)
    return f0 / (f0 + f1)


@dataclass(frozen=True)
class DomeCheck:
    passed: bool
    max_abs_F: float
    min_grad: float
    membership_agrees: bool
    samples: int


class DomeProfile:
    """Upward dome over an interval with top u, glued to the base by a (k+1)-th root profile.

    ``t_plus`` blends u with (-d)^(1/(k+1)) through a smooth cutoff equal to 1
    where d < -2 r0 and 0 where d > -r0; ``F(x, t) = d(x) + (t_+)^(k+1)``
    describes the dome near the corner set boundary x {0}.
    """

    def __init__(self, region, k, r0, u):
        if k < 2:
            raise ValueError("the smoothness order k must be at least 2")
        if not r0 > 0:
            raise ValueError("r0 must be positive")
        inradius = 0.5 * region.diam
        if 3.0 * r0 > inradius:
            raise ValueError(f"3 r0 = {3 * r0} exceeds the inradius {inradius}")
        self.region = region
        self.k = int(k)
        self.r0 = float(r0)
        self.u = u
        self.delta = 0.5 * min(self.r0, 1.0)
        xs = np.linspace(region.a + self.r0, region.b - self.r0, 2001)
        self.u_sup = float(np.max(np.abs(u(xs))))

    def d(self, x):
        return signed_distance(self.region, x)

    def eta(self, x):
        return _smooth_step((-self.d(x) - self.r0) / self.r0)

    def base_profile(self, x):
        d = self.d(x)
        return np.power(np.maximum(-d, 0.0), 1.0 / (self.k + 1))

    def t_plus(self, x):
        x = np.asarray(x, dtype=float)
        e = self.eta(x)
        inside = self.d(x) <= 0
        uu = np.where(e > 0, self.u(x), 0.0)
        return np.where(inside, e * uu + (1.0 - e) * self.base_profile(x), np.nan)

    def F(self, x, t):
        t = np.asarray(t, dtype=float)
        return self.d(x) + np.maximum(t, 0.0) ** (self.k + 1)

    def grad_F(self, x, t):
        x = np.asarray(x, dtype=float)
        gx = np.where(x < 0.5 * (self.region.a + self.region.b), -1.0, 1.0)
        return gx, (self.k + 1) * np.maximum(np.asarray(t, dtype=float), 0.0) ** self.k

    def contains(self, x, t):
        """Membership in the dome: x in the region and -(sup|u| + 1) < t < t_plus(x)."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        inside = self.region.contains(x)
        top = np.where(inside, self.t_plus(np.where(inside, x, self.region.a)), -np.inf)
        return inside & (t > -(self.u_sup + 1.0)) & (t < top)

    def verify(self, samples=1000, seed=0, fd_step=1e-7):
        """Check F = 0 on the gluing boundary, |grad F| >= 1 - 1e-6 there, and F < 0 = dome near it."""
        rng = np.random.default_rng(seed)
        a, b, dl = self.region.a, self.region.b, self.delta
        # boundary points: graph of the base profile and the vertical walls
        side = rng.integers(0, 2, samples)
        depth = rng.uniform(0.0, dl, samples)
        xb = np.where(side == 0, a + depth, b - depth)
        half = samples // 2
        tb = self.t_plus(xb)
        tb[half:] = -rng.uniform(0.0, 1.0, samples - half)
        xb[half:] = np.where(side[half:] == 0, a, b)
        Fv = self.F(xb, tb)
        h = fd_step
        gx = (self.F(xb + h, tb) - self.F(xb - h, tb)) / (2 * h)
        gt = (self.F(xb, tb + h) - self.F(xb, tb - h)) / (2 * h)
        grad = np.hypot(gx, gt)
        # membership agreement on the neighbourhood V
        xv = np.where(rng.integers(0, 2, samples) == 0, a, b) + rng.uniform(-dl, dl, samples)
        tv = rng.uniform(-1.0, 1.0, samples)
        Fi = self.F(xv, tv)
        keep = np.abs(Fi) > 1e-12
        agree = bool(np.array_equal(self.contains(xv, tv)[keep], (Fi < 0)[keep]))
        maxF = float(np.max(np.abs(Fv)))
        ming = float(np.min(grad))
        return DomeCheck(maxF <= 1e-12 and ming >= 1.0 - 1e-6 and agree, maxF, ming, agree, samples)


def dome_profile(region, k, r0, u):
    """Build the upward dome of base ``region`` (a Domain1D) and top ``u``."""
    if not isinstance(region, Domain1D):
        raise TypeError("region must be a Domain1D")
    return DomeProfile(region, k, r0, u)
