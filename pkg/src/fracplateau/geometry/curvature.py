"""Fractional mean curvature, mass at infinity and curvature lower bounds.

All quantities are integrals of |Y - Q|^(-2-s) over parts of the plane and
are computed in polar coordinates around Q.  Along a ray the radial
integral over an interval (a, b) is (a^(-s) - b^(-s)) / s, so only the ray
intervals of the set are needed; pixel sets and analytic shapes both
provide them exactly.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ..quadrature import adaptive_gauss
from .shapes import UnsupportedFarFieldError, arc_measure, clip_intervals, power_mass


@dataclass
class CurvatureEstimate:
    """Principal value estimate of H_s[E](Q).

    ``raw[j]`` is the truncated curvature at ``rhos[j]`` and
    ``extrapolated[j]`` the Richardson combination of raw[j], raw[j+1].
    """

    value: float
    converged: bool
    rhos: np.ndarray
    raw: np.ndarray
    extrapolated: np.ndarray
    quad_error: float

    def __float__(self):
        return float(self.value)


def truncated_curvature(spec, E, Q, rhos, tol=1e-10, panels=64):
    """H_s^rho[E](Q) for each rho: int over |Y-Q| > rho of (chi_{~E} - chi_E) K.

    Directions theta and theta + pi are summed before integration so that
    sets symmetric about Q cancel exactly.

    Returns
    -------
    values : array, one per rho
    error : float
        Quadrature error estimate (max over the rho values).
    """
    _check_plane(spec)
    s = spec.s
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    if np.any(rhos <= 0):
        raise ValueError("truncation radii must be positive")
    qx, qy = map(float, Q)
    base = rhos ** (-s) / s

    def f(theta):
        out = np.zeros((theta.size, rhos.size))
        for off in (0.0, math.pi):
            lo, hi = E.ray_intervals(qx, qy, theta + off)
            for m, r in enumerate(rhos):
                clo, chi = clip_intervals(lo, hi, r)
                out[:, m] += base[m] - 2.0 * power_mass(clo, chi, s) / s
        return out

    edges = np.linspace(0.0, math.pi, panels + 1)
    vals, err = adaptive_gauss(f, edges, atol=tol * float(base.max()), rtol=tol)
    return vals, err


def mean_curvature(spec, E, Q, rho_sequence=None, tol=1e-6, quad_tol=1e-10):
    """Principal value H_s[E](Q) by Richardson extrapolation in rho.

    Parameters
    ----------
    spec : KernelSpec
        n must be 1 (sets in the plane).
    E : Shape or PixelSet
    Q : (float, float)
        A boundary point of E.
    rho_sequence : decreasing radii, default 0.1 * 2^-j, j = 0..6.
    tol : float
        Relative agreement required between the last two extrapolants.

    Notes
    -----
    For a C^2 boundary the truncated curvature behaves like
    H + c rho^(1-s), which sets the extrapolation exponent.
    """
    s = spec.s
    rhos = (0.1 * 0.5 ** np.arange(7)) if rho_sequence is None else np.asarray(rho_sequence, float)
    if rhos.size < 2 or np.any(np.diff(rhos) >= 0):
        raise ValueError("rho_sequence must hold at least two decreasing radii")
    raw, qerr = truncated_curvature(spec, E, Q, rhos, tol=quad_tol)
    q = (rhos[:-1] / rhos[1:]) ** (1.0 - s)
    ext = (q * raw[1:] - raw[:-1]) / (q - 1.0)
    value = float(ext[-1])
    scale = max(1.0, abs(value))
    converged = bool(ext.size < 2 or abs(ext[-1] - ext[-2]) <= tol * scale)
    return CurvatureEstimate(value, converged, rhos, raw, ext, qerr)


@dataclass
class AlphaEstimate:
    """Upper and lower mass at infinity; unpacks as (alpha_bar, alpha_lower)."""

    alpha_bar: float
    alpha_lower: float
    exact: bool
    s_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exists: bool = True

    def __iter__(self):
        yield self.alpha_bar
        yield self.alpha_lower


def alpha_numeric(E, s, tol=1e-10, panels=128):
    """s * int_{|Y| > 1} chi_E(Y) |Y|^(-2-s) dY by rays from the origin."""
    def f(theta):
        lo, hi = E.ray_intervals(0.0, 0.0, theta)
        clo, chi = clip_intervals(lo, hi, 1.0)
        return power_mass(clo, chi, s)[:, None]

    edges = np.linspace(0.0, 2.0 * math.pi, panels + 1)
    val, _ = adaptive_gauss(f, edges, atol=tol, rtol=tol)
    return float(val[0])


def alpha_at_infinity(spec, E, s_sequence=(0.1, 0.05, 0.02), method="auto", tol=1e-2):
    """Upper and lower limits of s * int_{|Y|>1} chi_E |Y|^(-2-s) as s -> 0.

    With ``method="exact"`` (or ``"auto"`` when available) the angular
    measure of the escape directions of E is returned, which is the limit
    for unions of cones and half-planes up to bounded perturbations.  The
    numeric estimator evaluates the weighted mass for each s and reports
    the max and min over the smaller half of the sequence.
    """
    _check_plane(spec)
    s_seq = np.asarray(s_sequence, dtype=float)
    if s_seq.size == 0 or np.any(np.diff(s_seq) >= 0) or np.any((s_seq <= 0) | (s_seq >= 1)):
        raise ValueError("s_sequence must be strictly decreasing in (0, 1)")
    dirs = E.asymptotic_directions()
    if method in ("auto", "exact"):
        if dirs is None:
            if method == "exact":
                raise UnsupportedFarFieldError("no exact far-field description")
        else:
            a = arc_measure(dirs)
            return AlphaEstimate(a, a, True)
    elif method != "numeric":
        raise ValueError(f"unknown method {method!r}")
    vals = np.array([alpha_numeric(E, s) for s in s_seq])
    tail = vals[(vals.size - 1) // 2:]
    hi, lo = float(tail.max()), float(tail.min())
    return AlphaEstimate(hi, lo, False, s_seq, vals, exists=bool(hi - lo <= tol * max(1.0, hi)))


@dataclass(frozen=True)
class CurvatureBoundParams:
    """beta = (omega - 2 alpha_bar)/4 and the radii delta_s."""

    alpha_bar: float
    beta: float
    omega: float

    def delta(self, s):
        """delta_s = exp(-(1/s) log((omega + 2 beta)/(omega + beta)))."""
        s = np.asarray(s, dtype=float)
        r = math.log((self.omega + 2.0 * self.beta) / (self.omega + self.beta))
        return np.exp(-r / s)

    def delta_s(self, s_values):
        return {float(s): float(self.delta(s)) for s in s_values}

    def bound(self, s):
        """The curvature lower bound beta / s."""
        return self.beta / s


def curvature_bound_params(spec, alpha_bar):
    omega = spec.omega
    if not alpha_bar < 0.5 * omega:
        raise ValueError("alpha_bar must be below omega / 2")
    return CurvatureBoundParams(float(alpha_bar), 0.25 * (omega - 2.0 * alpha_bar), omega)


@dataclass
class TangentBallRecord:
    point: tuple
    s: float
    truncated: np.ndarray
    extrapolated: float
    bound: float
    ball_exterior: bool
    passed: bool


def exterior_ball_is_clear(E, center, radius, samples=2000, seed=0):
    """Sample the open ball and confirm it misses E."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, samples)) * (1.0 - 1e-9)
    t = rng.uniform(0.0, 2.0 * math.pi, samples)
    return not bool(np.any(E.contains(center[0] + r * np.cos(t), center[1] + r * np.sin(t))))


def tangent_ball_check(spec, E, Q, center, params, rhos=None, rel_tol=0.05):
    """Compare H_s^rho[E](Q) with beta/s at a point with an exterior tangent ball.

    The ball of centre ``center`` through Q must have radius at least
    delta_s; every truncated value and the extrapolated limit must reach
    (1 - rel_tol) beta / s.
    """
    s = spec.s
    radius = math.hypot(Q[0] - center[0], Q[1] - center[1])
    if radius < params.delta(s) * (1.0 - 1e-12):
        raise ValueError("tangent ball smaller than delta_s")
    est = mean_curvature(spec, E, Q, rhos)
    bound = params.bound(s)
    clear = exterior_ball_is_clear(E, center, radius)
    ok = clear and bool(np.all(est.raw >= (1.0 - rel_tol) * bound)) and est.value >= (1.0 - rel_tol) * bound
    return TangentBallRecord(tuple(Q), s, est.raw, est.value, bound, clear, ok)


def _check_plane(spec):
    if spec.n != 1:
        raise NotImplementedError("the geometric engine works in the plane (n = 1)")
