"""One-dimensional kernel profiles of the fractional area functional.

For a spatial dimension ``n`` and order ``s`` the profiles are

    g(t)    = (1 + t^2)^(-(n+1+s)/2)
    G(t)    = int_0^t g
    GG(t)   = int_0^t G
    Gbar(t) = int_{-inf}^t g = Lambda + G(t)

``G`` is evaluated from a piecewise Chebyshev table built once per
``KernelSpec`` (reference values from the regularized incomplete beta
function).  For |t| > 1 the table stores the tail ``Lambda - G(t)`` in the
variable ``z = 1/(1+t^2)`` so that large arguments keep full relative
accuracy.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import beta, betainc, gammaln


def sphere_measure(m):
    """Surface measure of the unit sphere in R^m (omega_m)."""
    return float(2.0 * np.exp(0.5 * m * np.log(np.pi) - gammaln(0.5 * m)))


def _cheb_panels(func, edges, degree):
    """Piecewise Chebyshev interpolation returned as local monomial coefficients."""
    k = np.arange(degree + 1)
    nodes = np.cos(np.pi * (k + 0.5) / (degree + 1))
    coeffs = np.empty((len(edges) - 1, degree + 1))
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        vals = func(mid + half * nodes)
        cheb = np.polynomial.chebyshev.chebfit(nodes, vals, degree)
        coeffs[i] = np.polynomial.chebyshev.cheb2poly(cheb)
    return coeffs


class _PanelTable:
    """Fast evaluation of a piecewise polynomial on uniform panels of [lo, hi]."""

    def __init__(self, func, lo, hi, panels, degree):
        self.lo, self.hi = lo, hi
        self.panels = panels
        self.width = (hi - lo) / panels
        edges = lo + self.width * np.arange(panels + 1)
        self.coeffs = _cheb_panels(func, edges, degree)

    def __call__(self, x):
        pos = (x - self.lo) / self.width
        idx = np.clip(pos.astype(np.intp), 0, self.panels - 1)
        loc = 2.0 * (pos - idx) - 1.0
        c = self.coeffs[idx]
        out = c[:, -1].copy()
        for j in range(c.shape[1] - 2, -1, -1):
            out *= loc
            out += c[:, j]
        return out


@lru_cache(maxsize=64)
def _tables(n, s):
    p = 0.5 * (n + 1 + s)
    a = p - 0.5
    half_beta = 0.5 * beta(0.5, a)

    def G_ref(t):
        t = np.asarray(t, dtype=float)
        return half_beta * betainc(0.5, a, t * t / (1.0 + t * t))

    def S_ref(z):
        # tail Lambda - G(t) divided by z^a, z = 1/(1+t^2)
        z = np.asarray(z, dtype=float)
        safe = np.where(z > 0, z, 1e-300)
        tail = half_beta * betainc(a, 0.5, safe)
        lead = 1.0 / (2.0 * a)  # limit of tail / z^a as z -> 0
        return np.where(z > 1e-14, tail / safe ** a, lead)

    inner = _PanelTable(G_ref, 0.0, 1.0, 64, 11)
    outer = _PanelTable(S_ref, 0.0, 0.5, 64, 11)
    return inner, outer


@dataclass(frozen=True)
class KernelSpec:
    """Dimension ``n`` and fractional order ``s`` with derived constants."""

    n: int = 1
    s: float = 0.5

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s!r}")

    @property
    def p(self):
        """Exponent (n+1+s)/2 of g."""
        return 0.5 * (self.n + 1 + self.s)

    @cached_property
    def omega(self):
        """omega_{n+1}, the measure of the unit sphere in R^{n+1}."""
        return sphere_measure(self.n + 1)

    @cached_property
    def Lambda(self):
        """G(+inf); also the Lipschitz constant of GG."""
        return float(0.5 * beta(0.5, 0.5 * (self.n + self.s)))

    @cached_property
    def lambda_small(self):
        """sup_t (Lambda |t| - GG(t)), attained as |t| -> inf."""
        return 1.0 / (self.n - 1 + self.s)

    # profiles -----------------------------------------------------------

    def g(self, t):
        t = np.asarray(t, dtype=float)
        return (1.0 + t * t) ** (-self.p)

    def dg(self, t):
        t = np.asarray(t, dtype=float)
        return -2.0 * self.p * t * (1.0 + t * t) ** (-self.p - 1.0)

    def d2g(self, t):
        t = np.asarray(t, dtype=float)
        w = 1.0 + t * t
        p = self.p
        return -2.0 * p * w ** (-p - 1.0) + 4.0 * p * (p + 1.0) * t * t * w ** (-p - 2.0)

    def G_tail(self, t):
        """Lambda - G(|t|), accurate for large |t|."""
        t = np.abs(np.asarray(t, dtype=float))
        inner, outer = _tables(self.n, self.s)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty_like(t)
        small = t <= 1.0
        out[small] = self.Lambda - inner(t[small])
        tb = t[~small]
        z = 1.0 / (1.0 + tb * tb)
        out[~small] = np.exp((self.p - 0.5) * np.log(z)) * outer(z)
        return out[0] if scalar else out

    def G(self, t):
        t = np.asarray(t, dtype=float)
        inner, outer = _tables(self.n, self.s)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        at = np.abs(t)
        out = np.empty_like(at)
        small = at <= 1.0
        out[small] = inner(at[small])
        tb = at[~small]
        z = 1.0 / (1.0 + tb * tb)
        out[~small] = self.Lambda - np.exp((self.p - 0.5) * np.log(z)) * outer(z)
        out = np.copysign(out, t)
        return out[0] if scalar else out

    def _moment(self, t):
        # int_0^|t| tau g(tau) dtau
        q = self.p - 1.0
        return -np.expm1(-q * np.log1p(np.asarray(t, dtype=float) ** 2)) / (2.0 * q)

    def GG(self, t):
        t = np.asarray(t, dtype=float)
        at = np.abs(t)
        return at * self.G(at) - self._moment(at)

    def H(self, t):
        """Lipschitz defect Lambda |t| - GG(t), in [0, lambda_small)."""
        at = np.abs(np.asarray(t, dtype=float))
        return at * self.G_tail(at) + self._moment(at)

    def Gbar(self, t):
        t = np.asarray(t, dtype=float)
        neg = t < 0
        # the tail form keeps Gbar(-t) accurate for large t
        return np.where(neg, self.G_tail(t), self.Lambda + np.abs(self.G(t)))
