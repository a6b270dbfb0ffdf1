"""Independent reference implementations used only by the tests.

The scalar kernel below is built directly on the regularized incomplete
beta function and shares no code with the package's tabulated kernel.
"""

import math

import numpy as np
from scipy import integrate
from scipy.special import betainc, beta


class ScalarKernel:
    def __init__(self, n, s):
        self.n, self.s = n, s
        self.p = 0.5 * (n + 1 + s)
        self.a = self.p - 0.5
        self.hb = 0.5 * beta(0.5, self.a)
        self.Lambda = self.hb

    def g(self, t):
        return (1.0 + t * t) ** (-self.p)

    def G(self, t):
        at = abs(t)
        if at > 1.0:
            val = self.hb - self.hb * betainc(self.a, 0.5, 1.0 / (1.0 + at * at))
        else:
            val = self.hb * betainc(0.5, self.a, at * at / (1.0 + at * at))
        return math.copysign(val, t)

    def GG(self, t):
        at = abs(t)
        q = self.p - 1.0
        mom = -math.expm1(-q * math.log1p(at * at)) / (2.0 * q)
        return at * self.G(at) - mom


def quad(f, lo, hi, **kw):
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    opts.update(kw)
    return integrate.quad(f, lo, hi, **opts)[0]


def exchange_oracle(s, a, b, U, phi, M):
    """Nested adaptive quadrature of the exchange term including its far part.

    ``U`` are nodal values on a uniform grid of [a, b] (piecewise linear),
    ``phi`` a callable exterior datum with constant far field.  Tiny grids only.
    """
    k = ScalarKernel(1, s)
    xs = np.linspace(a, b, len(U))
    L = k.Lambda

    def u(x):
        return float(np.interp(x, xs, U))

    def bracket(x, y):
        d = abs(x - y)
        p = float(phi(y))
        return (2 * k.GG((u(x) - p) / d) + 2 * M * L / d - k.GG((M + p) / d)
                - k.GG((M - p) / d)) * d ** (-s)

    marks = [1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3, 1e4]

    def inner(x):
        r = 0.0
        for side in (1, -1):
            start = b if side > 0 else a
            edges = [0.0] + marks
            for d0, d1 in zip(edges[:-1], edges[1:]):
                r += quad(lambda t: bracket(x, start + side * t), d0, d1)
            r += quad(lambda t: bracket(x, start + side * t), marks[-1], np.inf)
        return r

    total = 0.0
    for lo, hi in zip(xs[:-1], xs[1:]):
        total += quad(inner, lo, hi, epsabs=1e-10, epsrel=1e-9, limit=100)
    return total


def interior_oracle(s, a, b, U):
    """Nested adaptive quadrature of the interior double integral over (a, b)^2."""
    k = ScalarKernel(1, s)
    xs = np.linspace(a, b, len(U))

    def u(x):
        return float(np.interp(x, xs, U))

    def f(x, y):
        return 0.0 if y == x else k.GG((u(x) - u(y)) / abs(x - y)) * abs(x - y) ** (-s)

    def inner(x):
        pts = sorted({a, b, x, *xs})
        return sum(quad(lambda y: f(x, y), p, q) for p, q in zip(pts[:-1], pts[1:]) if q > p)

    return sum(quad(inner, p, q, epsabs=1e-11, epsrel=1e-10) for p, q in zip(xs[:-1], xs[1:]))
