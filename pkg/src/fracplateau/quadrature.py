"""Quadrature rules for the discrete area functional on a uniform 1-D grid.

Every rule is a flat list of points.  A point carries the location of x
inside Omega as (cell index, local coordinate), enough information to form
the difference quotient q, and a weight.  The discrete energy is the
weighted sum of kernel values at these points and the gradient is its exact
derivative, so finite differences of the energy and the gradient agree to
rounding error.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def gauss01(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def gauss_jacobi01(n, s):
    """Nodes and weights on [0, 1] for the weight x^(-s)."""
    x, w = roots_jacobi(n, 0.0, -s)
    return 0.5 * (x + 1.0), w * 2.0 ** (s - 1.0)


def order_for(ratio, boost=0):
    """Gauss order for a panel seen at distance ``ratio`` times its length."""
    if ratio <= 0.25:
        n = 12
    elif ratio <= 0.5:
        n = 10
    elif ratio <= 1.0:
        n = 8
    elif ratio <= 2.0:
        n = 6
    elif ratio <= 4.0:
        n = 5
    elif ratio <= 8.0:
        n = 4
    else:
        n = 3
    return n + boost


@dataclass
class PairRule:
    """Points for the interior double integral.

    Each point contributes ``w * GG((u(x1) - u(x2)) * invd)``.
    """

    j1: np.ndarray
    t1: np.ndarray
    j2: np.ndarray
    t2: np.ndarray
    invd: np.ndarray
    w: np.ndarray


@dataclass
class ExchangeRule:
    """Points for the exchange integral over Omega x (window part of) C Omega.

    Each point contributes ``w * (2 GG((u(x) - phi_y) * invd) + K)``; the
    u-independent part ``sum(w * K)`` is kept separately as ``const``.
    """

    j: np.ndarray
    t: np.ndarray
    phi_y: np.ndarray
    invd: np.ndarray
    w: np.ndarray
    y: np.ndarray


@dataclass
class FarRule:
    """Points x in Omega for the analytic part beyond distance R_far."""

    j: np.ndarray
    t: np.ndarray
    w: np.ndarray
    D: np.ndarray
    phi0: np.ndarray
    nu: np.ndarray


def interior_rule(ncell, h, s, boost=0, n_duffy=12):
    """Rule for the integral of GG(q) |x-y|^(-s) over Omega x Omega (P1 data)."""
    parts = []
    # same cell: q is the cell slope, the distance integral is exact
    j = np.arange(ncell)
    w_same = 2.0 * h ** (2.0 - s) / ((1.0 - s) * (2.0 - s))
    parts.append((j, np.zeros(ncell), j, np.ones(ncell), np.full(ncell, 1.0 / h),
                  np.full(ncell, w_same)))
    # cells sharing a node: q is homogeneous of degree 0 in (a, t)
    if ncell > 1:
        tau, wt = gauss01(n_duffy + boost)
        jl = np.arange(ncell - 1)
        base = 2.0 * h ** (2.0 - s) / (2.0 - s)
        for big_a in (True, False):
            a = np.where(big_a, 1.0, tau) / (1.0 + tau)
            t = np.where(big_a, tau, 1.0) / (1.0 + tau)
            ww = base * wt * (1.0 + tau) ** (-s)
            J1 = np.repeat(jl, len(tau))
            parts.append((J1, np.tile(1.0 - a, len(jl)), J1 + 1, np.tile(t, len(jl)),
                          np.full(J1.size, 1.0 / h), np.tile(ww, len(jl))))
    # separated cells, unordered pairs counted twice
    for gap in range(1, ncell - 1):
        n = order_for(gap, boost)
        xi, wi = gauss01(n)
        X, Y = np.meshgrid(xi, xi, indexing="ij")
        WW = np.outer(wi, wi).ravel()
        X, Y = X.ravel(), Y.ravel()
        j1 = np.arange(ncell - gap - 1)
        j2 = j1 + gap + 1
        d = h * ((j2[:, None] - j1[:, None]) + Y[None, :] - X[None, :])
        parts.append((np.repeat(j1, X.size), np.tile(X, j1.size),
                      np.repeat(j2, X.size), np.tile(Y, j1.size),
                      (1.0 / d).ravel(), (2.0 * h * h * WW[None, :] * d ** (-s)).ravel()))
    cat = [np.concatenate(p) for p in zip(*parts)]
    return PairRule(cat[0].astype(np.intp), cat[1], cat[2].astype(np.intp), cat[3],
                    cat[4], cat[5])


def exterior_edges(start, direction, h, R, breaks=()):
    """Geometric panel edges from ``start`` outwards to distance ``R``.

    Edges sit at distances 0, h, 2h, 4h, ...; points of ``breaks`` (given as
    distances) are inserted unless they fall within h/4 of an existing edge.
    """
    dist = [0.0, h]
    while dist[-1] * 2.0 < R:
        dist.append(dist[-1] * 2.0)
    dist.append(R)
    dist = np.array(dist)
    for b in breaks:
        if 0.0 < b < R and np.min(np.abs(dist - b)) > 0.25 * h:
            dist = np.sort(np.append(dist, b))
    return start + direction * dist, dist


def _singular_points(A, T, s, n_r=8, n_tau=12, layers=4, boost=0):
    """Points (a, t, weight) for int_0^A int_0^T F(a, t) da dt with F ~ (a+t)^(-1-s).

    Duffy split into two triangles, dyadic layers toward the corner and a
    Gauss-Jacobi rule with weight r^(-s) on the innermost layer.  The
    returned weights include the Jacobian but not F.
    """
    tau, wt = gauss01(n_tau + boost)
    rs, wr = [], []
    xg, wg = gauss01(n_r + boost)
    xj, wj = gauss_jacobi01(n_r + boost, s)
    lo = 2.0 ** (-layers)
    rs.append(lo * xj)
    wr.append(lo * wj * xj ** s)
    for k in range(layers):
        l0, l1 = 2.0 ** (-layers + k), 2.0 ** (-layers + k + 1)
        rs.append(l0 + (l1 - l0) * xg)
        wr.append((l1 - l0) * wg)
    r = np.concatenate(rs)
    wrr = np.concatenate(wr)
    R, TT = np.meshgrid(r, tau, indexing="ij")
    W = np.outer(wrr, wt) * R
    R, TT, W = R.ravel(), TT.ravel(), W.ravel()
    # triangle alpha >= beta: beta = alpha*tau; and the mirror
    a = np.concatenate([A * R, A * R * TT])
    t = np.concatenate([T * R * TT, T * R])
    w = np.concatenate([W, W]) * A * T
    return a, t, w


def exchange_rule(grid, phi, s, M, R_far, boost=0):
    """Rule for the exchange integral over Omega x {y : dist(y, Omega) < R_far}."""
    a_, b_ = grid.omega.a, grid.omega.b
    h, N = grid.h, grid.ncell
    xl = a_ + h * np.arange(N + 1)
    xl[-1] = b_
    J, TH, PHI, INVD, W, Y = [], [], [], [], [], []

    def add(j, th, y, w):
        x = xl[j] + h * th
        d = np.abs(y - x)
        J.append(j)
        TH.append(th)
        PHI.append(phi(y))
        INVD.append(1.0 / d)
        W.append(w * d ** (-s))
        Y.append(y)

    for direction in (1.0, -1.0):
        start = b_ if direction > 0 else a_
        brk = []
        for k in list(phi.kinks()) + phi.level_crossings(M, -np.inf, np.inf):
            dk = direction * (k - start)
            if dk > 0:
                brk.append(dk)
        edges, dist = exterior_edges(start, direction, h, R_far, brk)
        for p in range(len(dist) - 1):
            d0, d1 = dist[p], dist[p + 1]
            L = d1 - d0
            for jc in range(N):
                # distance (in the outward direction) from the cell to the panel start
                near = (N - 1 - jc) if direction > 0 else jc
                gap = near * h + d0
                if gap == 0.0:
                    a, t, w = _singular_points(h, L, s, boost=boost)
                    if direction > 0:
                        th = 1.0 - a / h
                        y = b_ + t
                    else:
                        th = a / h
                        y = a_ - t
                    add(np.full(a.size, jc), th, y, w)
                    continue
                nx = order_for(gap / h, boost)
                ny = order_for(gap / L, boost)
                xi, wi = gauss01(nx)
                yi, wy = gauss01(ny)
                X, YY = np.meshgrid(xi, yi, indexing="ij")
                X, YY = X.ravel(), YY.ravel()
                w = np.outer(wi, wy).ravel() * h * L
                y = start + direction * (d0 + L * YY)
                add(np.full(X.size, jc), X, y, w)
    cat = [np.concatenate(v) for v in (J, TH, PHI, INVD, W, Y)]
    return ExchangeRule(cat[0].astype(np.intp), cat[1], cat[2], cat[3], cat[4], cat[5])


def far_rule(grid, phi, R_far, n=4):
    """x points for the analytic contribution of |y - x| beyond the panels."""
    a_, b_ = grid.omega.a, grid.omega.b
    h, N = grid.h, grid.ncell
    xi, wi = gauss01(n)
    j = np.repeat(np.arange(N), n)
    t = np.tile(xi, N)
    x = a_ + h * (j + t)
    w = np.tile(wi, N) * h
    kl, kr = phi.slopes()
    c = phi.c
    out = []
    # right: y = x + d, phi(y) = c + kr*y for y beyond every kink
    out.append(FarRule(j, t, w, (b_ + R_far) - x, c + kr * x, np.full(x.size, kr)))
    # left: y = x - d, phi(y) = c + kl*y = (c + kl*x) - kl*d
    out.append(FarRule(j, t, w, x - (a_ - R_far), c + kl * x, np.full(x.size, -kl)))
    return out


def adaptive_gauss(f, edges, atol=1e-10, rtol=1e-10, order=10, max_panels=200000):
    """Integrate a vector-valued f over consecutive panels with bisection.

    ``f`` maps an array of N abscissae to an (N, m) array.  Each panel is
    integrated by Gauss-Legendre once whole and once as two halves; panels
    whose two estimates disagree are bisected.  All panels of a round are
    evaluated in a single call.

    Returns
    -------
    value : (m,) array
    error : float
        Sum of the accepted panel discrepancies (max over components).
    """
    x01, w01 = gauss01(order)
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    total = None
    err = 0.0
    npan = a.size
    span = float(np.sum(b - a))
    while a.size:
        mid = 0.5 * (a + b)
        lo = np.concatenate([a, a, mid])
        hi = np.concatenate([b, mid, b])
        L = (hi - lo)[:, None]
        pts = lo[:, None] + L * x01[None, :]
        vals = np.asarray(f(pts.ravel()), dtype=float)
        vals = vals.reshape(pts.shape + vals.shape[1:])
        I = np.einsum("pk,pk...->p...", L * w01[None, :], vals)
        n = a.size
        whole, halves = I[:n], I[n:2 * n] + I[2 * n:]
        diff = np.abs(whole - halves).reshape(n, -1).max(axis=1)
        if total is None:
            total = np.zeros(halves.shape[1:])
        scale = np.abs(total + halves.sum(axis=0)).max() if n else 0.0
        lim = max(atol, rtol * scale) * (b - a) / span
        ok = (diff <= lim) | (b - a < 1e-13 * (1.0 + np.abs(a)))
        if npan + 2 * np.count_nonzero(~ok) > max_panels:
            ok[:] = True
        total = total + halves[ok].sum(axis=0)
        err += float(diff[ok].sum())
        npan += np.count_nonzero(~ok)
        a, b = np.concatenate([a[~ok], mid[~ok]]), np.concatenate([mid[~ok], b[~ok]])
    return total, err


def cellwise_interior_energy(spec, h, u, boost=0, layers=40):
    """Interior term for a field constant on each of the cells of width h.

    The double integral over two cells at index distance k reduces to
    int tent_k(d) GG(du/d) d^(-s) dd with the tent weight of the cell pair;
    the touching pair k = 1 is graded dyadically towards d = 0.
    """
    u = np.asarray(u, dtype=float)
    s = spec.s
    n = u.size
    total = 0.0
    xg, wg = gauss01(8 + boost)
    for k in range(1, n):
        du = (u[:-k] - u[k:])[:, None]
        if k == 1:
            lo = h * 0.5 ** np.arange(1, layers + 1)
            hi = 2.0 * lo
            d = (lo[:, None] + (hi - lo)[:, None] * xg[None, :]).ravel()
            w = ((hi - lo)[:, None] * wg[None, :]).ravel() * d
            eps = lo[-1]
            inner = spec.Lambda * np.abs(du[:, 0]) * eps ** (1.0 - s) / (1.0 - s)
            total += 2.0 * float(np.sum(inner))
        else:
            d = ((k - 1) * h + h * xg)
            w = h * wg * (h - np.abs(d - k * h))
        d2 = k * h + h * xg
        w2 = h * wg * (h - np.abs(d2 - k * h))
        d = np.concatenate([d, d2])
        w = np.concatenate([w, w2]) * d ** (-s)
        total += 2.0 * float(np.sum(w[None, :] * spec.GG(du / d[None, :])))
    return total
