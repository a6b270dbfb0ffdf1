"""Discrete fractional area functionals on a 1-D grid.

The unknown is the vector ``U`` of nodal values on the closed interval
[a, b], interpolated piecewise linearly inside Omega.  Outside Omega the
field equals the exterior datum, evaluated analytically.
"""

from dataclasses import dataclass, field
from functools import cached_property
import warnings

import numpy as np

from .domain import ExteriorData, Grid1D
from .kernel import KernelSpec
from .quadrature import cellwise_interior_energy, exchange_rule, far_rule, interior_rule


@dataclass
class ScalarField:
    """A field on every node of ``grid``: unknowns on [a, b], phi outside."""

    grid: Grid1D
    values: np.ndarray
    exterior: ExteriorData

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.nodes.shape:
            raise ValueError("values must have one entry per grid node")

    @classmethod
    def from_dofs(cls, grid, U, exterior):
        vals = np.asarray(exterior(grid.nodes), dtype=float).copy()
        vals[grid.interior_mask] = U
        return cls(grid, vals, exterior)

    @property
    def dofs(self):
        return self.values[self.grid.interior_mask]

    def check_exterior(self, atol=1e-12):
        ext = ~self.grid.interior_mask
        if not np.allclose(self.values[ext], self.exterior(self.grid.nodes[ext]), atol=atol, rtol=0):
            raise ValueError("exterior node values differ from the exterior datum")


@dataclass
class EnergyBreakdown:
    """Interior term, exchange term (up to R_far) and analytic far part."""

    interior: float
    exchange: float
    farfield: float
    total: float = field(init=False)
    truncation_warning: bool = False

    def __post_init__(self):
        self.total = self.interior + self.exchange + self.farfield


def default_M(omega, phi, obstacle):
    """diam Omega + max(sup of |phi| on the window, sup |eps psi|) + 1."""
    return apriori_bound(omega, phi, obstacle) + 1.0


def apriori_bound(omega, phi, obstacle):
    lo, hi = omega.window
    sup_phi = phi.sup_abs([(lo, omega.a), (omega.b, hi)])
    return omega.diam + max(sup_phi, obstacle.sup_abs())


def default_R_far(omega, phi, M, umax=0.0):
    """Distance beyond which the far-field series is accurate for |u| <= umax."""
    kl, kr = phi.slopes()
    reach = max(abs(omega.a), abs(omega.b))
    scale = M + umax + abs(phi.c) + max(abs(kl), abs(kr)) * reach + 1.0
    kinks = [abs(k) + reach for k in phi.kinks()]
    lvl = [abs(k) + reach for k in phi.level_crossings(M, -np.inf, np.inf)]
    return max(200.0 * scale, 2.0 * max(kinks + lvl + [0.0]), 10.0 * omega.diam)


class Functional:
    """Truncated area functional F^M = A + N^M for one grid, datum and kernel.

    Parameters
    ----------
    spec : KernelSpec
    grid : Grid1D
    phi : ExteriorData
        Must be analytic (constant, affine or cone).
    M : float
        Vertical truncation level.
    boost : int
        Extra Gauss points on every panel (accuracy studies).
    R_far : float, optional
        Distance from Omega beyond which the analytic series is used.
    """

    def __init__(self, spec, grid, phi, M, boost=0, R_far=None):
        if spec.n != 1:
            raise NotImplementedError("the discrete functional is implemented for n = 1")
        if not phi.analytic:
            raise ValueError("tabulated exterior data is not admitted by the solver; "
                             "use a constant, affine or cone datum")
        if M < 0:
            raise ValueError("M must be nonnegative")
        self.spec, self.grid, self.phi, self.M = spec, grid, phi, float(M)
        self.boost = boost
        self.R_far = default_R_far(grid.omega, phi, M) if R_far is None else float(R_far)
        s = spec.s
        self.pairs = interior_rule(grid.ncell, grid.h, s, boost=boost)
        self.exch = exchange_rule(grid, phi, s, self.M, self.R_far, boost=boost)
        self.far = far_rule(grid, phi, self.R_far)
        e = self.exch
        d_inv = e.invd
        lam = spec.Lambda
        # 2 M Lambda/d - GG((M+phi)/d) - GG((M-phi)/d), written with the defect H
        K = (-2.0 * lam * np.maximum(0.0, np.abs(e.phi_y) - self.M) * d_inv
             + spec.H((self.M + e.phi_y) * d_inv) + spec.H((self.M - e.phi_y) * d_inv))
        self.exchange_const = float(np.sum(e.w * K))
        self._far_coeffs()
        self.set_offset(0.0, None)

    def set_offset(self, c, chi):
        """Evaluate at u = c*chi + U instead of u = U.

        With a large common level c on the nodes flagged by ``chi`` the
        differences between flagged nodes are formed from U alone, so they
        keep full precision however large c is.
        """
        self.c = float(c)
        n = self.grid.ndof
        chi = np.zeros(n) if chi is None else np.asarray(chi, dtype=float)
        self.chi = chi
        p, e = self.pairs, self.exch
        self._pchi = self.c * (self._interp(chi, p.j1, p.t1) - self._interp(chi, p.j2, p.t2))
        self._echi = self.c * self._interp(chi, e.j, e.t) - e.phi_y
        self._fchi = [self.c * self._interp(chi, fr.j, fr.t) - fr.phi0 for fr, _, _ in self._far]

    def full(self, U):
        """Nodal values c*chi + U (rounded to double precision)."""
        return self.c * self.chi + np.asarray(U, dtype=float)

    def _far_coeffs(self):
        k = self.spec
        s = k.s
        self._far = []
        for fr in self.far:
            nu = fr.nu
            c = {1: -k.G(nu), 2: 0.5 * k.g(nu), 3: -k.dg(nu) / 6.0, 4: k.d2g(nu) / 24.0}
            ints = {kk: fr.D ** (1.0 - kk - s) / (kk - 1.0 + s) for kk in range(1, 5)}
            self._far.append((fr, c, ints))

    @property
    def ndof(self):
        return self.grid.ndof

    # evaluation ---------------------------------------------------------

    @staticmethod
    def _interp(U, j, t):
        return U[j] * (1.0 - t) + U[j + 1] * t

    def _scatter(self, out, j, t, vals):
        out += np.bincount(j, vals * (1.0 - t), minlength=out.size)
        out += np.bincount(j + 1, vals * t, minlength=out.size)

    def interior(self, U, grad=False):
        p = self.pairs
        q = (self._pchi + (self._interp(U, p.j1, p.t1) - self._interp(U, p.j2, p.t2))) * p.invd
        E = float(np.sum(p.w * self.spec.GG(q)))
        if not grad:
            return E
        gq = p.w * self.spec.G(q) * p.invd
        g = np.zeros(U.size)
        self._scatter(g, p.j1, p.t1, gq)
        self._scatter(g, p.j2, p.t2, -gq)
        return E, g

    def exchange(self, U, grad=False):
        e = self.exch
        q = (self._interp(U, e.j, e.t) + self._echi) * e.invd
        E = float(np.sum(e.w * 2.0 * self.spec.GG(q))) + self.exchange_const
        if not grad:
            return E
        g = np.zeros(U.size)
        self._scatter(g, e.j, e.t, 2.0 * e.w * self.spec.G(q) * e.invd)
        return E, g

    def farfield(self, U, grad=False):
        E = 0.0
        g = np.zeros(U.size)
        M = self.M
        lam = self.spec.Lambda
        for (fr, c, I), off in zip(self._far, self._fchi):
            al = self._interp(U, fr.j, fr.t) + off
            u = al + fr.phi0
            be, ga = M + fr.phi0, M - fr.phi0
            val = (2.0 * M * lam + 2.0 * u * c[1]) * I[1]
            dval = 2.0 * c[1] * I[1]
            for kk in (2, 3, 4):
                val = val + c[kk] * (2.0 * al ** kk - (-be) ** kk - ga ** kk) * I[kk]
                dval = dval + c[kk] * 2.0 * kk * al ** (kk - 1) * I[kk]
            E += float(np.sum(fr.w * val))
            if grad:
                self._scatter(g, fr.j, fr.t, fr.w * dval)
        return (E, g) if grad else E

    def hessian(self, U):
        """Exact Hessian of the discrete energy (dense, ndof x ndof)."""
        U = np.asarray(U, dtype=float)
        n = U.size
        H = np.zeros(n * n)
        k = self.spec

        def add(idx, coef, base):
            for ia, ca in zip(idx, coef):
                for ib, cb in zip(idx, coef):
                    H[:] += np.bincount(ia * n + ib, base * ca * cb, minlength=n * n)

        p = self.pairs
        q = (self._pchi + (self._interp(U, p.j1, p.t1) - self._interp(U, p.j2, p.t2))) * p.invd
        add((p.j1, p.j1 + 1, p.j2, p.j2 + 1), (1.0 - p.t1, p.t1, p.t2 - 1.0, -p.t2),
            p.w * k.g(q) * p.invd ** 2)
        e = self.exch
        q = (self._interp(U, e.j, e.t) + self._echi) * e.invd
        add((e.j, e.j + 1), (1.0 - e.t, e.t), 2.0 * e.w * k.g(q) * e.invd ** 2)
        for (fr, c, I), off in zip(self._far, self._fchi):
            al = self._interp(U, fr.j, fr.t) + off
            d2 = sum(c[kk] * 2.0 * kk * (kk - 1) * al ** (kk - 2) * I[kk] for kk in (2, 3, 4))
            add((fr.j, fr.j + 1), (1.0 - fr.t, fr.t), fr.w * d2)
        return H.reshape(n, n)

    @staticmethod
    def _interp_exact(v, j, t):
        # equal neighbours give their common value without rounding
        a, b = v[j], v[j + 1]
        return np.where(a == b, a, a * (1.0 - t) + b * t)

    def slopes(self, U, vs, hess=False):
        """Directional derivatives g(U).v for each v in ``vs``, summed pair by pair.

        Pairs whose stencil sees a constant v contribute exactly zero, so the
        derivative along a plateau indicator is free of the cancellation that
        affects ``gradient(U) @ v``.  With ``hess`` the products H(U) v are
        returned as well, assembled the same way.
        """
        U = np.asarray(U, dtype=float)
        k = self.spec
        out = np.zeros(len(vs))
        Hv = [np.zeros(U.size) for _ in vs] if hess else None
        p = self.pairs
        q = (self._pchi + (self._interp(U, p.j1, p.t1) - self._interp(U, p.j2, p.t2))) * p.invd
        Gq = p.w * k.G(q)
        gq = p.w * k.g(q) * p.invd if hess else None
        for m, v in enumerate(vs):
            dv = (self._interp_exact(v, p.j1, p.t1) - self._interp_exact(v, p.j2, p.t2)) * p.invd
            out[m] += float(np.sum(Gq * dv))
            if hess:
                self._scatter(Hv[m], p.j1, p.t1, gq * dv)
                self._scatter(Hv[m], p.j2, p.t2, -gq * dv)
        e = self.exch
        q = (self._interp(U, e.j, e.t) + self._echi) * e.invd
        Gq = 2.0 * e.w * k.G(q) * e.invd
        gq = 2.0 * e.w * k.g(q) * e.invd ** 2 if hess else None
        for m, v in enumerate(vs):
            av = self._interp_exact(v, e.j, e.t)
            out[m] += float(np.sum(Gq * av))
            if hess:
                self._scatter(Hv[m], e.j, e.t, gq * av)
        for (fr, c, I), off in zip(self._far, self._fchi):
            al = self._interp(U, fr.j, fr.t) + off
            dval = 2.0 * c[1] * I[1]
            d2 = 0.0
            for kk in (2, 3, 4):
                dval = dval + c[kk] * 2.0 * kk * al ** (kk - 1) * I[kk]
                d2 = d2 + c[kk] * 2.0 * kk * (kk - 1) * al ** (kk - 2) * I[kk]
            for m, v in enumerate(vs):
                av = self._interp_exact(v, fr.j, fr.t)
                out[m] += float(np.sum(fr.w * dval * av))
                if hess:
                    self._scatter(Hv[m], fr.j, fr.t, fr.w * d2 * av)
        return (out, Hv) if hess else out

    def series_valid(self, U, ratio=0.005):
        """True when |u - phi0| stays below ``ratio * R_far`` (far series accurate)."""
        return bool(np.max(np.abs(self.full(U))) + self.series_scale <= ratio * self.R_far)

    @cached_property
    def series_scale(self):
        return max(float(np.max(np.abs(fr.phi0))) for fr in self.far) + self.M + 1.0

    def breakdown(self, U):
        U = np.asarray(U, dtype=float)
        warn = bool(np.max(np.abs(self.full(U))) > self.M)
        return EnergyBreakdown(self.interior(U), self.exchange(U), self.farfield(U),
                               truncation_warning=warn)

    def cellwise_breakdown(self, ucell):
        """Energy of the field equal to ``ucell[j]`` on cell j of Omega.

        Jumps between cells and at the boundary are allowed; the exchange
        and far-field rules are reused with the cell value at every point.
        """
        ucell = np.asarray(ucell, dtype=float)
        if ucell.size != self.grid.ncell:
            raise ValueError("one value per cell of Omega is required")
        k = self.spec
        e = self.exch
        q = (ucell[e.j] - e.phi_y) * e.invd
        exch = float(np.sum(e.w * 2.0 * k.GG(q))) + self.exchange_const
        far = 0.0
        M, lam = self.M, k.Lambda
        for fr, c, I in self._far:
            al = ucell[fr.j] - fr.phi0
            be, ga = M + fr.phi0, M - fr.phi0
            val = (2.0 * M * lam + 2.0 * (al + fr.phi0) * c[1]) * I[1]
            for kk in (2, 3, 4):
                val = val + c[kk] * (2.0 * al ** kk - (-be) ** kk - ga ** kk) * I[kk]
            far += float(np.sum(fr.w * val))
        inter = cellwise_interior_energy(k, self.grid.h, ucell, boost=self.boost)
        warn = bool(np.max(np.abs(ucell)) > M)
        return EnergyBreakdown(inter, exch, far, truncation_warning=warn)

    def energy(self, U):
        U = np.asarray(U, dtype=float)
        return self.interior(U) + self.exchange(U) + self.farfield(U)

    def energy_and_gradient(self, U):
        U = np.asarray(U, dtype=float)
        Ea, ga = self.interior(U, grad=True)
        Ee, ge = self.exchange(U, grad=True)
        Ef, gf = self.farfield(U, grad=True)
        return Ea + Ee + Ef, ga + ge + gf

    def gradient(self, U):
        return self.energy_and_gradient(U)[1]


_CACHE = {}


def _functional_for(spec, u, M):
    key = (spec, id(u.grid), u.exterior, float(M))
    f = _CACHE.get(key)
    if f is None or f.grid is not u.grid:
        if len(_CACHE) > 16:
            _CACHE.clear()
        f = Functional(spec, u.grid, u.exterior, M)
        _CACHE[key] = f
    return f


def energy_interior(spec, u):
    """Interior double integral of GG((u(x)-u(y))/|x-y|) |x-y|^(-s) over Omega x Omega."""
    return interior_rule_energy(spec, u.grid, u.dofs)


def interior_rule_energy(spec, grid, U):
    rule = interior_rule(grid.ncell, grid.h, spec.s)
    p = rule
    q = (Functional._interp(U, p.j1, p.t1) - Functional._interp(U, p.j2, p.t2)) * p.invd
    return float(np.sum(p.w * spec.GG(q)))


def energy_truncated(spec, u, M):
    """F^M split into interior, exchange and far-field parts."""
    f = _functional_for(spec, u, M)
    b = f.breakdown(u.dofs)
    if b.truncation_warning:
        warnings.warn(f"M={M} is below sup|u| on Omega", RuntimeWarning, stacklevel=2)
    return b


def gradient(spec, u, M=0.0):
    """Gradient of F^M with respect to the nodal values on [a, b].

    Component i is the pairing of the curvature operator at u with the i-th
    hat function; it does not depend on M.
    """
    return _functional_for(spec, u, M).gradient(u.dofs)


def weak_curvature_pairing(spec, u, v):
    """Pairing <H_s u, v> for a test field v vanishing outside [a, b]."""
    ext = ~v.grid.interior_mask
    if np.any(v.values[ext] != 0.0):
        raise ValueError("test field must vanish on every exterior node")
    return float(np.dot(gradient(spec, u), v.dofs))
