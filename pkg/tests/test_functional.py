import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracplateau.domain import Domain1D, ExteriorData, Grid1D
from fracplateau.functional import (Functional, ScalarField, apriori_bound, default_M,
                                    energy_truncated, gradient, weak_curvature_pairing)
from fracplateau.domain import ObstacleSpec, PsiSpec
from fracplateau.kernel import KernelSpec
from oracles import exchange_oracle, interior_oracle

U4 = np.array([0.1, -0.4, 0.5, 0.2])
# nested adaptive quadrature (tests/oracles.py), frozen
INTERIOR_REF = {0.5: 2.03721782993764, 0.3: 1.3509916852643695}
EXCHANGE_REF = {(0.5, "constant"): 32.41034708441141, (0.3, "cone"): 65.61936380698936}
PHIS = {"constant": ExteriorData.constant(0.3), "cone": ExteriorData.cone(0.5, 0.2)}


def tiny(s, phi):
    g = Grid1D(Domain1D(-1.0, 1.0, 4.0), 2.0 / 3.0)
    return Functional(KernelSpec(1, s), g, phi, 2.0)


def medium(s, phi=None, h=1.0 / 32, W=4.0, M=6.0):
    g = Grid1D(Domain1D(-1.0, 1.0, W), h)
    return Functional(KernelSpec(1, s), g, phi or ExteriorData.cone(1.0, 0.3), M)


@pytest.mark.parametrize("s", sorted(INTERIOR_REF))
def test_interior_against_frozen_oracle(s):
    b = tiny(s, PHIS["constant"]).breakdown(U4)
    assert b.interior == pytest.approx(INTERIOR_REF[s], rel=1e-11)


@pytest.mark.parametrize("key", sorted(EXCHANGE_REF))
def test_exchange_against_frozen_oracle(key):
    s, kind = key
    b = tiny(s, PHIS[kind]).breakdown(U4)
    assert b.exchange + b.farfield == pytest.approx(EXCHANGE_REF[key], rel=1e-7)


@pytest.mark.slow
def test_exchange_oracle_recomputed():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ref = exchange_oracle(0.5, -1.0, 1.0, U4, PHIS["constant"], 2.0)
    assert ref == pytest.approx(EXCHANGE_REF[(0.5, "constant")], rel=1e-9)


@pytest.mark.slow
def test_interior_oracle_recomputed():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ref = interior_oracle(0.3, -1.0, 1.0, U4)
    assert ref == pytest.approx(INTERIOR_REF[0.3], rel=1e-10)


def test_rejects_tabulated_data_and_negative_M():
    g = Grid1D(Domain1D(-1.0, 1.0, 2.0), 0.25)
    with pytest.raises(ValueError):
        Functional(KernelSpec(1, 0.5), g, ExteriorData.tabulated([0, 1], [0, 1]), 1.0)
    with pytest.raises(ValueError):
        Functional(KernelSpec(1, 0.5), g, ExteriorData.constant(0.0), -1.0)


@pytest.mark.parametrize("s", (0.3, 0.7))
def test_gradient_matches_differences(s):
    F = medium(s)
    rng = np.random.default_rng(1)
    for _ in range(3):
        U, V = rng.uniform(-1, 1, (2, F.ndof))
        t = 1e-5
        fd = (F.energy(U + t * V) - F.energy(U - t * V)) / (2 * t)
        assert F.gradient(U) @ V == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("s", (0.3, 0.7))
def test_hessian_matches_gradient_differences(s):
    F = medium(s, h=1.0 / 8)
    rng = np.random.default_rng(2)
    U, V = rng.uniform(-1, 1, (2, F.ndof))
    t = 1e-6
    fd = (F.gradient(U + t * V) - F.gradient(U - t * V)) / (2 * t)
    HV = F.hessian(U) @ V
    assert np.allclose(HV, fd, rtol=1e-5, atol=1e-6 * np.abs(fd).max())
    H = F.hessian(U)
    assert np.allclose(H, H.T)
    assert np.linalg.eigvalsh(H).min() > 0


def test_slopes_agree_with_gradient():
    F = medium(0.5, h=1.0 / 8)
    rng = np.random.default_rng(3)
    U, V, W = rng.uniform(-1, 1, (3, F.ndof))
    sl, hv = F.slopes(U, (V, W), hess=True)
    g = F.gradient(U)
    H = F.hessian(U)
    assert np.allclose(sl, [g @ V, g @ W], rtol=1e-10)
    assert np.allclose(hv[0], H @ V, rtol=1e-8, atol=1e-10)


def test_offset_representation_is_exact():
    F = medium(0.5, h=1.0 / 8)
    rng = np.random.default_rng(4)
    U = rng.uniform(-1, 1, F.ndof)
    chi = (np.abs(F.grid.x) > 0.5).astype(float)
    c = 3.0
    e0, g0 = F.energy(U + c * chi), F.gradient(U + c * chi)
    F.set_offset(c, chi)
    assert F.energy(U) == pytest.approx(e0, rel=1e-12)
    assert np.allclose(F.gradient(U), g0, rtol=1e-10, atol=1e-12)
    F.set_offset(0.0, None)
    assert F.energy(U) == pytest.approx(F.energy(U), rel=0)


@given(st.integers(0, 2 ** 31), st.floats(0.0, 1.0), st.sampled_from((0.2, 0.5, 0.8)))
def test_convexity(seed, th, s):
    F = medium(s, h=1.0 / 8, W=2.0)
    rng = np.random.default_rng(seed)
    U, V = rng.uniform(-3, 3, (2, F.ndof))
    mid = F.energy(th * U + (1 - th) * V)
    assert mid <= th * F.energy(U) + (1 - th) * F.energy(V) + 1e-9 * (1 + abs(mid))


@pytest.mark.parametrize("c", (-0.75, 0.0, 1.5))
def test_constant_data_gives_critical_constant(c):
    F = medium(0.5, ExteriorData.constant(c), h=1.0 / 8)
    g = F.gradient(np.full(F.ndof, c))
    assert np.max(np.abs(g)) <= 1e-10


def test_gradient_independent_of_M():
    g = Grid1D(Domain1D(-1.0, 1.0, 4.0), 1.0 / 16)
    phi = ExteriorData.cone(1.0)
    U = np.linspace(-0.5, 0.5, g.ndof)
    g1 = Functional(KernelSpec(1, 0.5), g, phi, 6.0).gradient(U)
    g2 = Functional(KernelSpec(1, 0.5), g, phi, 9.0).gradient(U)
    # quadrature breakpoints follow the level crossings of M
    assert np.allclose(g1, g2, rtol=0, atol=1e-9)


def test_energy_shift_between_truncations_is_constant():
    g = Grid1D(Domain1D(-1.0, 1.0, 4.0), 1.0 / 16)
    phi = ExteriorData.constant(0.25)
    F6 = Functional(KernelSpec(1, 0.5), g, phi, 6.0)
    F9 = Functional(KernelSpec(1, 0.5), g, phi, 9.0)
    rng = np.random.default_rng(5)
    d = [F9.energy(U) - F6.energy(U) for U in rng.uniform(-2, 2, (3, g.ndof))]
    assert np.ptp(d) <= 1e-8 * max(1.0, abs(d[0]))


def test_module_level_helpers():
    k = KernelSpec(1, 0.5)
    g = Grid1D(Domain1D(-1.0, 1.0, 4.0), 1.0 / 8)
    phi = ExteriorData.cone(1.0)
    u = ScalarField.from_dofs(g, np.zeros(g.ndof), phi)
    u.check_exterior()
    b = energy_truncated(k, u, 6.0)
    assert b.total == pytest.approx(b.interior + b.exchange + b.farfield)
    vals = np.zeros(g.nodes.size)
    vals[g.interior_mask] = 1.0
    v = ScalarField(g, vals, ExteriorData.constant(0.0))
    assert weak_curvature_pairing(k, u, v) == pytest.approx(gradient(k, u).sum())
    bad = ScalarField(g, np.ones(g.nodes.size), ExteriorData.constant(0.0))
    with pytest.raises(ValueError):
        weak_curvature_pairing(k, u, bad)
    with pytest.warns(RuntimeWarning):
        energy_truncated(k, ScalarField.from_dofs(g, np.full(g.ndof, 9.0), phi), 6.0)


def test_default_truncation_level():
    om = Domain1D(-1.0, 1.0, 3.0)
    phi = ExteriorData.cone(2.0)
    ob = ObstacleSpec((-0.4, 0.4), PsiSpec("constant", 0.5))
    # diam + window sup |phi| = 2 + 2 * 4
    assert apriori_bound(om, phi, ob) == 10.0
    assert default_M(om, phi, ob) == 11.0
