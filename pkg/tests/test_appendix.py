import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracplateau.domain import Domain1D, ExteriorData, PsiSpec
from fracplateau.geometry import (SmoothFunction, dome_profile, osculating_ball_radius,
                                  osculating_identity_check, paraboloid_bound_check,
                                  verify_osculating_ball)


def test_osculating_radius():
    assert osculating_ball_radius(4.0) == 0.25
    with pytest.raises(ValueError):
        osculating_ball_radius(0.0)


def test_osculating_identity_on_rationals():
    q = np.linspace(-1.0, 1.0, 1000)
    assert osculating_identity_check(q) == q.size
    assert osculating_identity_check([0.5, 3.0]) == 2


@given(st.floats(0.05, 20.0), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5),
       st.integers(0, 1000))
def test_osculating_ball_lies_above_parabola(a, b, c, x0, seed):
    r = verify_osculating_ball(a, b, c, x0, samples=200, seed=seed)
    assert r.passed and r.radius == pytest.approx(1.0 / a)


def test_paraboloid_bound_quadratic_exact_hessian():
    psi = PsiSpec("quadratic", 0.3, 0.5, -3.0)
    r = paraboloid_bound_check(psi, 0.5, (-0.4, 0.4))
    assert r.passed and r.min_slack >= -1e-12
    r = paraboloid_bound_check(PsiSpec("quadratic", 0.3, 0.5, 3.0), 0.5, (-0.4, 0.4),
                               hessian_bound=1.5)
    assert not r.passed and r.witness is not None


def test_paraboloid_bound_trigonometric():
    sn = SmoothFunction(np.sin, np.cos, 1.0)
    assert paraboloid_bound_check(sn, 0.7, (-2.0, 2.0)).passed
    assert not paraboloid_bound_check(sn, 0.7, (-3.0, -1.0), hessian_bound=0.2).passed


def test_paraboloid_boundary_variant():
    om = Domain1D(-1.0, 1.0)
    psi = PsiSpec("quadratic", -1.0, 0.0, 2.0)
    low = paraboloid_bound_check(psi, 0.5, (-1, 1), phi=ExteriorData.constant(-5.0), omega=om)
    assert low.passed and low.boundary_passed
    high = paraboloid_bound_check(psi, 0.5, (-1, 1), phi=ExteriorData.constant(5.0), omega=om)
    assert not high.passed and not high.boundary_passed and high.boundary_witness[0] in (-1.0, 1.0)
    with pytest.raises(ValueError):
        paraboloid_bound_check(psi, 0.5, (-1, 1), phi=ExteriorData.constant(0.0))


@pytest.mark.parametrize("k", (2, 3, 5))
def test_dome_gluing(k):
    dome = dome_profile(Domain1D(-1.0, 1.0), k, 0.2, lambda x: 0.3 + 0.1 * np.cos(x))
    r = dome.verify(seed=k)
    assert r.passed and r.max_abs_F <= 1e-12 and r.min_grad >= 1 - 1e-6 and r.membership_agrees


def test_dome_profile_shape():
    dome = dome_profile(Domain1D(-1.0, 1.0), 2, 0.2, lambda x: np.full_like(x, 0.5))
    assert dome.t_plus(0.0) == 0.5
    assert dome.t_plus(-1.0) == 0.0
    assert math.isnan(dome.t_plus(2.0))
    assert dome.contains(0.0, 0.4) and not dome.contains(0.0, 0.6)
    assert dome.eta(-0.99) == 0.0 and dome.eta(0.0) == 1.0


def test_dome_validation():
    with pytest.raises(ValueError):
        dome_profile(Domain1D(-1.0, 1.0), 1, 0.2, np.cos)
    with pytest.raises(ValueError):
        dome_profile(Domain1D(-1.0, 1.0), 2, 0.5, np.cos)
    with pytest.raises(TypeError):
        dome_profile((-1.0, 1.0), 2, 0.2, np.cos)
