import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import beta

from fracplateau.domain import ExteriorData
from fracplateau.geometry import (ColumnFunction, ConfinementError, Disk, HalfPlane, OverlapError,
                                  PixelGrid, PixelSet, Rectangle, Sector, Subgraph,
                                  UnsupportedFarFieldError, alpha_at_infinity, alpha_numeric,
                                  check_confined, curvature_bound_params,
                                  default_geometry, equivalence_offset, fractional_perimeter,
                                  interaction, mean_curvature, shape_from_dict, slab_region,
                                  subgraph_pixels, tangent_ball_check, truncated_curvature,
                                  vertical_rearrangement)
from fracplateau.geometry.shapes import arc_measure
from fracplateau.kernel import KernelSpec

K5 = KernelSpec(1, 0.5)
angles = st.floats(0.0, 2 * math.pi, exclude_max=True)
pts = st.floats(-3.0, 3.0)


def sample_shapes():
    return [
        HalfPlane.below(0.3),
        HalfPlane(1.0, 2.0, 0.5),
        Disk(0.2, -0.1, 0.8),
        Rectangle(-1.0, 0.5, -0.5, 1.0),
        Rectangle.strip(-1.0, 1.0),
        Subgraph.of(ExteriorData.cone(2.0, 0.5)),
        Subgraph.piecewise_linear([-1.0, 0.0, 1.0], [0.0, 1.0, -0.5], 0.5, -1.0),
        Disk(0, 0, 1) | Rectangle(0.5, 2.0, -0.2, 0.2),
        Subgraph.of(ExteriorData.cone(1.0)) - Disk(0.0, -1.0, 0.5),
        Sector(0.0, 0.0, 0.3, 2.0),
    ]


@given(st.integers(0, 9), pts, pts, angles)
def test_ray_intervals_match_membership(which, px, py, theta):
    E = sample_shapes()[which]
    lo, hi = E.ray_intervals(px, py, theta)
    r = np.array([0.05, 0.37, 0.9, 1.7, 3.3, 7.1])
    x, y = px + r * math.cos(theta), py + r * math.sin(theta)
    inside = ((r[:, None] > lo[0][None]) & (r[:, None] < hi[0][None])).any(axis=1)
    near = ((np.abs(r[:, None] - lo[0][None]) < 1e-9) | (np.abs(r[:, None] - hi[0][None]) < 1e-9)).any(axis=1)
    ok = (inside == E.contains(x, y)) | near
    assert ok.all()


@pytest.mark.parametrize("which", range(10))
def test_shape_serialization_round_trip(which):
    E = sample_shapes()[which]
    F = shape_from_dict(E.to_dict())
    rng = np.random.default_rng(which)
    x, y = rng.uniform(-4, 4, (2, 500))
    assert np.array_equal(E.contains(x, y), F.contains(x, y))


def test_arc_measures():
    assert arc_measure(HalfPlane.below(5.0).asymptotic_directions()) == math.pi
    assert Disk(0, 0, 1).asymptotic_directions() == []
    cone = Subgraph.of(ExteriorData.cone(2.0))
    assert arc_measure(cone.asymptotic_directions()) == pytest.approx(2 * math.atan(0.5), rel=1e-15)
    assert arc_measure(Sector(0, 0, 0.3, 2.0).asymptotic_directions()) == pytest.approx(1.7)


def test_alpha_exact_values():
    assert alpha_at_infinity(K5, HalfPlane.below(0.0)).alpha_bar == math.pi
    assert tuple(alpha_at_infinity(K5, Disk(1.0, 1.0, 2.0))) == (0.0, 0.0)
    a = alpha_at_infinity(K5, Subgraph.of(ExteriorData.cone(1.0)))
    assert a.exact and a.alpha_bar == pytest.approx(0.5 * math.pi, rel=1e-15)
    with pytest.raises(ValueError):
        alpha_at_infinity(K5, Disk(0, 0, 1), s_sequence=(0.1, 0.2))


def test_alpha_numeric_closed_forms():
    # the half-plane through the origin and the centred disk are exact at every s
    assert alpha_numeric(HalfPlane.below(0.0), 0.3) == pytest.approx(math.pi, rel=1e-9)
    # s * int_{1 < |Y| < 2} |Y|^(-2-s) = 2 pi (1 - 2^(-s))
    assert alpha_numeric(Disk(0.0, 0.0, 2.0), 0.3) == pytest.approx(2 * math.pi * (1 - 2 ** -0.3), rel=1e-9)
    a = alpha_at_infinity(K5, Disk(0, 0, 2.0), method="numeric")
    assert not a.exact and a.alpha_bar == pytest.approx(2 * math.pi * (1 - 2 ** -0.05), rel=1e-6)


def test_curvature_of_unit_disk_closed_form():
    for s in (0.3, 0.7):
        k = KernelSpec(1, s)
        ref = (2.0 / s) * 2.0 ** (-s) * beta(0.5, 0.5 * (1 - s))
        assert mean_curvature(k, Disk(0.0, 0.0, 1.0), (1.0, 0.0)).value == pytest.approx(ref, rel=1e-7)


def test_curvature_sign_and_symmetry():
    h = mean_curvature(K5, HalfPlane.below(0.0), (0.3, 0.0)).value
    assert abs(h) <= 1e-10
    inner = mean_curvature(K5, ~Disk(0.0, 0.0, 1.0), (1.0, 0.0)).value
    outer = mean_curvature(K5, Disk(0.0, 0.0, 1.0), (1.0, 0.0)).value
    assert inner == pytest.approx(-outer, rel=1e-9)


def test_truncated_curvature_increases_to_limit_for_disk():
    vals, err = truncated_curvature(K5, Disk(0, 0, 1), (1.0, 0.0), [0.1, 0.05, 0.025])
    assert err < 1e-8 and np.all(np.diff(vals) > 0)
    with pytest.raises(ValueError):
        truncated_curvature(K5, Disk(0, 0, 1), (1.0, 0.0), [0.0])


def test_curvature_bound_parameters():
    p = curvature_bound_params(K5, 2 * math.atan(0.5))
    assert p.beta == pytest.approx(0.25 * (2 * math.pi - 4 * math.atan(0.5)))
    assert p.bound(0.1) == pytest.approx(10 * p.beta)
    assert p.delta(0.05) < p.delta(0.1) < 1.0
    with pytest.raises(ValueError):
        curvature_bound_params(K5, math.pi)


def test_tangent_ball_check_on_carved_set():
    k = KernelSpec(1, 0.1)
    E0 = Subgraph.of(ExteriorData.cone(2.0))
    p = curvature_bound_params(k, 2 * math.atan(0.5))
    r = p.delta(0.1)
    E = E0 | (Rectangle.strip(-1.0, 1.0) - Disk(0.0, 1.0, r))
    rec = tangent_ball_check(k, E, (0.0, 1.0 - r), (0.0, 1.0), p)
    assert rec.ball_exterior and rec.passed
    with pytest.raises(ValueError):
        tangent_ball_check(k, E, (0.0, 1.0 - r), (0.0, 1.0 - 0.5 * r), p)


# ------------------------------------------------------------------ pixels

def grid8():
    return PixelGrid.around(-2, 2, -2, 2, 1.0 / 8)


def test_pixel_grid_validation():
    with pytest.raises(ValueError):
        PixelGrid.around(0, 1, 0, 1, 0.3)
    g = grid8()
    assert (g.nx, g.ny, g.x1, g.y1) == (32, 32, 2.0, 2.0)


def test_interaction_half_plane_closed_form():
    g = grid8()
    up = PixelSet.from_shape(g, ~HalfPlane.below(0.0))
    for s in (0.3, 0.7):
        k = KernelSpec(1, s)
        A = PixelSet.box(g, -0.5, 0.5, -0.5, 0.0)
        ref = 2.0 * k.Lambda * 0.5 ** (1 - s) / (s * (1 - s))
        assert interaction(k, A, up) == pytest.approx(ref, rel=1e-12)


def test_interaction_symmetry_and_overlap():
    g = grid8()
    A = PixelSet.box(g, -1, -0.25, -1, 1)
    B = PixelSet.box(g, 0.25, 1, -0.5, 0.5)
    assert interaction(K5, A, B) == interaction(K5, B, A)
    with pytest.raises(OverlapError):
        interaction(K5, A, A)
    with pytest.raises(ValueError):
        up = PixelSet.from_shape(g, HalfPlane.below(0.0))
        interaction(K5, up, ~up)


def test_interaction_scaling():
    # L_s scales like h^(2-s) under dilation of the whole configuration
    g1, g2 = PixelGrid.around(-2, 2, -2, 2, 0.25), PixelGrid.around(-4, 4, -4, 4, 0.5)
    a1 = interaction(K5, PixelSet.box(g1, -1, 0, -1, 1), PixelSet.box(g1, 0, 1, -1, 1))
    a2 = interaction(K5, PixelSet.box(g2, -2, 0, -2, 2), PixelSet.box(g2, 0, 2, -2, 2))
    assert a2 == pytest.approx(2 ** 1.5 * a1, rel=1e-12)


def test_perimeter_methods_agree():
    g = grid8()
    E = PixelSet.from_shape(g, Subgraph.of(ExteriorData.constant(0.25))) | PixelSet.from_shape(g, Disk(0.5, 0.75, 0.4))
    O = PixelSet.box(g, -1, 1, -1, 1)
    a = fractional_perimeter(K5, E, O)
    b = fractional_perimeter(K5, E, O, method="direct")
    assert a == pytest.approx(b, rel=1e-10)
    with pytest.raises(ValueError):
        fractional_perimeter(K5, E, O, method="other")


def test_perimeter_complement_symmetry():
    g = grid8()
    E = PixelSet.from_shape(g, Subgraph.of(ExteriorData.constant(0.25))) | PixelSet.from_shape(g, Disk(0.5, 0.75, 0.4))
    O = PixelSet.box(g, -1, 1, -1, 1)
    assert fractional_perimeter(K5, E, O) == pytest.approx(fractional_perimeter(K5, ~E, O), rel=1e-9)


def test_pixel_set_algebra_and_io(tmp_path):
    g = grid8()
    A = PixelSet.box(g, -1, 0, -1, 1)
    B = PixelSet.box(g, -0.5, 0.5, -0.5, 0.5)
    assert (A | B).area == A.area + B.area - (A & B).area
    assert (A - B).area == A.area - (A & B).area
    assert A.area == pytest.approx(2.0)
    E = PixelSet.from_shape(g, Subgraph.of(ExteriorData.constant(0.25))) | PixelSet.from_shape(g, Disk(0.5, 0.75, 0.4))
    E.save(tmp_path / "e.pgm")
    F = PixelSet.load(tmp_path / "e.pgm")
    assert np.array_equal(F.occ, E.occ)
    x, y = np.random.default_rng(0).uniform(-6, 6, (2, 400))
    assert np.array_equal(F.contains(x, y), E.contains(x, y))
    cls = E.classify()
    assert set(np.unique(cls)) == {-1, 0, 1}


def test_pixel_ray_intervals_are_exact():
    g = grid8()
    E = PixelSet.box(g, -1, 1, -1, 1)
    lo, hi = E.ray_intervals(0.0, 0.0, 0.25 * math.pi)
    assert lo[0, 0] == 0.0 and hi[0, 0] == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_farfield_ring_check():
    g = grid8()
    with pytest.raises(ValueError):
        PixelSet(g, np.zeros((g.nx, g.ny), dtype=bool), HalfPlane.below(0.0))


# ---------------------------------------------------------- rearrangement

def confined_random(grid, omega, M, rng, phi=0.25):
    E = PixelSet.from_shape(grid, Subgraph.of(ExteriorData.constant(phi)))
    occ = E.occ.copy()
    X, Y = grid.centers()
    cols = (X[:, 0] > omega.a) & (X[:, 0] < omega.b)
    slab = (Y[0] > -M) & (Y[0] < M)
    occ[np.ix_(cols, slab)] = rng.random((cols.sum(), slab.sum())) < 0.5
    occ[np.ix_(cols, Y[0] < -M)] = True
    occ[np.ix_(cols, Y[0] > M)] = False
    return PixelSet(grid, occ, E.far)


def test_rearrangement_preserves_column_measure():
    grid, om = default_geometry(h=1.0 / 8)
    F = confined_random(grid, om, 1.0, np.random.default_rng(0))
    w, S = vertical_rearrangement(F, 1.0, om)
    assert isinstance(w, ColumnFunction) and w.values.size == 16
    assert S.area == F.area
    assert np.array_equal(S.occ.sum(axis=1), F.occ.sum(axis=1))
    assert np.all(np.abs(w.values) <= 1.0)
    O = slab_region(grid, om, 1.0)
    assert fractional_perimeter(K5, S, O) <= fractional_perimeter(K5, F, O)


def test_rearrangement_of_a_subgraph_is_itself():
    grid, om = default_geometry(h=1.0 / 8)
    vals = np.round(np.linspace(-0.75, 0.5, 16) * 8) / 8
    E = subgraph_pixels(grid, om, ExteriorData.constant(0.25), vals)
    w, S = vertical_rearrangement(E, 1.0, om)
    assert np.allclose(w.values, vals) and np.array_equal(S.occ, E.occ)


def test_confinement_is_checked():
    grid, om = default_geometry(h=1.0 / 8)
    E = PixelSet.from_shape(grid, Subgraph.of(ExteriorData.constant(0.25)))
    bad = E.occ.copy()
    X, Y = grid.centers()
    bad[16, -3] = True
    with pytest.raises(ConfinementError):
        check_confined(PixelSet(grid, bad, E.far), om, 1.0)
    with pytest.raises(ValueError):
        slab_region(grid, om, 1.03)
    with pytest.raises(ValueError):
        subgraph_pixels(grid, om, ExteriorData.constant(0.25), np.full(16, 0.1))


def test_equivalence_offset_vanishes():
    grid, om = default_geometry(h=1.0 / 8)
    rng = np.random.default_rng(7)
    u1, u2 = rng.integers(-8, 9, (2, 16)) / 8.0
    off, err = equivalence_offset(K5, u1, u2, 1.0, om, ExteriorData.constant(0.25), grid,
                                  return_error=True)
    assert abs(off) <= 2 * err
    with pytest.raises(ValueError):
        equivalence_offset(K5, u1 * 4, u2, 1.0, om, ExteriorData.constant(0.25), grid)


def test_unsupported_far_field():
    with pytest.raises(UnsupportedFarFieldError):
        class Blob(Disk):
            bounded = False

            def asymptotic_directions(self):
                return None
        alpha_at_infinity(K5, Blob(0, 0, 1), method="exact")
