import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schwarzgeom import surface
from schwarzgeom.errors import DomainError, ParameterError, PreconditionError
from schwarzgeom.warped import WarpingFunction

SCHW3 = WarpingFunction.from_constants(3, 2.0)
SCHW4 = WarpingFunction.from_constants(4, 1.0)
FLAT3 = WarpingFunction.from_constants(3, 0.0)
FLAT4 = WarpingFunction.from_constants(4, 0.0)


def geom(w, family="slice", **kw):
    return surface.surface_geometry(surface.build_surface(w, family, **kw))


def test_build_slice_and_degenerate_legendre():
    a = surface.build_surface(SCHW3, "slice", s0=4.0)
    assert np.all(a.s == 4.0) and a.star_shaped
    b = surface.build_surface(SCHW3, "legendre", s0=4.0, eps=0.0)
    np.testing.assert_array_equal(a.s, b.s)
    np.testing.assert_array_equal(a.ds, b.ds)


def test_build_errors():
    with pytest.raises(DomainError):
        surface.build_surface(SCHW3, "slice", s0=1.5)
    with pytest.raises(ParameterError):
        surface.build_surface(SCHW3, "offcenter", s0=4.0, center=0.5)
    with pytest.raises(ParameterError):
        surface.build_surface(SCHW3, "slice", s0=4.0, grid=2)


def test_convexity_flag_beyond_threshold():
    eps = surface.convexity_threshold(SCHW3, 4.0, k=2)
    assert 0 < eps < 1
    assert geom(SCHW3, "legendre", s0=4.0, eps=0.9 * eps).convex
    assert not geom(SCHW3, "legendre", s0=4.0, eps=min(1.3 * eps, 0.45)).convex
    assert surface.admissible_eps(SCHW3, 4.0, 4 * eps) == pytest.approx(eps, rel=1.0)


def test_flat_unit_sphere():
    g = geom(FLAT3, s0=1.0)
    np.testing.assert_allclose(g.lam, 1.0, rtol=1e-14)
    np.testing.assert_allclose(g.H, 2.0, rtol=1e-14)
    assert g.area == pytest.approx(4 * math.pi, rel=1e-13)


def test_schwarzschild_slice():
    g = geom(SCHW3, s0=4.0)
    np.testing.assert_allclose(g.lam, math.sqrt(0.5) / 4, rtol=1e-14)
    np.testing.assert_allclose(g.support, 4.0, rtol=1e-14)
    np.testing.assert_array_equal(surface.mixed_ricci(g), 0.0)


def test_mixed_ricci_vanishes_in_flat_space():
    g = geom(FLAT3, "offcenter", s0=1.0, center=0.3)
    np.testing.assert_array_equal(surface.mixed_ricci(g), 0.0)
    np.testing.assert_array_equal(surface.newton_divergence_pairing(g, 2), 0.0)


@pytest.mark.parametrize("w,s0", [(SCHW3, 4.0), (SCHW4, 2.0)])
def test_pairing(w, s0):
    g = geom(w, "legendre", s0=s0, eps=0.02)
    assert g.convex
    np.testing.assert_array_equal(surface.newton_divergence_pairing(g, 1), 0.0)
    for p in range(2, w.n):
        assert surface.newton_divergence_pairing(g, p).min() >= -1e-12
    slice_ = geom(w, s0=s0)
    for p in range(1, w.n):
        assert np.max(np.abs(surface.newton_divergence_pairing(slice_, p))) < 1e-15


def test_tangential_gradient_residual():
    assert surface.tangential_gradient_residual(geom(SCHW3, s0=4.0)) < 1e-10
    assert surface.tangential_gradient_residual(geom(FLAT3, s0=1.0)) < 1e-10
    r = [surface.tangential_gradient_residual(geom(SCHW3, "legendre", s0=4.0, eps=0.02, grid=N)) for N in (32, 64, 128)]
    assert r[0] / r[1] == pytest.approx(4, rel=0.1)
    assert r[1] / r[2] == pytest.approx(4, rel=0.1)


def test_codazzi_residual_converges():
    r = [surface.codazzi_residual(geom(SCHW4, "legendre", s0=2.0, eps=0.02, grid=N)) for N in (32, 64, 128)]
    assert r[1] / r[2] == pytest.approx(4, rel=0.1)


@pytest.mark.parametrize("w,s0", [(SCHW3, 4.0), (SCHW4, 2.0), (FLAT4, 1.0)])
def test_slice_gaps(w, s0):
    g = geom(w, s0=s0)
    for p in range(1, w.n):
        assert abs(surface.minkowski_gap(g, p)) < 1e-10 * surface.minkowski_scale(g, p)
    assert abs(surface.heintze_karcher_gap(g)) < 1e-10 * surface.heintze_karcher_scale(g)


def test_flat_offcenter_gaps():
    g = geom(FLAT3, "offcenter", s0=1.0, center=0.4)
    for p in (1, 2):
        assert abs(surface.minkowski_gap(g, p)) < 1e-10 * surface.minkowski_scale(g, p)
    assert abs(surface.heintze_karcher_gap(g)) < 1e-10 * surface.heintze_karcher_scale(g)


def test_gaps_scale_quadratically():
    eps = np.array([0.02, 0.01, 0.005])
    gs = [geom(SCHW3, "legendre", s0=4.0, eps=e) for e in eps]
    mk = [surface.minkowski_gap(g, 2) for g in gs]
    hk = [surface.heintze_karcher_gap(g) for g in gs]
    assert min(mk) > 0 and min(hk) > 0
    assert np.polyfit(np.log(eps), np.log(mk), 1)[0] == pytest.approx(2, abs=0.1)
    assert np.polyfit(np.log(eps), np.log(hk), 1)[0] == pytest.approx(2, abs=0.1)


def test_heintze_karcher_needs_mean_convexity():
    g = geom(SCHW3, "legendre", s0=4.0, eps=0.2, k=6)
    with pytest.raises(PreconditionError):
        surface.heintze_karcher_gap(g)


def test_weingarten_slice_test():
    assert surface.weingarten_slice_test(geom(SCHW3, s0=4.0), 2) == (True, 0.0)
    for p in (1, 2):
        const, var = surface.weingarten_slice_test(geom(FLAT3, s0=1.0), p)
        assert const and var == 0
    v = [surface.weingarten_slice_test(geom(SCHW3, "legendre", s0=4.0, eps=e), 2) for e in (0.05, 0.025)]
    assert not v[0][0] and not v[1][0]
    assert v[0][1] / v[1][1] == pytest.approx(2, rel=0.05)
    with pytest.raises(PreconditionError):
        surface.weingarten_slice_test(geom(SCHW3, s0=4.0), 3)


def test_finite_difference_rule_agrees_with_spectral():
    a = geom(SCHW3, "legendre", s0=4.0, eps=0.02, grid=256)
    b = surface.surface_geometry(surface.build_surface(SCHW3, "legendre", s0=4.0, eps=0.02, grid=256, rule="finite-difference"))
    assert np.max(np.abs(a.lam - b.lam)) < 1e-3


def test_columns_round_trip():
    g = geom(SCHW3, "legendre", s0=4.0, eps=0.02, grid=16)
    text = surface.to_columns(g)
    cols = surface.from_columns(text)
    assert tuple(cols) == surface.COLUMNS
    np.testing.assert_array_equal(cols["theta"], g.theta)
    np.testing.assert_array_equal(cols["H"], g.H)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 6), st.floats(0.5, 3.0), st.floats(1.05, 6.0))
def test_slices_are_umbilic(n, m, frac):
    w = WarpingFunction.from_constants(n, m)
    s0 = frac * w.s_min
    g = geom(w, s0=s0, grid=16)
    lam = math.sqrt(float(w.F(s0))) / s0
    assert np.max(np.abs(g.lam_meridian - lam) + np.abs(g.lam_parallel - lam)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 5), st.sampled_from([2, 3, 4]), st.floats(1.3, 4.0), st.floats(0.1, 1.0))
def test_inequality_chain_on_convex_perturbations(n, k, frac, scale):
    w = WarpingFunction.from_constants(n, 1.0)
    s0 = frac * w.s_min
    eps = surface.admissible_eps(w, s0, 0.05 * scale, k=k, grid=48)
    g = geom(w, "legendre", s0=s0, eps=eps, k=k, grid=48)
    assert g.convex and np.all(g.support >= 0)
    for p in range(1, n):
        assert surface.minkowski_gap(g, p) >= -1e-10 * max(1.0, surface.minkowski_scale(g, p))
        assert surface.newton_divergence_pairing(g, p).min() >= -1e-12
    assert surface.heintze_karcher_gap(g) >= -1e-10 * surface.heintze_karcher_scale(g)
