"""Stretched-frame mapping and leading-order assembly tests."""

import numpy as np
import pytest

from coupledstrings.exceptions import CoverageError, InvalidParamsError
from coupledstrings.asymptotic import StretchedFrame, assemble_ap, frame_from, map_zeta
from coupledstrings.fluxexpr import parse_flux
from coupledstrings.kdv import Branch, kdv_initial_condition, kdv_solve
from coupledstrings.params import PhysicalParams, derive_params
from coupledstrings.profiles import Profile
from coupledstrings.spectral import PeriodicGrid

BILINEAR = parse_flux("u*v")


@pytest.fixture
def params():
    return PhysicalParams(eps=0.1, k1=1.0, k2=2.0, a=1.0, b=1.0)


@pytest.fixture
def derived(params):
    return derive_params(params)


@pytest.fixture
def frame(params, derived):
    return frame_from(params, derived)


class TestMapZeta:
    def test_hand_value(self):
        frame = StretchedFrame(k=1.5, eps=0.1)
        z1, z2 = map_zeta(frame, 3.0, 2.0)
        assert z1 == 0.0
        assert z2 == 60.0

    def test_initial_time_collapses(self):
        frame = StretchedFrame(k=1.5, eps=0.1)
        x = np.array([-1.0, 0.0, 2.5])
        z1, z2 = map_zeta(frame, x, 0.0)
        np.testing.assert_array_equal(z1, x / 0.1)
        np.testing.assert_array_equal(z2, x / 0.1)

    def test_origin(self):
        frame = StretchedFrame(k=2.0, eps=0.25)
        assert map_zeta(frame, 0.0, 0.0) == (0.0, 0.0)

    def test_maps_invert(self, frame):
        x = np.linspace(-2, 2, 9)
        t = 0.7
        z1, z2 = map_zeta(frame, x, t)
        np.testing.assert_allclose(frame.eps * z1 + frame.k * t, x, atol=1e-12)
        np.testing.assert_allclose(frame.eps * z2 - frame.k * t, x, atol=1e-12)

    def test_frame_validation(self):
        with pytest.raises(InvalidParamsError):
            StretchedFrame(k=0.0, eps=0.1)
        with pytest.raises(InvalidParamsError):
            StretchedFrame(k=1.0, eps=-0.1)

    def test_frame_from_uses_derived_speed(self, params, derived, frame):
        assert frame.k == derived.k
        assert frame.eps == params.eps


def make_profiles(derived, f, zeta_grid, u0, t):
    """Both branch states advanced to time t from half the hump."""
    s1 = kdv_initial_condition(u0, zeta_grid, branch=Branch.I)
    s2 = kdv_initial_condition(u0, zeta_grid, branch=Branch.II)
    if t > 0:
        s1 = kdv_solve(s1, derived, f, t)[-1]
        s2 = kdv_solve(s2, derived, f, t)[-1]
    return s1, s2


class TestAssembly:
    def test_recombination_at_initial_time(self, params, derived, frame):
        x_grid = PeriodicGrid(n=512, length=6.0, left=-3.0)
        zeta_grid = PeriodicGrid(n=1024, length=80.0, left=-40.0)
        u0 = Profile(kind="sech2")
        s1, s2 = make_profiles(derived, BILINEAR, zeta_grid, u0, 0.0)
        ap = assemble_ap(s1, s2, params, derived, BILINEAR, frame, x_grid, 0.0)
        expected = u0(x_grid.points / params.eps)
        assert np.max(np.abs(ap.u - expected)) <= 1e-10 * np.max(np.abs(expected))

    def test_proportionality_exact(self, params, frame):
        p = PhysicalParams(eps=0.1, k1=1.0, k2=2.0, a=2.0, b=3.0)
        d = derive_params(p)
        fr = frame_from(p, d)
        x_grid = PeriodicGrid(n=256, length=6.0, left=-3.0)
        zeta_grid = PeriodicGrid(n=1024, length=80.0, left=-40.0)
        s1, s2 = make_profiles(d, BILINEAR, zeta_grid, Profile(kind="sech2"), 0.2)
        ap = assemble_ap(s1, s2, p, d, BILINEAR, fr, x_grid, 0.2)
        np.testing.assert_array_equal(ap.v, d.ab_ratio * ap.u)
        np.testing.assert_array_equal(ap.vt, d.ab_ratio * ap.ut)

    def test_zero_states_give_zero_fields(self, params, derived, frame):
        x_grid = PeriodicGrid(n=256, length=6.0, left=-3.0)
        zeta_grid = PeriodicGrid(n=512, length=80.0, left=-40.0)
        s1, s2 = make_profiles(derived, None, zeta_grid, Profile(kind="zero"), 0.0)
        ap = assemble_ap(s1, s2, params, derived, None, frame, x_grid, 0.0)
        for arr in ap.fields():
            np.testing.assert_allclose(arr, 0.0, atol=1e-14)

    def test_branch_order_enforced(self, params, derived, frame):
        x_grid = PeriodicGrid(n=256, length=6.0, left=-3.0)
        zeta_grid = PeriodicGrid(n=512, length=80.0, left=-40.0)
        s1, s2 = make_profiles(derived, None, zeta_grid, Profile(kind="sech2"), 0.0)
        with pytest.raises(InvalidParamsError):
            assemble_ap(s2, s1, params, derived, None, frame, x_grid, 0.0)

    def test_time_mismatch_rejected(self, params, derived, frame):
        x_grid = PeriodicGrid(n=256, length=6.0, left=-3.0)
        zeta_grid = PeriodicGrid(n=512, length=80.0, left=-40.0)
        s1, s2 = make_profiles(derived, None, zeta_grid, Profile(kind="sech2"), 0.0)
        with pytest.raises(InvalidParamsError):
            assemble_ap(s1, s2, params, derived, None, frame, x_grid, 0.5)

    def test_coverage_error_when_box_too_small(self, params, derived, frame):
        x_grid = PeriodicGrid(n=256, length=6.0, left=-3.0)
        zeta_grid = PeriodicGrid(n=512, length=40.0, left=-20.0)  # image needs +-30
        s1, s2 = make_profiles(derived, None, zeta_grid, Profile(kind="sech2"), 0.0)
        with pytest.raises(CoverageError):
            assemble_ap(s1, s2, params, derived, None, frame, x_grid, 0.0)

    def test_time_derivative_by_differencing(self, params, derived, frame):
        # the chain-rule ut must match a centered difference of assembled u
        x_grid = PeriodicGrid(n=256, length=6.0, left=-3.0)
        zeta_grid = PeriodicGrid(n=2048, length=180.0, left=-90.0)
        u0 = Profile(kind="sech2")
        t0, delta = 0.2, 1e-5
        states = {}
        for t in (t0 - delta, t0, t0 + delta):
            states[t] = make_profiles(derived, BILINEAR, zeta_grid, u0, t)
        plus = assemble_ap(*states[t0 + delta], params, derived, BILINEAR,
                           frame, x_grid, t0 + delta)
        minus = assemble_ap(*states[t0 - delta], params, derived, BILINEAR,
                            frame, x_grid, t0 - delta)
        mid = assemble_ap(*states[t0], params, derived, BILINEAR, frame, x_grid, t0)
        fd = (plus.u - minus.u) / (2 * delta)
        scale = np.max(np.abs(mid.ut))
        assert scale > 1.0  # the transport term k/eps makes ut order 1/eps
        assert np.max(np.abs(fd - mid.ut)) <= 1e-4 * scale


class TestCounterPropagation:
    def test_peaks_travel_at_plus_minus_k(self):
        # solitary humps keep their shape, so the lab-frame peaks track the
        # characteristics x = +-k t up to the O(eps) drift inside each frame
        params = PhysicalParams(eps=0.05, k1=1.0, k2=2.0, a=1.0, b=1.0)
        derived = derive_params(params)
        frame = frame_from(params, derived)
        x_grid = PeriodicGrid(n=2048, length=8.0, left=-4.0)
        zeta_grid = PeriodicGrid(n=2048, length=220.0, left=-110.0)
        u0 = Profile(kind="sech2", amplitude=4.5, scale=2.0)
        t = 0.8
        s1, s2 = make_profiles(derived, BILINEAR, zeta_grid, u0, t)
        ap = assemble_ap(s1, s2, params, derived, BILINEAR, frame, x_grid, t)
        u, x = ap.u, x_grid.points

        def refined_peak(indices):
            # quadratic fit around the discrete argmax
            j = indices[np.argmax(u[indices])]
            y0, y1, y2 = u[j - 1], u[j], u[j + 1]
            return x[j] + 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2) * x_grid.dx

        plus = refined_peak(np.where(x > 0.2)[0])
        minus = refined_peak(np.where(x < -0.2)[0])
        assert plus == pytest.approx(frame.k * t, rel=0.02)
        assert minus == pytest.approx(-frame.k * t, rel=0.02)
        # sharper: the residual offset is exactly the solitary-wave speed
        drift = params.eps * 0.35575623676894264 * t
        assert plus == pytest.approx(frame.k * t + drift, rel=1e-3)
        assert minus == pytest.approx(-frame.k * t - drift, rel=1e-3)
