"""Built-in initial profile shapes and their support radii."""

import numpy as np
import pytest

from coupledstrings.exceptions import InvalidParamsError
from coupledstrings.profiles import Profile


def test_sech2_peak_value():
    p = Profile(kind="sech2", amplitude=3.0)
    assert p(0.0) == 3.0


def test_sech2_closed_form():
    p = Profile(kind="sech2", amplitude=2.0, scale=1.5, shift=0.5)
    xi = np.linspace(-4, 4, 17)
    np.testing.assert_allclose(p(xi), 2.0 / np.cosh((xi - 0.5) / 1.5) ** 2, rtol=1e-15)


def test_gaussian_closed_form():
    p = Profile(kind="gaussian", amplitude=1.2, scale=2.0, shift=-1.0)
    xi = np.linspace(-5, 5, 21)
    np.testing.assert_allclose(p(xi), 1.2 * np.exp(-0.5 * ((xi + 1.0) / 2.0) ** 2), rtol=1e-15)


def test_zero_profile():
    p = Profile(kind="zero")
    np.testing.assert_array_equal(p(np.linspace(-3, 3, 7)), 0.0)
    assert p.support_radius() == 0.0


def test_zero_amplitude_behaves_like_zero():
    p = Profile(kind="sech2", amplitude=0.0)
    np.testing.assert_array_equal(p(np.array([0.0, 1.0])), 0.0)
    assert p.support_radius() == 0.0


@pytest.mark.parametrize("kind", ["sech2", "gaussian"])
@pytest.mark.parametrize("scale", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("shift", [0.0, 2.0, -1.5])
def test_support_radius_bounds_the_tail(kind, scale, shift):
    p = Profile(kind=kind, amplitude=2.0, scale=scale, shift=shift)
    r = p.support_radius(rel_tol=1e-8)
    # at the radius the profile has fallen to the requested fraction
    assert abs(p(r)) <= 1e-8 * 2.0 * (1 + 1e-12)
    assert abs(p(-r)) <= 1e-8 * 2.0 * (1 + 1e-12)
    # and the radius is not wastefully large
    inner = (r - abs(shift)) * 0.9 + abs(shift)
    assert max(abs(p(inner)), abs(p(-inner))) > 1e-8 * 2.0


def test_support_radius_scales_linearly():
    r1 = Profile(kind="sech2", scale=1.0).support_radius()
    r3 = Profile(kind="sech2", scale=3.0).support_radius()
    assert r3 == pytest.approx(3 * r1, rel=1e-12)


def test_negative_amplitude_allowed():
    p = Profile(kind="sech2", amplitude=-1.0)
    assert p(0.0) == -1.0
    assert p.support_radius() > 0


def test_invalid_kind():
    with pytest.raises(InvalidParamsError):
        Profile(kind="triangle")


def test_invalid_scale():
    with pytest.raises(InvalidParamsError):
        Profile(kind="sech2", scale=0.0)
    with pytest.raises(InvalidParamsError):
        Profile(kind="sech2", scale=-2.0)


def test_nonfinite_amplitude():
    with pytest.raises(InvalidParamsError):
        Profile(kind="gaussian", amplitude=float("nan"))


def test_vectorized_shape():
    p = Profile(kind="gaussian")
    xi = np.zeros((3, 5))
    assert p(xi).shape == (3, 5)
