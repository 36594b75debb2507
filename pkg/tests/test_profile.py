"""Closed-form linear-part profile: internal consistency of the hand-derived
derivatives, asymptotics, and the two spectral representations.

The derivative formulas are cross-checked against high-order finite
differences of the value formula, so a transcription slip in any one of
them cannot pass.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muskat_profile import ParameterError, make_log_grid
from muskat_profile.grids import eval as eval_field
from muskat_profile.profile import (
    LinearProfile,
    klin_field,
    klin_gradient,
    klin_gradient_field,
    klin_hessian,
    klin_laplacian,
    klin_spectral,
    klin_value,
)

RADII = np.array([0.05, 0.3, 1.0, 3.7, 20.0, 500.0])


def stencil_d1(f, r, h):
    """Fourth-order central first derivative."""
    return (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h)


def stencil_d2(f, r, h):
    """Fourth-order central second derivative."""
    return (
        -f(r + 2 * h) + 16 * f(r + h) - 30 * f(r) + 16 * f(r - h) - f(r - 2 * h)
    ) / (12 * h * h)


def test_gradient_matches_value_stencil():
    p = LinearProfile(0.7)
    f = lambda r: klin_value(p, r)
    for r in RADII:
        h = 1e-3 * max(1.0, r)
        assert klin_gradient(p, r) == pytest.approx(stencil_d1(f, r, h), rel=1e-9)


def test_hessian_matches_value_stencil():
    p = LinearProfile(0.7)
    f = lambda r: klin_value(p, r)
    for r in RADII:
        h = 1e-3 * max(1.0, r)
        rr, transverse = klin_hessian(p, r)
        assert rr == pytest.approx(stencil_d2(f, r, h), rel=1e-7)
        assert transverse == pytest.approx(klin_gradient(p, r) / r, rel=1e-12)


def test_laplacian_is_hessian_trace_and_stencil():
    p = LinearProfile(0.7)
    f = lambda r: klin_value(p, r)
    for r in RADII:
        rr, transverse = klin_hessian(p, r)
        assert klin_laplacian(p, r) == pytest.approx(rr + transverse, rel=1e-12)
        h = 1e-3 * max(1.0, r)
        want = stencil_d2(f, r, h) + stencil_d1(f, r, h) / r
        assert klin_laplacian(p, r) == pytest.approx(want, rel=1e-7)


def test_origin_and_asymptotics():
    p = LinearProfile(0.3)
    assert float(klin_value(p, 0.0)) == pytest.approx(0.3 * (1.0 - math.log(2.0)), rel=1e-15)
    assert float(klin_gradient(p, 0.0)) == 0.0
    # cone behavior: value/r -> s and gradient -> s at infinity
    assert float(klin_value(p, 1e8)) / 1e8 == pytest.approx(0.3, rel=1e-6)
    assert float(klin_gradient(p, 1e8)) == pytest.approx(0.3, rel=1e-8)
    # Laplacian decays like s/r
    assert float(klin_laplacian(p, 1e4)) == pytest.approx(0.3 / 1e4, rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(
    s=st.floats(min_value=0.0, max_value=10.0),
    c=st.floats(min_value=0.1, max_value=10.0),
    r=st.floats(min_value=0.0, max_value=1e6),
)
def test_value_is_linear_in_slope(s, c, r):
    base = float(klin_value(LinearProfile(s), r))
    scaled = float(klin_value(LinearProfile(c * s), r))
    assert scaled == pytest.approx(c * base, rel=1e-12, abs=1e-300)


def test_linear_profile_validation():
    with pytest.raises(ParameterError):
        LinearProfile(float("nan"))
    with pytest.raises(ParameterError):
        LinearProfile(float("inf"))


# ---------------------------------------------------------------------------
# spectral representations
# ---------------------------------------------------------------------------


def test_spectral_default_is_laplacian_transform(freq_grid):
    p = LinearProfile(0.05)
    spec = klin_spectral(p, freq_grid)
    rho = freq_grid.nodes
    assert np.array_equal(spec.values, 0.05 * np.exp(-rho) / rho)
    assert spec.low_freq_exponent == -1.0
    assert spec.tail.amplitude == 0.05
    assert spec.tail.decay_rate == 1.0
    assert spec.tail.power == -1.0


def test_spectral_derivative_representation(freq_grid):
    p = LinearProfile(0.05)
    default = klin_spectral(p, freq_grid)
    deriv = klin_spectral(p, freq_grid, derivative_representation=True)
    rho = freq_grid.nodes
    # profile symbol = -(Laplacian transform)/rho^2
    assert np.allclose(deriv.values, -default.values / rho**2, rtol=1e-15)
    assert deriv.low_freq_exponent == -3.0
    assert deriv.tail.power == -3.0


def test_spectral_pair_against_transform(phys_grid, freq_grid):
    # forward transform of the closed-form Laplacian reproduces the
    # closed-form spectrum: the anchor pair at profile level
    from muskat_profile import RadialField, hankel_forward

    p = LinearProfile(0.05)
    lap = RadialField.from_function(lambda r: klin_laplacian(p, r), phys_grid)
    hat = hankel_forward(lap, freq_grid)
    rho = freq_grid.nodes
    band = (rho >= 0.05) & (rho <= 20.0)
    want = klin_spectral(p, freq_grid).values[band]
    assert np.max(np.abs(hat.values[band] - want) / np.abs(want)) < 1e-5


# ---------------------------------------------------------------------------
# field representations
# ---------------------------------------------------------------------------


def test_klin_field_closures(phys_grid):
    p = LinearProfile(0.1)
    f = klin_field(p, phys_grid)
    assert np.array_equal(f.values, klin_value(p, phys_grid.nodes))
    assert f.tail.slope == 0.1
    assert f.origin_value == pytest.approx(0.1 * (1.0 - math.log(2.0)))
    # analytic callable bypasses interpolation entirely
    r = np.array([0.0, 0.37, 4e3])
    assert np.allclose(eval_field(f, r), klin_value(p, r), rtol=1e-15)


def test_klin_gradient_field_tends_to_slope(phys_grid):
    p = LinearProfile(0.1)
    df = klin_gradient_field(p, phys_grid)
    assert np.array_equal(df.values, klin_gradient(p, phys_grid.nodes))
    # approach to the cone slope is first order in 1/r
    assert float(eval_field(df, 5e4)) == pytest.approx(0.1, rel=1e-4)
    assert float(eval_field(df, 5e4)) == pytest.approx(klin_gradient(p, 5e4), rel=1e-14)
