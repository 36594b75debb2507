"""Linear operators: fractional Laplacian (constant, multiplier, principal
value), radial inverse Laplacian, resolvent kernel, and the spectral
residual of the linear part.

Frozen oracles:

    tests/oracles/fractional_constant_reference.py
        C(0.5) = 0.0832419838754250654889402178181347
        C(1)   = 1/(2 pi)
        C(1.5) = 0.171167129690552342925202071993733

    tests/oracles/resolvent_reference.py (input f(u) = u)
        y(0.001) = 0.0002499500083321430059358482141710984522356
        y(0.01)  = 0.002495008321443435863080219346632470084881
        y(0.1)   = 0.02450821575743898549435667861972716819293
        y(1.0)   = 0.2072766470286539295731426209687652046749
        y(10.0)  = 0.7540002723995785749091092135490933633037

Closed forms used:

    Lambda   (1/sqrt(r^2+1)) = 1/(1+r^2)^{3/2}
    -Laplace (1/sqrt(r^2+1)) = (2-r^2)/(1+r^2)^{5/2}
"""

import math

import numpy as np
import pytest

from muskat_profile import (
    ParameterError,
    RadialField,
    SpectralField,
    SpectralTailModel,
    frac_laplacian_constant,
    frac_laplacian_pv,
    frac_laplacian_spectral,
    hankel_inverse,
    inverse_laplacian_J,
    linear_part_residual,
    make_log_grid,
    resolvent_L,
)
from muskat_profile.errors import AccuracyError, DomainError
from muskat_profile.grids import eval as eval_field
from muskat_profile.profile import LinearProfile, klin_field, klin_spectral

FROZEN_C = {
    0.5: 0.0832419838754250654889402178181347,
    1.0: 1.0 / (2.0 * math.pi),
    1.5: 0.171167129690552342925202071993733,
}

# resolvent of the growing input f(u) = u, frozen at 40 digits because the
# closed form (rho^3 - 3 rho^2 + 6 rho - 6 + 6 e^-rho)/rho^3 cancels
# catastrophically below rho ~ 1e-2 in double precision
FROZEN_RESOLVENT_GROWING = {
    1e-3: 0.0002499500083321430059358482141710984522356,
    1e-2: 0.002495008321443435863080219346632470084881,
    1e-1: 0.02450821575743898549435667861972716819293,
    1.0: 0.2072766470286539295731426209687652046749,
    10.0: 0.7540002723995785749091092135490933633037,
}


# ---------------------------------------------------------------------------
# fractional Laplacian constant
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("sigma", [0.5, 1.0, 1.5])
def test_constant_matches_closed_form(sigma):
    # the package integrates 1/C = 2 pi int (1-J0(u)) u^{-1-sigma} du
    # numerically; the oracle evaluates the Mellin closed form
    assert frac_laplacian_constant(sigma).c_sigma == pytest.approx(FROZEN_C[sigma], rel=1e-9)


def test_constant_is_cached():
    a = frac_laplacian_constant(0.75)
    b = frac_laplacian_constant(0.75)
    assert a is b


@pytest.mark.parametrize("sigma", [0.0, 2.0, -0.5, 2.5])
def test_constant_rejects_out_of_range(sigma):
    with pytest.raises(ParameterError):
        frac_laplacian_constant(sigma)


# ---------------------------------------------------------------------------
# spectral multiplier
# ---------------------------------------------------------------------------


def test_multiplier_identity_and_powers(freq_grid):
    spec = klin_spectral(LinearProfile(1.0), freq_grid)
    assert frac_laplacian_spectral(spec, 0.0) is spec
    rho = freq_grid.nodes
    out = frac_laplacian_spectral(spec, 1.0)
    assert np.array_equal(out.values, spec.values * rho)
    assert out.low_freq_exponent == spec.low_freq_exponent + 1.0
    assert out.tail.power == spec.tail.power + 1.0
    with pytest.raises(ParameterError):
        frac_laplacian_spectral(spec, 2.5)
    with pytest.raises(ParameterError):
        frac_laplacian_spectral(spec, -0.5)


def test_multiplier_composition(freq_grid):
    spec = klin_spectral(LinearProfile(1.0), freq_grid)
    once = frac_laplacian_spectral(frac_laplacian_spectral(spec, 0.7), 0.3)
    direct = frac_laplacian_spectral(spec, 1.0)
    assert np.allclose(once.values, direct.values, rtol=1e-12)
    assert once.low_freq_exponent == pytest.approx(direct.low_freq_exponent)


def test_full_laplacian_chain(phys_grid, freq_grid):
    # multiplier rho^2 on the anchor spectrum, inverted back to physical
    # space, must match the hand-computed -Laplacian of 1/sqrt(r^2+1)
    rho = freq_grid.nodes
    spec = SpectralField(
        freq_grid=freq_grid,
        values=np.exp(-rho) / rho,
        tail=SpectralTailModel(amplitude=1.0, decay_rate=1.0, power=-1.0),
        low_freq_exponent=-1.0,
        analytic=lambda p: np.exp(-p) / p,
    )
    out = hankel_inverse(frac_laplacian_spectral(spec, 2.0), phys_grid)
    r = phys_grid.nodes
    band = (r >= 0.05) & (r <= 20.0)
    want = (2.0 - r[band] ** 2) / (1.0 + r[band] ** 2) ** 2.5
    assert np.max(np.abs(out.values[band] - want)) < 1e-5


# ---------------------------------------------------------------------------
# principal-value form
# ---------------------------------------------------------------------------


def test_pv_half_laplacian_closed_form(phys_grid):
    f = RadialField.from_function(lambda r: 1.0 / np.sqrt(r * r + 1.0), phys_grid)
    for r in (0.3, 1.0, 3.0):
        want = 1.0 / (1.0 + r * r) ** 1.5
        got = frac_laplacian_pv(f, 1.0, r)
        assert got == pytest.approx(want, rel=1e-3)


def test_pv_rejects_bad_inputs(phys_grid):
    f = RadialField.from_function(lambda r: np.exp(-(r * r)), phys_grid)
    with pytest.raises(DomainError):
        frac_laplacian_pv(f, 1.6, 1.0)
    with pytest.raises(ParameterError):
        frac_laplacian_pv(f, 1.0, 0.0)
    with pytest.raises(DomainError):
        frac_laplacian_pv(klin_field(LinearProfile(0.1), phys_grid), 1.0, 1.0)


def test_pv_raises_on_unreachable_accuracy(phys_grid):
    f = RadialField.from_function(lambda r: np.exp(-(r * r)), phys_grid)
    with pytest.raises(AccuracyError):
        frac_laplacian_pv(f, 1.0, 1.0, rel_tol=1e-16)


# ---------------------------------------------------------------------------
# inverse Laplacian
# ---------------------------------------------------------------------------


def test_inverse_laplacian_gaussian_log_tail(phys_grid):
    # J[e^{-r^2}] grows like M log r with M = int_0^inf tau e^{-tau^2}
    # d tau = 1/2
    J = inverse_laplacian_J(RadialField.from_function(lambda r: np.exp(-(r * r)), phys_grid))
    assert J.tail.log_coef == pytest.approx(0.5, abs=1e-8)
    assert J.tail.slope == 0.0
    # far field: J ~ (log r)/2 + offset
    r = 5e3
    want = 0.5 * math.log(r) + J.tail.offset
    assert float(eval_field(J, r)) == pytest.approx(want, rel=1e-12)


def test_inverse_laplacian_solves_poisson(phys_grid):
    from muskat_profile.grids import fd4_log_derivative

    phi_fn = lambda r: 1.0 / (1.0 + r * r) ** 2
    J = inverse_laplacian_J(RadialField.from_function(phi_fn, phys_grid))
    r = phys_grid.nodes
    d1 = fd4_log_derivative(J.values, r)
    lap = fd4_log_derivative(d1, r) + d1 / r
    band = (r >= 0.1) & (r <= 10.0)
    rel = np.abs(lap[band] - phi_fn(r[band])) / phi_fn(r[band])
    assert np.max(rel) < 1e-4


def test_inverse_laplacian_matches_linear_profile(phys_grid):
    # J applied to the closed-form Laplacian recovers the profile up to
    # its additive normalization at the origin
    from muskat_profile.profile import klin_value

    f = RadialField.from_function(lambda r: 1.0 / np.sqrt(r * r + 1.0), phys_grid)
    J = inverse_laplacian_J(f)
    r_chk = np.concatenate([[0.0], np.geomspace(1e-2, 100.0, 40)])
    want = klin_value(LinearProfile(1.0), r_chk) - (1.0 - math.log(2.0))
    got = eval_field(J, r_chk)
    assert np.max(np.abs(got - want)) < 1e-5


# ---------------------------------------------------------------------------
# resolvent
# ---------------------------------------------------------------------------


def test_resolvent_growing_input_frozen_values(freq_grid):
    spec = SpectralField(
        freq_grid=freq_grid,
        values=freq_grid.nodes.copy(),
        tail=SpectralTailModel(amplitude=1.0, decay_rate=0.0, power=1.0),
        low_freq_exponent=1.0,
        analytic=lambda u: np.asarray(u, dtype=float),
    )
    out = resolvent_L(spec)
    # decade nodes sit exactly on the frozen radii
    for idx, rho in ((0, 1e-3), (40, 1e-2), (80, 1e-1), (120, 1.0), (160, 10.0)):
        assert freq_grid.nodes[idx] == pytest.approx(rho, rel=1e-12)
        assert out.values[idx] == pytest.approx(FROZEN_RESOLVENT_GROWING[rho], rel=1e-10)


def test_resolvent_decaying_input_closed_form(freq_grid):
    spec = SpectralField(
        freq_grid=freq_grid,
        values=np.exp(-freq_grid.nodes) / freq_grid.nodes,
        tail=SpectralTailModel(amplitude=1.0, decay_rate=1.0, power=-1.0),
        low_freq_exponent=-1.0,
        analytic=lambda u: np.exp(-u) / u,
    )
    out = resolvent_L(spec)
    rho = freq_grid.nodes
    band = (rho >= 1e-3) & (rho <= 500.0)
    want = np.exp(-rho[band]) / (2.0 * rho[band])
    rel = np.abs(out.values[band] - want) / want
    assert np.max(rel) < 1e-9


def test_resolvent_rejects_too_singular_input(freq_grid):
    spec = klin_spectral(LinearProfile(0.1), freq_grid, derivative_representation=True)
    assert spec.low_freq_exponent == -3.0
    with pytest.raises(DomainError):
        resolvent_L(spec)


def test_resolvent_kernel_mass_bounded():
    from muskat_profile.operators import ResolventKernel

    k = ResolventKernel()
    r = np.geomspace(1e-3, 1e3, 61)
    mass = k.mass(r)
    assert np.all(mass > 0.0)
    assert np.all(mass <= 1.0)
    # mass -> 1/3 r as r -> 0 and -> 1/r as r -> infinity
    assert mass[0] == pytest.approx(r[0] / 4.0, rel=0.1)
    assert mass[-1] == pytest.approx(1.0 / r[-1], rel=1e-2)


# ---------------------------------------------------------------------------
# linear-part residual
# ---------------------------------------------------------------------------


def test_linear_residual_annihilates_closed_form(freq_grid):
    spec = klin_spectral(LinearProfile(0.05), freq_grid)
    res = linear_part_residual(spec)
    rho = freq_grid.nodes
    band = (rho >= 0.05) & (rho <= 20.0)
    scale = float(np.max(np.abs(rho[band] ** 3 * np.exp(rho[band]) * spec.values[band] / rho[band] ** 2)))
    assert np.max(np.abs(res.values[band])) / scale < 1e-10


def test_linear_residual_target_linearity(freq_grid):
    # residual(k, target) = residual(k, 0) + rho^2 target by construction;
    # verify the implementation honors that decomposition
    spec = klin_spectral(LinearProfile(0.05), freq_grid)
    rho = freq_grid.nodes
    target = SpectralField(
        freq_grid=freq_grid,
        values=np.exp(-rho),
        tail=SpectralTailModel(amplitude=1.0, decay_rate=1.0, power=0.0),
        low_freq_exponent=0.0,
    )
    with_target = linear_part_residual(spec, target=target)
    without = linear_part_residual(spec)
    assert np.allclose(with_target.values - without.values, rho**2 * target.values, rtol=1e-12)
