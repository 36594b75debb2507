"""Closed-form linear-part profile and its derivatives.

The linear self-similar equation with the radial forcing used throughout
this package has the exact solution

    klin_s(r) = s * (sqrt(r^2 + 1) - log(sqrt(r^2 + 1) + 1)),

radially symmetric, with slope s at infinity and curvature bounded at the
origin.  All derivatives below are hand-derived from this formula:

    klin'(r)      = s r / (sqrt(r^2+1) + 1)
    Laplacian     = s / sqrt(r^2 + 1)
    hessian rr    = s * (1/(q+1) - r^2 / (q (q+1)^2)),  q = sqrt(r^2+1)
    transverse    = klin'(r)/r = s / (q + 1)

and the spectral (Hankel) side of the Laplacian is the exact pair

    s / sqrt(r^2+1)   <->   s e^{-rho} / rho .

Dividing by -rho^2 gives the profile-level symbol -s e^{-rho}/rho^3, which
is a derivative-level representation only: its low-frequency exponent -3
is below the inversion threshold, so it cannot be inverted back to a
decaying physical field and any Sobolev seminorm with exponent t <= 2
diverges on it.  Callers get that representation behind an explicit flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import ParameterError, RadialField, RadialGrid, TailModel
from .hankel import SpectralField, SpectralTailModel

__all__ = [
    "LinearProfile",
    "klin_value",
    "klin_gradient",
    "klin_hessian",
    "klin_laplacian",
    "klin_spectral",
    "klin_field",
    "klin_gradient_field",
]


@dataclass(frozen=True)
class LinearProfile:
    """Slope-at-infinity parameter s for the closed-form linear profile."""

    s: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.s):
            raise ParameterError("slope parameter must be finite")


def klin_value(profile: LinearProfile, r) -> np.ndarray:
    """klin_s(r) = s (sqrt(r^2+1) - log(sqrt(r^2+1) + 1))."""
    r = np.asarray(r, dtype=float)
    q = np.sqrt(r * r + 1.0)
    return profile.s * (q - np.log(q + 1.0))


def klin_gradient(profile: LinearProfile, r) -> np.ndarray:
    """Radial derivative s r / (sqrt(r^2+1) + 1); vector gradient along y/r."""
    r = np.asarray(r, dtype=float)
    q = np.sqrt(r * r + 1.0)
    return profile.s * r / (q + 1.0)


def klin_hessian(profile: LinearProfile, r) -> tuple[np.ndarray, np.ndarray]:
    """(second radial derivative, transverse eigenvalue klin'(r)/r)."""
    r = np.asarray(r, dtype=float)
    q = np.sqrt(r * r + 1.0)
    rr = profile.s * (1.0 / (q + 1.0) - r * r / (q * (q + 1.0) ** 2))
    transverse = profile.s / (q + 1.0)
    return rr, transverse


def klin_laplacian(profile: LinearProfile, r) -> np.ndarray:
    """Laplacian s / sqrt(r^2 + 1) (sum of the two hessian eigenvalues)."""
    r = np.asarray(r, dtype=float)
    return profile.s / np.sqrt(r * r + 1.0)


def klin_spectral(
    profile: LinearProfile,
    freq_grid: RadialGrid,
    derivative_representation: bool = False,
) -> SpectralField:
    """Spectral side of the linear profile.

    Default: the transform of the Laplacian, s e^{-rho}/rho (an exact
    closed-form pair).  With derivative_representation=True: the
    profile-level symbol -s e^{-rho}/rho^3, which carries low-frequency
    exponent -3 and is only usable inside expressions that multiply it
    back up by rho^2 (it is not invertible and not seminorm-integrable
    for exponents t <= 2).
    """
    rho = freq_grid.nodes
    if derivative_representation:
        values = -profile.s * np.exp(-rho) / rho**3
        return SpectralField(
            freq_grid=freq_grid,
            values=values,
            tail=SpectralTailModel(amplitude=-profile.s, decay_rate=1.0, power=-3.0),
            low_freq_exponent=-3.0,
        )
    values = profile.s * np.exp(-rho) / rho
    return SpectralField(
        freq_grid=freq_grid,
        values=values,
        tail=SpectralTailModel(amplitude=profile.s, decay_rate=1.0, power=-1.0),
        low_freq_exponent=-1.0,
    )


def klin_field(profile: LinearProfile, grid: RadialGrid) -> RadialField:
    """Linear profile as a radial field with exact callables attached."""
    s = profile.s
    return RadialField(
        grid=grid,
        values=klin_value(profile, grid.nodes),
        tail=TailModel(slope=s, offset=0.0, log_coef=0.0),
        origin_value=s * (1.0 - np.log(2.0)),
        analytic=lambda r: klin_value(profile, r),
        analytic_gradient=lambda r: klin_gradient(profile, r),
    )


def klin_gradient_field(profile: LinearProfile, grid: RadialGrid) -> RadialField:
    """Radial derivative of the linear profile as a field (tail -> slope s)."""
    return RadialField(
        grid=grid,
        values=klin_gradient(profile, grid.nodes),
        tail=TailModel(slope=0.0, offset=profile.s, log_coef=0.0),
        origin_value=0.0,
        analytic=lambda r: klin_gradient(profile, r),
        analytic_gradient=lambda r: klin_hessian(profile, r)[0],
    )
