"""Order-zero Hankel transform and homogeneous Sobolev seminorms.

Normalization (stated in every spectral artifact this package writes):

    fhat(rho) = int_0^inf f(r) J0(r rho) r dr ,

the 2D Fourier transform restricted to radial functions, self-reciprocal:
the inverse uses the same kernel with r and rho exchanged.  Anchor pair
used throughout the tests: 1/sqrt(r^2+1)  <->  e^{-rho}/rho.

Seminorms:  ||f||_{H^t}^2 = 2 pi int_0^inf rho^{2t+1} |fhat|^2 d rho,
with closed-form end models below and above the sampled band; a norm
whose end model diverges raises DivergenceError naming the end.

Growing inputs: the forward transform accepts fields whose tail model is
offset + log_coef*log(r) with zero slope.  Both terms are transformed
exactly: the constant contributes only a Dirac at rho = 0 (dropped; the
profile equation is invariant under additive constants) and log(r)
contributes -log_coef/rho^2, the distributional transform of the log.
The decaying remainder goes through the oscillatory engine.  A nonzero
tail slope has no locally integrable transform here and is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DivergenceError, DomainError, ParameterError
from .grids import RadialField, RadialGrid
from .quadrature import gauss_legendre_rule, oscillatory_bessel_integral

__all__ = [
    "NORMALIZATION",
    "SpectralTailModel",
    "SpectralField",
    "SobolevSpec",
    "hankel_forward",
    "hankel_inverse",
    "sobolev_seminorm",
    "intersection_norm",
]

NORMALIZATION = "fhat(rho) = int_0^inf f(r) J0(r*rho) r dr (self-reciprocal)"


@dataclass(frozen=True)
class SpectralTailModel:
    """Model for rho > rho_max: amplitude * exp(-decay_rate*rho) * rho**power."""

    amplitude: float
    decay_rate: float = 0.0
    power: float = 0.0

    def __post_init__(self) -> None:
        if self.decay_rate < 0.0:
            raise ParameterError("tail decay rate must be nonnegative")

    def value(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.amplitude == 0.0:
            return np.zeros_like(rho)
        return self.amplitude * np.exp(-self.decay_rate * rho) * rho**self.power


@dataclass(frozen=True)
class SpectralField:
    """Sampled transform with a low-frequency exponent and a tail model.

    low_freq_exponent q models fhat(rho) ~ fhat(rho_min) * (rho/rho_min)^q
    below the grid; q <= -2 marks a symbol usable only inside expressions
    that multiply it back up by rho^2 (not invertible on its own).
    """

    freq_grid: RadialGrid
    values: np.ndarray
    tail: SpectralTailModel
    low_freq_exponent: float
    analytic: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != self.freq_grid.nodes.shape:
            raise ParameterError("values must match frequency grid nodes")
        if not np.all(np.isfinite(values)):
            raise ParameterError("spectral values must be finite")
        if not np.isfinite(self.low_freq_exponent):
            raise ParameterError("low-frequency exponent must be finite")

    @cached_property
    def _interp(self) -> CubicSpline:
        return CubicSpline(np.log(self.freq_grid.nodes), self.values, extrapolate=False)

    def eval(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        scalar = rho.ndim == 0
        rho = np.atleast_1d(rho)
        if np.any(rho <= 0.0):
            raise ParameterError("spectral evaluation needs rho > 0")
        if self.analytic is not None:
            out = np.asarray(self.analytic(rho), dtype=float)
        else:
            out = np.empty_like(rho)
            g = self.freq_grid
            lo = rho < g.r_min
            hi = rho > g.r_max
            mid = ~(lo | hi)
            if np.any(mid):
                out[mid] = self._interp(np.log(rho[mid]))
            if np.any(lo):
                out[lo] = self.values[0] * (rho[lo] / g.r_min) ** self.low_freq_exponent
            if np.any(hi):
                out[hi] = self.tail.value(rho[hi])
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class SobolevSpec:
    """One or two homogeneous exponents; two means intersection space."""

    exponents: tuple[float, ...]

    def __post_init__(self) -> None:
        exps = tuple(float(t) for t in self.exponents)
        object.__setattr__(self, "exponents", exps)
        if not (1 <= len(exps) <= 2):
            raise ParameterError("spec takes one or two exponents")
        if not all(np.isfinite(t) for t in exps):
            raise ParameterError("exponents must be finite")


def _tail_fit(nodes: np.ndarray, samples: np.ndarray, basis: list) -> np.ndarray:
    """Least-squares coefficients for samples ~ sum c_k basis_k on the last decade."""
    mask = nodes >= nodes[-1] / 10.0
    A = np.vstack([np.asarray(b(nodes[mask]), dtype=float) for b in basis]).T
    coef, *_ = np.linalg.lstsq(A, samples[mask], rcond=None)
    return coef


def hankel_forward(phys: RadialField, freq_grid: RadialGrid) -> SpectralField:
    """Transform of a field whose tail is offset + log_coef*log(r).

    The affine-tail slope must vanish (DomainError otherwise).  Constant
    and log parts are handled exactly (see module docstring); the
    decaying remainder dec(r) = f(r) - offset - log_coef*log(r) is
    integrated against J0(r rho) r dr by the oscillatory engine.
    """
    if phys.tail.slope != 0.0:
        raise DomainError(
            "forward transform needs a non-growing field: tail slope "
            f"{phys.tail.slope!r} != 0"
        )
    offset = phys.tail.offset
    log_coef = phys.tail.log_coef
    nodes = phys.grid.nodes
    structure = phys.grid.decade_marks()

    if phys.analytic is not None:

        def integrand(r: np.ndarray) -> np.ndarray:
            dec = np.asarray(phys.analytic(r), dtype=float) - offset
            if log_coef != 0.0:
                dec = dec - log_coef * np.log(r)
            return dec * r

    else:
        dec_samples = phys.values - offset
        if log_coef != 0.0:
            dec_samples = dec_samples - log_coef * np.log(nodes)
        w_samples = dec_samples * nodes
        spline = CubicSpline(np.log(nodes), w_samples)
        # dec*r tends to a slowly varying c1 + c2 log r (dec itself decays
        # like (c1 + c2 log r)/r); fit that continuation on the last decade
        c_hi = _tail_fit(nodes, w_samples, [lambda u: np.ones_like(u), np.log])
        dec0 = dec_samples[0]

        def integrand(r: np.ndarray) -> np.ndarray:
            r = np.asarray(r, dtype=float)
            out = np.empty_like(r)
            lo = r <= nodes[0]
            hi = r >= nodes[-1]
            mid = ~(lo | hi)
            out[mid] = spline(np.log(r[mid]))
            out[lo] = dec0 * r[lo]
            out[hi] = c_hi[0] + c_hi[1] * np.log(r[hi])
            return out

    rho = freq_grid.nodes
    hat = np.array(
        [oscillatory_bessel_integral(integrand, p, nu=0, structure=structure) for p in rho]
    )
    if log_coef != 0.0:
        hat = hat - log_coef / rho**2
        exponent = -2.0
    else:
        exponent = 0.0
    return SpectralField(
        freq_grid=freq_grid,
        values=hat,
        tail=SpectralTailModel(amplitude=0.0),
        low_freq_exponent=exponent,
    )


def _plain_spectral_integral(spec: SpectralField, extra_power: float) -> float:
    """int_0^inf spec(rho) rho^extra_power d rho with end models."""
    g = spec.freq_grid
    q = spec.low_freq_exponent
    p_lo = q + extra_power
    if p_lo <= -1.0:
        raise DivergenceError(
            f"integral diverges at the low-frequency end (exponent {p_lo:+.3f} <= -1)"
        )
    total = spec.values[0] * g.r_min ** (extra_power + 1.0) / (p_lo + 1.0)
    x, w = gauss_legendre_rule(8)
    te = np.log(g.nodes)
    left = te[:-1, None]
    right = te[1:, None]
    t = 0.5 * (right - left) * x[None, :] + 0.5 * (left + right)
    wt = 0.5 * (right - left) * w[None, :]
    rr = np.exp(t)
    vv = spec._interp(t) if spec.analytic is None else np.asarray(spec.analytic(rr), dtype=float)
    total += float(np.sum(wt * rr ** (extra_power + 1.0) * vv))
    tail = spec.tail
    if tail.amplitude != 0.0:
        if tail.decay_rate > 0.0:
            hi_end = g.r_max + 60.0 / tail.decay_rate
            e = np.linspace(np.log(g.r_max), np.log(hi_end), 33)
            lt = e[:-1, None]
            rt = e[1:, None]
            tt = 0.5 * (rt - lt) * x[None, :] + 0.5 * (lt + rt)
            wt2 = 0.5 * (rt - lt) * w[None, :]
            uu = np.exp(tt)
            total += float(np.sum(wt2 * uu ** (extra_power + 1.0) * tail.value(uu)))
        else:
            p_hi = tail.power + extra_power
            if p_hi >= -1.0:
                raise DivergenceError(
                    f"integral diverges at the high-frequency end (exponent {p_hi:+.3f} >= -1)"
                )
            total += tail.amplitude * g.r_max ** (p_hi + 1.0) / (-(p_hi + 1.0))
    return total


def hankel_inverse(spec: SpectralField, grid: RadialGrid) -> RadialField:
    """Inverse transform f(r) = int_0^inf fhat(rho) J0(r rho) rho d rho.

    Needs low_freq_exponent > -2 so the integrand is integrable at 0.
    """
    if spec.low_freq_exponent <= -2.0:
        raise DomainError(
            "inverse transform undefined: low-frequency exponent "
            f"{spec.low_freq_exponent!r} <= -2"
        )
    structure = spec.freq_grid.decade_marks()
    g = spec.freq_grid
    q = spec.low_freq_exponent
    v0 = spec.values[0]

    if spec.analytic is not None:

        def integrand(rho: np.ndarray) -> np.ndarray:
            rho = np.asarray(rho, dtype=float)
            return np.asarray(spec.analytic(rho), dtype=float) * rho

    else:

        def integrand(rho: np.ndarray) -> np.ndarray:
            rho = np.asarray(rho, dtype=float)
            out = np.empty_like(rho)
            lo = rho < g.r_min
            hi = rho > g.r_max
            mid = ~(lo | hi)
            out[mid] = spec._interp(np.log(rho[mid])) * rho[mid]
            out[lo] = v0 * (rho[lo] / g.r_min) ** q * rho[lo]
            out[hi] = spec.tail.value(rho[hi]) * rho[hi]
            return out

    values = np.array(
        [oscillatory_bessel_integral(integrand, r, nu=0, structure=structure) for r in grid.nodes]
    )
    origin = _plain_spectral_integral(spec, extra_power=1.0)
    return RadialField.from_samples(grid, values, tail_slope=0.0, origin_value=origin)


def sobolev_seminorm(spec: SpectralField, t: float) -> float:
    """Homogeneous seminorm sqrt(2 pi int rho^{2t+1} |fhat|^2 d rho).

    End models: power continuation with the low-frequency exponent below
    the band, the spectral tail model above; either end diverging raises
    DivergenceError naming it.
    """
    if not np.isfinite(t):
        raise ParameterError("Sobolev exponent must be finite")
    g = spec.freq_grid
    q = spec.low_freq_exponent
    p_lo = 2.0 * t + 1.0 + 2.0 * q
    if p_lo <= -1.0:
        raise DivergenceError(
            f"seminorm exponent t={t} diverges at the low-frequency end "
            f"(integrand exponent {p_lo:+.3f} <= -1)"
        )
    total = spec.values[0] ** 2 * g.r_min ** (2.0 * t + 2.0) / (p_lo + 1.0)
    x, w = gauss_legendre_rule(8)
    te = np.log(g.nodes)
    left = te[:-1, None]
    right = te[1:, None]
    tt = 0.5 * (right - left) * x[None, :] + 0.5 * (left + right)
    wt = 0.5 * (right - left) * w[None, :]
    rr = np.exp(tt)
    vv = spec._interp(tt) if spec.analytic is None else np.asarray(spec.analytic(rr), dtype=float)
    total += float(np.sum(wt * rr ** (2.0 * t + 2.0) * vv**2))
    tail = spec.tail
    if tail.amplitude != 0.0:
        if tail.decay_rate > 0.0:
            hi_end = g.r_max + 30.0 / tail.decay_rate
            e = np.linspace(np.log(g.r_max), np.log(hi_end), 33)
            lt = e[:-1, None]
            rt = e[1:, None]
            t2 = 0.5 * (rt - lt) * x[None, :] + 0.5 * (lt + rt)
            w2 = 0.5 * (rt - lt) * w[None, :]
            uu = np.exp(t2)
            total += float(np.sum(w2 * uu ** (2.0 * t + 2.0) * tail.value(uu) ** 2))
        else:
            p_hi = 2.0 * t + 1.0 + 2.0 * tail.power
            if p_hi >= -1.0:
                raise DivergenceError(
                    f"seminorm exponent t={t} diverges at the high-frequency end "
                    f"(integrand exponent {p_hi:+.3f} >= -1)"
                )
            total += tail.amplitude**2 * g.r_max ** (p_hi + 1.0) / (-(p_hi + 1.0))
    return float(np.sqrt(2.0 * np.pi * total))


def intersection_norm(spec: SpectralField, sobolev: SobolevSpec) -> float:
    """Sum of the seminorms over the spec's exponents (intersection norm)."""
    return float(sum(sobolev_seminorm(spec, t) for t in sobolev.exponents))
