#!/usr/bin/env python3
"""Closed-form homogeneous Sobolev seminorms for two model spectra.

The package convention is

    seminorm(f, t) = sqrt( 2 pi * int_0^inf rho^(2t+1) |fhat(rho)|^2 drho ).

For fhat(rho) = e^(-rho)/rho (the transform of 1/sqrt(r^2+1)):

    seminorm^2 = 2 pi * Gamma(2t) / 4^t          (t > 0)

and for fhat(rho) = e^(-rho^2/2):

    seminorm^2 = pi * Gamma(t + 1)               (t > -1).

Printed at 30 digits with mpmath; frozen values are asserted against
hankel.sobolev_seminorm / hankel.intersection_norm in tests/test_hankel.py.

Frozen output (2026-08):

    exp_over_rho  t = 0.75   seminorm = 1.40310414553421602669092820125
    exp_over_rho  t = 1.25   seminorm = 1.2151238341878892019955003655
    gaussian      t = -0.125 seminorm = 1.85020102719855084094979472402
    gaussian      t = 0.75   seminorm = 1.69921160616861479603720832177
"""

from mpmath import gamma, mp, mpf, pi, sqrt

mp.dps = 30


def seminorm_exp_over_rho(t) -> object:
    t = mpf(t)
    return sqrt(2 * pi * gamma(2 * t) / mpf(4) ** t)


def seminorm_gaussian(t) -> object:
    t = mpf(t)
    return sqrt(pi * gamma(t + 1))


def main() -> None:
    for t in ("0.75", "1.25"):
        print(f"exp_over_rho  t = {t:6s} seminorm = {seminorm_exp_over_rho(t)}")
    for t in ("-0.125", "0.75"):
        print(f"gaussian      t = {t:6s} seminorm = {seminorm_gaussian(t)}")


if __name__ == "__main__":
    main()
