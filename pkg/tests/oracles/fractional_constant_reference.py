#!/usr/bin/env python3
"""Closed-form normalization constants for the fractional Laplacian.

The two-dimensional multiplier |xi|^sigma corresponds to a normalized
principal-value difference integral; the package computes the constant
from its defining integral

    1 / C(sigma) = 2 pi * int_0^inf (1 - J0(u)) u^(-1-sigma) du.

The Mellin transform of J0 gives the integral in closed form, hence

    C(sigma) = 2^sigma * Gamma(1 + sigma/2) / (pi * |Gamma(-sigma/2)|),

which at sigma = 1 reduces to 1/(2 pi).  This script prints the closed
form at 30 digits with mpmath; the frozen values are asserted against
operators.frac_laplacian_constant in tests/test_operators.py.

Frozen output (2026-08):

    C(0.5) = 0.0832419838754250654889402178181347
    C(1)   = 0.159154943091895335768883763372514
    C(1.5) = 0.171167129690552342925202071993733
    1/(2 pi) = 0.159154943091895335768883763372514
"""

from mpmath import gamma, mp, mpf, pi

mp.dps = 33


def c_sigma(sigma) -> object:
    sigma = mpf(sigma)
    return 2**sigma * gamma(1 + sigma / 2) / (pi * abs(gamma(-sigma / 2)))


def main() -> None:
    for sigma in ("0.5", "1", "1.5"):
        print(f"C({sigma}) = {c_sigma(sigma)}")
    print(f"1/(2 pi) = {1 / (2 * pi)}")


if __name__ == "__main__":
    main()
