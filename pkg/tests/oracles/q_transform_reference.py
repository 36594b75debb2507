#!/usr/bin/env python3
"""Independent reference value for the four-slot product transform.

Evaluates Q[f, f, f, 0] at radius 1 for f(r) = exp(-r^2) with an
adaptive double quadrature (scipy.integrate.dblquad), bypassing the
package's panel quadrature entirely.  The frozen value is asserted in
tests/test_nonlinear.py.

Integrand in polar offset coordinates (a, theta) around an evaluation
point at distance r = 1 from the origin:

    ell       = sqrt(r^2 + a^2 - 2 r a cos(theta))   radius after offset
    G         = cos(theta) f'(r) + (a - r cos(theta)) f'(ell)/ell
    d         = (f(r) - f(ell)) / a                  finite slope
    integrand = G * d^2 / a

over theta in [0, 2 pi], a in (0, 60].  With the fourth slot zero the
denominator weight is 1 and every counterterm slope product vanishes,
so this raw integral equals the renormalized transform value; the
integrand decays like a^-3 so truncating at a = 60 is below 1e-13.

Frozen output (2026-08):

    Q[f, f, f, 0](1) = 1.487397834118709e-01  (error estimate 2.0e-13)
"""

import numpy as np
from scipy.integrate import dblquad


def integrand(theta: float, a: float, r: float = 1.0) -> float:
    ct = np.cos(theta)
    ell = np.sqrt(r * r + a * a - 2.0 * r * a * ct)
    G = ct * (-2.0 * r * np.exp(-r * r)) + (a - r * ct) * (-2.0 * np.exp(-ell * ell))
    d = (np.exp(-r * r) - np.exp(-ell * ell)) / a
    return G * d * d / a


def main() -> None:
    value, err = dblquad(
        integrand, 1e-10, 60.0, 0.0, 2.0 * np.pi, epsabs=1e-13, epsrel=1e-13
    )
    print(f"Q[f, f, f, 0](1) = {value:.15e}  (error estimate {err:.1e})")


if __name__ == "__main__":
    main()
