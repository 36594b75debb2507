#!/usr/bin/env python3
"""High-precision reference values for the frequency-kernel resolvent.

For input f(u) = u the resolvent has the closed form

    y(rho) = (rho^3 - 3 rho^2 + 6 rho - 6 + 6 e^(-rho)) / rho^3,

whose numerator cancels to O(rho^4) as rho -> 0: in double precision
the formula loses all significant digits below rho ~ 1e-2, so the test
values are produced here with 40-digit arithmetic instead.  For input
f(u) = e^(-u)/u the closed form e^(-rho)/(2 rho) is benign, printed for
completeness.  Frozen values are asserted in tests/test_operators.py.

Frozen output (2026-08):

    rho = 0.001   y_growing = 0.0002499500083321430059358482141710984522356
    rho = 0.01    y_growing = 0.002495008321443435863080219346632470084881
    rho = 0.1     y_growing = 0.02450821575743898549435667861972716819293
    rho = 1.0     y_growing = 0.2072766470286539295731426209687652046749
    rho = 10.0    y_growing = 0.7540002723995785749091092135490933633037
    rho = 0.001   y_decaying = 499.5002499166874958340276785838279873512
    rho = 1.0     y_decaying = 0.1839397205857211607977618850807304337229
"""

from mpmath import exp, mp, mpf

mp.dps = 40


def y_growing(rho) -> object:
    rho = mpf(rho)
    return (rho**3 - 3 * rho**2 + 6 * rho - 6 + 6 * exp(-rho)) / rho**3


def y_decaying(rho) -> object:
    rho = mpf(rho)
    return exp(-rho) / (2 * rho)


def main() -> None:
    for rho in ("0.001", "0.01", "0.1", "1.0", "10.0"):
        print(f"rho = {rho:6s}  y_growing = {y_growing(rho)}")
    for rho in ("0.001", "1.0"):
        print(f"rho = {rho:6s}  y_decaying = {y_decaying(rho)}")


if __name__ == "__main__":
    main()
