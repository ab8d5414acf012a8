"""Lanczos approximation of the Gamma function on the complex plane."""
from __future__ import annotations

import cmath
import math

# g = 7, n = 9 coefficient set (Godfrey)
LANCZOS_G = 7
LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_gamma(z) -> complex:
    """Gamma(z) for complex z; reflection is used left of Re z = 1/2.

    Accurate to roughly 1e-13 relative on the right half-plane.  Raises
    ZeroDivisionError at the poles 0, -1, -2, ...
    """
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise ZeroDivisionError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * lanczos_gamma(1 - z))
    z -= 1
    acc = LANCZOS_COEF[0]
    for i in range(1, LANCZOS_G + 2):
        acc += LANCZOS_COEF[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * acc
