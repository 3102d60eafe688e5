"""Local harmonic-extension arithmetic.

The sweep figures draw horizontal asymptotes at h(a) - log(a) - gamma,
where h(z) = psi(z+1) + gamma is the analytic extension of the harmonic
numbers.  The values are recomputed here, independently of whatever wrote
the CSV, and cross-checked against the asymptote rows embedded in it.
"""

from __future__ import annotations

import math

EULER_GAMMA = 0.5772156649015328606

# B_{2n}/(2n) for the digamma asymptotic series, through the x**-14 term.
_COEFFS = (
    1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
    1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0,
)


def digamma(x: float) -> float:
    if x <= 0:
        raise ValueError("digamma requires x > 0")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    w = 1.0 / (x * x)
    series = 0.0
    for c in reversed(_COEFFS):
        series = w * (c + series)
    return acc + math.log(x) - 0.5 / x - series


def sweep_asymptote(a: float) -> float:
    """Large-system limit of the expected divergence from a single
    two-block partition model under the symmetric prior: h(a) - log a - gamma."""
    return digamma(a + 1.0) + EULER_GAMMA - math.log(a) - EULER_GAMMA
