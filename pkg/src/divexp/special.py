"""Harmonic numbers, the digamma function, and the Euler-Mascheroni constant.

This is the scalar kernel behind every closed-form expectation in the
package.  The central object is the harmonic number

    h(k) = 1 + 1/2 + ... + 1/k,      h(0) = 0,

together with its real-analytic extension to (-1, oo),

    h(z) = psi(z + 1) + gamma,

where psi is the digamma function (logarithmic derivative of the gamma
function) and gamma = 0.57721... is the Euler-Mascheroni constant.  The
difference h(k) - log(k) is strictly positive and decreases monotonically
to gamma, which is what makes 1 - gamma show up as a universal limit of
expected divergences.

All functions accept either Python floats or numpy arrays and are pure,
so they are safe for unrestricted concurrent use.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericDomainError

# Euler-Mascheroni constant, stored as a literal for reproducibility.
EULER_GAMMA = 0.5772156649015328606

# Direct summation bound for integer harmonic numbers; above this the
# digamma-based extension is used (it is accurate to ~1e-15 relative there).
_HARMONIC_DIRECT_LIMIT = 100_000

# Argument threshold for the digamma asymptotic series.  The recurrence
# psi(x) = psi(x + 1) - 1/x lifts smaller arguments above it.  With the
# series truncated at the x**-14 term, lifting to >= 10 keeps the absolute
# truncation error below 1e-16, which is needed to hold 1e-12 *relative*
# accuracy near the positive zero of psi at x ~ 1.4616.
_DIGAMMA_LIFT = 10.0

# B_{2n} / (2n) for n = 1..7: coefficients of the asymptotic expansion
# psi(x) ~ log x - 1/(2x) - sum_n B_{2n} / (2n x^{2n}).
_ASYMPTOTIC_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _digamma_array(x: np.ndarray) -> np.ndarray:
    """Digamma on a strictly positive float64 array (no domain checks)."""
    cur = x.astype(np.float64, copy=True)
    acc = np.zeros_like(cur)
    # Lift every entry above the series threshold; ten masked steps suffice
    # because cur > 0 implies cur + 10 >= 10.
    for _ in range(int(_DIGAMMA_LIFT)):
        low = cur < _DIGAMMA_LIFT
        if not low.any():
            break
        acc[low] -= 1.0 / cur[low]
        cur[low] += 1.0
    w = 1.0 / (cur * cur)
    # Horner evaluation of sum_n c_n * w**n.
    series = np.zeros_like(cur)
    for c in reversed(_ASYMPTOTIC_COEFFS):
        series = w * (c + series)
    return acc + np.log(cur) - 0.5 / cur - series


def digamma(x):
    """Digamma function psi(x) for x > 0.

    Uses the recurrence psi(x) = psi(x+1) - 1/x to raise the argument above
    a fixed threshold, then the Bernoulli-number asymptotic series through
    the x**-14 term.  Relative error is below 1e-12 on [1e-6, 1e8] (checked
    against a 50-term high-precision oracle in the acceptance suite).

    Accepts a float or an ndarray; raises NumericDomainError if any entry
    is <= 0.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.size and not (arr > 0).all():
        raise NumericDomainError("digamma requires strictly positive arguments")
    out = _digamma_array(np.atleast_1d(arr))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def euler_gamma() -> float:
    """The Euler-Mascheroni constant gamma = lim_k (h(k) - log k)."""
    return EULER_GAMMA


def harmonic_int(k: int) -> float:
    """Harmonic number h(k) = 1 + 1/2 + ... + 1/k for integer k >= 0.

    Exact compensated summation up to k = 1e5; beyond that the digamma
    extension is used so the cost stays bounded.
    """
    if k != int(k) or k < 0:
        raise NumericDomainError("harmonic_int requires an integer k >= 0")
    k = int(k)
    if k == 0:
        return 0.0
    if k <= _HARMONIC_DIRECT_LIMIT:
        return math.fsum(1.0 / j for j in range(1, k + 1))
    return harmonic_real(float(k))


def harmonic_real(z):
    """Analytic extension h(z) = psi(z + 1) + gamma, defined for z > -1.

    Agrees with harmonic_int on nonnegative integers to ~1e-15 relative and
    satisfies the recurrence h(z+1) - h(z) = 1/(z+1).
    """
    arr = np.asarray(z, dtype=np.float64)
    if arr.size and not (arr > -1.0).all():
        raise NumericDomainError("harmonic_real requires z > -1 (digamma pole)")
    out = _digamma_array(np.atleast_1d(arr) + 1.0) + EULER_GAMMA
    if np.isscalar(z) or arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0 (thin wrapper used for Dirichlet densities)."""
    if x <= 0:
        raise NumericDomainError("log_gamma requires x > 0")
    return math.lgamma(x)
