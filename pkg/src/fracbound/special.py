"""Gamma function helpers.

Every explicit constant in the operator bounds carries a Gamma factor; the
C library implementation behind :func:`math.gamma` is accurate to a few ulp
on the range we use, so we defer to it rather than carrying our own
Lanczos table.
"""

import math

import numpy as np
from scipy import special as _sp


def gamma(x):
    """Euler's Gamma function, scalar or elementwise."""
    if np.ndim(x) == 0:
        return math.gamma(float(x))
    return _sp.gamma(np.asarray(x, dtype=float))


def rgamma(x):
    """Reciprocal Gamma, zero at the poles."""
    if np.ndim(x) == 0:
        return float(_sp.rgamma(float(x)))
    return _sp.rgamma(np.asarray(x, dtype=float))
