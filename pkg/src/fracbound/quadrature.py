"""Product-trapezoid weights for the kernel ``(t - s)**(alpha - 1)`` and
lower-triangular Toeplitz application.

Integrating the kernel exactly against the hat basis of a uniform grid gives
(up to the factor ``h**alpha / Gamma(alpha + 2)``)::

    J f(t_i) ~ b_i f_0 + sum_{j=1}^{i} c_{i-j} f_j

    c_0 = 1
    c_k = (k+1)**a - 2 k**a + (k-1)**a            k >= 1,   a = alpha + 1
    b_i = (i-1)**a - (i-1-alpha) i**alpha

The interior weights depend on ``i - j`` only, so the sum is the Toeplitz
product ``(c * f)_i`` plus the boundary correction ``(b_i - c_i) f_0``.

For large ``k`` both closed forms are differences of nearly equal powers;
they are evaluated from their binomial series instead, which is free of
cancellation.
"""

from __future__ import annotations

import functools

import numpy as np
import scipy.fft
import scipy.linalg

__all__ = ["kernel_weights", "toeplitz_lower_naive", "toeplitz_lower_fft"]

# Below this index the closed forms lose at most a few digits to cancellation.
_SERIES_FROM = 4
_SERIES_TERMS = 40

# Block size at which the recursive FFT product falls back to a dense matvec.
_DENSE_CUTOFF = 96


def _binomials(a: float, count: int) -> np.ndarray:
    out = np.empty(count)
    out[0] = 1.0
    for j in range(1, count):
        out[j] = out[j - 1] * (a - j + 1) / j
    return out


def _second_difference(a: float, k: np.ndarray) -> np.ndarray:
    """``(k+1)**a - 2 k**a + (k-1)**a`` for ``k >= 1``."""
    k = k.astype(float)
    out = np.empty_like(k)
    small = k < _SERIES_FROM
    ks = k[small]
    out[small] = (ks + 1) ** a - 2 * ks**a + (ks - 1) ** a
    kl = k[~small]
    if kl.size:
        binom = _binomials(a, 2 * _SERIES_TERMS + 1)
        acc = np.zeros_like(kl)
        for m in range(1, _SERIES_TERMS + 1):
            coef = binom[2 * m]
            if coef == 0.0:
                break
            term = coef * kl ** (a - 2 * m)
            acc += term
            if np.all(np.abs(term) <= 1e-17 * np.abs(acc)):
                break
        out[~small] = 2.0 * acc
    return out


def _left_boundary(alpha: float, i: np.ndarray) -> np.ndarray:
    """``(i-1)**a - (i-1-alpha) i**alpha`` for ``i >= 1``."""
    a = alpha + 1.0
    i = i.astype(float)
    out = np.empty_like(i)
    small = i < _SERIES_FROM
    ii = i[small]
    out[small] = (ii - 1) ** a - (ii - 1 - alpha) * ii**alpha
    il = i[~small]
    if il.size:
        binom = _binomials(a, 2 * _SERIES_TERMS + 2)
        acc = np.zeros_like(il)
        for m in range(2, 2 * _SERIES_TERMS + 2):
            coef = binom[m]
            if coef == 0.0:
                break
            term = (-1) ** m * coef * il ** (a - m)
            acc += term
            if np.all(np.abs(term) <= 1e-17 * np.abs(acc)):
                break
        out[~small] = acc
    return out


@functools.lru_cache(maxsize=64)
def kernel_weights(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Unscaled weights ``(c, b)`` for a grid with ``n`` cells.

    ``c[k]`` is the Toeplitz weight of lag ``k`` (``c[0] = 1``); ``b[i]`` is
    the weight of node 0 in row ``i`` (``b[0] = 0``).  Both arrays have
    length ``n + 1`` and are read-only, so the memo can be shared between
    threads.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    k = np.arange(n + 1)
    c = np.empty(n + 1)
    c[0] = 1.0
    c[1:] = _second_difference(alpha + 1.0, k[1:])
    b = np.zeros(n + 1)
    b[1:] = _left_boundary(alpha, k[1:])
    c.setflags(write=False)
    b.setflags(write=False)
    return c, b


def toeplitz_lower_naive(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``y_i = sum_{j<=i} c_{i-j} x_j`` by direct summation, one row at a time."""
    N = x.shape[0]
    crev = np.ascontiguousarray(c[:N][::-1])
    y = np.empty_like(x, dtype=float)
    for i in range(N):
        y[i] = crev[N - 1 - i:] @ x[: i + 1]
    return y


def toeplitz_lower_fft(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Same product as :func:`toeplitz_lower_naive` in ``O(N log^2 N)``.

    The triangle is split recursively into two half-size triangles and one
    dense off-diagonal Toeplitz block; the block is applied through a
    circulant embedding and real FFTs.  Splitting (instead of one global
    FFT) keeps the rounding error of each output proportional to the
    magnitude of the terms that actually feed it, so small entries near
    ``t0`` keep their relative accuracy.
    """
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    spectra: dict = {}
    y = _tril_apply(np.asarray(c, dtype=float), x, spectra)
    return y[:, 0] if squeeze else y


def _kernel_spectrum(c, N, L, spectra):
    key = (N, L)
    if key not in spectra:
        spectra[key] = scipy.fft.rfft(c[:N], n=L)
    return spectra[key]


def _tril_apply(c, x, spectra):
    N = x.shape[0]
    if N <= _DENSE_CUTOFF:
        T = scipy.linalg.toeplitz(c[:N], np.zeros(N))
        return T @ x
    m = N // 2
    y = np.empty_like(x)
    y[:m] = _tril_apply(c, x[:m], spectra)
    y[m:] = _tril_apply(c, x[m:], spectra)
    # rows m..N-1 against columns 0..m-1 use lags 1..N-1; with a circulant
    # of length L >= N the wrapped-around terms land below row m.
    L = scipy.fft.next_fast_len(N, real=True)
    kc = _kernel_spectrum(c, N, L, spectra)
    xf = scipy.fft.rfft(x[:m], n=L, axis=0)
    z = scipy.fft.irfft(kc[:, None] * xf, n=L, axis=0)
    y[m:] += z[m:N]
    return y
