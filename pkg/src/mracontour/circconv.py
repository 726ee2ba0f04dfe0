"""Periodic two-sided convolution evaluated at roots of unity.

Conventions: a periodic signal of half-length N is an array of length 2N
whose position ``i`` holds two-sided index ``i - N`` (indices -N ... N-1).
A two-sided filter of radius M is an array of length 2M-1 whose position
``i`` holds index ``i - (M-1)``.  All functions act on the last axis, so a
``(2, 2N)`` array carries both spatial components at once.
"""
from __future__ import annotations

import numpy as np


def _half_length(a: np.ndarray) -> int:
    n2 = a.shape[-1]
    if n2 < 2 or n2 % 2:
        raise ValueError(f"periodic signal length must be even and >= 2, got {n2}")
    return n2 // 2


def _radius(g: np.ndarray) -> int:
    size = g.shape[-1]
    if size % 2 == 0:
        raise ValueError(f"two-sided filter length must be odd (2M-1), got {size}")
    return (size + 1) // 2


def embed_filter(values, start: int, radius: int) -> np.ndarray:
    """Zero-pad a filter with support starting at index ``start`` into 1-M ... M-1."""
    values = np.asarray(values, dtype=float)
    stop = start + values.size - 1
    if start < 1 - radius or stop > radius - 1:
        raise ValueError(
            f"filter support {start}..{stop} does not fit in radius {radius}"
        )
    out = np.zeros(2 * radius - 1)
    out[start + radius - 1 : stop + radius] = values
    return out


def periodic_extend(a: np.ndarray, radius: int) -> np.ndarray:
    """Partial periodic extension P_K(a), indices 1-N-M ... N+M-2 (length 2(N+M-1))."""
    a = np.asarray(a)
    n = _half_length(a)
    if radius < 2 or radius > n:
        raise ValueError(f"extension radius M={radius} must satisfy 2 <= M <= N={n}")
    m1 = radius - 1
    return np.concatenate([a[..., 2 * n - m1 :], a, a[..., :m1]], axis=-1)


def direct_periodic_convolve(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """(a~ * g)_k = sum_{|k2| <= M-1} a~_{k-k2} g_{k2} over the full 2N-periodic extension."""
    a = np.asarray(a, dtype=float)
    g = np.asarray(g, dtype=float)
    n2 = a.shape[-1]
    m = _radius(g)
    out = np.zeros(a.shape)
    pos = np.arange(n2)
    for j, k2 in enumerate(range(1 - m, m)):
        if g[j] != 0.0:
            out += g[j] * a[..., (pos - k2) % n2]
    return out


def circular_convolve(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Periodic convolution of ``a`` (indices -N..N-1) with ``g`` (indices 1-M..M-1).

    Zero-pads P_K(a) and g to length K~ = K + 2(M-1), reorders to DFT order,
    multiplies the transforms and truncates back to -N..N-1.  Filters longer
    than the signal (M > N) fall back to direct summation.
    """
    a = np.asarray(a, dtype=float)
    g = np.asarray(g, dtype=float)
    n = _half_length(a)
    m = _radius(g)
    if m > n or m < 2:
        return direct_periodic_convolve(a, g)
    k = 2 * (n + m - 1)
    kt = k + 2 * (m - 1)
    ext = periodic_extend(a, m)
    # two-sided index i sits at DFT slot i mod K~
    u = np.zeros(a.shape[:-1] + (kt,))
    u[..., np.arange(-k // 2, k // 2) % kt] = ext
    v = np.zeros(kt)
    v[np.arange(1 - m, m) % kt] = g
    w = np.fft.ifft(np.fft.fft(u, axis=-1) * np.fft.fft(v), axis=-1).real
    return w[..., np.arange(-n, n) % kt]


def downsample(a: np.ndarray) -> np.ndarray:
    """(M^- a)_k = a_{2k} for -N/2 <= k <= N/2-1."""
    a = np.asarray(a)
    n = _half_length(a)
    if n < 2:
        raise ValueError("cannot downsample a length-2 signal")
    # index 2k lives at position 2k + N; with k = -N/2 that is position 0
    return a[..., 0::2].copy()


def upsample(a: np.ndarray) -> np.ndarray:
    """(M^+ a)_k = a_{k/2} for even k, zero otherwise; accepts a single coefficient."""
    a = np.asarray(a, dtype=float)
    out = np.zeros(a.shape[:-1] + (2 * a.shape[-1],))
    out[..., 0::2] = a
    return out
