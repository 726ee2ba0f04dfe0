"""Daubechies filter banks, refinement mask and cascade-algorithm scaling function.

Filters are built by spectral factorization of the Daubechies polynomial in
extended precision (mpmath) and rounded to float64 once, so the orthonormality
relations hold to machine precision even for db16.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

SUPPORTED_ORDERS = (1, 2, 4, 8, 16)


class ConvergenceError(RuntimeError):
    """Raised when the cascade iteration fails to reach its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class FilterBank:
    """Orthonormal low/high-pass pair for db-p.

    ``h`` holds h_0 ... h_{2p-1}; ``g`` holds g_{2-2p} ... g_1 with
    g_k = (-1)^(k-1) h_{1-k}.  ``beta`` is the support length of the scaling
    function, i.e. supp(phi) = [0, beta].
    """

    p: int
    h: np.ndarray
    g: np.ndarray

    @property
    def name(self) -> str:
        return f"db{self.p}"

    @property
    def beta(self) -> int:
        return 2 * self.p - 1

    @property
    def g_start(self) -> int:
        """Two-sided index of ``g[0]``."""
        return 2 - 2 * self.p

    @property
    def radius(self) -> int:
        """Support radius M used to embed every filter in 1-M ... M-1."""
        return 2 * self.p


def parse_wavelet(name: str | int | FilterBank) -> int:
    """Return p for ``"db8"``, ``"8"``, ``8`` or a bank."""
    if isinstance(name, FilterBank):
        return name.p
    if isinstance(name, (int, np.integer)):
        return int(name)
    s = str(name).strip().lower()
    if s == "haar":
        return 1
    if s.startswith("db"):
        s = s[2:]
    try:
        return int(s)
    except ValueError:
        raise ValueError(f"unrecognised wavelet name {name!r}; expected dbP") from None


@lru_cache(maxsize=None)
def _daubechies_lowpass(p: int, dps: int = 60) -> tuple[float, ...]:
    with mpmath.workdps(dps):
        # |L(xi)|^2 = P(sin^2(xi/2)),  P(y) = sum_k C(p-1+k, k) y^k
        if p == 1:
            inner = []
        else:
            coeffs = [mpmath.binomial(p - 1 + k, k) for k in range(p)]
            yroots = mpmath.polyroots(coeffs[::-1], maxsteps=500, extraprec=4 * dps)
            inner = []
            for y in yroots:
                # y = (2 - z - 1/z)/4  ->  z^2 - (2 - 4y) z + 1 = 0; keep |z| < 1
                b = 2 - 4 * y
                disc = mpmath.sqrt(b * b - 4)
                z1, z2 = (b + disc) / 2, (b - disc) / 2
                inner.append(z1 if abs(z1) < 1 else z2)
        roots = [mpmath.mpf(-1)] * p + inner
        poly = [mpmath.mpc(1)]
        for r in roots:
            nxt = [mpmath.mpc(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i] += c
                nxt[i + 1] -= c * r
            poly = nxt
        total = mpmath.fsum(poly)
        scale = mpmath.sqrt(2) / total
        return tuple(float(mpmath.re(c * scale)) for c in poly)


@lru_cache(maxsize=None)
def _make_filter_bank(p: int) -> FilterBank:
    h = np.array(_daubechies_lowpass(p))
    k = np.arange(2 - 2 * p, 2)
    g = (-1.0) ** (k - 1) * h[1 - k]
    h.setflags(write=False)
    g.setflags(write=False)
    return FilterBank(p=p, h=h, g=g)


def make_filter_bank(p: int | str) -> FilterBank:
    """Return the minimal-support Daubechies bank db-p, p in {1, 2, 4, 8, 16}."""
    p = parse_wavelet(p)
    if p not in SUPPORTED_ORDERS:
        raise ValueError(
            f"unsupported vanishing-moment count p={p}; choose one of {SUPPORTED_ORDERS}"
        )
    return _make_filter_bank(p)


def refinement_mask(bank: FilterBank, xi):
    """H(xi) = 2^(-1/2) sum_k h_k exp(-2 pi i xi k); vectorised over ``xi``."""
    xi = np.asarray(xi, dtype=float)
    k = np.arange(bank.h.size)
    phase = np.exp(-2j * np.pi * np.multiply.outer(xi, k))
    return phase @ bank.h / math.sqrt(2.0)


def scaling_function_samples(
    bank: FilterBank, depth: int, tol: float = 1e-8, max_iter: int = 60
) -> tuple[np.ndarray, np.ndarray]:
    """Cascade algorithm on the grid x = k 2^-depth, 0 <= k <= beta 2^depth.

    Iterates phi <- sqrt(2) sum_k h_k phi(2x - k) from the box function until
    successive iterates agree to ``tol`` in max norm.  Returns ``(x, phi)``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    step = 1 << depth
    n = bank.beta * step + 1
    x = np.arange(n) / step
    phi = ((x >= 0) & (x < 1)).astype(float)
    idx = np.arange(n)
    taps = []
    for k, hk in enumerate(bank.h):
        src = 2 * idx - k * step
        valid = (src >= 0) & (src < n)
        taps.append((math.sqrt(2.0) * hk, valid, src[valid]))
    residual = math.inf
    for _ in range(max_iter):
        nxt = np.zeros(n)
        for w, valid, src in taps:
            nxt[valid] += w * phi[src]
        residual = float(np.max(np.abs(nxt - phi)))
        phi = nxt
        if residual < tol:
            return x, phi
    raise ConvergenceError(
        f"cascade for {bank.name} at depth {depth} did not converge in {max_iter} "
        f"iterations (last residual {residual:.3e})",
        residual,
    )
