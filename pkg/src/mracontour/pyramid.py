"""Periodic Pyramid Algorithm: one- and multi-level decomposition/reconstruction.

Coefficient arrays follow the circconv conventions and may carry leading axes
(typically ``(2, 2**j)`` for the two spatial components).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circconv import circular_convolve, downsample, embed_filter, upsample
from .filters import FilterBank, make_filter_bank, scaling_function_samples


def _check_power_of_two(length: int) -> int:
    if length < 1 or length & (length - 1):
        raise ValueError(f"coefficient length must be a power of two, got {length}")
    return length.bit_length() - 1


def level_of(a: np.ndarray) -> int:
    """Resolution level j of a coefficient array of length 2**j."""
    return _check_power_of_two(np.asarray(a).shape[-1])


def _filters(bank: FilterBank):
    m = bank.radius
    h = embed_filter(bank.h, 0, m)
    g = embed_filter(bank.g, bank.g_start, m)
    # h~_k = h_{-k}: reversing a symmetric-range filter negates its indices
    return h, g, h[::-1].copy(), g[::-1].copy()


def decompose_step(a: np.ndarray, bank: FilterBank) -> tuple[np.ndarray, np.ndarray]:
    """a_j = M^- C_h~ a_{j+1},  d_j = M^- C_g~ a_{j+1}."""
    a = np.asarray(a, dtype=float)
    if level_of(a) < 1:
        raise ValueError("decompose_step needs at least two coefficients")
    _, _, ht, gt = _filters(bank)
    return downsample(circular_convolve(a, ht)), downsample(circular_convolve(a, gt))


def reconstruct_step(
    approx: np.ndarray, detail: np.ndarray | None, bank: FilterBank
) -> np.ndarray:
    """a_{j+1} = C_h M^+ a_j + C_g M^+ d_j; ``detail=None`` means zero details."""
    approx = np.asarray(approx, dtype=float)
    h, g, _, _ = _filters(bank)
    out = circular_convolve(upsample(approx), h)
    if detail is not None:
        detail = np.asarray(detail, dtype=float)
        if detail.shape != approx.shape:
            raise ValueError(
                f"approx/detail shape mismatch: {approx.shape} vs {detail.shape}"
            )
        out = out + circular_convolve(upsample(detail), g)
    return out


def threshold_details(d: np.ndarray, eps: float) -> np.ndarray:
    """Zero every entry with |d_k| < eps (strict)."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    d = np.asarray(d, dtype=float)
    return np.where(np.abs(d) < eps, 0.0, d)


@dataclass
class Decomposition:
    """Multi-level coefficients.  ``approx`` maps level -> array for j0..j2;
    ``detail`` maps level -> array for the stored detail levels."""

    j0: int
    j1: int
    j2: int
    approx: dict[int, np.ndarray] = field(default_factory=dict)
    detail: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not self.j0 <= self.j1 <= self.j2:
            raise ValueError(f"levels must satisfy j0 <= j1 <= j2, got {self.levels}")

    @property
    def levels(self) -> tuple[int, int, int]:
        return self.j0, self.j1, self.j2


def decompose_full(a_top: np.ndarray, j0: int, bank: FilterBank) -> Decomposition:
    """Iterate decompose_step from the input level j2 down to j0, keeping every level.

    The result has j1 = j2: all details j0 ... j2-1 are stored.
    """
    a_top = np.asarray(a_top, dtype=float)
    j2 = level_of(a_top)
    if j0 < 0 or j0 > j2:
        raise ValueError(f"j0={j0} must lie in 0..{j2}")
    dec = Decomposition(j0, j2, j2)
    dec.approx[j2] = a_top
    a = a_top
    for j in range(j2 - 1, j0 - 1, -1):
        a, d = decompose_step(a, bank)
        dec.approx[j] = a
        dec.detail[j] = d
    return dec


def reconstruct_schedule(
    dec: Decomposition, bank: FilterBank, j1: int | None = None
) -> dict[int, np.ndarray]:
    """Rebuild approximations j0 ... j2 from the level-j0 approximation.

    Levels j0+1 ... j1 use the stored details, levels above j1 use none.
    """
    j1 = dec.j1 if j1 is None else j1
    if not dec.j0 <= j1 <= dec.j2:
        raise ValueError(f"j1={j1} outside {dec.j0}..{dec.j2}")
    missing = [j for j in range(dec.j0, j1) if j not in dec.detail]
    if missing:
        raise ValueError(f"missing detail coefficients at levels {missing}")
    a = dec.approx[dec.j0]
    out = {dec.j0: a}
    for j in range(dec.j0, dec.j2):
        a = reconstruct_step(a, dec.detail[j] if j < j1 else None, bank)
        out[j + 1] = a
    return out


@lru_cache(maxsize=None)
def _phi_table(p: int, depth: int) -> np.ndarray:
    _, phi = scaling_function_samples(make_filter_bank(p), max(depth, 1))
    if depth == 0:
        phi = phi[::2]
    phi.setflags(write=False)
    return phi


def level_curve(a: np.ndarray, bank: FilterBank, refine: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the periodic level-j curve sum_k a_k phi_jk(t).

    Returns ``(t, points)`` on t = -1/2 + i 2^-(j+refine), i = 0 ... 2^(j+refine)-1,
    with ``points`` of shape (len(t),) + a.shape[:-1] moved to the front,
    i.e. ``(len(t), 2)`` for a two-component array.  Values come from
    cascade samples of phi, exact on the dyadic grid.
    """
    a = np.asarray(a, dtype=float)
    j = level_of(a)
    phi = _phi_table(bank.p, refine)
    step = 1 << refine
    length = a.shape[-1] * step
    kernel = np.zeros(length)
    np.add.at(kernel, np.arange(phi.size) % length, phi)
    up = np.zeros(a.shape[:-1] + (length,))
    up[..., ::step] = a
    vals = np.fft.ifft(np.fft.fft(up, axis=-1) * np.fft.fft(kernel), axis=-1).real
    vals *= 2.0 ** (j / 2)
    t = -0.5 + np.arange(length) / length
    return t, np.moveaxis(vals, -1, 0)


def endpoint_gap(a: np.ndarray, bank: FilterBank) -> float:
    """Distance between the level-j curve at t = -1/2 and at t = (1 - 2^(1-j))/2."""
    a = np.asarray(a, dtype=float)
    j = level_of(a)
    phi = _phi_table(bank.p, 0)  # phi at 0, 1, ..., beta
    n = a.shape[-1]

    def point(pos: int) -> np.ndarray:
        # x = pos - 2^(j-1) in level units; contributions from a_n with 0 <= x - n <= beta
        idx = (pos - np.arange(phi.size)) % n
        return 2.0 ** (j / 2) * (a[..., idx] @ phi)

    return float(np.linalg.norm(point(0) - point(n - 1)))
