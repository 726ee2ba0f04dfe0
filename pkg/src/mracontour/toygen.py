"""Hypocycloid toy dataset: random similarity transforms, 512-point polygons and
320x320 even-odd rasterised masks.

Randomness comes from numpy's PCG64 (``np.random.default_rng``), seeded with an
integer or a sequence of integers; draws are taken in the fixed order
r1, theta, q1, q2, kappa, repeated until the curve fits on the canvas.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CANVAS = 320
N_POINTS = 512


@dataclass
class ToySample:
    r1: int
    theta: float
    q: tuple[float, float]
    kappa: float
    polygon: np.ndarray
    mask: np.ndarray
    rejections: int = 0


def hypocycloid(r1: int, t) -> np.ndarray:
    """eta(t) for rolling radius r2 = 1; shape ``t.shape + (2,)``."""
    if r1 < 2:
        raise ValueError("r1 must be an integer >= 2")
    t = np.asarray(t, dtype=float)
    a = r1 - 1
    return np.stack([a * np.cos(t) + np.cos(a * t), a * np.sin(t) - np.sin(a * t)], axis=-1)


def transform_curve(r1, theta, q, kappa, n_points=N_POINTS, literal=False) -> np.ndarray:
    """kappa R(theta) eta + (160 + q1, 160 + q2) on n_points grid points of [0, 2 pi).

    ``literal=True`` scales the shift as well: kappa (R(theta) eta + shift).
    """
    t = 2 * np.pi * np.arange(n_points) / n_points
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    shift = np.array([CANVAS / 2 + q[0], CANVAS / 2 + q[1]])
    eta = hypocycloid(r1, t) @ rot.T
    if literal:
        return kappa * (eta + shift)
    return kappa * eta + shift


def rasterize(polygon, size=CANVAS, origin=(0.0, 0.0), spacing=1.0) -> np.ndarray:
    """Even-odd scanline fill; a cell is set iff its centre lies inside.

    ``size`` is an int or ``(rows, cols)``.  Cell (i, j) has centre
    ``(origin[0] + j*spacing, origin[1] + i*spacing)`` in (x, y).
    """
    p = np.asarray(polygon, dtype=float)
    if p.ndim != 2 or p.shape[0] < 3 or p.shape[1] != 2:
        raise ValueError("degenerate polygon: need an (n >= 3, 2) point array")
    rows, cols = (size, size) if np.isscalar(size) else size
    x0, y0 = p[:, 0], p[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    if np.ptp(x0) == 0 or np.ptp(y0) == 0:
        raise ValueError("degenerate polygon: zero extent")
    sloped = y0 != y1
    x0, y0, x1, y1 = x0[sloped], y0[sloped], x1[sloped], y1[sloped]
    ylo, yhi = np.minimum(y0, y1), np.maximum(y0, y1)
    inv = (x1 - x0) / (y1 - y0)
    xc = origin[0] + spacing * np.arange(cols)
    mask = np.zeros((rows, cols), dtype=bool)
    first = max(0, int(np.floor((ylo.min() - origin[1]) / spacing)))
    last = min(rows - 1, int(np.ceil((yhi.max() - origin[1]) / spacing)))
    for i in range(first, last + 1):
        y = origin[1] + spacing * i
        hit = (ylo <= y) & (y < yhi)
        if not hit.any():
            continue
        xs = np.sort(x0[hit] + (y - y0[hit]) * inv[hit])
        # parity of crossings strictly to the right of the centre
        right = xs.size - np.searchsorted(xs, xc, side="right")
        mask[i] = (right % 2) == 1
    return mask


def sample_toy(seed, literal: bool = False, max_tries: int = 10_000) -> ToySample:
    """Draw one toy sample; curves leaving [0, 320)^2 are redrawn and counted."""
    rng = np.random.default_rng(seed)
    for tries in range(max_tries):
        r1 = int(rng.integers(3, 7))
        theta = float(rng.uniform(-np.pi / 2, np.pi / 2))
        q = (float(rng.uniform(-80, 80)), float(rng.uniform(-80, 80)))
        kappa = float(rng.uniform(10, 20))
        poly = transform_curve(r1, theta, q, kappa, literal=literal)
        if np.all((poly >= 0) & (poly < CANVAS)):
            return ToySample(r1, theta, q, kappa, poly, rasterize(poly), tries)
    raise RuntimeError(f"no in-canvas sample after {max_tries} draws")
