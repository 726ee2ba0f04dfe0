"""Curve- and coefficient-space accuracy measures."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .contour import DegenerateContourError, arc_length, as_polygon, resample_arclength
from .toygen import rasterize


@dataclass
class MetricReport:
    dice: float
    hausdorff: float
    l2_s1: float
    l2_s2: float
    loss: float | None = None

    def __post_init__(self):
        values = [self.dice, self.hausdorff, self.l2_s1, self.l2_s2]
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"non-finite metric in {values}")
        if not 0.0 <= self.dice <= 1.0 or self.hausdorff < 0:
            raise ValueError(f"metric out of range: dice={self.dice}, hausdorff={self.hausdorff}")


def dice(a, b, supersample: int = 4) -> float:
    """2|A n B| / (|A| + |B|) from even-odd rasterisation on a 1/supersample grid.

    The grid spans the joint bounding box of both polygons.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    both = np.vstack([a, b])
    lo = both.min(axis=0)
    hi = both.max(axis=0)
    step = 1.0 / supersample
    cols = max(1, int(math.ceil((hi[0] - lo[0]) / step)))
    rows = max(1, int(math.ceil((hi[1] - lo[1]) / step)))
    origin = (lo[0] + step / 2, lo[1] + step / 2)
    ma = rasterize(a, (rows, cols), origin, step)
    mb = rasterize(b, (rows, cols), origin, step)
    total = int(ma.sum()) + int(mb.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((ma & mb).sum()) / total


def hausdorff(a, b, samples: int = 1024, return_bound: bool = False):
    """Symmetric Hausdorff distance between arc-length resamplings of two boundaries.

    With ``return_bound`` also returns half the longest resampling chord, the
    discretisation error of the estimate.
    """
    a = as_polygon(a)
    b = as_polygon(b)
    if samples < max(len(a), len(b)):
        raise ValueError("samples must be at least the number of polygon vertices")
    if arc_length(a) == 0 or arc_length(b) == 0:
        raise DegenerateContourError("degenerate contour: zero arc length")
    pa = resample_arclength(a, samples)
    pb = resample_arclength(b, samples)
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    d = float(max(d_ab, d_ba))
    if return_bound:
        bound = 0.5 * max(arc_length(a), arc_length(b)) / samples
        return d, bound
    return d


def l2_error(f, a) -> np.ndarray:
    """Per-component Euclidean norm of f - a over the last axis."""
    f = np.asarray(f, dtype=float)
    a = np.asarray(a, dtype=float)
    if f.shape != a.shape:
        raise ValueError(f"length mismatch: {f.shape} vs {a.shape}")
    return np.linalg.norm(f - a, axis=-1)


def cross_entropy(p: float, r: int) -> float:
    """Negative log-likelihood -[r log p + (1 - r) log(1 - p)]."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    return -(r * math.log(p) + (1 - r) * math.log1p(-p))


def loss(p: float, r: int, pred: dict, ref: dict, w: float = 1.0) -> float:
    """w * CE(p, r) + sum over s and the given levels of ||f_js - a_js||_2.

    ``pred`` and ``ref`` map level -> (2, 2^j) arrays; pass the lowest and
    highest levels only (j0 and j2).
    """
    if not w > 0:
        raise ValueError("weight must be positive")
    if set(pred) != set(ref):
        raise ValueError(f"level mismatch: {sorted(pred)} vs {sorted(ref)}")
    total = w * cross_entropy(p, r)
    for j in sorted(pred):
        total += float(l2_error(pred[j], ref[j]).sum())
    return total
