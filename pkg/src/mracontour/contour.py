"""Closed-contour handling: mask tracing, orientation, arc length, Fourier
coefficients, noise truncation, Green's-theorem centroid, start-point choice.

Polygons are ``(n, 2)`` float arrays of ``(x, y)`` points with pixel centres at
integer coordinates, ``x`` the column and ``y`` the row of the mask.  The last
point connects back to the first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


class ContourError(ValueError):
    pass


class RegionError(ContourError):
    pass


class DegenerateContourError(ContourError):
    pass


@dataclass
class FourierContour:
    """Half spectrum ``coeffs[s, m]``, m = 0 ... N-1, of an l-periodic planar curve.

    The curve is gamma_s(t) = sum_{|m| <= N-1} c_{s,m} exp(i omega m t) with
    omega = 2 pi / period and c_{s,-m} = conj(c_{s,m}).
    """

    coeffs: np.ndarray
    period: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != 2:
            raise ValueError(f"coeffs must have shape (2, N), got {self.coeffs.shape}")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def omega(self) -> float:
        return 2 * np.pi / self.period

    def full_spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(m, c)`` with m = 1-N ... N-1 and c of shape (2, 2N-1)."""
        c = self.coeffs
        full = np.concatenate([np.conj(c[:, :0:-1]), c], axis=1)
        return np.arange(1 - self.n, self.n), full

    def translated(self, v) -> "FourierContour":
        c = self.coeffs.copy()
        c[:, 0] += np.asarray(v, dtype=float)
        return FourierContour(c, self.period)

    def with_period(self, period: float) -> "FourierContour":
        """Same curve, time rescaled to the new period; coefficients unchanged."""
        return FourierContour(self.coeffs.copy(), period)


def as_polygon(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"polygon must have shape (n, 2), got {pts.shape}")
    if pts.shape[0] < 3:
        raise DegenerateContourError(f"polygon needs >= 3 points, got {pts.shape[0]}")
    return pts


def signed_area(poly) -> float:
    """Shoelace signed area; positive for anticlockwise order in the (x, y) frame."""
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def shoelace_centroid(poly) -> np.ndarray:
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if a == 0:
        raise DegenerateContourError("degenerate contour: zero area")
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6 * a)


def ensure_anticlockwise(poly) -> np.ndarray:
    p = as_polygon(poly)
    a = signed_area(p)
    scale = float(np.ptp(p, axis=0).max()) ** 2
    if scale == 0 or abs(a) <= 1e-12 * scale:
        raise DegenerateContourError("degenerate contour: zero signed area")
    return p[::-1].copy() if a < 0 else p.copy()


def arc_length(poly) -> float:
    p = np.asarray(poly, dtype=float)
    return float(np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1).sum())


def resample_arclength(poly, count: int, closed_endpoint: bool = False) -> np.ndarray:
    """``count`` points equispaced in arc length on [0, l), starting at poly[0]."""
    p = np.asarray(poly, dtype=float)
    closed = np.vstack([p, p[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    length = s[-1]
    if length <= 0:
        raise DegenerateContourError("degenerate contour: zero arc length")
    t = np.linspace(0.0, length, count, endpoint=closed_endpoint)
    return np.column_stack([np.interp(t, s, closed[:, 0]), np.interp(t, s, closed[:, 1])])


def fourier_coefficients(poly, n: int) -> FourierContour:
    """Fourier half-spectrum from 2n-1 arc-length-equispaced linear-interpolation samples."""
    if n < 2:
        raise ValueError("need at least two Fourier coefficients")
    p = as_polygon(poly)
    length = arc_length(p)
    if length <= 0 or np.ptp(p, axis=0).max() == 0:
        raise DegenerateContourError("degenerate contour: all points coincide")
    samples = resample_arclength(p, 2 * n - 1)
    spectrum = np.fft.fft(samples.T, axis=1) / (2 * n - 1)
    return FourierContour(spectrum[:, :n], length)


def eval_contour(fc: FourierContour, times) -> np.ndarray:
    """Evaluate the truncated series at ``times`` (same units as the period); shape (len, 2)."""
    t = np.atleast_1d(np.asarray(times, dtype=float))
    m = np.arange(1, fc.n)
    phase = np.exp(1j * fc.omega * np.multiply.outer(t, m))
    out = fc.coeffs[:, 0].real[None, :] + 2 * (phase @ fc.coeffs[:, 1:].T).real
    return out


def _cutoff(mags: np.ndarray, delta: float, residual: str) -> int:
    n = mags.size
    for m0 in range(1, n):
        y = np.cumsum(mags[m0:])
        if y.size <= 2:
            return m0
        x = np.arange(m0, n, dtype=float)
        xc = x - x.mean()
        slope = (xc @ (y - y.mean())) / (xc @ xc)
        r = y - y.mean() - slope * xc
        if residual == "rms":
            value = np.sqrt(np.mean(r**2))
        elif residual == "ssr":
            value = r @ r
        else:
            value = np.sqrt(r @ r)
        if value < delta:
            return m0
    return n - 1


def truncation_orders(fc: FourierContour, delta: float = 0.1, residual: str = "l2"):
    """Critical orders m0*(s) where the cumulative magnitude becomes linear."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if residual not in ("rms", "ssr", "l2"):
        raise ValueError("residual must be 'rms', 'ssr' or 'l2'")
    return tuple(_cutoff(np.abs(fc.coeffs[s]), delta, residual) for s in range(2))


def truncate_fourier(
    fc: FourierContour, delta: float = 0.1, residual: str = "l2"
) -> FourierContour:
    """Zero the coefficients beyond the per-component critical order m0*(s).

    For m0 = 1, 2, ... a least-squares line is fit through the partial sums
    (m, sum_{m0 <= k <= m} |c_k|); the first m0 whose fit residual is below
    ``delta`` is m0*.  ``residual`` selects how the fit residual vector is
    summarised: Euclidean norm (default), root-mean-square or sum of squares.
    """
    if fc.n < 3:
        return FourierContour(fc.coeffs.copy(), fc.period)
    orders = truncation_orders(fc, delta, residual)
    c = fc.coeffs.copy()
    for s, m0 in enumerate(orders):
        c[s, m0 + 1 :] = 0
    return FourierContour(c, fc.period)


def centroid(fc: FourierContour) -> np.ndarray:
    """Centroid of the enclosed region from Green's theorem on the Fourier series.

    c_s = (-1)^s (X * Y * G'_s)_0 / (X * Y')_0 with G'_m = i m omega G_m.
    """
    m, full = fc.full_spectrum()
    x, y = full
    deriv = 1j * m * fc.omega * full
    n = fc.n
    # (a*b)_0 for sequences on 1-N..N-1 is sum_m a_m b_{-m}
    den = np.sum(x * deriv[1][::-1])
    scale = np.abs(full).max() ** 2 * fc.omega
    if scale == 0 or abs(den) <= 1e-13 * scale:
        raise DegenerateContourError("degenerate region: zero enclosed area")
    xy = np.convolve(x, y)  # indices 2-2N ... 2N-2
    mid = xy[n - 1 : 3 * n - 2]  # indices 1-N ... N-1
    out = np.empty(2)
    for s in range(2):
        num = np.sum(mid * deriv[s][::-1])
        out[s] = ((-1) ** (s + 1) * num / den).real
    return out


def canonical_start(poly, c, angle: str = "arccos") -> np.ndarray:
    """Cyclically reorder so the first point makes the smallest angle with +x about ``c``.

    ``angle="arccos"`` uses arccos((y_k - c)_1 / |y_k - c|) (sign of the second
    coordinate ignored); ``"atan2"`` uses the anticlockwise angle in [0, 2 pi).
    Points coinciding with ``c`` are excluded; ties go to the smallest index.
    """
    p = as_polygon(poly)
    d = p - np.asarray(c, dtype=float)
    r = np.linalg.norm(d, axis=1)
    ok = r > 0
    if not ok.any():
        raise DegenerateContourError("degenerate contour: all points equal the centre")
    score = np.full(p.shape[0], np.inf)
    if angle == "arccos":
        score[ok] = np.arccos(np.clip(d[ok, 0] / r[ok], -1.0, 1.0))
    elif angle == "atan2":
        score[ok] = np.mod(np.arctan2(d[ok, 1], d[ok, 0]), 2 * np.pi)
    else:
        raise ValueError("angle must be 'arccos' or 'atan2'")
    k = int(np.argmin(score))
    return np.roll(p, -k, axis=0)


# ---------------------------------------------------------------- tracing

# cell edges: 0 top, 1 right, 2 bottom, 3 left; corners TL, TR, BR, BL
_EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))
_CORNER_EDGES = ((0, 3), (0, 1), (1, 2), (2, 3))


def _select_region(mask: np.ndarray, select_largest: bool) -> np.ndarray:
    labels, count = ndimage.label(mask)
    if count == 0:
        raise RegionError("no region: mask has no foreground pixels")
    if count > 1:
        if not select_largest:
            raise RegionError(f"ambiguous region: mask has {count} 4-connected regions")
        sizes = np.bincount(labels.ravel())[1:]
        keep = int(np.argmax(sizes)) + 1
        return labels == keep
    return labels == 1


def _edge_point(i: int, j: int, e: int) -> tuple[int, int]:
    # doubled padded (row, col) coordinates of the midpoint of edge e of cell (i, j)
    return ((2 * i, 2 * j + 1), (2 * i + 1, 2 * j + 2), (2 * i + 2, 2 * j + 1), (2 * i + 1, 2 * j))[e]


def _walk_loops(links: dict) -> list[list]:
    seen = set()
    loops = []
    for start in links:
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            a, b = links[cur]
            nxt = b if a == prev else a
            if nxt == start or nxt in seen:
                break
            loop.append(nxt)
            seen.add(nxt)
            prev, cur = cur, nxt
        loops.append(loop)
    return loops


def _marching_squares(region: np.ndarray) -> list[list]:
    v = np.pad(region.astype(np.int8), 1)
    tl, tr, br, bl = v[:-1, :-1], v[:-1, 1:], v[1:, 1:], v[1:, :-1]
    code = tl * 8 + tr * 4 + br * 2 + bl
    links: dict = {}

    def connect(p, q):
        links.setdefault(p, []).append(q)
        links.setdefault(q, []).append(p)

    for i, j in zip(*np.nonzero((code != 0) & (code != 15))):
        corners = (tl[i, j], tr[i, j], br[i, j], bl[i, j])
        if corners in ((1, 0, 1, 0), (0, 1, 0, 1)):
            # saddle: keep diagonal foreground pixels apart (4-connectivity)
            for c in range(4):
                if corners[c]:
                    e1, e2 = _CORNER_EDGES[c]
                    connect(_edge_point(i, j, e1), _edge_point(i, j, e2))
            continue
        crossing = [e for e, (c1, c2) in enumerate(_EDGE_CORNERS) if corners[c1] != corners[c2]]
        connect(_edge_point(i, j, crossing[0]), _edge_point(i, j, crossing[1]))
    return _walk_loops(links)


def _corner_trace(region: np.ndarray) -> list[list]:
    v = np.pad(region.astype(bool), 1)
    edges = []  # (vertex_a, vertex_b, owner) in doubled padded coordinates
    rows, cols = np.nonzero(v)
    for r, c in zip(rows, cols):
        r2, c2 = 2 * r, 2 * c
        if not v[r - 1, c]:
            edges.append(((r2 - 1, c2 - 1), (r2 - 1, c2 + 1), (r, c)))
        if not v[r, c + 1]:
            edges.append(((r2 - 1, c2 + 1), (r2 + 1, c2 + 1), (r, c)))
        if not v[r + 1, c]:
            edges.append(((r2 + 1, c2 + 1), (r2 + 1, c2 - 1), (r, c)))
        if not v[r, c - 1]:
            edges.append(((r2 + 1, c2 - 1), (r2 - 1, c2 - 1), (r, c)))
    at_vertex: dict = {}
    for k, (a, b, _) in enumerate(edges):
        at_vertex.setdefault(a, []).append(k)
        at_vertex.setdefault(b, []).append(k)
    # pair edges meeting at each vertex; at diagonal contacts pair by owner pixel
    partner: dict = {}
    for vert, ks in at_vertex.items():
        if len(ks) == 2:
            pairs = [ks]
        else:
            by_owner: dict = {}
            for k in ks:
                by_owner.setdefault(edges[k][2], []).append(k)
            pairs = list(by_owner.values())
        for k1, k2 in pairs:
            partner[(k1, vert)] = k2
            partner[(k2, vert)] = k1
    loops = []
    used = set()
    for k0 in range(len(edges)):
        if k0 in used:
            continue
        loop = []
        k, vert = k0, edges[k0][0]
        while k not in used:
            used.add(k)
            a, b, _ = edges[k]
            nxt_vert = b if vert == a else a
            loop.append(vert)
            k = partner[(k, nxt_vert)]
            vert = nxt_vert
        loops.append(loop)
    return loops


def trace_contour(mask, method: str = "marching", select_largest: bool = False) -> np.ndarray:
    """Outer boundary of the single 4-connected foreground region of ``mask``.

    ``method="marching"`` returns the 0.5 iso-contour of the bilinear
    interpolant (subpixel vertices on pixel-centre edges); ``"corners"``
    follows pixel corners.  With ``select_largest`` a multi-region mask
    falls back to its largest region instead of raising.
    """
    mask = np.asarray(mask) > 0
    if mask.ndim != 2:
        raise ValueError("mask must be two-dimensional")
    region = _select_region(mask, select_largest)
    if method == "marching":
        loops = _marching_squares(region)
    elif method == "corners":
        loops = _corner_trace(region)
    else:
        raise ValueError("method must be 'marching' or 'corners'")
    polys = []
    for loop in loops:
        arr = np.asarray(loop, dtype=float) / 2.0 - 1.0  # back to unpadded (row, col)
        polys.append(arr[:, ::-1].copy())  # (x, y) = (col, row)
    poly = max(polys, key=lambda q: abs(signed_area(q)))
    if poly.shape[0] < 3:
        raise DegenerateContourError("degenerate contour: fewer than 3 boundary points")
    return poly
