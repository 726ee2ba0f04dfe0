"""Ground-truth construction: mask or polygon -> multi-level wavelet record,
plus the data-driven choice of the detail and top levels."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .contour import (
    ContourError,
    FourierContour,
    arc_length,
    canonical_start,
    centroid,
    ensure_anticlockwise,
    fourier_coefficients,
    trace_contour,
    truncate_fourier,
)
from .filters import FilterBank, make_filter_bank
from .initialization import InitConfig, default_j0, init_approx_coeffs
from .pyramid import (
    Decomposition,
    decompose_full,
    endpoint_gap,
    level_curve,
    reconstruct_schedule,
    threshold_details,
)


class RecordError(ValueError):
    """A record failed to build; carries the record id."""

    def __init__(self, record_id, cause: Exception):
        super().__init__(f"record {record_id!r}: {cause}")
        self.record_id = record_id
        self.cause = cause


class LevelSelectionError(ValueError):
    def __init__(self, message: str, maxima: dict):
        super().__init__(f"{message}; per-level maxima: {maxima}")
        self.maxima = maxima


@dataclass(frozen=True)
class PipelineConfig:
    wavelet: str = "db8"
    j0: int | None = None
    j1: int = 6
    j2: int = 8
    fourier_n: int = 64
    eps: float = 5e-3
    delta: float = 0.1
    trace_method: str = "marching"
    select_largest: bool = False
    start_angle: str = "arccos"
    residual: str = "l2"

    def __post_init__(self):
        j0 = self.resolved_j0
        if not j0 <= self.j1 <= self.j2:
            raise ValueError(f"levels must satisfy j0 <= j1 <= j2, got {(j0, self.j1, self.j2)}")
        if self.fourier_n < 2:
            raise ValueError("fourier_n must be >= 2")
        if self.eps < 0 or not self.delta > 0:
            raise ValueError("eps must be >= 0 and delta > 0")

    @property
    def bank(self) -> FilterBank:
        return make_filter_bank(self.wavelet)

    @property
    def resolved_j0(self) -> int:
        return default_j0(self.bank) if self.j0 is None else self.j0

    @property
    def levels(self) -> tuple[int, int, int]:
        return self.resolved_j0, self.j1, self.j2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["j0"] = self.resolved_j0
        return d


@dataclass
class GroundTruthRecord:
    id: str
    wavelet: str
    levels: tuple[int, int, int]
    presence: int
    arc_length: float = 0.0
    center_shift: tuple[float, float] = (0.0, 0.0)
    approx: dict[int, np.ndarray] = field(default_factory=dict)
    detail: dict[int, np.ndarray] = field(default_factory=dict)

    def validate(self) -> None:
        j0, j1, j2 = self.levels
        if not j0 <= j1 <= j2:
            raise ValueError(f"record {self.id}: bad levels {self.levels}")
        if self.presence == 0:
            if self.approx or self.detail:
                raise ValueError(f"record {self.id}: absent record carries coefficients")
            return
        if self.presence != 1:
            raise ValueError(f"record {self.id}: presence must be 0 or 1")
        for name, store, want in (
            ("approx", self.approx, range(j0, j2 + 1)),
            ("detail", self.detail, range(j0, j1)),
        ):
            if sorted(store) != list(want):
                raise ValueError(
                    f"record {self.id}: {name} levels {sorted(store)} != {list(want)}"
                )
            for j, arr in store.items():
                if np.shape(arr) != (2, 2**j):
                    raise ValueError(
                        f"record {self.id}: {name} level {j} has shape {np.shape(arr)}, "
                        f"expected (2, {2**j})"
                    )

    def to_dict(self) -> dict:
        def pack(store):
            return {str(j): {"s1": a[0].tolist(), "s2": a[1].tolist()} for j, a in sorted(store.items())}

        return {
            "id": self.id,
            "wavelet": self.wavelet,
            "levels": list(self.levels),
            "presence": self.presence,
            "arc_length": float(self.arc_length),
            "center_shift": [float(v) for v in self.center_shift],
            "approx": pack(self.approx),
            "detail": pack(self.detail),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthRecord":
        def unpack(store):
            return {int(j): np.array([v["s1"], v["s2"]], dtype=float) for j, v in store.items()}

        try:
            rec = cls(
                id=str(d["id"]),
                wavelet=str(d["wavelet"]),
                levels=tuple(int(v) for v in d["levels"]),
                presence=int(d["presence"]),
                arc_length=float(d.get("arc_length", 0.0)),
                center_shift=tuple(float(v) for v in d.get("center_shift", (0.0, 0.0))),
                approx=unpack(d.get("approx", {})),
                detail=unpack(d.get("detail", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"record {d.get('id', '?')!r}: malformed ({exc})") from exc
        rec.validate()
        return rec

    def curve_offset(self) -> np.ndarray:
        return np.asarray(self.center_shift, dtype=float)


def _is_polygon(source) -> bool:
    arr = np.asarray(source)
    return arr.ndim == 2 and arr.shape[1] == 2 and arr.dtype.kind == "f"


def canonical_fourier(source, cfg: PipelineConfig) -> FourierContour | None:
    """Trace, orient, find the centroid, fix the start point; None for an empty mask.

    The returned series has the arc-length period and is not centred.
    """
    if _is_polygon(source):
        poly = np.asarray(source, dtype=float)
    else:
        mask = np.asarray(source) > 0
        if not mask.any():
            return None
        poly = trace_contour(mask, cfg.trace_method, cfg.select_largest)
    poly = ensure_anticlockwise(poly)
    fc = truncate_fourier(fourier_coefficients(poly, cfg.fourier_n), cfg.delta, cfg.residual)
    c = centroid(fc)
    poly = canonical_start(poly, c, cfg.start_angle)
    return truncate_fourier(fourier_coefficients(poly, cfg.fourier_n), cfg.delta, cfg.residual)


def average_midpoint(contours, cfg: PipelineConfig | None = None) -> np.ndarray:
    """Mean Green's-theorem centroid over the non-empty contours (masks or polygons)."""
    cfg = cfg or PipelineConfig()
    centres = []
    for src in contours:
        fc = src if isinstance(src, FourierContour) else canonical_fourier(src, cfg)
        if fc is not None:
            centres.append(centroid(fc))
    if not centres:
        raise ValueError("average_midpoint needs at least one non-empty contour")
    return np.mean(centres, axis=0)


def top_coefficients(fc: FourierContour, bank: FilterBank, level: int, center=(0.0, 0.0)) -> np.ndarray:
    """Centre, rescale to period 1 and initialise at ``level``."""
    unit = fc.translated(-np.asarray(center, dtype=float)).with_period(1.0)
    return init_approx_coeffs(unit, bank, InitConfig(level=level))


def schedule_from_top(a_top: np.ndarray, bank: FilterBank, levels, eps: float) -> Decomposition:
    """Decompose to j0, threshold details j0..j1-1 and rebuild j0..j2."""
    j0, j1, j2 = levels
    full = decompose_full(a_top, j0, bank)
    dec = Decomposition(j0, j1, j2)
    dec.approx[j0] = full.approx[j0]
    for j in range(j0, j1):
        dec.detail[j] = threshold_details(full.detail[j], eps)
    dec.approx.update(reconstruct_schedule(dec, bank))
    return dec


def build_record(source, cfg: PipelineConfig, center=(0.0, 0.0), record_id: str = "") -> GroundTruthRecord:
    """Run the full pipeline on a binary mask or an ``(n, 2)`` float polygon."""
    levels = cfg.levels
    try:
        fc = canonical_fourier(source, cfg)
        if fc is None:
            return GroundTruthRecord(record_id, cfg.wavelet, levels, presence=0)
        bank = cfg.bank
        a_top = top_coefficients(fc, bank, cfg.j2, center)
        dec = schedule_from_top(a_top, bank, levels, cfg.eps)
    except (ContourError, ArithmeticError, ValueError) as exc:
        raise RecordError(record_id, exc) from exc
    return GroundTruthRecord(
        id=record_id,
        wavelet=bank.name,
        levels=levels,
        presence=1,
        arc_length=fc.period,
        center_shift=tuple(float(v) for v in center),
        approx=dec.approx,
        detail=dec.detail,
    )


@dataclass
class LevelSelection:
    j1: int
    j2: int
    detail_max: dict[int, float]
    gap_max: dict[int, float]


def select_levels(
    tops,
    bank: FilterBank,
    j0: int | None = None,
    eps: float = 5e-3,
    pixel_tol: float = 1.0,
) -> LevelSelection:
    """Choose (j1, j2) from training coefficients initialised at a generous level J.

    j1 is the smallest level above j0 from which every detail coefficient of
    every sample is below ``eps``; j2 >= j1 is the smallest level whose
    reconstructed curves all have endpoint gap <= ``pixel_tol``.
    """
    tops = [np.asarray(t, dtype=float) for t in tops]
    if not tops:
        raise ValueError("select_levels needs at least one sample")
    top = tops[0].shape[-1].bit_length() - 1
    j0 = default_j0(bank) if j0 is None else j0
    detail_max = {j: 0.0 for j in range(j0, top)}
    decs = []
    for a in tops:
        dec = decompose_full(a, j0, bank)
        decs.append(dec)
        for j in detail_max:
            detail_max[j] = max(detail_max[j], float(np.abs(dec.detail[j]).max()))
    # j1 must have observed details of its own, so candidates stop below the top level
    j1 = next(
        (j for j in range(j0 + 1, top) if all(detail_max[l] < eps for l in range(j, top))),
        None,
    )
    if j1 is None:
        raise LevelSelectionError(f"no j1 in {j0 + 1}..{top - 1} with details below {eps}", detail_max)
    gap_max = {j: 0.0 for j in range(j1, top + 1)}
    for dec in decs:
        dec.j1 = j1
        for j in range(j0, j1):
            dec.detail[j] = threshold_details(dec.detail[j], eps)
        rebuilt = reconstruct_schedule(dec, bank)
        for j in gap_max:
            gap_max[j] = max(gap_max[j], endpoint_gap(rebuilt[j], bank))
    j2 = next((j for j in gap_max if gap_max[j] <= pixel_tol), None)
    if j2 is None:
        raise LevelSelectionError(f"no j2 in {j1}..{top} with endpoint gap <= {pixel_tol}", gap_max)
    return LevelSelection(j1, j2, detail_max, gap_max)


def record_curve(rec: GroundTruthRecord, level: int | None = None, refine: int = 2) -> np.ndarray:
    """Image-space points of a record's level curve (top level by default)."""
    if rec.presence == 0:
        raise ValueError(f"record {rec.id!r} has no contour")
    level = rec.levels[2] if level is None else level
    _, pts = level_curve(rec.approx[level], make_filter_bank(rec.wavelet), refine)
    return pts + rec.curve_offset()
