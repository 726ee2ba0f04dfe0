"""File formats: 17-digit JSON, binary PGM masks and JSON-lines datasets."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .groundtruth import GroundTruthRecord

SCHEMA = "mracontour.groundtruth/1"


class SchemaError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, path, message: str, line: int | None = None):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


def _float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite float {x}")
    s = f"{x:.17g}"
    # keep floats recognisable as floats on reload
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj) -> str:
    """Compact deterministic JSON with every float written to 17 significant digits."""
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(path, f"invalid JSON ({exc.msg})", exc.lineno) from exc


def write_pgm(path, mask) -> None:
    """Binary P5 greymap, maxval 255, foreground 255."""
    m = np.asarray(mask, dtype=bool)
    header = f"P5\n{m.shape[1]} {m.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + (m.astype(np.uint8) * 255).tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a P5 greymap; pixels above half of maxval are foreground."""
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise SchemaError(path, "truncated PGM header")
        fields.append(data[start:pos])
    pos += 1
    if fields[0] != b"P5":
        raise SchemaError(path, f"not a binary PGM (magic {fields[0]!r})")
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval > 255:
        raise SchemaError(path, "16-bit PGM is not supported")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width) > maxval // 2


def write_dataset(path, header: dict, records) -> None:
    lines = [dumps({"schema": SCHEMA, **header})]
    lines += [dumps(r.to_dict()) for r in records]
    Path(path).write_text("\n".join(lines) + "\n")


def read_dataset(path) -> tuple[dict, list[GroundTruthRecord]]:
    """Load a JSON-lines dataset; schema violations name the line and record."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SchemaError(path, "empty dataset file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SchemaError(path, f"invalid header ({exc.msg})", 1) from exc
    if header.get("schema") != SCHEMA:
        raise SchemaError(path, f"unknown schema {header.get('schema')!r}", 1)
    records = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            records.append(GroundTruthRecord.from_dict(json.loads(line)))
        except (json.JSONDecodeError, ValueError) as exc:
            raise SchemaError(path, str(exc), n) from exc
    return header, records


def polygon_to_json(points) -> dict:
    return {"points": np.asarray(points, dtype=float).tolist()}


def polygon_from_json(obj, path="<polygon>") -> np.ndarray:
    try:
        pts = np.asarray(obj["points"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(path, f"expected {{'points': [[x, y], ...]}} ({exc})") from exc
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise SchemaError(path, f"points must be an (n, 2) list, got shape {pts.shape}")
    return pts


def fourier_to_json(fc) -> dict:
    return {
        "period": float(fc.period),
        "coeffs": {
            f"s{s + 1}": [[float(c.real), float(c.imag)] for c in fc.coeffs[s]] for s in range(2)
        },
    }
