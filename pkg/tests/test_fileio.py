import json

import numpy as np
import pytest

from mracontour import fileio
from mracontour.contour import fourier_coefficients
from mracontour.groundtruth import GroundTruthRecord, PipelineConfig, build_record
from mracontour.toygen import sample_toy


def test_dumps_uses_17_digits():
    text = fileio.dumps({"a": 0.1, "b": [1, 2.0, True, None], "c": np.float64(1 / 3)})
    assert text == '{"a":0.10000000000000001,"b":[1,2.0,true,null],"c":0.33333333333333331}'
    assert json.loads(text)["c"] == 1 / 3
    with pytest.raises(ValueError):
        fileio.dumps(float("nan"))
    with pytest.raises(TypeError):
        fileio.dumps(object())


def test_float_round_trip():
    vals = np.random.default_rng(0).normal(size=200) * 10.0 ** np.arange(-100, 100)
    assert np.array_equal(np.array(json.loads(fileio.dumps(vals))), vals)


def test_pgm_round_trip(tmp_path):
    mask = np.random.default_rng(1).random((7, 11)) > 0.5
    path = tmp_path / "m.pgm"
    fileio.write_pgm(path, mask)
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n11 7\n255\n")
    assert set(raw[len(b"P5\n11 7\n255\n"):]) <= {0, 255}
    assert np.array_equal(fileio.read_pgm(path), mask)


def test_pgm_with_comment(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# made by hand\n2 1\n255\n\x00\xff")
    assert fileio.read_pgm(path).tolist() == [[False, True]]
    path.write_bytes(b"P2\n2 1\n255\n0 255")
    with pytest.raises(fileio.SchemaError, match="binary PGM"):
        fileio.read_pgm(path)


def test_dataset_round_trip_and_line_numbers(tmp_path):
    cfg = PipelineConfig()
    recs = [build_record(sample_toy((2, i)).polygon, cfg, (160.0, 160.0), f"r{i}") for i in range(2)]
    recs.append(GroundTruthRecord("empty", "db8", cfg.levels, presence=0))
    path = tmp_path / "d.jsonl"
    fileio.write_dataset(path, {"config": cfg.to_dict()}, recs)
    header, back = fileio.read_dataset(path)
    assert header["schema"] == fileio.SCHEMA
    assert [r.id for r in back] == ["r0", "r1", "empty"]
    assert np.array_equal(back[1].approx[8], recs[1].approx[8])
    assert back[2].presence == 0
    lines = path.read_text().splitlines()
    broken = json.loads(lines[2])
    broken["detail"]["4"]["s2"] = broken["detail"]["4"]["s2"][:3]
    lines[2] = json.dumps(broken)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(fileio.SchemaError, match=r"d\.jsonl:3: record 'r1'"):
        fileio.read_dataset(path)


def test_unknown_schema(tmp_path):
    path = tmp_path / "x.jsonl"
    path.write_text('{"schema": "other"}\n')
    with pytest.raises(fileio.SchemaError, match="unknown schema"):
        fileio.read_dataset(path)


def test_polygon_and_fourier_json():
    pts = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]])
    assert np.array_equal(fileio.polygon_from_json(fileio.polygon_to_json(pts)), pts)
    with pytest.raises(fileio.SchemaError):
        fileio.polygon_from_json({"points": [1, 2, 3]})
    doc = fileio.fourier_to_json(fourier_coefficients(pts, 3))
    assert sorted(doc) == ["coeffs", "period"] and len(doc["coeffs"]["s1"]) == 3
