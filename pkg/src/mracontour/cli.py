"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import fileio
from .contour import ContourError, centroid
from .filters import make_filter_bank
from .groundtruth import (
    PipelineConfig,
    RecordError,
    build_record,
    canonical_fourier,
    record_curve,
)
from .metrics import MetricReport, dice, hausdorff, l2_error
from .pyramid import (
    Decomposition,
    decompose_full,
    reconstruct_schedule,
    reconstruct_step,
    threshold_details,
)
from .toygen import sample_toy

log = logging.getLogger("mracontour")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
ROUNDTRIP_TOL = 1e-8


class ValidationFailure(Exception):
    """Raised by a subcommand to request exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _levels(text: str) -> tuple[int, int, int]:
    try:
        j0, j1, j2 = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected j0,j1,j2, got {text!r}") from None
    return j0, j1, j2


def _center(text: str):
    if text == "auto":
        return "auto"
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or x,y, got {text!r}") from None
    return (x, y)


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _workers(n: int | None) -> int:
    return max(1, n if n else (os.cpu_count() or 1))


def _parallel_map(fn, items, workers: int):
    """Order-preserving map; serial when one worker suffices."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _coeff_block(a: np.ndarray) -> dict:
    return {"s1": a[0], "s2": a[1]}


def _read_coeff_block(obj, path) -> np.ndarray:
    try:
        arr = np.array([obj["s1"], obj["s2"]], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise fileio.SchemaError(path, f"expected {{'s1': [...], 's2': [...]}} ({exc})") from exc
    n = arr.shape[-1]
    if arr.ndim != 2 or n < 1 or n & (n - 1):
        raise fileio.SchemaError(path, f"coefficient vectors must have power-of-two length, got {n}")
    return arr


# ---------------------------------------------------------------- filters


def cmd_filters(args) -> int:
    bank = make_filter_bank(args.wavelet)
    out = sys.stdout
    blocks = {"h": (0, bank.h), "g": (bank.g_start, bank.g)}
    for name in ("h", "g") if args.filter == "both" else (args.filter,):
        start, values = blocks[name]
        if args.filter == "both":
            out.write(f"# {name}\n")
        out.write("index,value\n")
        for k, v in enumerate(values, start=start):
            out.write(f"{k},{v:.17g}\n")
    return EXIT_OK


# ---------------------------------------------------------------- gen-toy


def cmd_gen_toy(args) -> int:
    out = Path(args.out)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    (out / "polygons").mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(args.count):
        s = sample_toy((args.seed, i), literal=args.literal)
        sid = f"toy_{i:05d}"
        mask_rel = f"masks/{sid}.pgm"
        poly_rel = f"polygons/{sid}.json"
        fileio.write_pgm(out / mask_rel, s.mask)
        fileio.write_json(out / poly_rel, fileio.polygon_to_json(s.polygon))
        entries.append(
            {
                "id": sid,
                "r1": s.r1,
                "theta": s.theta,
                "q": list(s.q),
                "kappa": s.kappa,
                "rejections": s.rejections,
                "mask": mask_rel,
                "polygon": poly_rel,
            }
        )
    manifest = {"generator": "hypocycloid", "seed": args.seed, "count": args.count,
                "literal": bool(args.literal), "samples": entries}
    fileio.write_json(out / "manifest.json", manifest)
    log.info("wrote %d samples to %s", args.count, out)
    return EXIT_OK


# ---------------------------------------------------------------- build-gt


def _load_sources(args) -> list[tuple[str, object]]:
    """(id, mask-or-polygon) pairs from a manifest or explicit files."""
    sources = []
    if args.manifest:
        mpath = Path(args.manifest)
        manifest = fileio.read_json(mpath)
        try:
            entries = manifest["samples"]
        except (KeyError, TypeError):
            raise fileio.SchemaError(mpath, "manifest has no 'samples' list") from None
        for e in entries:
            rel = e.get(args.source)
            if rel is None:
                raise fileio.SchemaError(mpath, f"sample {e.get('id')!r} has no {args.source!r} entry")
            sources.append((str(e["id"]), mpath.parent / rel))
    for f in args.inputs or []:
        sources.append((Path(f).stem, Path(f)))
    loaded = []
    for sid, path in sources:
        if path.suffix.lower() == ".pgm":
            loaded.append((sid, fileio.read_pgm(path)))
        else:
            loaded.append((sid, fileio.polygon_from_json(fileio.read_json(path), path)))
    return loaded


def _build_one(job):
    sid, source, cfg, center = job
    try:
        return build_record(source, cfg, center, sid), None
    except RecordError as exc:
        return None, str(exc)


def _midpoint_one(job):
    source, cfg = job
    try:
        fc = canonical_fourier(source, cfg)
    except (ContourError, ArithmeticError, ValueError):
        return None
    return None if fc is None else centroid(fc)


def cmd_build_gt(args) -> int:
    j0, j1, j2 = args.levels
    try:
        cfg = PipelineConfig(
            wavelet=args.wavelet, j0=j0, j1=j1, j2=j2, fourier_n=args.fourier_n,
            eps=args.eps, delta=args.delta, trace_method=args.trace,
            select_largest=args.select_largest, residual=args.residual,
        )
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    sources = _load_sources(args)
    workers = _workers(args.workers)
    if args.center == "auto":
        centres = _parallel_map(_midpoint_one, [(s, cfg) for _, s in sources], workers)
        centres = [c for c in centres if c is not None]
        if not centres:
            raise ValidationFailure("--center auto needs at least one non-empty contour")
        center = tuple(float(v) for v in np.mean(centres, axis=0))
    else:
        center = args.center
    results = _parallel_map(_build_one, [(sid, s, cfg, center) for sid, s in sources], workers)
    records, failures = [], []
    for (sid, _), (rec, err) in zip(sources, results):
        if rec is None:
            log.error("skipping %s", err)
            failures.append(sid)
        else:
            records.append(rec)
    records.sort(key=lambda r: r.id)
    header = {"config": cfg.to_dict(), "center": list(center), "count": len(records),
              "failed": failures}
    fileio.write_dataset(args.out, header, records)
    log.info("wrote %d records (%d failed) to %s", len(records), len(failures), args.out)
    if failures and args.strict:
        return EXIT_INVALID
    return EXIT_OK


# ---------------------------------------------------------------- decompose / reconstruct


def cmd_decompose(args) -> int:
    obj = fileio.read_json(args.input)
    a = _read_coeff_block(obj, args.input)
    wavelet = args.wavelet or obj.get("wavelet", "db8")
    bank = make_filter_bank(wavelet)
    j2 = a.shape[-1].bit_length() - 1
    if not 0 <= args.j0 <= j2:
        raise ValidationFailure(f"--j0 must lie in 0..{j2}")
    dec = decompose_full(a, args.j0, bank)
    if args.eps:
        dec.detail = {j: threshold_details(d, args.eps) for j, d in dec.detail.items()}
    out = {
        "wavelet": bank.name,
        "j0": dec.j0,
        "j2": dec.j2,
        "approx": {str(dec.j0): _coeff_block(dec.approx[dec.j0])},
        "detail": {str(j): _coeff_block(d) for j, d in sorted(dec.detail.items())},
    }
    fileio.write_json(args.out, out)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    obj = fileio.read_json(args.input)
    try:
        wavelet = args.wavelet or obj["wavelet"]
        j0, j2 = int(obj["j0"]), int(obj["j2"])
        a0 = _read_coeff_block(obj["approx"][str(j0)], args.input)
        detail = {int(j): _read_coeff_block(v, args.input) for j, v in obj.get("detail", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, fileio.SchemaError):
            raise
        raise fileio.SchemaError(args.input, f"malformed decomposition ({exc})") from exc
    bank = make_filter_bank(wavelet)
    j1 = args.j1 if args.j1 is not None else (max(detail) + 1 if detail else j0)
    dec = Decomposition(j0, j1, j2, approx={j0: a0}, detail=detail)
    try:
        approx = reconstruct_schedule(dec, bank)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    out = {"wavelet": bank.name, "level": j2, **_coeff_block(approx[j2])}
    if args.all_levels:
        out["approx"] = {str(j): _coeff_block(a) for j, a in sorted(approx.items())}
    fileio.write_json(args.out, out)
    return EXIT_OK


# ---------------------------------------------------------------- roundtrip


def roundtrip_metrics(rec) -> tuple[float, float, float]:
    """(transform residual, schedule residual, relative Parseval defect) of a record.

    The transform residual is the max error of decomposing the stored top
    level to j0 and rebuilding with every detail.  The schedule residual
    compares the stored approximations with a rebuild from the stored level-j0
    approximation and thresholded details.  The Parseval defect is
    | |a_j2|^2 - |a_j0|^2 - sum |d_j|^2 | / |a_j2|^2 over the stored record.
    """
    bank = make_filter_bank(rec.wavelet)
    j0, j1, j2 = rec.levels
    top = rec.approx[j2]
    full = decompose_full(top, j0, bank)
    a = full.approx[j0]
    for j in range(j0, j2):
        a = reconstruct_step(a, full.detail[j], bank)
    transform = float(np.abs(a - top).max())
    dec = Decomposition(j0, j1, j2, approx={j0: rec.approx[j0]}, detail=dict(rec.detail))
    rebuilt = reconstruct_schedule(dec, bank)
    schedule = max(float(np.abs(rebuilt[j] - rec.approx[j]).max()) for j in rebuilt)
    energy = float(np.sum(top**2))
    split = float(np.sum(rec.approx[j0] ** 2)) + sum(float(np.sum(d**2)) for d in rec.detail.values())
    parseval = abs(energy - split) / energy if energy > 0 else abs(split)
    return transform, schedule, parseval


def cmd_roundtrip(args) -> int:
    _, records = fileio.read_dataset(args.dataset)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "transform_residual", "schedule_residual", "parseval_defect"])
    bad = []
    for rec in records:
        if rec.presence == 0:
            continue
        t, s, p = roundtrip_metrics(rec)
        w.writerow([rec.id, f"{t:.17g}", f"{s:.17g}", f"{p:.17g}"])
        if max(t, s, p) > ROUNDTRIP_TOL:
            bad.append(rec.id)
    _emit(buf.getvalue(), args.out)
    if bad:
        log.error("%d records exceed %g: %s", len(bad), ROUNDTRIP_TOL, ", ".join(bad))
        return EXIT_INVALID
    return EXIT_OK


# ---------------------------------------------------------------- eval / plot-data


def _paired_records(pred_path, ref_path):
    _, pred = fileio.read_dataset(pred_path)
    _, ref = fileio.read_dataset(ref_path)
    pmap = {r.id: r for r in pred}
    rmap = {r.id: r for r in ref}
    only_p = sorted(set(pmap) - set(rmap))
    only_r = sorted(set(rmap) - set(pmap))
    if only_p or only_r:
        raise ValidationFailure(
            f"record ids differ; only in pred: {only_p or '-'}; only in ref: {only_r or '-'}"
        )
    return [(pmap[i], rmap[i]) for i in sorted(pmap)]


def evaluate_pair(job) -> MetricReport:
    pred, ref, samples, supersample = job
    if pred.presence == 0 or ref.presence == 0:
        hit = float(pred.presence == ref.presence)
        return MetricReport(hit, 0.0, 0.0, 0.0)
    if pred.levels[2] != ref.levels[2]:
        raise ValidationFailure(f"record {pred.id!r}: top levels differ")
    cp, cr = record_curve(pred), record_curve(ref)
    n = max(samples, len(cp), len(cr))
    # a constant offset v adds 2^(-j/2) v to every level-j coefficient
    j = pred.levels[2]
    scale = 2.0 ** (-j / 2)
    err = l2_error(
        pred.approx[j] + scale * pred.curve_offset()[:, None],
        ref.approx[j] + scale * ref.curve_offset()[:, None],
    )
    return MetricReport(
        dice(cp, cr, supersample), hausdorff(cp, cr, n), float(err[0]), float(err[1])
    )


def cmd_eval(args) -> int:
    pairs = _paired_records(args.pred, args.ref)
    jobs = [(p, r, args.samples, args.supersample) for p, r in pairs]
    reports = _parallel_map(evaluate_pair, jobs, _workers(args.workers))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "dice", "hausdorff", "l2_s1", "l2_s2"])
    cols = ("dice", "hausdorff", "l2_s1", "l2_s2")
    for (p, _), rep in zip(pairs, reports):
        w.writerow([p.id] + [f"{getattr(rep, c):.17g}" for c in cols])
    if reports:
        table = np.array([[getattr(r, c) for c in cols] for r in reports])
        w.writerow(["mean"] + [f"{v:.17g}" for v in table.mean(axis=0)])
        w.writerow(["std"] + [f"{v:.17g}" for v in table.std(axis=0)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_plot_data(args) -> int:
    pairs = _paired_records(args.pred, args.ref)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for p, r in pairs:
        doc = {"id": p.id}
        for key, rec in (("reference", r), ("candidate", p)):
            doc[key] = record_curve(rec, refine=args.refine) if rec.presence else []
        fileio.write_json(out / f"{p.id}.json", doc)
    return EXIT_OK


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mracontour", description="Wavelet multiresolution contours.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("filters", help="print Daubechies filter coefficients as CSV")
    p.add_argument("--wavelet", default="db8")
    p.add_argument("--filter", choices=("h", "g", "both"), default="both")
    p.set_defaults(func=cmd_filters)

    p = sub.add_parser("gen-toy", help="generate the hypocycloid toy dataset")
    p.add_argument("--count", type=_nonneg_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--literal", action="store_true", help="scale the shift by kappa as well")
    p.set_defaults(func=cmd_gen_toy)

    p = sub.add_parser("build-gt", help="build multi-level ground-truth records")
    p.add_argument("--manifest", help="gen-toy manifest")
    p.add_argument("--source", choices=("polygon", "mask"), default="polygon",
                   help="manifest entry to read per sample")
    p.add_argument("inputs", nargs="*", help="extra .pgm masks or polygon .json files")
    p.add_argument("--wavelet", default="db8")
    p.add_argument("--levels", type=_levels, default=(None, 6, 8), metavar="J0,J1,J2")
    p.add_argument("--fourier-n", type=int, default=64)
    p.add_argument("--eps", type=float, default=5e-3)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--residual", choices=("l2", "rms", "ssr"), default="l2")
    p.add_argument("--trace", choices=("marching", "corners"), default="marching")
    p.add_argument("--select-largest", action="store_true")
    p.add_argument("--center", type=_center, default="auto", metavar="auto|X,Y")
    p.add_argument("--strict", action="store_true", help="exit 1 if any record fails")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_gt)

    p = sub.add_parser("decompose", help="pyramid decomposition of a coefficient file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--j0", type=int, required=True)
    p.add_argument("--wavelet")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="rebuild approximations from a decomposition file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--j1", type=int, default=None, help="use no details above this level")
    p.add_argument("--wavelet")
    p.add_argument("--all-levels", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("roundtrip", help="check reconstruction invariants of a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_roundtrip)

    for name, func, help_ in (
        ("eval", cmd_eval, "per-record Dice, Hausdorff and coefficient errors"),
        ("plot-data", cmd_plot_data, "sampled reference and candidate curves"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--pred", required=True)
        p.add_argument("--ref", required=True)
        p.add_argument("--out", required=name == "plot-data", default="-")
        if name == "eval":
            p.add_argument("--samples", type=int, default=1024)
            p.add_argument("--supersample", type=int, default=4)
            p.add_argument("--workers", type=int, default=None)
        else:
            p.add_argument("--refine", type=int, default=2)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    if args.command == "build-gt" and not (args.manifest or args.inputs):
        parser.error("build-gt needs --manifest or input files")
    try:
        return args.func(args)
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (ValidationFailure, ContourError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
