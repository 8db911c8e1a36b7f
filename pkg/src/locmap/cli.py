"""Command-line front end.

Subcommands: fixtures, enhance, eval-maps, eval-boxes, gen-edges, fit-edges,
eval-edges, sweep-k, report.  Exit code 0 on success, 1 on validation
errors, 2 on I/O errors.  --jobs sizes the per-image pool (env LOCMAP_JOBS
is the fallback) and never changes numeric output.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import pipeline, report
from .errors import InvalidArgument, InvalidInput, LocmapError
from .manifest import load_manifest
from .npyfmt import write_array
from .fixtures import gen_fixtures
from .sem import DEFAULT_K


def _jobs_default() -> int:
    env = os.environ.get("LOCMAP_JOBS", "")
    return int(env) if env.isdigit() and int(env) >= 1 else 1


def _add_jobs(parser):
    parser.add_argument("--jobs", type=int, default=_jobs_default(), help="worker pool size")


def _add_source(parser):
    parser.add_argument("--source", choices=("cam", "sem"), default="cam")
    parser.add_argument("--k", type=int, default=DEFAULT_K, help="number of enhancement seeds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locmap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixtures", help="generate a synthetic dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-images", type=int, required=True)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--channels", type=int, default=8)
    p.add_argument("--num-classes", type=int, default=5)
    _add_jobs(p)

    p = sub.add_parser("enhance", help="write enhanced maps plus a derived manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--out-dir", required=True)
    _add_jobs(p)

    p = sub.add_parser("eval-maps", help="IoU-Threshold / PR / AP report")
    p.add_argument("--manifest", required=True)
    _add_source(p)
    p.add_argument("--iou-mode", choices=("macro", "micro"), default="macro")
    p.add_argument("--out", required=True, help="report JSON path (CSV/SVG siblings)")
    _add_jobs(p)

    p = sub.add_parser("eval-boxes", help="legacy box accuracy report")
    p.add_argument("--manifest", required=True)
    _add_source(p)
    p.add_argument("--box-threshold", type=float, default=0.2)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    p.add_argument("--sweep", action="store_true", help="also sweep box thresholds 0.05..0.95")
    p.add_argument("--out", required=True)
    _add_jobs(p)

    p = sub.add_parser("gen-edges", help="write pseudo-boundaries plus a derived manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--out-dir", required=True)
    _add_jobs(p)

    p = sub.add_parser("fit-edges", help="fit the toy boundary predictor")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("vanilla", "hns"), default="hns")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--out", required=True, help="predictor array file")
    _add_jobs(p)

    p = sub.add_parser("eval-edges", help="ODS/OIS/AP edge benchmark")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--tol", type=float, default=0.0075)
    p.add_argument("--out", required=True)
    _add_jobs(p)

    p = sub.add_parser("sweep-k", help="per-K Gt-known accuracy and Peak-IoU table")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k-values", required=True, help="comma-separated, e.g. 1,20,40,60,80,100")
    p.add_argument("--box-threshold", type=float, default=0.2)
    p.add_argument("--out", required=True, help="CSV path")
    _add_jobs(p)

    p = sub.add_parser("report", help="re-emit CSV and SVG from a report JSON")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-prefix", required=True)
    _add_jobs(p)
    return parser


def _validate(args) -> None:
    if args.jobs < 1:
        raise InvalidArgument(f"--jobs must be >= 1, got {args.jobs}")
    k = getattr(args, "k", None)
    if k is not None and k < 1:
        raise InvalidArgument(f"--k must be >= 1, got {k}")
    thr = getattr(args, "box_threshold", None)
    if thr is not None and not 0.0 < thr < 1.0:
        raise InvalidArgument(f"--box-threshold must be in (0, 1), got {thr}")
    tol = getattr(args, "tol", None)
    if tol is not None and not 0.0 < tol < 1.0:
        raise InvalidArgument(f"--tol must be in (0, 1), got {tol}")
    steps = getattr(args, "steps", None)
    if steps is not None and steps < 0:
        raise InvalidArgument(f"--steps must be >= 0, got {steps}")
    seed = getattr(args, "seed", None)
    if seed is not None and seed < 0:
        raise InvalidArgument(f"--seed must be >= 0, got {seed}")
    n = getattr(args, "n_images", None)
    if n is not None and n < 1:
        raise InvalidArgument(f"--n-images must be >= 1, got {n}")


def _parse_k_values(text: str) -> list[int]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise InvalidArgument("--k-values must list at least one K")
    try:
        values = [int(s) for s in items]
    except ValueError as exc:
        raise InvalidArgument(f"--k-values: {exc}") from None
    if any(v < 1 for v in values):
        raise InvalidArgument("--k-values entries must be >= 1")
    return values


_BOX_SWEEP_GRID = [round(0.05 * i, 2) for i in range(1, 20)]


def _cmd_fixtures(args) -> int:
    path = gen_fixtures(
        args.seed, args.out_dir, args.n_images, args.size, args.channels, args.num_classes
    )
    print(path)
    return 0


def _cmd_enhance(args) -> int:
    manifest = load_manifest(args.manifest)
    path = pipeline.enhance_dataset(manifest, args.k, args.out_dir, jobs=args.jobs)
    print(path)
    return 0


def _cmd_eval_maps(args) -> int:
    manifest = load_manifest(args.manifest)
    curve = pipeline.evaluate_maps(
        manifest, args.source, args.k, jobs=args.jobs, micro=args.iou_mode == "micro"
    )
    config = {
        "subcommand": "eval-maps",
        "manifest": args.manifest,
        "source": args.source,
        "k": args.k,
        "iou_mode": args.iou_mode,
    }
    doc = report.map_report(config, curve)
    out = Path(args.out)
    report.write_json(doc, out)
    report.write_curve_csv(doc, out.with_suffix(".csv"))
    report.write_map_plots(doc, out)
    print(f"peak_iou={curve.peak_iou:.4f} peak_t={curve.peak_t} ap={curve.ap:.4f}")
    return 0


def _cmd_eval_boxes(args) -> int:
    manifest = load_manifest(args.manifest)
    accs = pipeline.evaluate_boxes(
        manifest, args.source, args.k, args.box_threshold, args.connectivity, jobs=args.jobs
    )
    sweep_rows = None
    if args.sweep:
        sweep_rows = []
        for thr in _BOX_SWEEP_GRID:
            row = pipeline.evaluate_boxes(
                manifest, args.source, args.k, thr, args.connectivity, jobs=args.jobs
            )
            sweep_rows.append({"box_threshold": thr, **{k: float(v) for k, v in row.items()}})
    config = {
        "subcommand": "eval-boxes",
        "manifest": args.manifest,
        "source": args.source,
        "k": args.k,
        "box_threshold": args.box_threshold,
        "connectivity": args.connectivity,
    }
    report.write_json(report.box_report(config, accs, sweep_rows), args.out)
    line = " ".join(f"{k}={v:.4f}" for k, v in sorted(accs.items()))
    print(line)
    return 0


def _cmd_gen_edges(args) -> int:
    manifest = load_manifest(args.manifest)
    path = pipeline.gen_edges(manifest, args.k, args.out_dir, jobs=args.jobs)
    print(path)
    return 0


def _cmd_fit_edges(args) -> int:
    manifest = load_manifest(args.manifest)
    result = pipeline.fit_edges(manifest, args.mode, lam=args.lam, steps=args.steps, lr=args.lr)
    predictor = np.concatenate([result.weights, [result.bias]]).reshape(1, -1)
    write_array(args.out, predictor.astype(np.float32))
    print(
        f"precision={result.precision:.4f} recall={result.recall:.4f} "
        f"hard_negative_score={result.hard_negative_score:.6f}"
    )
    return 0


def _cmd_eval_edges(args) -> int:
    result = pipeline.eval_edges(args.pred_dir, args.gt_dir, args.tol)
    config = {
        "subcommand": "eval-edges",
        "pred_dir": args.pred_dir,
        "gt_dir": args.gt_dir,
        "tol": args.tol,
    }
    doc = report.edge_report(config, result)
    out = Path(args.out)
    report.write_json(doc, out)
    report.write_curve_csv(doc, out.with_suffix(".csv"))
    report.write_edge_plots(doc, out)
    print(f"ods={result.ods:.4f} ois={result.ois:.4f} ap={result.ap:.4f}")
    return 0


def _cmd_sweep_k(args) -> int:
    manifest = load_manifest(args.manifest)
    rows = pipeline.k_sweep(manifest, _parse_k_values(args.k_values), args.box_threshold, args.jobs)
    report.write_sweep_csv(rows, args.out)
    for row in rows:
        print(f"k={row['k']} gtknown_acc={row['gtknown_acc']:.4f} peak_iou={row['peak_iou']:.4f}")
    return 0


def _cmd_report(args) -> int:
    import json

    doc = json.loads(Path(args.infile).read_text())
    if "curve" not in doc:
        raise InvalidInput(f"{args.infile}: no curve section to plot")
    base = Path(args.out_prefix).with_suffix(".json")
    report.write_curve_csv(doc, base.with_suffix(".csv"))
    if "mean_iou" in doc["curve"]:
        report.write_map_plots(doc, base)
    else:
        report.write_edge_plots(doc, base)
    print(base.with_suffix(".csv"))
    return 0


_COMMANDS = {
    "fixtures": _cmd_fixtures,
    "enhance": _cmd_enhance,
    "eval-maps": _cmd_eval_maps,
    "eval-boxes": _cmd_eval_boxes,
    "gen-edges": _cmd_gen_edges,
    "fit-edges": _cmd_fit_edges,
    "eval-edges": _cmd_eval_edges,
    "sweep-k": _cmd_sweep_k,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        return _COMMANDS[args.command](args)
    except LocmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
