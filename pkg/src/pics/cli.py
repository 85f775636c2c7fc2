"""Batch command-line front end.

Subcommands: segment2d, segment3d, eval, make-fixture. All commands are
deterministic given identical inputs and flags. The env var PICS_THREADS
caps the number of parallel finite-difference probes.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fixtures
from .energy import Hyperparameters
from .errors import PicsError
from .image_io import (
    AnnotationRecord,
    builtin_presets,
    export_annotation,
    import_annotation,
    load_gray,
    load_mask,
    load_stack,
    save_gray,
    save_mask,
)
from .optim import optimize
from .raster import image_gradient
from .volume import ImageStack, contour_mask, init_from_click, iou, segment_volume

TRACE_COLUMNS = ["iteration", "j_int", "j_ext", "j_shape", "j_total", "opi", "mu"]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in trace.records:
            b = r.breakdown
            writer.writerow([r.iteration, _fmt(b.j_int), _fmt(b.j_ext),
                             _fmt(b.j_shape), _fmt(b.j_total),
                             "" if np.isnan(r.opi) else _fmt(r.opi), _fmt(r.mu)])


def _parse_click(spec: str):
    parts = [float(p) for p in spec.split(",")]
    if len(parts) < 2 or len(parts) > 4:
        raise ValueError("click spec is x,y[,radius[,n_knots]]")
    x, y = parts[0], parts[1]
    radius = parts[2] if len(parts) > 2 else None
    n_knots = int(parts[3]) if len(parts) > 3 else None
    return x, y, radius, n_knots


def _resolve_hyper(args) -> Hyperparameters:
    if args.preset:
        hyper = builtin_presets().get(args.preset)
    else:
        hyper = Hyperparameters()
    if args.weights:
        a, b, m, g, s = (float(w) for w in args.weights.split(","))
        hyper = hyper.with_weights(alpha=a, beta=b, mu=m, gamma=g, sigma=s)
    overrides = {}
    if args.max_iters is not None:
        overrides["max_iters"] = args.max_iters
    if args.learning_rate is not None:
        overrides["learning_rate"] = args.learning_rate
    if getattr(args, "samples_per_segment", None) is not None:
        overrides["samples_per_segment"] = args.samples_per_segment
    return replace(hyper, **overrides) if overrides else hyper


def cmd_segment2d(args) -> int:
    image = load_gray(args.image)
    hyper = _resolve_hyper(args)
    if args.annotation:
        record = import_annotation(Path(args.annotation).read_text())
        init = record.knots
    else:
        x, y, radius, n_knots = _parse_click(args.click)
        init = init_from_click((x, y),
                               radius if radius is not None else hyper.init_radius,
                               n_knots if n_knots is not None else hyper.n_knots,
                               image.width, image.height)
    final, trace = optimize(image, init, hyper)
    mask = contour_mask(final, image.width, image.height, hyper.samples_per_segment)
    if args.mask_out:
        save_mask(mask, args.mask_out)
    if args.annotation_out:
        record = AnnotationRecord(
            image_id=str(args.image), image_size=(image.width, image.height),
            knots=final, hyper=hyper,
            final_loss=trace.records[-1].breakdown if len(trace) else None)
        Path(args.annotation_out).write_text(export_annotation(record))
    if args.trace_out:
        write_trace_csv(trace, args.trace_out)
    final_total = f"{trace.j_total[-1]:.6g}" if len(trace) else "n/a"
    print(f"iterations={len(trace)} j_total={final_total}")
    return 0


def cmd_segment3d(args) -> int:
    stack = load_stack(args.stack if len(args.stack) > 1 or Path(args.stack[0]).is_file()
                       else args.stack[0])
    hyper = _resolve_hyper(args)
    x, y, radius, n_knots = _parse_click(args.click)
    hyper = replace(hyper,
                    init_radius=radius if radius is not None else hyper.init_radius,
                    n_knots=n_knots if n_knots is not None else hyper.n_knots)
    result = segment_volume(stack, (x, y), hyper)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slice", "iterations", "j_total", "mean_opi", "flagged"])
        for res in result.slices:
            save_mask(res.mask, outdir / f"slice_{res.index:03d}_mask.pgm")
            record = AnnotationRecord(
                image_id=f"slice_{res.index:03d}",
                image_size=(stack.width, stack.height),
                knots=res.knots, hyper=hyper)
            (outdir / f"slice_{res.index:03d}_annotation.json").write_text(
                export_annotation(record))
            writer.writerow([res.index, res.iterations, _fmt(res.final_loss),
                             "" if np.isnan(res.mean_opi) else _fmt(res.mean_opi),
                             int(res.flagged)])
    print(f"slices={len(result.slices)} written to {outdir}")
    return 0


def cmd_eval(args) -> int:
    a = load_mask(args.mask_a)
    b = load_mask(args.mask_b)
    print(f"{iou(a, b):.6f}")
    return 0


def cmd_make_fixture(args) -> int:
    out = Path(args.output)
    made = fixtures.make_fixture(args.name, size=args.size, noise=args.noise,
                                 seed=args.seed)
    if args.name == "translating-stack":
        images, truths = made
        out.mkdir(parents=True, exist_ok=True)
        for i, (img, truth) in enumerate(zip(images, truths)):
            save_gray(img, out / f"slice_{i:03d}.pgm")
            save_mask(truth, out / f"slice_{i:03d}_truth.pgm")
        print(f"wrote {len(images)} slices to {out}")
    else:
        image, truth = made
        out.parent.mkdir(parents=True, exist_ok=True)
        save_gray(image, out)
        truth_path = out.with_name(out.stem + "_truth" + out.suffix)
        save_mask(truth, truth_path)
        print(f"wrote {out} and {truth_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pics",
                                     description="Spline-snake image segmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--preset", help="named hyperparameter preset")
        p.add_argument("--weights", help="alpha,beta,mu,gamma,sigma override")
        p.add_argument("--max-iters", type=int, dest="max_iters")
        p.add_argument("--learning-rate", type=float, dest="learning_rate")
        p.add_argument("--samples-per-segment", type=int, dest="samples_per_segment")

    p2 = sub.add_parser("segment2d", help="segment a single image")
    p2.add_argument("image")
    p2.add_argument("--click", help="x,y[,radius[,n_knots]] initialization")
    p2.add_argument("--annotation", help="initialize from an annotation file")
    p2.add_argument("--mask-out", dest="mask_out")
    p2.add_argument("--annotation-out", dest="annotation_out")
    p2.add_argument("--trace-out", dest="trace_out")
    add_common(p2)
    p2.set_defaults(func=cmd_segment2d)

    p3 = sub.add_parser("segment3d", help="segment an image stack")
    p3.add_argument("stack", nargs="+", help="slice directory or slice files")
    p3.add_argument("--click", required=True, help="x,y[,radius[,n_knots]]")
    p3.add_argument("--outdir", required=True)
    add_common(p3)
    p3.set_defaults(func=cmd_segment3d)

    pe = sub.add_parser("eval", help="IoU between two mask files")
    pe.add_argument("mask_a")
    pe.add_argument("mask_b")
    pe.set_defaults(func=cmd_eval)

    pf = sub.add_parser("make-fixture", help="write a synthetic test case")
    pf.add_argument("name")
    pf.add_argument("--size", type=int, default=128)
    pf.add_argument("--noise", type=float, default=0.0)
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--output", required=True)
    pf.set_defaults(func=cmd_make_fixture)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "segment2d" and not (args.click or args.annotation):
        parser.error("segment2d needs --click or --annotation")
    try:
        return args.func(args)
    except (PicsError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
