"""Command-line front-end for the synthesis / evaluation pipeline.

Subcommands:
  synthesize   cast a scene into a ground-truth dataset bundle plus
               per-view reference renders (PNG + lossless float dumps)
  complexity   shader and task complexity accounting for a train/novel split
  evaluate     score a prediction dump against a dataset (WAPE, PSNR, SSIM)
  render       re-render one view of a dataset for inspection

Exit codes: 0 success; 2 schema or validation failure; 3 I/O failure;
4 numeric guard tripped.  All commands are deterministic given their
inputs and --seed, and never mutate their inputs.  When --out is omitted,
outputs land under $RAYFIELD_OUT_ROOT (default: current directory).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from .complexity import complexity_report
from .field import generate_field, split_train_novel
from .geometry import DegenerateTriangleError
from .metrics import (AlignmentError, MetricReport, PSNR_TABLE_CAP, depth_psnr,
                      psnr, ssim, wape)
from .render import RENDER_MODES, render_view, write_float_image, write_png
from .scene import SceneValidationError, with_config
from .sceneio import (DatasetError, import_dataset, import_predictions, load_scene,
                      read_manifest, scene_hash)
from .shading import apply_shaders

ENV_OUT_ROOT = "RAYFIELD_OUT_ROOT"


def _default_out(stem: str, command: str) -> Path:
    root = Path(os.environ.get(ENV_OUT_ROOT, "."))
    return root / f"{stem}-{command}"


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def _print_report(report: MetricReport) -> None:
    print(f"{report.metric}: mean={_fmt(report.mean)} std={_fmt(report.std)}")
    for view, val in report.rows():
        print(f"  view {view}: {_fmt(val)}")


def _write_metric_csv(reports: list[MetricReport], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["metric", "view", "value"])
        for rep in reports:
            for view, val in rep.rows():
                w.writerow([rep.metric, view, _fmt(val)])
            w.writerow([rep.metric, "mean", _fmt(rep.mean)])
            w.writerow([rep.metric, "std", _fmt(rep.std)])


def cmd_synthesize(args) -> int:
    scene = load_scene(args.scene)
    if args.hit_mode:
        scene = with_config(scene, hit_mode=args.hit_mode)
    out = Path(args.out) if args.out else _default_out(Path(args.scene).stem, "synthesize")
    out.mkdir(parents=True, exist_ok=True)

    field = generate_field(scene, scene_hash=scene_hash(scene))
    field = apply_shaders(field, scene, seed=args.seed)
    from .sceneio import export_dataset
    export_dataset(field, out / "dataset", seed=args.seed, render_mode=args.mode)

    # render from the exported bundle so re-rendering the dataset later
    # reproduces these images bit-exactly (the export downcasts to float32)
    exported = import_dataset(out / "dataset")
    for view in exported.views:
        image = render_view(exported, view.view_id, args.mode)
        write_png(image, out / f"view_{view.view_id:03d}.png")
        write_float_image(image, out / f"view_{view.view_id:03d}.f32")
    print(f"synthesized {field.n_pts} samples over {field.ray_count} rays "
          f"({len(field.views)} views) -> {out}")
    return 0


def cmd_complexity(args) -> int:
    scene = load_scene(args.scene)
    if args.hit_mode:
        scene = with_config(scene, hit_mode=args.hit_mode)
    field = generate_field(scene, scene_hash=scene_hash(scene))

    if args.split_fraction is not None:
        train_views = scene.train_cameras()
        if not train_views:
            raise SceneValidationError("scene has no train-role cameras for a "
                                       "within-view split")
        shared = field.subset_by_rays(
            field.ray_ids[np.isin(field.ray_views, train_views)])
        train, novel = split_train_novel(shared, fraction=args.split_fraction,
                                         seed=args.seed)
    else:
        train_views = scene.train_cameras()
        novel_views = scene.novel_cameras()
        if not train_views or not novel_views:
            raise SceneValidationError("per-view complexity needs both train- and "
                                       "novel-role cameras (or use --split-fraction)")
        train, novel = split_train_novel(field, train_views=train_views,
                                         novel_views=novel_views)

    report = complexity_report(scene.shaders, train, novel, basis=args.basis,
                               light_count=max(len(scene.lights), 1))
    for line in report.lines():
        print(line)

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "complexity.csv").open("w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["key", "value"])
            for t in report.shader_terms:
                w.writerow([f"term_{t.label}", _fmt(t.value)])
            w.writerow(["shader_complexity_literal", _fmt(report.shader_complexity)])
            if report.reference_complexity is not None:
                w.writerow(["shader_complexity_reference", _fmt(report.reference_complexity)])
                w.writerow(["reference_mismatch", str(report.reference_mismatch).lower()])
            w.writerow(["n_pts", report.n_pts])
            w.writerow(["std_train", _fmt(report.std_train)])
            w.writerow(["std_novel", _fmt(report.std_novel)])
            w.writerow(["task_complexity", _fmt(report.task_complexity)])
        print(f"wrote {out / 'complexity.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    field = import_dataset(args.dataset)
    manifest = read_manifest(args.dataset)
    pred = import_predictions(args.predictions, field)
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = set(wanted) - {"wape", "psnr", "ssim"}
    if unknown:
        raise ValueError(f"unknown metrics requested: {sorted(unknown)}")

    reports: list[MetricReport] = []
    if "wape" in wanted:
        reports.append(wape(pred, field))

    image_pairs = None
    if ("psnr" in wanted or "ssim" in wanted) and pred.param in ("colour", "density"):
        mode = manifest.get("render_mode", "modified")
        predicted_field = field.with_values(pred.param, pred.values)
        image_pairs = [(v.view_id, render_view(field, v.view_id, mode),
                        render_view(predicted_field, v.view_id, mode))
                       for v in field.views]

    if "psnr" in wanted:
        if pred.param == "depth":
            reports.append(depth_psnr(pred, field))
        elif image_pairs is not None:
            vals = [psnr(gt, pr) for _vid, gt, pr in image_pairs]
            reports.append(MetricReport.from_views(
                "psnr", [vid for vid, _g, _p in image_pairs], vals))
        else:
            raise ValueError(f"psnr is not defined for parameter {pred.param!r}")
    if "ssim" in wanted:
        if image_pairs is None:
            raise ValueError(f"ssim is not defined for parameter {pred.param!r}")
        vals = [ssim(gt, pr) for _vid, gt, pr in image_pairs]
        reports.append(MetricReport.from_views(
            "ssim", [vid for vid, _g, _p in image_pairs], vals))

    for rep in reports:
        _print_report(rep)
    if args.out:
        out = Path(args.out)
        _write_metric_csv(reports, out / "metrics.csv")
        print(f"wrote {out / 'metrics.csv'}")
    return 0


def cmd_render(args) -> int:
    field = import_dataset(args.dataset)
    manifest = read_manifest(args.dataset)
    mode = args.mode or manifest.get("render_mode", "modified")
    image = render_view(field, args.view, mode)
    out = Path(args.out) if args.out else _default_out(Path(args.dataset).name, "render")
    out.mkdir(parents=True, exist_ok=True)
    write_png(image, out / f"view_{args.view:03d}.png")
    write_float_image(image, out / f"view_{args.view:03d}.f32")
    print(f"rendered view {args.view} ({mode}) -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rayfield", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    syn = sub.add_parser("synthesize", help="build a ground-truth dataset from a scene")
    syn.add_argument("--scene", required=True, help="scene description (JSON)")
    syn.add_argument("--out", help="output directory")
    syn.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    syn.add_argument("--mode", choices=RENDER_MODES, default="modified",
                     help="opacity rule for reference renders")
    syn.add_argument("--hit-mode", choices=("all", "earliest"), default=None,
                     help="override the scene's hit mode")
    syn.set_defaults(func=cmd_synthesize)

    cpx = sub.add_parser("complexity", help="shader / task complexity report")
    cpx.add_argument("--scene", required=True)
    cpx.add_argument("--out", help="directory for complexity.csv")
    cpx.add_argument("--seed", type=int, default=0)
    cpx.add_argument("--basis", choices=("origins", "samples"), default="origins",
                     help="positions entering the spread statistic")
    cpx.add_argument("--split-fraction", type=float, default=None,
                     help="per-ray split within the train-role views instead of "
                          "the scene's train/novel view partition")
    cpx.add_argument("--hit-mode", choices=("all", "earliest"), default=None)
    cpx.set_defaults(func=cmd_complexity)

    ev = sub.add_parser("evaluate", help="score a prediction dump against a dataset")
    ev.add_argument("--dataset", required=True, help="dataset bundle directory")
    ev.add_argument("--predictions", required=True, help="prediction dump directory")
    ev.add_argument("--metrics", default="wape", help="comma list: wape,psnr,ssim")
    ev.add_argument("--out", help="directory for metrics.csv")
    ev.set_defaults(func=cmd_evaluate)

    rnd = sub.add_parser("render", help="re-render one view of a dataset")
    rnd.add_argument("--dataset", required=True)
    rnd.add_argument("--view", type=int, required=True)
    rnd.add_argument("--mode", choices=RENDER_MODES, default=None,
                     help="opacity rule (default: the dataset's recorded mode)")
    rnd.add_argument("--out", help="output directory")
    rnd.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DegenerateTriangleError as e:
        print(f"numeric guard: {e}", file=sys.stderr)
        return 4
    except (SceneValidationError, DatasetError, AlignmentError, ValueError) as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
