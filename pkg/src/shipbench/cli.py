"""Command-line interface.

Subcommands: convert, evaluate, plan, recipe, report. Every command is
deterministic (identical inputs and flags give byte-identical outputs) and all
file writes are atomic: content goes to a temporary file in the destination
directory which is renamed over the target only once fully written.

Exit codes: 0 success, 2 input/parse errors, 3 semantic violations (validation
failures without --force, strata problems).
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .annotate_io import (
    ClassVocabulary,
    DatasetManifest,
    encode_yolo_line,
    load_yolo_dataset,
    manifest_from_json,
    manifest_to_json,
    parse_coco,
    parse_detections,
    validate_manifest,
    write_coco,
)
from .collectplan import generate_plan, plan_to_json, plan_to_manifest, scene_from_json
from .errors import (
    OverlappingStrataError,
    ShipbenchError,
    UnknownImageIdError,
)
from .metrics import EvalConfig, evaluate, stratified_evaluate
from .recipe import TrainingRecipe, recipe_to_json
from .reporting import (
    render_csv,
    render_markdown,
    render_svg,
    report_to_json,
    stratified_to_json,
)
from .strata_io import strata_from_json, strata_to_json

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SEMANTIC = 3

FORMATS = ("darknet-dir", "coco", "manifest")


class _SemanticExit(Exception):
    """Raised internally for conditions that map to exit code 3."""


def atomic_write_text(path: Path, text: str) -> None:
    """Write text through a temp file + rename so readers never see partials."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_dataset(fmt: str, source: Path, classes: str | None, split: str) -> DatasetManifest:
    if fmt == "darknet-dir":
        if classes is None:
            raise ShipbenchError("--classes is required for --from darknet-dir")
        vocabulary = ClassVocabulary.from_file(classes)
        image_dir, label_dir = source / "images", source / "labels"
        if not image_dir.is_dir():
            image_dir = label_dir = source  # flat layout fallback
        return load_yolo_dataset(image_dir, label_dir, vocabulary, split_name=split)
    if fmt == "coco":
        return parse_coco(_read_text(source))
    return manifest_from_json(_read_text(source))


def _write_darknet_dir(manifest: DatasetManifest, out_dir: Path) -> None:
    """Write labels/*.txt plus classes.txt; images are not materialized."""
    label_dir = out_dir / "labels"
    label_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "classes.txt", "\n".join(manifest.vocabulary) + "\n")
    for rec in manifest.images:
        lines = [encode_yolo_line(gt, rec.dims) for gt in rec.boxes]
        atomic_write_text(label_dir / f"{rec.image_id}.txt", "\n".join(lines) + ("\n" if lines else ""))


def cmd_convert(args: argparse.Namespace) -> int:
    manifest = _load_dataset(args.src_format, Path(args.in_path), args.classes, args.split)
    violations = validate_manifest(manifest)
    if violations:
        for v in violations:
            print(f"violation: {v.kind}: image {v.image_id!r} box {v.box_index}: {v.message}",
                  file=sys.stderr)
        if not args.force:
            raise _SemanticExit(
                f"{len(violations)} validation violation(s); no output written (use --force to override)"
            )
    out = Path(args.out_path)
    if args.dst_format == "darknet-dir":
        _write_darknet_dir(manifest, out)
    elif args.dst_format == "coco":
        atomic_write_text(out, write_coco(manifest))
    else:
        atomic_write_text(out, manifest_to_json(manifest))
    print(f"converted {len(manifest.images)} images, {manifest.total_boxes()} boxes "
          f"({args.src_format} -> {args.dst_format})")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    manifest = manifest_from_json(_read_text(args.gt))
    detections = parse_detections(_read_text(args.pred))
    config = EvalConfig(
        iou_threshold=args.iou,
        ap_mode={"all": "all_points", "101": "interp_101"}[args.ap_mode],
    )
    if args.strata is None:
        report = evaluate(manifest, detections, config)
        text = report_to_json(report)
        summary = [("all", report)]
    else:
        strata = strata_from_json(_read_text(args.strata))
        # Detection ids were validated against the manifest by evaluate's own
        # checks; re-raise id problems found *inside strata* as semantic.
        known = set(manifest.image_ids())
        unknown_dets = sorted(set(detections.groups) - known)
        if unknown_dets:
            raise UnknownImageIdError(f"detections reference unknown image ids: {unknown_dets}")
        try:
            stratified = stratified_evaluate(manifest, detections, strata, config)
        except (OverlappingStrataError, UnknownImageIdError) as exc:
            raise _SemanticExit(f"strata violation: {exc}") from exc
        text = stratified_to_json(stratified)
        summary = list(stratified.strata)
    atomic_write_text(Path(args.out), text)
    for name, rep in summary:
        tag = " [no ground truth]" if rep.empty else ""
        print(
            f"{name}: images={rep.num_images} gt={rep.num_gt} det={rep.num_det} "
            f"mAP={rep.map_value:.4f} P={rep.pooled_op.precision:.4f} "
            f"R={rep.pooled_op.recall:.4f} conf={rep.pooled_op.confidence:.4f}{tag}"
        )
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    scene = scene_from_json(_read_text(args.scene))
    plan = generate_plan(
        scene,
        n_poses=args.poses,
        radius_m=args.radius,
        min_elevation_deg=args.min_elev,
        nadir_cutoff_deg=args.nadir_cutoff,
        jitter_seed=args.jitter_seed,
    )
    out = Path(args.out)
    atomic_write_text(out / "plan.json", plan_to_json(plan))
    atomic_write_text(out / "manifest.json", manifest_to_json(plan_to_manifest(plan)))
    atomic_write_text(out / "strata.json", strata_to_json(plan.strata_sets()))
    sets = plan.strata_sets()
    print(
        f"planned {len(plan.views)} poses over {plan.scene_name!r}: "
        + ", ".join(f"{name}={len(ids)}" for name, ids in sorted(sets.items()))
    )
    return EXIT_OK


def cmd_recipe(args: argparse.Namespace) -> int:
    atomic_write_text(Path(args.out), recipe_to_json(TrainingRecipe()))
    print(f"wrote training recipe to {args.out}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    document = _read_text(args.in_path)
    if args.format == "md":
        rendered = render_markdown(document)
    elif args.format == "csv":
        rendered = render_csv(document)
    else:
        rendered = render_svg(document)
    atomic_write_text(Path(args.out), rendered)
    print(f"rendered {args.format} report to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shipbench",
        description="Detection dataset conversion, evaluation, and collection planning.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert between dataset formats (validate-then-write)")
    p.add_argument("--from", dest="src_format", choices=FORMATS, required=True)
    p.add_argument("--to", dest="dst_format", choices=FORMATS, required=True)
    p.add_argument("--in", dest="in_path", required=True, help="input file (or darknet dir)")
    p.add_argument("--out", dest="out_path", required=True, help="output file (or darknet dir)")
    p.add_argument("--classes", help="class names file, one per line (darknet input)")
    p.add_argument("--split", default="", help="split name recorded in the output")
    p.add_argument("--force", action="store_true", help="write output despite validation violations")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("evaluate", help="evaluate detections against a manifest")
    p.add_argument("--gt", required=True, help="native manifest JSON")
    p.add_argument("--pred", required=True, help="detection exchange file (JSON lines)")
    p.add_argument("--iou", type=float, default=0.50, help="IoU threshold (default 0.50)")
    p.add_argument("--strata", help="strata JSON file (stratified evaluation)")
    p.add_argument("--ap-mode", choices=("all", "101"), default="all",
                   help="AP integration: all-points envelope or 101-point grid")
    p.add_argument("--out", required=True, help="report JSON output path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plan", help="plan a half-dome collection over a scene")
    p.add_argument("--scene", required=True, help="scene JSON file")
    p.add_argument("--poses", type=int, default=64, help="number of poses (default 64)")
    p.add_argument("--radius", type=float, default=300.0, help="stand-off radius in metres")
    p.add_argument("--min-elev", type=float, default=10.0, help="minimum elevation in degrees")
    p.add_argument("--nadir-cutoff", type=float, default=70.0,
                   help="elevation at or above which a pose is near_nadir")
    p.add_argument("--jitter-seed", type=int, default=None,
                   help="seeded pose jitter (omit for the exact spiral)")
    p.add_argument("--out", required=True, help="output directory (plan/manifest/strata)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("recipe", help="write the training recipe document")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recipe)

    p = sub.add_parser("report", help="render a report document")
    p.add_argument("--in", dest="in_path", required=True, help="report JSON file")
    p.add_argument("--format", choices=("md", "csv", "svg"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _SemanticExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except ShipbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    raise SystemExit(main())
