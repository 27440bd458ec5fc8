"""shipbridge command line.

Subcommands: infer (detector -> exchange file), export-recipe (recipe
document -> trainer config). Exit codes: 0 success, 1 operational failures
(model load, empty directory, skipped images), 2 bad configuration or
arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import BridgeConfig, BridgeError
from .inference import run_inference
from .recipe_export import export_recipe

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _parse_remap(text: str | None) -> dict[int, int] | None:
    if text is None:
        return None
    try:
        raw = json.loads(text)
        return {int(k): int(v) for k, v in raw.items()}
    except (json.JSONDecodeError, AttributeError, TypeError, ValueError) as exc:
        raise BridgeError(f'--remap must be a JSON object like {{"0": 2}}: {exc}') from None


def cmd_infer(args: argparse.Namespace) -> int:
    try:
        cfg = BridgeConfig(
            model=args.model,
            image_dir=Path(args.images),
            output_path=Path(args.out),
            confidence_floor=args.floor,
            class_remap=_parse_remap(args.remap),
        )
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_inference(cfg)
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {result.records} records from {result.images} images to {args.out}")
    if result.skipped:
        print(f"error: skipped {len(result.skipped)} unreadable image(s)", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_export_recipe(args: argparse.Namespace) -> int:
    try:
        recipe_text = Path(args.recipe).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        rendered = export_recipe(recipe_text, args.flavor)
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(rendered, encoding="utf-8")
    print(f"wrote {args.flavor} config to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shipbridge",
        description="Run a detector into the exchange format; export training configs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="run a detector over an image directory")
    p.add_argument("--model", required=True, help="registry name (e.g. stub) or weights path")
    p.add_argument("--images", required=True, help="image directory")
    p.add_argument("--out", required=True, help="exchange-format output (JSON lines)")
    p.add_argument("--floor", type=float, default=0.001,
                   help="confidence floor in [0, 1) (default 0.001)")
    p.add_argument("--remap", help='JSON object mapping detector class ids, e.g. \'{"0": 1}\'')
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("export-recipe", help="translate a recipe document to a trainer config")
    p.add_argument("--recipe", required=True, help="training-recipe JSON document")
    p.add_argument("--flavor", required=True, help="trainer flavor (ultralytics)")
    p.add_argument("--out", required=True, help="config output path")
    p.set_defaults(func=cmd_export_recipe)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    raise SystemExit(main())
