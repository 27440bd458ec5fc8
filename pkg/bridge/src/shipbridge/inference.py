"""Run a detector over an image directory and write exchange records.

Output is the detection-exchange format: one JSON object per line with
image_id (file stem), class_id, corner-form bbox in original pixels, and
score. Records are written sorted by (image_id, score descending) so a run
is byte-reproducible regardless of filesystem order.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .config import BridgeConfig, BridgeError
from .detectors import Letterbox, load_detector

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


@dataclass(frozen=True)
class InferenceResult:
    records: int
    images: int
    skipped: tuple[str, ...]


def _image_files(image_dir: Path) -> list[Path]:
    if not image_dir.is_dir():
        raise BridgeError(f"image directory {image_dir} does not exist")
    return sorted(
        (p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: p.stem,
    )


def run_inference(cfg: BridgeConfig, log=sys.stderr) -> InferenceResult:
    """Detect over every image in cfg.image_dir and write cfg.output_path.

    The output file is always written (empty when nothing was detected).
    Unreadable images are logged and skipped; the caller decides what a
    nonzero skip count means for the exit code. An empty directory is an
    error after the empty output is in place, so downstream consumers see
    a well-formed (if empty) file either way.
    """
    detector = load_detector(cfg.model)
    files = _image_files(cfg.image_dir)

    rows = []
    skipped = []
    for path in files:
        try:
            with Image.open(path) as img:
                width, height = img.size
        except (UnidentifiedImageError, OSError) as exc:
            print(f"skipping {path.name}: {exc}", file=log)
            skipped.append(path.name)
            continue
        letterbox = Letterbox.fit(width, height, detector.frame_size)
        for raw in detector.detect(width, height, letterbox):
            if raw.score < cfg.confidence_floor:
                continue
            x0, y0, x1, y1 = letterbox.to_original(raw.x0, raw.y0, raw.x1, raw.y1)
            rows.append(
                {
                    "image_id": path.stem,
                    "class_id": cfg.remap_class(raw.class_id),
                    "bbox": [x0, y0, x1, y1],
                    "score": raw.score,
                }
            )

    rows.sort(key=lambda r: (r["image_id"], -r["score"]))
    cfg.output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(cfg.output_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")

    if not files:
        raise BridgeError(f"no images in {cfg.image_dir}")
    return InferenceResult(
        records=len(rows), images=len(files) - len(skipped), skipped=tuple(skipped)
    )
