"""Dataset and detection I/O.

Four concrete forms are handled here:

* darknet label files: one ``class cx cy w h`` line per box, normalized fractions;
* COCO-style JSON documents (images / annotations / categories, absolute
  ``[x, y, w, h]`` boxes);
* the native manifest, a single JSON document that keeps everything the toolkit
  knows about a split (see docs/FORMATS.md);
* the detection exchange format, line-delimited JSON records.

Parsers either return valid values or raise; they never hand back partially
valid records. Semantic problems with otherwise well-formed manifests (boxes out
of bounds, unknown classes) are reported as data by `validate_manifest`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

from PIL import Image

from .boxmath import BOUNDS_SLACK, Box2D, ImageDims, NormBox, area, norm_to_pixel, pixel_to_norm
from .errors import (
    DanglingReferenceError,
    DuplicateStemError,
    MalformedRecordError,
    MissingDimsError,
    OutOfRangeError,
    ScoreOutOfRangeError,
)

__all__ = [
    "ClassVocabulary",
    "GroundTruthBox",
    "ImageRecord",
    "DatasetManifest",
    "Detection",
    "DetectionSet",
    "Violation",
    "parse_yolo_line",
    "encode_yolo_line",
    "load_yolo_dataset",
    "parse_coco",
    "write_coco",
    "parse_detections",
    "write_detections",
    "validate_manifest",
    "manifest_to_json",
    "manifest_from_json",
]

MANIFEST_SCHEMA = "shipbench/manifest/v1"
SOURCE_ENCODINGS = ("pixel", "normalized")
IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".tif", ".tiff", ".webp"}


@dataclass(frozen=True)
class ClassVocabulary:
    """Ordered class names; ids are dense indices 0..K-1."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(self.names))
        if not self.names:
            raise ValueError("vocabulary must contain at least one class")
        if any((not isinstance(n, str)) or not n.strip() for n in self.names):
            raise ValueError("class names must be non-empty strings")
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def name_of(self, class_id: int) -> str:
        return self.names[class_id]

    def contains_id(self, class_id: int) -> bool:
        return 0 <= class_id < len(self.names)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "ClassVocabulary":
        return cls(tuple(names))

    @classmethod
    def from_file(cls, path: str | Path) -> "ClassVocabulary":
        """Load one class name per line; blank lines are skipped."""
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(tuple(line.strip() for line in lines if line.strip()))


@dataclass(frozen=True)
class GroundTruthBox:
    """One annotated box with the encoding it was originally expressed in."""

    class_id: int
    box: Box2D
    source_encoding: str = "pixel"

    def __post_init__(self) -> None:
        if not isinstance(self.class_id, int) or isinstance(self.class_id, bool) or self.class_id < 0:
            raise ValueError(f"class_id must be a non-negative integer, got {self.class_id!r}")
        if self.source_encoding not in SOURCE_ENCODINGS:
            raise ValueError(f"source_encoding must be one of {SOURCE_ENCODINGS}")


@dataclass(frozen=True)
class ImageRecord:
    """One image of a split: id, location, dimensions, and its boxes."""

    image_id: str
    path: str
    dims: ImageDims
    boxes: tuple[GroundTruthBox, ...] = ()
    pose_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.image_id:
            raise ValueError("image_id must be non-empty")
        object.__setattr__(self, "boxes", tuple(self.boxes))


@dataclass(frozen=True)
class DatasetManifest:
    """A whole split: vocabulary plus image records.

    Image ids are unique; records are kept in the order given (loaders sort them
    canonically by image_id). Class resolvability is checked by
    `validate_manifest`, not here, so that defective datasets can be loaded and
    reported on.
    """

    vocabulary: ClassVocabulary
    images: tuple[ImageRecord, ...]
    split_name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "images", tuple(self.images))
        seen: set[str] = set()
        for rec in self.images:
            if rec.image_id in seen:
                raise ValueError(f"duplicate image_id {rec.image_id!r} in manifest")
            seen.add(rec.image_id)

    def image_ids(self) -> list[str]:
        return [rec.image_id for rec in self.images]

    def get(self, image_id: str) -> ImageRecord:
        for rec in self.images:
            if rec.image_id == image_id:
                return rec
        raise KeyError(image_id)

    def total_boxes(self) -> int:
        return sum(len(rec.boxes) for rec in self.images)


@dataclass(frozen=True)
class Detection:
    """One predicted box with a confidence in [0, 1]."""

    image_id: str
    class_id: int
    box: Box2D
    score: float

    def __post_init__(self) -> None:
        if not self.image_id:
            raise ValueError("image_id must be non-empty")
        if not isinstance(self.class_id, int) or isinstance(self.class_id, bool) or self.class_id < 0:
            raise ValueError(f"class_id must be a non-negative integer, got {self.class_id!r}")
        score = self.score
        if not isinstance(score, (int, float)) or not (0.0 <= float(score) <= 1.0):
            raise ScoreOutOfRangeError(f"score must lie in [0, 1], got {score!r}")
        object.__setattr__(self, "score", float(score))


@dataclass(frozen=True)
class DetectionSet:
    """Detections grouped by image id, preserving input order within each group."""

    groups: Mapping[str, tuple[Detection, ...]]
    producer: str = ""

    def __post_init__(self) -> None:
        frozen = {}
        for image_id, dets in self.groups.items():
            dets = tuple(dets)
            for d in dets:
                if d.image_id != image_id:
                    raise ValueError(
                        f"detection for {d.image_id!r} filed under group {image_id!r}"
                    )
            frozen[image_id] = dets
        object.__setattr__(self, "groups", frozen)

    def __len__(self) -> int:
        return sum(len(g) for g in self.groups.values())

    def image_ids(self) -> list[str]:
        return sorted(self.groups)

    def for_image(self, image_id: str) -> tuple[Detection, ...]:
        return self.groups.get(image_id, ())

    @classmethod
    def from_detections(cls, dets: Iterable[Detection], producer: str = "") -> "DetectionSet":
        groups: dict[str, list[Detection]] = {}
        for d in dets:
            groups.setdefault(d.image_id, []).append(d)
        return cls({k: tuple(v) for k, v in groups.items()}, producer)


@dataclass(frozen=True)
class Violation:
    """One semantic problem found in a manifest, reported as data."""

    kind: str  # "out_of_bounds" | "degenerate" | "unknown_class"
    image_id: str
    box_index: int
    message: str


def parse_yolo_line(line: str, dims: ImageDims) -> GroundTruthBox:
    """Parse one darknet label line against the image dimensions.

    The decoded pixel box is not clipped and may extend past the image edges.
    Raises MalformedRecordError for arity/type problems and OutOfRangeError for
    fractions outside their ranges or a negative class id.
    """
    parts = line.split()
    if len(parts) != 5:
        raise MalformedRecordError(f"expected 5 fields, got {len(parts)}: {line.strip()!r}")
    try:
        class_id = int(parts[0])
    except ValueError:
        raise MalformedRecordError(f"class id is not an integer: {parts[0]!r}") from None
    try:
        cx, cy, w, h = (float(p) for p in parts[1:])
    except ValueError:
        raise MalformedRecordError(f"non-numeric coordinate in: {line.strip()!r}") from None
    if class_id < 0:
        raise OutOfRangeError(f"class id must be >= 0, got {class_id}")
    if not (0.0 <= cx <= 1.0 and 0.0 <= cy <= 1.0):
        raise OutOfRangeError(f"centre fractions must lie in [0, 1], got ({cx}, {cy})")
    if not (0.0 < w <= 1.0 and 0.0 < h <= 1.0):
        raise OutOfRangeError(f"size fractions must lie in (0, 1], got ({w}, {h})")
    norm = NormBox(cx, cy, w, h)
    return GroundTruthBox(class_id, norm_to_pixel(norm, dims), source_encoding="normalized")


def encode_yolo_line(gt: GroundTruthBox, dims: ImageDims) -> str:
    """Encode a ground-truth box as a darknet label line.

    Fractions are written in shortest round-trip form, so parsing the line back
    recovers the normalized fields exactly. Requires an in-bounds,
    non-degenerate box.
    """
    n = pixel_to_norm(gt.box, dims)
    return f"{gt.class_id} {n.cx!r} {n.cy!r} {n.w!r} {n.h!r}"


def _scan_by_stem(directory: Path, suffixes: set[str], what: str) -> dict[str, Path]:
    """Index directory files by stem, rejecting stem collisions."""
    out: dict[str, Path] = {}
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.suffix.lower() not in suffixes:
            continue
        if path.stem in out:
            raise DuplicateStemError(
                f"duplicate {what} stem {path.stem!r}: {out[path.stem].name} vs {path.name}"
            )
        out[path.stem] = path
    return out


def _read_dims(path: Path) -> ImageDims:
    try:
        with Image.open(path) as im:
            width, height = im.size
    except Exception as exc:
        raise MissingDimsError(f"cannot read image dimensions from {path}: {exc}") from exc
    return ImageDims(int(width), int(height))


def load_yolo_dataset(
    image_dir: str | Path,
    label_dir: str | Path,
    vocabulary: ClassVocabulary,
    split_name: str = "",
) -> DatasetManifest:
    """Load a darknet-layout dataset (images matched to .txt labels by stem).

    Images without a label file get an empty box list; orphan label files are
    ignored. The manifest is sorted canonically by image_id regardless of
    directory enumeration order. Parse failures carry file and line context.
    """
    images = _scan_by_stem(Path(image_dir), IMAGE_SUFFIXES, "image")
    labels = _scan_by_stem(Path(label_dir), {".txt"}, "label")
    records = []
    for stem in sorted(images):
        img_path = images[stem]
        dims = _read_dims(img_path)
        boxes: list[GroundTruthBox] = []
        label_path = labels.get(stem)
        if label_path is not None:
            text = label_path.read_text(encoding="utf-8")
            for lineno, raw in enumerate(text.splitlines(), start=1):
                if not raw.strip():
                    continue
                try:
                    boxes.append(parse_yolo_line(raw, dims))
                except (MalformedRecordError, OutOfRangeError) as exc:
                    raise type(exc)(f"{label_path}:{lineno}: {exc}") from None
        records.append(ImageRecord(stem, str(img_path), dims, tuple(boxes)))
    return DatasetManifest(vocabulary, tuple(records), split_name)


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise MalformedRecordError(f"{where} is missing required key {key!r}")
    return obj[key]


def _as_document(document: str | bytes | Mapping) -> Mapping:
    if isinstance(document, Mapping):
        return document
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(f"invalid JSON document: {exc}") from None
    if not isinstance(doc, Mapping):
        raise MalformedRecordError("top-level JSON value must be an object")
    return doc


def parse_coco(document: str | bytes | Mapping) -> DatasetManifest:
    """Parse a COCO-style JSON document into a manifest.

    Image identity is the file_name stem. Category ids are remapped to dense
    0..K-1 ids preserving the source order of the categories list. Annotations
    referencing unknown images or categories raise DanglingReferenceError.
    """
    doc = _as_document(document)
    images = _require(doc, "images", "document")
    annotations = _require(doc, "annotations", "document")
    categories = _require(doc, "categories", "document")

    cat_remap: dict = {}
    names = []
    for i, cat in enumerate(categories):
        cat_id = _require(cat, "id", f"categories[{i}]")
        if cat_id in cat_remap:
            raise MalformedRecordError(f"duplicate category id {cat_id!r}")
        cat_remap[cat_id] = i
        names.append(str(_require(cat, "name", f"categories[{i}]")))
    try:
        vocabulary = ClassVocabulary.from_names(names)
    except ValueError as exc:
        raise MalformedRecordError(f"bad categories: {exc}") from None

    recs: dict = {}
    stems: set[str] = set()
    for i, img in enumerate(images):
        img_id = _require(img, "id", f"images[{i}]")
        file_name = str(_require(img, "file_name", f"images[{i}]"))
        width = _require(img, "width", f"images[{i}]")
        height = _require(img, "height", f"images[{i}]")
        if img_id in recs:
            raise MalformedRecordError(f"duplicate image id {img_id!r}")
        stem = Path(file_name).stem
        if stem in stems:
            raise MalformedRecordError(f"duplicate image stem {stem!r}")
        stems.add(stem)
        try:
            dims = ImageDims(width, height)
        except ValueError as exc:
            raise MalformedRecordError(f"images[{i}]: {exc}") from None
        recs[img_id] = (stem, file_name, dims, [])

    for i, ann in enumerate(annotations):
        img_ref = _require(ann, "image_id", f"annotations[{i}]")
        cat_ref = _require(ann, "category_id", f"annotations[{i}]")
        bbox = _require(ann, "bbox", f"annotations[{i}]")
        if img_ref not in recs:
            raise DanglingReferenceError(f"annotations[{i}] references unknown image {img_ref!r}")
        if cat_ref not in cat_remap:
            raise DanglingReferenceError(
                f"annotations[{i}] references unknown category {cat_ref!r}"
            )
        if not isinstance(bbox, Sequence) or isinstance(bbox, (str, bytes)) or len(bbox) != 4:
            raise MalformedRecordError(f"annotations[{i}]: bbox must be [x, y, w, h]")
        try:
            x, y, w, h = (float(v) for v in bbox)
            box = Box2D(x, y, x + w, y + h)
        except (TypeError, ValueError) as exc:
            raise MalformedRecordError(f"annotations[{i}]: bad bbox: {exc}") from None
        recs[img_ref][3].append(GroundTruthBox(cat_remap[cat_ref], box, source_encoding="pixel"))

    records = tuple(
        ImageRecord(stem, file_name, dims, tuple(boxes))
        for stem, file_name, dims, boxes in sorted(recs.values(), key=lambda r: r[0])
    )
    split = ""
    info = doc.get("info")
    if isinstance(info, Mapping):
        split = str(info.get("split", ""))
    return DatasetManifest(vocabulary, records, split)


def write_coco(manifest: DatasetManifest) -> str:
    """Serialize a manifest as a COCO-style JSON document.

    Numeric ids are assigned in manifest order (1-based). Parsing the result
    back recovers ids/dims/classes/coordinates exactly provided each image_id
    equals its path stem, which holds for every manifest this toolkit produces.
    """
    images = []
    annotations = []
    img_num = {}
    for i, rec in enumerate(manifest.images, start=1):
        img_num[rec.image_id] = i
        images.append(
            {"id": i, "file_name": rec.path, "width": rec.dims.width, "height": rec.dims.height}
        )
    ann_id = 0
    for rec in manifest.images:
        for gt in rec.boxes:
            ann_id += 1
            b = gt.box
            annotations.append(
                {
                    "id": ann_id,
                    "image_id": img_num[rec.image_id],
                    "category_id": gt.class_id + 1,
                    "bbox": [b.x_min, b.y_min, b.width, b.height],
                    "area": area(b),
                    "iscrowd": 0,
                }
            )
    categories = [{"id": i + 1, "name": name} for i, name in enumerate(manifest.vocabulary)]
    doc = {
        "info": {"split": manifest.split_name},
        "images": images,
        "annotations": annotations,
        "categories": categories,
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_detections(source: str | Iterable[str] | IO[str], producer: str = "") -> DetectionSet:
    """Parse line-delimited detection exchange records.

    Each non-empty line is a JSON object with image_id (string), class_id
    (integer), bbox ([x_min, y_min, x_max, y_max]) and score (in [0, 1]).
    Input order is preserved within each image group.
    """
    if isinstance(source, str):
        lines: Iterable[str] = source.splitlines()
    else:
        lines = source
    dets: list[Detection] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecordError(f"line {lineno}: invalid record: {exc}") from None
        if not isinstance(rec, Mapping):
            raise MalformedRecordError(f"line {lineno}: record must be a JSON object")
        image_id = _require(rec, "image_id", f"line {lineno}")
        class_id = _require(rec, "class_id", f"line {lineno}")
        bbox = _require(rec, "bbox", f"line {lineno}")
        score = _require(rec, "score", f"line {lineno}")
        if not isinstance(image_id, str) or not image_id:
            raise MalformedRecordError(f"line {lineno}: image_id must be a non-empty string")
        if not isinstance(class_id, int) or isinstance(class_id, bool) or class_id < 0:
            raise MalformedRecordError(f"line {lineno}: class_id must be a non-negative integer")
        if not isinstance(bbox, Sequence) or isinstance(bbox, (str, bytes)) or len(bbox) != 4:
            raise MalformedRecordError(f"line {lineno}: bbox must be 4 numbers, corner form")
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise MalformedRecordError(f"line {lineno}: score must be a number")
        if not (0.0 <= float(score) <= 1.0):
            raise ScoreOutOfRangeError(f"line {lineno}: score {score!r} outside [0, 1]")
        try:
            box = Box2D(*(float(v) for v in bbox))
        except (TypeError, ValueError) as exc:
            raise MalformedRecordError(f"line {lineno}: bad bbox: {exc}") from None
        dets.append(Detection(image_id, class_id, box, float(score)))
    return DetectionSet.from_detections(dets, producer)


def write_detections(ds: DetectionSet) -> str:
    """Serialize detections as exchange lines, image groups in sorted id order."""
    out = []
    for image_id in sorted(ds.groups):
        for d in ds.groups[image_id]:
            out.append(
                json.dumps(
                    {
                        "image_id": d.image_id,
                        "class_id": d.class_id,
                        "bbox": list(d.box.as_tuple()),
                        "score": d.score,
                    }
                )
            )
    return "\n".join(out) + ("\n" if out else "")


def validate_manifest(manifest: DatasetManifest) -> list[Violation]:
    """Report semantic violations (never raises): bounds, degeneracy, class ids."""
    out: list[Violation] = []
    k = len(manifest.vocabulary)
    for rec in manifest.images:
        w, h = rec.dims.width, rec.dims.height
        for i, gt in enumerate(rec.boxes):
            b = gt.box
            if not manifest.vocabulary.contains_id(gt.class_id):
                out.append(
                    Violation(
                        "unknown_class",
                        rec.image_id,
                        i,
                        f"class_id {gt.class_id} outside vocabulary of size {k}",
                    )
                )
            if area(b) == 0.0:
                out.append(
                    Violation("degenerate", rec.image_id, i, f"zero-area box {b.as_tuple()}")
                )
            if (
                b.x_min < -BOUNDS_SLACK
                or b.y_min < -BOUNDS_SLACK
                or b.x_max > w + BOUNDS_SLACK
                or b.y_max > h + BOUNDS_SLACK
            ):
                out.append(
                    Violation(
                        "out_of_bounds",
                        rec.image_id,
                        i,
                        f"box {b.as_tuple()} exceeds image bounds {w}x{h}",
                    )
                )
    return out


def manifest_to_json(manifest: DatasetManifest) -> str:
    """Serialize the native manifest document (full float fidelity)."""
    doc = {
        "schema": MANIFEST_SCHEMA,
        "split": manifest.split_name,
        "classes": list(manifest.vocabulary),
        "images": [
            {
                "image_id": rec.image_id,
                "path": rec.path,
                "width": rec.dims.width,
                "height": rec.dims.height,
                "pose": rec.pose_ref,
                "boxes": [
                    {
                        "class_id": gt.class_id,
                        "bbox": list(gt.box.as_tuple()),
                        "encoding": gt.source_encoding,
                    }
                    for gt in rec.boxes
                ],
            }
            for rec in manifest.images
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def manifest_from_json(document: str | bytes | Mapping) -> DatasetManifest:
    """Parse the native manifest document; exact inverse of manifest_to_json."""
    doc = _as_document(document)
    if doc.get("schema") != MANIFEST_SCHEMA:
        raise MalformedRecordError(
            f"expected schema {MANIFEST_SCHEMA!r}, got {doc.get('schema')!r}"
        )
    try:
        vocabulary = ClassVocabulary.from_names(str(n) for n in _require(doc, "classes", "document"))
    except ValueError as exc:
        raise MalformedRecordError(f"bad classes: {exc}") from None
    records = []
    for i, img in enumerate(_require(doc, "images", "document")):
        where = f"images[{i}]"
        image_id = _require(img, "image_id", where)
        boxes = []
        for j, entry in enumerate(_require(img, "boxes", where)):
            bbox = _require(entry, "bbox", f"{where}.boxes[{j}]")
            if not isinstance(bbox, Sequence) or len(bbox) != 4:
                raise MalformedRecordError(f"{where}.boxes[{j}]: bbox must be 4 numbers")
            try:
                boxes.append(
                    GroundTruthBox(
                        _require(entry, "class_id", f"{where}.boxes[{j}]"),
                        Box2D(*(float(v) for v in bbox)),
                        entry.get("encoding", "pixel"),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise MalformedRecordError(f"{where}.boxes[{j}]: {exc}") from None
        try:
            dims = ImageDims(_require(img, "width", where), _require(img, "height", where))
        except ValueError as exc:
            raise MalformedRecordError(f"{where}: {exc}") from None
        pose = img.get("pose")
        records.append(
            ImageRecord(
                str(image_id),
                str(_require(img, "path", where)),
                dims,
                tuple(boxes),
                str(pose) if pose is not None else None,
            )
        )
    try:
        return DatasetManifest(vocabulary, tuple(records), str(doc.get("split", "")))
    except ValueError as exc:
        raise MalformedRecordError(str(exc)) from None
