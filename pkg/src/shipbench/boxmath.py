"""Axis-aligned box algebra: areas, IoU, coordinate encodings, resize remapping.

Pixel boxes are corner-encoded (x_min, y_min, x_max, y_max) with the origin at the
top-left corner, x growing right and y growing down. Coordinates are real-valued;
nothing here snaps to integer pixel centres. Decoding never clips: a box may extend
past the image edges until `clip_to_image` is applied explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Box2D",
    "ImageDims",
    "NormBox",
    "area",
    "iou",
    "iou_matrix",
    "norm_to_pixel",
    "pixel_to_norm",
    "remap_resize",
    "clip_to_image",
]

# Slack (in pixels) tolerated by bounds checks, so boxes produced by float round
# trips of edge-touching geometry are not rejected.
BOUNDS_SLACK = 1e-6


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned rectangle in pixel coordinates, corner form."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(isinstance(c, (int, float)) and math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite numbers, got {coords!r}")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "y_min", float(self.y_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "y_max", float(self.y_max))
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"box corners out of order: {coords}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


@dataclass(frozen=True)
class ImageDims:
    """Integer image width and height in pixels."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if not (isinstance(self.width, int) and isinstance(self.height, int)):
            raise ValueError("image dimensions must be integers")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be >= 1, got {self.width}x{self.height}")


@dataclass(frozen=True)
class NormBox:
    """Centre/size box in normalized image fractions (darknet layout)."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        vals = (self.cx, self.cy, self.w, self.h)
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
            raise ValueError(f"normalized fields must be finite numbers, got {vals!r}")
        for name in ("cx", "cy", "w", "h"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"centre must lie in [0, 1]^2, got ({self.cx}, {self.cy})")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"size must lie in (0, 1], got ({self.w}, {self.h})")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)


def area(b: Box2D) -> float:
    """Box area; zero for degenerate boxes."""
    return (b.x_max - b.x_min) * (b.y_max - b.y_min)


def iou(a: Box2D, b: Box2D) -> float:
    """Intersection over union of two boxes.

    Returns 0.0 when the union is empty (both boxes degenerate), so the value is
    always defined and always within [0, 1].
    """
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = ix * iy if (ix > 0.0 and iy > 0.0) else 0.0
    union = area(a) + area(b) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def iou_matrix(rows: Sequence[Box2D], cols: Sequence[Box2D]) -> np.ndarray:
    """Pairwise IoU, shape (len(rows), len(cols)). Empty inputs give empty arrays."""
    if not rows or not cols:
        return np.zeros((len(rows), len(cols)), dtype=float)
    a = np.array([r.as_tuple() for r in rows], dtype=float)
    b = np.array([c.as_tuple() for c in cols], dtype=float)
    ix = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    iy = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(ix, 0.0, None) * np.clip(iy, 0.0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0.0)
    return out


def norm_to_pixel(n: NormBox, dims: ImageDims) -> Box2D:
    """Decode a normalized centre/size box to pixel corner form.

    The result is not clipped and may extend past the image edges.
    """
    return Box2D(
        (n.cx - n.w / 2.0) * dims.width,
        (n.cy - n.h / 2.0) * dims.height,
        (n.cx + n.w / 2.0) * dims.width,
        (n.cy + n.h / 2.0) * dims.height,
    )


def pixel_to_norm(b: Box2D, dims: ImageDims) -> NormBox:
    """Encode a pixel box as normalized centre/size fractions.

    Raises ValueError for boxes outside the image bounds (beyond float slack) and
    for degenerate boxes, which have no valid normalized form.
    """
    if (
        b.x_min < -BOUNDS_SLACK
        or b.y_min < -BOUNDS_SLACK
        or b.x_max > dims.width + BOUNDS_SLACK
        or b.y_max > dims.height + BOUNDS_SLACK
    ):
        raise ValueError(
            f"box {b.as_tuple()} lies outside image bounds {dims.width}x{dims.height}"
        )
    w = (b.x_max - b.x_min) / dims.width
    h = (b.y_max - b.y_min) / dims.height
    if w <= 0.0 or h <= 0.0:
        raise ValueError(f"degenerate box {b.as_tuple()} has no normalized form")
    cx = (b.x_min + b.x_max) / 2.0 / dims.width
    cy = (b.y_min + b.y_max) / 2.0 / dims.height
    # Clamp float fuzz from edge-touching boxes back into the legal ranges.
    return NormBox(min(max(cx, 0.0), 1.0), min(max(cy, 0.0), 1.0), min(w, 1.0), min(h, 1.0))


def remap_resize(b: Box2D, from_dims: ImageDims, to_dims: ImageDims) -> Box2D:
    """Remap a box between image resolutions with independent x/y scales.

    Multiplying before dividing keeps exactly representable cases exact
    (e.g. a half-resolution crop remapped onto an even target size).
    """
    return Box2D(
        b.x_min * to_dims.width / from_dims.width,
        b.y_min * to_dims.height / from_dims.height,
        b.x_max * to_dims.width / from_dims.width,
        b.y_max * to_dims.height / from_dims.height,
    )


def clip_to_image(b: Box2D, dims: ImageDims) -> Box2D:
    """Clamp a box into [0, width] x [0, height]; may produce a degenerate box."""
    return Box2D(
        min(max(b.x_min, 0.0), float(dims.width)),
        min(max(b.y_min, 0.0), float(dims.height)),
        min(max(b.x_max, 0.0), float(dims.width)),
        min(max(b.y_max, 0.0), float(dims.height)),
    )
