"""Detector backends.

A detector sees a letterboxed square frame (the usual input of the model
families this bridge targets) and reports boxes in that internal frame; the
bridge owns the mapping back to original pixels. The stub backend is fully
deterministic so contract tests can assert exact coordinates without any
model weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from .config import BridgeError


@dataclass(frozen=True)
class Letterbox:
    """How an original image was fitted into the square detector frame."""

    scale: float
    pad_x: float
    pad_y: float
    frame_size: int

    @classmethod
    def fit(cls, width: int, height: int, frame_size: int) -> "Letterbox":
        scale = min(frame_size / width, frame_size / height)
        return cls(
            scale=scale,
            pad_x=(frame_size - width * scale) / 2.0,
            pad_y=(frame_size - height * scale) / 2.0,
            frame_size=frame_size,
        )

    def to_original(self, x0: float, y0: float, x1: float, y1: float):
        """Internal-frame corners -> original-image pixel corners."""
        return (
            (x0 - self.pad_x) / self.scale,
            (y0 - self.pad_y) / self.scale,
            (x1 - self.pad_x) / self.scale,
            (y1 - self.pad_y) / self.scale,
        )


@dataclass(frozen=True)
class RawDetection:
    """One detection in the detector's internal letterboxed frame."""

    class_id: int
    x0: float
    y0: float
    x1: float
    y1: float
    score: float


class Detector(Protocol):
    frame_size: int

    def detect(self, width: int, height: int, letterbox: Letterbox) -> list[RawDetection]:
        """Detections for one image, in internal-frame coordinates."""


class StubDetector:
    """Deterministic stand-in: one class-0 box over the central half of the
    image content, score 0.9. Known geometry makes the letterbox reversal
    checkable to the pixel."""

    frame_size = 640

    def detect(self, width: int, height: int, letterbox: Letterbox) -> list[RawDetection]:
        content_w = width * letterbox.scale
        content_h = height * letterbox.scale
        return [
            RawDetection(
                class_id=0,
                x0=letterbox.pad_x + content_w * 0.25,
                y0=letterbox.pad_y + content_h * 0.25,
                x1=letterbox.pad_x + content_w * 0.75,
                y1=letterbox.pad_y + content_h * 0.75,
                score=0.9,
            )
        ]


_REGISTRY = {"stub": StubDetector}


def load_detector(model: str) -> Detector:
    """Resolve a registry name to a detector backend.

    Weight files and hub models would plug in here; anything unresolvable is
    a load failure, reported before any image is touched.
    """
    try:
        factory = _REGISTRY[model]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise BridgeError(f"cannot load model {model!r} (known: {known})") from None
    return factory()
