"""Bridge run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


class BridgeError(Exception):
    """Any bridge failure the CLI turns into a nonzero exit."""


@dataclass(frozen=True)
class BridgeConfig:
    """One inference run: which model, over which images, filtered how.

    confidence_floor must lie in [0, 1): a floor of 1.0 would discard every
    detection, including perfect-score ones, so it is rejected up front.
    class_remap maps detector-native class ids to exchange class ids and
    must be injective (two source classes cannot merge silently).
    """

    model: str
    image_dir: Path
    output_path: Path
    confidence_floor: float = 0.001
    class_remap: dict[int, int] | None = field(default=None)

    def __post_init__(self) -> None:
        if not self.model:
            raise BridgeError("model reference must be non-empty")
        if not (0.0 <= self.confidence_floor < 1.0):
            raise BridgeError(
                f"confidence floor must lie in [0, 1), got {self.confidence_floor}"
            )
        object.__setattr__(self, "image_dir", Path(self.image_dir))
        object.__setattr__(self, "output_path", Path(self.output_path))
        if self.class_remap is not None:
            remap = {int(k): int(v) for k, v in self.class_remap.items()}
            if len(set(remap.values())) != len(remap):
                raise BridgeError(f"class remap must be injective, got {remap}")
            if any(v < 0 for v in remap.values()):
                raise BridgeError("remapped class ids must be non-negative")
            object.__setattr__(self, "class_remap", remap)

    def remap_class(self, class_id: int) -> int:
        if self.class_remap is None:
            return class_id
        try:
            return self.class_remap[class_id]
        except KeyError:
            raise BridgeError(
                f"detector produced class id {class_id} with no remap entry"
            ) from None
