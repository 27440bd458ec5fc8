"""The hyperparameter bundle handed to an external trainer, emitted verbatim.

Values are fixed data, not suggestions: downstream training reproduces the
reference run only if every field survives serialization exactly, so the
document writes floats in shortest round-trip form and the reader checks the
schema tag.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .errors import MalformedRecordError

__all__ = ["DecayGroup", "TrainingRecipe", "recipe_to_json", "recipe_from_json"]

RECIPE_SCHEMA = "shipbench/training-recipe/v1"


@dataclass(frozen=True)
class DecayGroup:
    """One optimizer parameter group: how many tensors, and their weight decay."""

    params: int
    kind: str  # "weight" | "bias"
    weight_decay: float

    def __post_init__(self) -> None:
        if self.params < 1:
            raise ValueError("parameter group must contain at least one tensor")
        if self.kind not in ("weight", "bias"):
            raise ValueError(f"kind must be 'weight' or 'bias', got {self.kind!r}")
        if self.weight_decay < 0.0:
            raise ValueError("weight decay must be non-negative")


DEFAULT_DECAY_GROUPS = (
    DecayGroup(97, "weight", 0.0),
    DecayGroup(104, "weight", 0.0015625),
    DecayGroup(103, "bias", 0.0),
)


@dataclass(frozen=True)
class TrainingRecipe:
    detector_family: str = "yolov8l"
    epochs: int = 200
    optimizer: str = "AdamW"
    learning_rate: float = 7.14e-4
    momentum: float = 0.9
    batch_size: int = 200
    image_size: int = 640
    weight_decay_groups: tuple[DecayGroup, ...] = field(default=DEFAULT_DECAY_GROUPS)

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1 or self.image_size < 1:
            raise ValueError("epochs, batch_size and image_size must be positive")
        if not (self.learning_rate > 0.0):
            raise ValueError("learning rate must be positive")
        if not (0.0 <= self.momentum < 1.0):
            raise ValueError("momentum must lie in [0, 1)")
        object.__setattr__(self, "weight_decay_groups", tuple(self.weight_decay_groups))


def recipe_to_json(recipe: TrainingRecipe = TrainingRecipe()) -> str:
    doc = {
        "schema": RECIPE_SCHEMA,
        "detector_family": recipe.detector_family,
        "epochs": recipe.epochs,
        "optimizer": recipe.optimizer,
        "learning_rate": recipe.learning_rate,
        "momentum": recipe.momentum,
        "batch_size": recipe.batch_size,
        "image_size": recipe.image_size,
        "weight_decay_groups": [
            {"params": g.params, "kind": g.kind, "weight_decay": g.weight_decay}
            for g in recipe.weight_decay_groups
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def recipe_from_json(document: str | bytes | Mapping) -> TrainingRecipe:
    from .annotate_io import _as_document, _require

    doc = _as_document(document)
    if doc.get("schema") != RECIPE_SCHEMA:
        raise MalformedRecordError(f"expected schema {RECIPE_SCHEMA!r}, got {doc.get('schema')!r}")
    try:
        groups = tuple(
            DecayGroup(
                _require(g, "params", f"weight_decay_groups[{i}]"),
                str(_require(g, "kind", f"weight_decay_groups[{i}]")),
                float(_require(g, "weight_decay", f"weight_decay_groups[{i}]")),
            )
            for i, g in enumerate(_require(doc, "weight_decay_groups", "recipe"))
        )
        return TrainingRecipe(
            detector_family=str(_require(doc, "detector_family", "recipe")),
            epochs=_require(doc, "epochs", "recipe"),
            optimizer=str(_require(doc, "optimizer", "recipe")),
            learning_rate=float(_require(doc, "learning_rate", "recipe")),
            momentum=float(_require(doc, "momentum", "recipe")),
            batch_size=_require(doc, "batch_size", "recipe"),
            image_size=_require(doc, "image_size", "recipe"),
            weight_decay_groups=groups,
        )
    except (TypeError, ValueError) as exc:
        raise MalformedRecordError(str(exc)) from None
