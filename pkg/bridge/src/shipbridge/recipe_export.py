"""Translate a training-recipe document into a trainer-native config."""

from __future__ import annotations

import json
from typing import Mapping

import yaml

from .config import BridgeError

RECIPE_SCHEMA = "shipbench/training-recipe/v1"
SUPPORTED_FLAVORS = ("ultralytics",)

_REQUIRED = (
    "epochs",
    "optimizer",
    "learning_rate",
    "momentum",
    "batch_size",
    "image_size",
)


def _load_recipe(document: str | bytes | Mapping) -> dict:
    if isinstance(document, Mapping):
        doc = dict(document)
    else:
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise BridgeError(f"recipe is not valid JSON: {exc}") from None
    if doc.get("schema") != RECIPE_SCHEMA:
        raise BridgeError(
            f"expected a {RECIPE_SCHEMA!r} document, got schema {doc.get('schema')!r}"
        )
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise BridgeError(f"recipe is missing fields: {missing}")
    return doc


def export_recipe(document: str | bytes | Mapping, flavor: str) -> str:
    """Render the recipe as the requested trainer's config text."""
    if flavor not in SUPPORTED_FLAVORS:
        raise BridgeError(
            f"unknown trainer flavor {flavor!r}; supported: {', '.join(SUPPORTED_FLAVORS)}"
        )
    doc = _load_recipe(document)
    # ultralytics: keep the trainer's own key names; lr0 is the initial
    # learning rate, weight_decay the single decayed-group value.
    decayed = [
        g["weight_decay"]
        for g in doc.get("weight_decay_groups", [])
        if g.get("weight_decay", 0.0) > 0.0
    ]
    config = {
        "model": f"{doc.get('detector_family', 'yolov8l')}.pt",
        "epochs": doc["epochs"],
        "imgsz": doc["image_size"],
        "batch": doc["batch_size"],
        "optimizer": doc["optimizer"],
        "lr0": doc["learning_rate"],
        "momentum": doc["momentum"],
        "weight_decay": decayed[0] if decayed else 0.0,
    }
    return yaml.safe_dump(config, sort_keys=False)
