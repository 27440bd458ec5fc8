import json

import pytest

from shipbench.errors import MalformedRecordError
from shipbench.recipe import (
    DEFAULT_DECAY_GROUPS,
    DecayGroup,
    TrainingRecipe,
    recipe_from_json,
    recipe_to_json,
)


def test_reference_values():
    r = TrainingRecipe()
    assert r.detector_family == "yolov8l"
    assert r.epochs == 200
    assert r.optimizer == "AdamW"
    assert r.learning_rate == 7.14e-4
    assert r.momentum == 0.9
    assert r.batch_size == 200
    assert r.image_size == 640
    assert r.weight_decay_groups == (
        DecayGroup(97, "weight", 0.0),
        DecayGroup(104, "weight", 0.0015625),
        DecayGroup(103, "bias", 0.0),
    )


def test_group_param_totals():
    assert sum(g.params for g in DEFAULT_DECAY_GROUPS) == 97 + 104 + 103
    decayed = [g for g in DEFAULT_DECAY_GROUPS if g.weight_decay > 0.0]
    assert len(decayed) == 1 and decayed[0].params == 104


def test_round_trip_is_exact():
    text = recipe_to_json()
    again = recipe_from_json(text)
    assert again == TrainingRecipe()
    assert again.learning_rate == 7.14e-4  # float survives the document verbatim
    assert again.weight_decay_groups[1].weight_decay == 0.0015625
    assert recipe_to_json(again) == text


def test_document_shape():
    doc = json.loads(recipe_to_json())
    assert doc["schema"] == "shipbench/training-recipe/v1"
    assert doc["learning_rate"] == 7.14e-4
    assert [g["kind"] for g in doc["weight_decay_groups"]] == ["weight", "weight", "bias"]


def test_schema_tag_checked():
    doc = json.loads(recipe_to_json())
    doc["schema"] = "nope/v0"
    with pytest.raises(MalformedRecordError):
        recipe_from_json(json.dumps(doc))


def test_missing_field_rejected():
    doc = json.loads(recipe_to_json())
    del doc["epochs"]
    with pytest.raises(MalformedRecordError):
        recipe_from_json(json.dumps(doc))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"epochs": 0},
        {"batch_size": 0},
        {"image_size": -1},
        {"learning_rate": 0.0},
        {"momentum": 1.0},
        {"momentum": -0.1},
    ],
)
def test_invalid_recipe_rejected(kwargs):
    with pytest.raises(ValueError):
        TrainingRecipe(**kwargs)


@pytest.mark.parametrize(
    "args",
    [(0, "weight", 0.0), (10, "other", 0.0), (10, "weight", -1.0)],
)
def test_invalid_group_rejected(args):
    with pytest.raises(ValueError):
        DecayGroup(*args)
