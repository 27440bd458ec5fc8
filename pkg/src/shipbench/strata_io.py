"""The strata file: named image-id groups used for stratified evaluation."""

from __future__ import annotations

import json
from typing import Mapping

from .annotate_io import _as_document, _require
from .errors import MalformedRecordError

__all__ = ["STRATA_SCHEMA", "strata_to_json", "strata_from_json"]

STRATA_SCHEMA = "shipbench/strata/v1"


def strata_to_json(strata: Mapping[str, list[str]]) -> str:
    doc = {
        "schema": STRATA_SCHEMA,
        "strata": {name: sorted(strata[name]) for name in sorted(strata)},
    }
    return json.dumps(doc, indent=2) + "\n"


def strata_from_json(document: str | bytes | Mapping) -> dict[str, list[str]]:
    doc = _as_document(document)
    if doc.get("schema") != STRATA_SCHEMA:
        raise MalformedRecordError(f"expected schema {STRATA_SCHEMA!r}, got {doc.get('schema')!r}")
    strata = _require(doc, "strata", "document")
    if not isinstance(strata, Mapping):
        raise MalformedRecordError("strata must map names to image-id lists")
    out: dict[str, list[str]] = {}
    for name, ids in strata.items():
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise MalformedRecordError(f"stratum {name!r} must list image-id strings")
        out[str(name)] = list(ids)
    return out
