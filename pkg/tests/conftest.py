"""Shared fixtures: the golden HE descriptor pair and small helpers."""

from __future__ import annotations

import copy
from typing import Any

import pytest

from kgserve.descriptors import DEFAULT_SCHEMA_BASE, MetaSchema

BASE = DEFAULT_SCHEMA_BASE  # http://localhost:8000/schemas/

# Golden node descriptor: the "HE" (higher education) type of a university
# ranking model. Frozen; tests copy before mutating.
HE_DESCRIPTOR: dict[str, Any] = {
    "$schema": BASE + "validators/node_validator.json#",
    "id": BASE + "ranking/he.json#",
    "title": "HE",
    "type": "object",
    "properties": {
        "id": {"$ref": "../basic/basic_definitions.json#/definitions/id"},
        "name": {"type": "string", "maxLength": 1000, "minLength": 1},
    },
    "additionalProperties": {
        "$ref": "../basic/basic_definitions.json#/definitions/default_property"},
    "required": ["id", "name"],
    "parents": ["institute"],
    "graph_element": "node",
}

# What the generated bulk companion of HE must be, member for member.
BULK_HE_EXPECTED: dict[str, Any] = {
    "$schema": BASE + "validators/node_validator.json#",
    "id": BASE + "ranking/bulk_he.json#",
    "title": "Bulk HE",
    "definitions": {
        "node": {"$ref": "./he.json#"},
    },
    "type": "array",
    "items": {"$ref": "#/definitions/node"},
}

# Parent concept HE inherits from; must be registered before HE.
INSTITUTE_DESCRIPTOR: dict[str, Any] = {
    "$schema": BASE + "validators/node_validator.json#",
    "id": BASE + "ranking/institute.json#",
    "title": "institute",
    "type": "object",
    "properties": {
        "id": {"$ref": "../basic/basic_definitions.json#/definitions/id"},
        "name": {"type": "string", "maxLength": 1000, "minLength": 1},
    },
    "additionalProperties": {
        "$ref": "../basic/basic_definitions.json#/definitions/default_property"},
    "required": ["id", "name"],
    "graph_element": "node",
}


def make_node_descriptor(title: str, *, parents: list[str] | None = None,
                         base: str = BASE, prefix: str = "t",
                         properties: dict[str, Any] | None = None) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "$schema": base + "validators/node_validator.json#",
        "id": base + f"{prefix}/{title.lower()}.json#",
        "title": title,
        "type": "object",
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "name": {"type": "string", "minLength": 1},
            **(properties or {}),
        },
        "required": ["id", "name"],
        "graph_element": "node",
    }
    if parents is not None:
        doc["parents"] = parents
    return doc


def make_edge_descriptor(title: str, source: str, target: str, *,
                         direction: str = "single", base: str = BASE,
                         prefix: str = "t",
                         properties: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        "$schema": base + "validators/edge_validator.json#",
        "id": base + f"{prefix}/{title.lower()}.json#",
        "title": title,
        "type": "object",
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "name": {"type": "string", "minLength": 1},
            **(properties or {}),
        },
        "required": ["id", "name"],
        "graph_element": "edge",
        "direction": direction,
        "source_label": source,
        "target_label": target,
    }


@pytest.fixture
def he_descriptor() -> dict[str, Any]:
    return copy.deepcopy(HE_DESCRIPTOR)


@pytest.fixture
def institute_descriptor() -> dict[str, Any]:
    return copy.deepcopy(INSTITUTE_DESCRIPTOR)


@pytest.fixture
def meta() -> MetaSchema:
    return MetaSchema()
