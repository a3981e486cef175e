"""Descriptor handling: meta-schema validation, bulk generation, settings.

A descriptor is a JSON Schema document extended with graph keywords:
``graph_element`` ("node" or "edge", mandatory), ``parents`` (node
descriptors only), ``direction`` / ``source_label`` / ``target_label``
(edge descriptors only) and ``settings``. Its ``$schema`` member selects
one of the two bundled meta-schemas (node_validator.json or
edge_validator.json, matched on path suffix so any host works), and its
``required`` array must contain both "id" and "name".

The meta-schemas express what draft-04 can (member presence and typing);
the value restrictions above are enforced here as post-validation rules.
"""

from __future__ import annotations

import json
import dataclasses
from dataclasses import dataclass
from importlib.resources import files
from typing import Any, Iterable, Mapping
from urllib.parse import urljoin

from .schema_engine import (
    SchemaRegistry,
    ValidationReport,
    iter_refs,
    normalize_uri,
    split_fragment,
)

DEFAULT_SCHEMA_BASE = "http://localhost:8000/schemas/"

NODE_VALIDATOR_PATH = "validators/node_validator.json"
EDGE_VALIDATOR_PATH = "validators/edge_validator.json"
BASIC_DEFINITIONS_PATH = "basic/basic_definitions.json"
BUNDLED_SCHEMA_PATHS = (NODE_VALIDATOR_PATH, EDGE_VALIDATOR_PATH, BASIC_DEFINITIONS_PATH)

DEFAULT_KNOWN_FUNCTIONS = frozenset({"unique", "index"})

ROLE_NODE = "node"
ROLE_EDGE = "edge"

EDGE_ONLY_KEYWORDS = ("direction", "source_label", "target_label")


class DescriptorError(Exception):
    """A descriptor was rejected; ``code`` is the machine token."""

    def __init__(self, message: str, code: str = "descriptor_invalid",
                 report: ValidationReport | None = None):
        super().__init__(message)
        self.message = message
        self.code = code
        self.report = report


class UnknownMetaSchemaError(DescriptorError):
    def __init__(self, message: str):
        super().__init__(message, code="unknown_meta_schema")


class MetaSchemaViolationError(DescriptorError):
    def __init__(self, message: str, report: ValidationReport):
        super().__init__(message, code="meta_schema", report=report)


class DanglingReferenceError(DescriptorError):
    def __init__(self, message: str):
        super().__init__(message, code="dangling_reference")


class SettingsShapeError(DescriptorError):
    def __init__(self, message: str):
        super().__init__(message, code="settings_shape")


def bundled_schema(relpath: str) -> Any:
    """Load one of the schema documents shipped with the package."""
    resource = files("kgserve").joinpath("schemas").joinpath(relpath)
    return json.loads(resource.read_text(encoding="utf-8"))


def ensure_bundled_schemas(registry: SchemaRegistry, target_uri: str) -> None:
    """If *target_uri* is unregistered but its path ends with a bundled
    schema path, register the bundled body there (then satisfy that body's
    own relative refs the same way). Lets descriptors reference the
    validators and basic definitions under any host."""
    doc_uri = normalize_uri(target_uri)
    if registry.contains(doc_uri):
        return
    for path in BUNDLED_SCHEMA_PATHS:
        if doc_uri.endswith(path):
            body = bundled_schema(path)
            registry.register(doc_uri, body)
            for ref in iter_refs(body):
                ensure_bundled_schemas(registry, urljoin(doc_uri, ref))
            return


@dataclass(frozen=True)
class Descriptor:
    """A validated descriptor. Reference fields (``parents``,
    ``source_label``, ``target_label``) hold resolved titles when the
    descriptor was validated against a known set, raw reference strings
    otherwise."""

    title: str
    role: str
    schema_uri: str
    id_uri: str
    document: dict[str, Any]
    parents: tuple[str, ...] = ()
    direction: str | None = None
    source_label: str | None = None
    target_label: str | None = None
    settings: Any = None

    @property
    def is_node(self) -> bool:
        return self.role == ROLE_NODE

    @property
    def is_edge(self) -> bool:
        return self.role == ROLE_EDGE


class MetaSchema:
    """The bundled node/edge validators plus basic definitions, registered
    into a schema registry under one base URI."""

    def __init__(self, registry: SchemaRegistry | None = None,
                 base_uri: str = DEFAULT_SCHEMA_BASE):
        if not base_uri.endswith("/"):
            base_uri += "/"
        self.base_uri = base_uri
        self.registry = registry if registry is not None else SchemaRegistry()
        for path in BUNDLED_SCHEMA_PATHS:
            self.registry.register(urljoin(base_uri, path), bundled_schema(path))
        self.node_validator_uri = urljoin(base_uri, NODE_VALIDATOR_PATH)
        self.edge_validator_uri = urljoin(base_uri, EDGE_VALIDATOR_PATH)

    def role_for(self, schema_value: Any) -> str:
        """Select the descriptor role from a ``$schema`` value by path
        suffix; the host part is deliberately not matched."""
        if not isinstance(schema_value, str) or not schema_value:
            raise UnknownMetaSchemaError("$schema must be a non-empty string")
        path = normalize_uri(schema_value)
        if path.endswith(NODE_VALIDATOR_PATH):
            return ROLE_NODE
        if path.endswith(EDGE_VALIDATOR_PATH):
            return ROLE_EDGE
        raise UnknownMetaSchemaError(
            f"$schema does not name a known validator: {schema_value!r}")

    def validator_uri(self, role: str) -> str:
        return self.node_validator_uri if role == ROLE_NODE else self.edge_validator_uri


def resolve_reference(ref: str, referrer_id: str,
                      known: Mapping[str, Descriptor]) -> Descriptor:
    """Resolve a descriptor reference: a bare title, or a relative or
    absolute URI matched against registered descriptor ids."""
    if ref in known:
        return known[ref]
    if any(c in ref for c in "/#:"):
        target = normalize_uri(urljoin(normalize_uri(referrer_id), ref))
        for descriptor in known.values():
            if normalize_uri(descriptor.id_uri) == target:
                return descriptor
        raise DanglingReferenceError(
            f"reference {ref!r} resolves to {target!r}, which is not a registered descriptor")
    raise DanglingReferenceError(f"unknown descriptor reference {ref!r}")


def validate_descriptor(meta: MetaSchema, candidate: Any,
                        known: Mapping[str, Descriptor] | None = None) -> Descriptor:
    """Validate a candidate descriptor and parse it.

    When *known* is given, parent and endpoint references are resolved
    against it (dangling references are rejected) and the returned
    descriptor carries resolved titles; endpoints and parents must name
    node descriptors.
    """
    if not isinstance(candidate, dict):
        raise DescriptorError("descriptor must be a JSON object", code="not_an_object")
    if "$schema" not in candidate:
        raise DescriptorError("descriptor lacks a $schema member", code="missing_schema")

    role = meta.role_for(candidate["$schema"])

    declared = candidate.get("graph_element")
    if declared in (ROLE_NODE, ROLE_EDGE) and declared != role:
        raise DescriptorError(
            f"graph_element {declared!r} contradicts the {role} validator "
            f"selected by $schema",
            code="graph_element_mismatch")

    report = meta.registry.validate(meta.validator_uri(role), candidate)
    if not report.valid:
        summary = "; ".join(
            f"{e.path or '/'}: {e.message}" for e in report.errors[:5])
        raise MetaSchemaViolationError(
            f"descriptor rejected by {role} validator: {summary}", report)

    required = candidate.get("required", [])
    if "id" not in required or "name" not in required:
        raise DescriptorError(
            'descriptor "required" must contain both "id" and "name"',
            code="required_id_name")

    if role == ROLE_NODE:
        present = [k for k in EDGE_ONLY_KEYWORDS if k in candidate]
        if present:
            raise DescriptorError(
                f"edge-only keywords on a node descriptor: {', '.join(present)}",
                code="edge_keywords_on_node")
    else:
        if "parents" in candidate:
            raise DescriptorError(
                '"parents" is only allowed on node descriptors',
                code="parents_on_edge")

    descriptor = Descriptor(
        title=candidate["title"],
        role=role,
        schema_uri=candidate["$schema"],
        id_uri=candidate["id"],
        document=candidate,
        parents=tuple(candidate.get("parents", ())),
        direction=candidate.get("direction"),
        source_label=candidate.get("source_label"),
        target_label=candidate.get("target_label"),
        settings=candidate.get("settings"),
    )

    if known is None:
        return descriptor

    if descriptor.is_node:
        parent_titles = []
        for ref in descriptor.parents:
            parent = resolve_reference(ref, descriptor.id_uri, known)
            if not parent.is_node:
                raise DanglingReferenceError(
                    f"parent {ref!r} must reference a node descriptor")
            parent_titles.append(parent.title)
        return dataclasses.replace(descriptor, parents=tuple(parent_titles))

    endpoints = {}
    for member in ("source_label", "target_label"):
        ref = getattr(descriptor, member)
        endpoint = resolve_reference(ref, descriptor.id_uri, known)
        if not endpoint.is_node:
            raise DanglingReferenceError(
                f"{member} {ref!r} must reference a node descriptor")
        endpoints[member] = endpoint.title
    return dataclasses.replace(descriptor, **endpoints)


def generate_bulk_descriptor(descriptor: Descriptor) -> dict[str, Any]:
    """Produce the array-schema companion of a descriptor: same
    ``$schema``, id with a "bulk_" basename prefix, "Bulk " title prefix,
    one ``definitions`` entry pointing back at the descriptor by relative
    path, and ``items`` referencing that definition."""
    doc_uri, _ = split_fragment(descriptor.id_uri)
    marker = "#" if "#" in descriptor.id_uri else ""
    head, _, basename = doc_uri.rpartition("/")
    return {
        "$schema": descriptor.schema_uri,
        "id": f"{head}/bulk_{basename}{marker}",
        "title": f"Bulk {descriptor.title}",
        "definitions": {descriptor.role: {"$ref": f"./{basename}#"}},
        "type": "array",
        "items": {"$ref": f"#/definitions/{descriptor.role}"},
    }


def validate_settings(descriptor: Descriptor,
                      known_functions: Iterable[str] = DEFAULT_KNOWN_FUNCTIONS) -> list[str]:
    """Check the shape of ``settings`` (a list of single-pair objects) and
    return one warning per key that is not a known function. The settings
    stay on the descriptor verbatim either way."""
    raw = descriptor.settings
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise SettingsShapeError("settings must be a list of single-pair objects")
    known = set(known_functions)
    warnings = []
    for index, item in enumerate(raw):
        if not isinstance(item, dict) or len(item) != 1:
            raise SettingsShapeError(
                f"settings[{index}] must be an object with exactly one member")
        key = next(iter(item))
        if key not in known:
            warnings.append(f"settings[{index}]: unknown function {key!r}")
    return warnings
