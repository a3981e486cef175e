"""Self-contained JSON Schema (draft-04 subset) validation engine.

Holds a local registry of schema documents keyed by absolute URI and
validates JSON instances against them, resolving ``$ref`` across documents
with RFC 3986 relative-reference semantics (resolved against the
*registered* URI of the referencing document, never against inner ``id``
members).

Supported keywords: ``$schema``, ``id``, ``title``, ``type`` (string or
array of strings), ``properties``, ``additionalProperties`` (boolean or
schema), ``required``, ``items`` (single schema), ``definitions``,
``$ref``, ``minLength``, ``maxLength``, ``enum``, ``minimum``,
``maximum``, ``pattern``. Unknown keywords are ignored, which is how the
graph-specific descriptor keywords pass through this layer untouched.

Semantics pinned here so reports are reproducible:

* ``$ref`` wins over sibling keywords; siblings are ignored.
* Chained refs (a ref whose target is again a ref) are followed up to
  ``MAX_REF_DEPTH`` steps; revisiting a target raises a cycle error
  instead of looping.
* draft-04 numeric typing: ``integer`` matches ints only (1.0 is not an
  integer), booleans are neither integers nor numbers.
* ``pattern`` is unanchored (regex search).
* Error ordering is canonical: (instance path, keyword, message),
  instance paths compared lexicographically.
* Fragments are JSON Pointers only ("#", "#/definitions/x"); no
  ``id``-based fragment scoping.

Schema problems (unregistered URI, unresolvable ref, malformed schema)
raise; instance invalidity never raises, it is reported.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator
from urllib.parse import unquote, urljoin, urlparse

MAX_REF_DEPTH = 64


def canonical_json(value: Any) -> str:
    """Stable serialization (sorted members, fixed separators) so equal
    values always produce equal bytes."""
    return json.dumps(value, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


class SchemaEngineError(Exception):
    """Base class for schema-side failures (not instance invalidity)."""

    code = "schema_error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class RegistryError(SchemaEngineError):
    code = "registry_error"


class UnknownSchemaError(SchemaEngineError):
    code = "unknown_schema"


class RefResolutionError(SchemaEngineError):
    code = "unresolvable_ref"


class RefCycleError(RefResolutionError):
    code = "ref_cycle"


@dataclass(frozen=True)
class ValidationIssue:
    """One located validation error: where, which keyword, why."""

    path: str
    keyword: str
    message: str

    def to_json(self) -> dict[str, str]:
        return {"path": self.path, "keyword": self.keyword, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    errors: tuple[ValidationIssue, ...]

    def to_json(self) -> dict[str, Any]:
        return {"valid": self.valid, "errors": [e.to_json() for e in self.errors]}


def escape_pointer_token(token: str) -> str:
    return token.replace("~", "~0").replace("/", "~1")


def unescape_pointer_token(token: str) -> str:
    return token.replace("~1", "/").replace("~0", "~")


def evaluate_pointer(document: Any, pointer: str) -> Any:
    """Evaluate an RFC 6901 JSON Pointer against a document."""
    if pointer == "":
        return document
    if not pointer.startswith("/"):
        raise RefResolutionError(f"invalid JSON Pointer fragment: {pointer!r}")
    value = document
    for raw in pointer[1:].split("/"):
        token = unescape_pointer_token(raw)
        if isinstance(value, dict):
            if token not in value:
                raise RefResolutionError(f"pointer member not found: {pointer!r}")
            value = value[token]
        elif isinstance(value, list):
            if not token.isdigit() or int(token) >= len(value):
                raise RefResolutionError(f"pointer index not found: {pointer!r}")
            value = value[int(token)]
        else:
            raise RefResolutionError(f"pointer descends into a scalar: {pointer!r}")
    return value


def split_fragment(uri: str) -> tuple[str, str]:
    """Split a URI into (document part, percent-decoded fragment)."""
    if "#" in uri:
        doc, frag = uri.split("#", 1)
        return doc, unquote(frag)
    return uri, ""


def normalize_uri(uri: str) -> str:
    """Document identity: the URI with any fragment stripped."""
    return split_fragment(uri)[0]


def json_type_name(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, dict):
        return "object"
    if isinstance(value, list):
        return "array"
    raise TypeError(f"not a JSON value: {type(value)!r}")


def _type_matches(name: str, value: Any) -> bool:
    if name == "null":
        return value is None
    if name == "boolean":
        return isinstance(value, bool)
    if name == "string":
        return isinstance(value, str)
    if name == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if name == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if name == "object":
        return isinstance(value, dict)
    if name == "array":
        return isinstance(value, list)
    raise SchemaEngineError(f"unknown type name in schema: {name!r}")


def json_equal(a: Any, b: Any) -> bool:
    """JSON-value equality; booleans never equal numbers (1 != true)."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a is b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return a == b
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(json_equal(v, b[k]) for k, v in a.items())
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(json_equal(x, y) for x, y in zip(a, b))
    if type(a) is not type(b):
        return False
    return a == b


class SchemaRegistry:
    """Local store of schema documents plus the validator over them.

    Registration is a single-writer setup phase; once built, the registry
    is treated as immutable and validation is reentrant (its only side
    effect is a memo of resolved refs).
    """

    def __init__(self) -> None:
        self._documents: dict[str, Any] = {}
        # (owner doc uri, ref) -> dereference result; dropped whenever the
        # document set changes, and never holds failures (a later register
        # can fix a dangling ref).
        self._deref_cache: dict[tuple[str, str], tuple[str, Any]] = {}

    def register(self, uri: str, body: Any) -> None:
        """Register (or replace) a document under an absolute URI."""
        if not isinstance(uri, str) or not uri:
            raise RegistryError("schema uri must be a non-empty string")
        doc_uri, fragment = split_fragment(uri)
        if fragment:
            raise RegistryError(f"schema uri must not carry a fragment: {uri!r}")
        parsed = urlparse(doc_uri)
        if not parsed.scheme:
            raise RegistryError(f"schema uri must be absolute: {uri!r}")
        if not isinstance(body, dict):
            raise RegistryError("schema body must be a JSON object")
        self._documents[doc_uri] = body
        self._deref_cache.clear()

    def unregister(self, uri: str) -> None:
        self._documents.pop(normalize_uri(uri), None)
        self._deref_cache.clear()

    def register_tree(self, root: Path | str, base_uri: str) -> list[str]:
        """Register every ``*.json`` under *root*; relative file paths become
        URI paths under *base_uri*. Returns the registered URIs."""
        root = Path(root)
        if not base_uri.endswith("/"):
            base_uri += "/"
        registered = []
        for path in sorted(root.rglob("*.json")):
            rel = path.relative_to(root).as_posix()
            uri = urljoin(base_uri, rel)
            self.register(uri, json.loads(path.read_text(encoding="utf-8")))
            registered.append(uri)
        return registered

    def contains(self, uri: str) -> bool:
        return normalize_uri(uri) in self._documents

    def document(self, uri: str) -> Any:
        doc_uri = normalize_uri(uri)
        if doc_uri not in self._documents:
            raise UnknownSchemaError(f"no schema registered at {doc_uri!r}")
        return self._documents[doc_uri]

    def uris(self) -> list[str]:
        return sorted(self._documents)

    # -- reference resolution ------------------------------------------------

    def _resolve_target(self, base_uri: str, ref: str) -> tuple[str, str]:
        base = normalize_uri(base_uri)
        joined = urljoin(base, ref) if ref else base
        return split_fragment(joined)

    def resolve_ref(self, base_uri: str, ref: str) -> Any:
        """One resolution step: the sub-document the ref points at, verbatim
        (the result may itself be a ref object)."""
        if not self.contains(base_uri):
            raise UnknownSchemaError(f"base document not registered: {base_uri!r}")
        target_uri, fragment = self._resolve_target(base_uri, ref)
        return evaluate_pointer(self.document(target_uri), fragment)

    def dereference(self, base_uri: str, ref: str) -> tuple[str, Any]:
        """Follow a ref chain to a non-ref value; returns (owner document
        URI, value). Cycles and over-deep chains raise."""
        doc_uri = normalize_uri(base_uri)
        origin = (doc_uri, ref)
        cached = self._deref_cache.get(origin)
        if cached is not None:
            return cached
        seen: set[tuple[str, str]] = set()
        for _ in range(MAX_REF_DEPTH):
            target_uri, fragment = self._resolve_target(doc_uri, ref)
            key = (target_uri, fragment)
            if key in seen:
                raise RefCycleError(f"$ref cycle through {target_uri}#{fragment}")
            seen.add(key)
            value = evaluate_pointer(self.document(target_uri), fragment)
            if isinstance(value, dict) and "$ref" in value:
                doc_uri, ref = target_uri, value["$ref"]
                continue
            result = (target_uri, value)
            self._deref_cache[origin] = result
            return result
        raise RefCycleError(f"$ref chain deeper than {MAX_REF_DEPTH}")

    def check_refs(self, uri: str) -> None:
        """Verify that every ref reachable from *uri* resolves (transitively).

        Values inside ``enum`` arrays are data, not schemas, and are skipped.
        """
        doc_uri = normalize_uri(uri)
        worklist: list[tuple[str, Any]] = [(doc_uri, self.document(doc_uri))]
        seen_refs: set[tuple[str, str]] = set()
        while worklist:
            owner, node = worklist.pop()
            if isinstance(node, dict):
                if "$ref" in node:
                    ref = node["$ref"]
                    if not isinstance(ref, str):
                        raise RefResolutionError("$ref value must be a string")
                    if (owner, ref) in seen_refs:
                        continue
                    seen_refs.add((owner, ref))
                    worklist.append(self.dereference(owner, ref))
                    continue
                for member, value in node.items():
                    if member == "enum":
                        continue
                    worklist.append((owner, value))
            elif isinstance(node, list):
                worklist.extend((owner, item) for item in node)

    # -- validation ----------------------------------------------------------

    def validate(self, schema_uri: str, instance: Any) -> ValidationReport:
        """Validate *instance* against the registered schema. Pure: neither
        the registry nor the instance is modified."""
        body = self.document(schema_uri)
        errors: list[ValidationIssue] = []
        self._apply(body, normalize_uri(schema_uri), instance, "", errors)
        errors.sort(key=lambda e: (e.path, e.keyword, e.message))
        return ValidationReport(valid=not errors, errors=tuple(errors))

    def _subschema(self, value: Any, where: str) -> Any:
        # draft-04 allows boolean schemas only for additionalProperties;
        # tolerate them anywhere by mapping true -> {} (and false is handled
        # at the call sites that legally take it).
        if value is True:
            return {}
        if not isinstance(value, dict):
            raise SchemaEngineError(f"subschema at {where} must be an object")
        return value

    def _apply(self, schema: Any, doc_uri: str, instance: Any, path: str,
               errors: list[ValidationIssue]) -> None:
        if not isinstance(schema, dict):
            raise SchemaEngineError(f"schema at {path!r} must be an object")

        if "$ref" in schema:
            ref = schema["$ref"]
            if not isinstance(ref, str):
                raise RefResolutionError("$ref value must be a string")
            target_uri, target = self.dereference(doc_uri, ref)
            self._apply(self._subschema(target, ref), target_uri, instance, path, errors)
            return

        if "type" in schema:
            expected = schema["type"]
            names = expected if isinstance(expected, list) else [expected]
            if not any(_type_matches(n, instance) for n in names):
                wanted = " or ".join(str(n) for n in names)
                errors.append(ValidationIssue(
                    path, "type",
                    f"expected type {wanted}, got {json_type_name(instance)}"))

        if "enum" in schema:
            if not any(json_equal(instance, allowed) for allowed in schema["enum"]):
                errors.append(ValidationIssue(path, "enum", "value not in enum"))

        if isinstance(instance, str):
            if "minLength" in schema and len(instance) < schema["minLength"]:
                errors.append(ValidationIssue(
                    path, "minLength",
                    f"string shorter than minLength {schema['minLength']}"))
            if "maxLength" in schema and len(instance) > schema["maxLength"]:
                errors.append(ValidationIssue(
                    path, "maxLength",
                    f"string longer than maxLength {schema['maxLength']}"))
            if "pattern" in schema and re.search(schema["pattern"], instance) is None:
                errors.append(ValidationIssue(
                    path, "pattern",
                    f"string does not match pattern {schema['pattern']!r}"))

        elif isinstance(instance, (int, float)) and not isinstance(instance, bool):
            if "minimum" in schema and instance < schema["minimum"]:
                errors.append(ValidationIssue(
                    path, "minimum", f"value below minimum {schema['minimum']}"))
            if "maximum" in schema and instance > schema["maximum"]:
                errors.append(ValidationIssue(
                    path, "maximum", f"value above maximum {schema['maximum']}"))

        elif isinstance(instance, dict):
            properties = schema.get("properties", {})
            if not isinstance(properties, dict):
                raise SchemaEngineError("properties must be an object")
            for name, subschema in properties.items():
                if name in instance:
                    self._apply(self._subschema(subschema, f"properties/{name}"),
                                doc_uri, instance[name],
                                path + "/" + escape_pointer_token(name), errors)
            if "additionalProperties" in schema:
                extra = [k for k in instance if k not in properties]
                ap = schema["additionalProperties"]
                if ap is False:
                    for name in extra:
                        errors.append(ValidationIssue(
                            path + "/" + escape_pointer_token(name),
                            "additionalProperties", "additional member not allowed"))
                elif ap is not True:
                    subschema = self._subschema(ap, "additionalProperties")
                    for name in extra:
                        self._apply(subschema, doc_uri, instance[name],
                                    path + "/" + escape_pointer_token(name), errors)
            if "required" in schema:
                for name in schema["required"]:
                    if name not in instance:
                        errors.append(ValidationIssue(
                            path, "required", f"missing required member {name!r}"))

        elif isinstance(instance, list):
            if "items" in schema:
                subschema = self._subschema(schema["items"], "items")
                for index, element in enumerate(instance):
                    self._apply(subschema, doc_uri, element,
                                f"{path}/{index}", errors)


def iter_refs(document: Any) -> Iterator[str]:
    """Yield every $ref string in a document, skipping enum contents."""
    if isinstance(document, dict):
        for member, value in document.items():
            if member == "$ref" and isinstance(value, str):
                yield value
            elif member != "enum":
                yield from iter_refs(value)
    elif isinstance(document, list):
        for item in document:
            yield from iter_refs(item)
