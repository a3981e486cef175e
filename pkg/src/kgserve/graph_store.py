"""Embedded labelled-property-graph store with an append-only log.

Nodes are keyed by (primary label, id), edges by (label, id); writes are
upserts (match-or-create, incoming property values overwrite, absent keys
survive). Each node carries its primary label plus the labels inherited
through the descriptor hierarchy; each edge carries exactly one label and
a direction ("single" for directed, "double" for undirected, stored once
with the flag).

Edge endpoints are resolved by (endpoint label from the edge descriptor,
id from the document's ``source``/``target`` members); missing endpoints
are auto-created as stub nodes (name = id, flagged) so bulk files need no
topological ordering.

Every applied write is journalled to a JSON Lines log; replaying a log
prefix reproduces the exact store state after those writes (stubs are
re-derived from edge records, so they carry no records of their own).

Property values are scalars only: string, number, boolean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Protocol

from .descriptors import Descriptor
from .persist import AppendLog
from .schema_engine import ValidationIssue, escape_pointer_token

KIND_NODE = "node_upsert"
KIND_EDGE = "edge_upsert"

DIRECTION_SINGLE = "single"
DIRECTION_DOUBLE = "double"

EDGE_ENDPOINT_MEMBERS = ("source", "target")


class GraphStoreError(Exception):
    def __init__(self, message: str, code: str = "graph_store_error"):
        super().__init__(message)
        self.message = message
        self.code = code


class UnknownLabelError(GraphStoreError):
    def __init__(self, message: str):
        super().__init__(message, code="unknown_label")


class SchemaView(Protocol):
    """What the store needs to know about the descriptor layer."""

    def find_descriptor(self, title: str) -> Descriptor | None: ...

    def isa_closure(self, title: str) -> list[str]: ...


def _is_scalar(value: Any) -> bool:
    return isinstance(value, (str, int, float, bool))


def document_issues(doc: Any, *, edge: bool) -> list[ValidationIssue]:
    """Store-level document checks, as located issues: mandatory id (and
    source/target string ids for edges), scalar-only property values."""
    issues: list[ValidationIssue] = []
    if not isinstance(doc, dict):
        return [ValidationIssue("", "type", "document must be a JSON object")]
    if "id" not in doc:
        issues.append(ValidationIssue("", "required", "missing required member 'id'"))
    elif not isinstance(doc["id"], str) or not doc["id"]:
        issues.append(ValidationIssue("/id", "type", "id must be a non-empty string"))
    if edge:
        for member in EDGE_ENDPOINT_MEMBERS:
            if member not in doc:
                issues.append(ValidationIssue(
                    "", "required", f"missing required member {member!r}"))
            elif not isinstance(doc[member], str) or not doc[member]:
                issues.append(ValidationIssue(
                    "/" + member, "type", f"{member} must be a non-empty endpoint id string"))
    for key, value in doc.items():
        if not _is_scalar(value):
            issues.append(ValidationIssue(
                "/" + escape_pointer_token(key), "type",
                "property values must be scalar (string, number or boolean)"))
    issues.sort(key=lambda e: (e.path, e.keyword, e.message))
    return issues


@dataclass
class NodeRecord:
    label: str
    id: str
    labels: tuple[str, ...]
    properties: dict[str, Any]
    stub: bool = False

    def to_json(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "id": self.id,
            "labels": list(self.labels),
            "properties": dict(self.properties),
            "stub": self.stub,
        }


@dataclass
class EdgeRecord:
    label: str
    id: str
    source: tuple[str, str]
    target: tuple[str, str]
    direction: str
    properties: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "id": self.id,
            "source": {"label": self.source[0], "id": self.source[1]},
            "target": {"label": self.target[0], "id": self.target[1]},
            "direction": self.direction,
            "properties": dict(self.properties),
        }


class KnowledgeGraph:
    """In-memory labelled property graph bound to one descriptor set.

    Not internally synchronized; the owning project serializes writers.
    """

    def __init__(self, schema: SchemaView, log: AppendLog | None = None):
        self._schema = schema
        self._log = log
        self._seq = 0
        self._nodes: dict[tuple[str, str], NodeRecord] = {}
        self._edges: dict[tuple[str, str], EdgeRecord] = {}

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def last_seq(self) -> int:
        return self._seq

    # -- writes ---------------------------------------------------------------

    def upsert_node(self, label: str, doc: dict[str, Any]) -> NodeRecord:
        descriptor = self._schema.find_descriptor(label)
        if descriptor is None or not descriptor.is_node:
            raise UnknownLabelError(f"{label!r} is not a registered node descriptor")
        issues = document_issues(doc, edge=False)
        if issues:
            raise GraphStoreError(issues[0].message, code="invalid_document")
        self._journal(KIND_NODE, label, doc)
        return self._apply_node(label, doc)

    def upsert_edge(self, label: str, doc: dict[str, Any]) -> EdgeRecord:
        descriptor = self._schema.find_descriptor(label)
        if descriptor is None or not descriptor.is_edge:
            raise UnknownLabelError(f"{label!r} is not a registered edge descriptor")
        issues = document_issues(doc, edge=True)
        if issues:
            raise GraphStoreError(issues[0].message, code="invalid_document")
        self._journal(KIND_EDGE, label, doc)
        return self._apply_edge(label, doc)

    def _journal(self, kind: str, label: str, doc: dict[str, Any]) -> None:
        self._seq += 1
        if self._log is not None:
            self._log.append(
                {"seq": self._seq, "kind": kind, "label": label, "payload": doc})

    def _apply_node(self, label: str, doc: dict[str, Any]) -> NodeRecord:
        key = (label, doc["id"])
        record = self._nodes.get(key)
        if record is None:
            record = NodeRecord(
                label=label,
                id=doc["id"],
                labels=tuple(self._schema.isa_closure(label)),
                properties=dict(doc),
            )
            self._nodes[key] = record
        else:
            record.properties.update(doc)
            record.stub = False
        return record

    def _ensure_endpoint(self, label: str, node_id: str) -> tuple[str, str]:
        key = (label, node_id)
        if key not in self._nodes:
            self._nodes[key] = NodeRecord(
                label=label,
                id=node_id,
                labels=tuple(self._schema.isa_closure(label)),
                properties={"id": node_id, "name": node_id},
                stub=True,
            )
        return key

    def _apply_edge(self, label: str, doc: dict[str, Any]) -> EdgeRecord:
        descriptor = self._schema.find_descriptor(label)
        source = self._ensure_endpoint(descriptor.source_label, doc["source"])
        target = self._ensure_endpoint(descriptor.target_label, doc["target"])
        properties = {k: v for k, v in doc.items() if k not in EDGE_ENDPOINT_MEMBERS}
        key = (label, doc["id"])
        record = self._edges.get(key)
        if record is None:
            record = EdgeRecord(
                label=label,
                id=doc["id"],
                source=source,
                target=target,
                direction=descriptor.direction or DIRECTION_SINGLE,
                properties=properties,
            )
            self._edges[key] = record
        else:
            record.source = source
            record.target = target
            record.properties.update(properties)
        return record

    # -- reads ----------------------------------------------------------------

    def get_node(self, label: str, node_id: str) -> NodeRecord | None:
        """None means the id is absent; an unknown label raises."""
        descriptor = self._schema.find_descriptor(label)
        if descriptor is None or not descriptor.is_node:
            raise UnknownLabelError(f"{label!r} is not a registered node descriptor")
        return self._nodes.get((label, node_id))

    def labels_in_use(self) -> list[str]:
        used: set[str] = set()
        for node in self._nodes.values():
            used.update(node.labels)
        used.update(edge.label for edge in self._edges.values())
        return sorted(used)

    def export(self) -> dict[str, Any]:
        return {
            "nodes": [self._nodes[key].to_json() for key in sorted(self._nodes)],
            "edges": [self._edges[key].to_json() for key in sorted(self._edges)],
            "labels": self.labels_in_use(),
        }

    # -- replay ---------------------------------------------------------------

    @classmethod
    def replay(cls, schema: SchemaView, records: Iterable[dict[str, Any]],
               log: AppendLog | None = None) -> "KnowledgeGraph":
        """Left fold of the records into a fresh graph; *log* is attached
        afterwards so new writes continue the journal."""
        graph = cls(schema, log=None)
        for record in records:
            kind = record.get("kind")
            if kind == KIND_NODE:
                graph._apply_node(record["label"], record["payload"])
            elif kind == KIND_EDGE:
                graph._apply_edge(record["label"], record["payload"])
            else:
                raise GraphStoreError(f"unknown log record kind: {kind!r}",
                                      code="log_corrupt")
            graph._seq = record.get("seq", graph._seq + 1)
        graph._log = log
        return graph
