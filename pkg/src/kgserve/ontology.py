"""Projects: per-namespace descriptor registries and their graphs.

A project owns a descriptor set (concepts and roles), the generated bulk
descriptors, a schema registry seeded with the bundled meta-schemas, and
one knowledge graph. Node descriptors form the concept hierarchy through
their ``parents`` keyword (a DAG; registration order must present parents
first, forward references are rejected, so a cycle can never form). The
reachability graph is the schema-level snapshot of all of it: concepts,
typed roles between them, and the inheritance links.

With a data directory, descriptor uploads and graph writes are journalled
per project and replayed on startup.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from threading import RLock
from typing import Any

from urllib.parse import urljoin

from .descriptors import (
    DEFAULT_KNOWN_FUNCTIONS,
    DEFAULT_SCHEMA_BASE,
    Descriptor,
    DescriptorError,
    MetaSchema,
    ensure_bundled_schemas,
    generate_bulk_descriptor,
    validate_descriptor,
    validate_settings,
)
from .graph_store import KnowledgeGraph, document_issues
from .persist import AppendLog
from .schema_engine import (
    SchemaEngineError,
    ValidationIssue,
    ValidationReport,
    iter_refs,
    normalize_uri,
)

PROJECT_NAME_RE = re.compile(r"^[a-z0-9_-]{1,64}$")

DESCRIPTOR_LOG = "descriptors.log"
GRAPH_LOG = "graph.log"


class ProjectError(Exception):
    def __init__(self, message: str, code: str = "project_error"):
        super().__init__(message)
        self.message = message
        self.code = code


class InvalidProjectNameError(ProjectError):
    def __init__(self, name: str):
        super().__init__(
            f"invalid project name {name!r} (want [a-z0-9_-], at most 64 chars)",
            code="invalid_name")


class DuplicateProjectError(ProjectError):
    def __init__(self, name: str):
        super().__init__(f"project {name!r} already exists", code="duplicate_project")


class UnknownProjectError(ProjectError):
    def __init__(self, name: str):
        super().__init__(f"no project named {name!r}", code="unknown_project")


class DuplicateTitleError(ProjectError):
    def __init__(self, title: str):
        super().__init__(f"descriptor title {title!r} already registered",
                         code="duplicate_title")


class UnknownTitleError(ProjectError):
    def __init__(self, title: str):
        super().__init__(f"no descriptor titled {title!r}", code="unknown_title")


class IsaCycleError(ProjectError):
    def __init__(self, title: str):
        super().__init__(f"registering {title!r} would create an isa cycle",
                         code="isa_cycle")


class DataValidationError(ProjectError):
    """An uploaded document (or bulk array) failed validation."""

    def __init__(self, message: str, report: ValidationReport):
        super().__init__(message, code="data_invalid")
        self.report = report


@dataclass(frozen=True)
class ReachabilityGraph:
    """Schema of the knowledge graph: concepts, roles between them and
    the inheritance links."""

    concepts: frozenset[str]
    roles: frozenset[tuple[str, str, str, str]]  # (title, source, target, direction)
    isa_links: frozenset[tuple[str, str]]        # (child, parent)

    def to_json(self) -> dict[str, Any]:
        return {
            "concepts": sorted(self.concepts),
            "roles": [
                {"title": t, "source": s, "target": g, "direction": d}
                for t, s, g, d in sorted(self.roles)
            ],
            "isa": [
                {"child": c, "parent": p} for c, p in sorted(self.isa_links)
            ],
        }


class Project:
    """One namespace: descriptors, bulk variants, schema registry, graph.

    Writes are serialized through the project lock; snapshot reads
    (reachability, export) take it briefly.
    """

    def __init__(self, name: str, *, schema_base: str = DEFAULT_SCHEMA_BASE,
                 known_functions: frozenset[str] = DEFAULT_KNOWN_FUNCTIONS,
                 directory: Path | None = None, fsync: bool = False):
        self.name = name
        self.known_functions = known_functions
        self.meta = MetaSchema(base_uri=schema_base)
        self.registry = self.meta.registry
        self.descriptors: dict[str, Descriptor] = {}
        self.documents: dict[str, dict[str, Any]] = {}
        self.bulk_descriptors: dict[str, dict[str, Any]] = {}
        self.lock = RLock()
        self._descriptor_log: AppendLog | None = None
        if directory is None:
            self.graph = KnowledgeGraph(self)
        else:
            directory.mkdir(parents=True, exist_ok=True)
            self._descriptor_log = AppendLog(directory / DESCRIPTOR_LOG, fsync=fsync)
            for record in self._descriptor_log.read_all():
                self._register(record["document"], persist=False)
            graph_log = AppendLog(directory / GRAPH_LOG, fsync=fsync)
            self.graph = KnowledgeGraph.replay(self, graph_log.read_all(), log=graph_log)

    # -- SchemaView for the graph store ---------------------------------------

    def find_descriptor(self, title: str) -> Descriptor | None:
        return self.descriptors.get(title)

    def descriptor(self, title: str) -> Descriptor:
        try:
            return self.descriptors[title]
        except KeyError:
            raise UnknownTitleError(title) from None

    # -- descriptor registration ----------------------------------------------

    def register_descriptor(self, candidate: Any) -> tuple[Descriptor, dict[str, Any], list[str]]:
        """Validate, store and index a descriptor; generates and stores its
        bulk variant. Returns (descriptor, bulk document, settings warnings)."""
        with self.lock:
            return self._register(candidate, persist=True)

    def _register(self, candidate: Any, *, persist: bool) -> tuple[Descriptor, dict[str, Any], list[str]]:
        descriptor = validate_descriptor(self.meta, candidate, known=self.descriptors)
        if descriptor.title in self.descriptors:
            raise DuplicateTitleError(descriptor.title)
        doc_uri = normalize_uri(descriptor.id_uri)
        if self.registry.contains(doc_uri):
            raise ProjectError(f"descriptor id {doc_uri!r} already in use",
                               code="duplicate_id")
        warnings = validate_settings(descriptor, self.known_functions)

        bulk = generate_bulk_descriptor(descriptor)
        bulk_uri = normalize_uri(bulk["id"])
        self.registry.register(doc_uri, descriptor.document)
        self.registry.register(bulk_uri, bulk)
        try:
            for ref in iter_refs(descriptor.document):
                ensure_bundled_schemas(self.registry, urljoin(doc_uri, ref))
            self.registry.check_refs(doc_uri)
            self.registry.check_refs(bulk_uri)
        except SchemaEngineError as exc:
            self.registry.unregister(doc_uri)
            self.registry.unregister(bulk_uri)
            raise DescriptorError(str(exc), code="unresolvable_ref") from exc

        self.descriptors[descriptor.title] = descriptor
        self.documents[descriptor.title] = candidate
        self.bulk_descriptors[descriptor.title] = bulk
        if persist and self._descriptor_log is not None:
            self._descriptor_log.append(
                {"seq": len(self.descriptors), "document": candidate})
        return descriptor, bulk, warnings

    # -- hierarchy -------------------------------------------------------------

    def isa_closure(self, title: str) -> list[str]:
        """The title plus all transitive ancestors, breadth-first, ties
        within a level broken lexicographically."""
        descriptor = self.descriptor(title)
        if not descriptor.is_node:
            raise ProjectError(f"{title!r} is an edge descriptor, not a concept",
                               code="not_a_node")
        ordered = [title]
        seen = {title}
        level = [title]
        while level:
            parents: set[str] = set()
            for name in level:
                parents.update(self.descriptors[name].parents)
            level = sorted(parents - seen)
            ordered.extend(level)
            seen.update(level)
        return ordered

    def reachability(self) -> ReachabilityGraph:
        with self.lock:
            concepts = frozenset(
                t for t, d in self.descriptors.items() if d.is_node)
            roles = frozenset(
                (d.title, d.source_label, d.target_label, d.direction)
                for d in self.descriptors.values() if d.is_edge)
            isa_links = frozenset(
                (d.title, parent)
                for d in self.descriptors.values() if d.is_node
                for parent in d.parents)
        return ReachabilityGraph(concepts, roles, isa_links)

    # -- data upload -----------------------------------------------------------

    def upload_document(self, title: str, doc: Any):
        """Validate one document against its descriptor and upsert it."""
        with self.lock:
            descriptor = self.descriptor(title)
            report = self._document_report(descriptor, doc)
            if not report.valid:
                raise DataValidationError(
                    f"document rejected by descriptor {title!r}", report)
            if descriptor.is_node:
                return self.graph.upsert_node(title, doc)
            return self.graph.upsert_edge(title, doc)

    def upload_bulk(self, title: str, docs: Any) -> int:
        """Validate an array against the generated bulk descriptor and
        upsert every element; all-or-nothing per call."""
        with self.lock:
            descriptor = self.descriptor(title)
            if not isinstance(docs, list):
                raise DataValidationError(
                    "bulk upload body must be an array",
                    ValidationReport(False, (ValidationIssue(
                        "", "type", "expected type array"),)))
            bulk_uri = self.bulk_descriptors[title]["id"]
            report = self.registry.validate(bulk_uri, docs)
            issues = list(report.errors)
            for index, doc in enumerate(docs):
                for issue in document_issues(doc, edge=descriptor.is_edge):
                    issues.append(ValidationIssue(
                        f"/{index}{issue.path}", issue.keyword, issue.message))
            if issues:
                issues.sort(key=lambda e: (e.path, e.keyword, e.message))
                raise DataValidationError(
                    f"bulk upload rejected by descriptor {title!r}",
                    ValidationReport(False, tuple(issues)))
            for doc in docs:
                if descriptor.is_node:
                    self.graph.upsert_node(title, doc)
                else:
                    self.graph.upsert_edge(title, doc)
            return len(docs)

    def _document_report(self, descriptor: Descriptor, doc: Any) -> ValidationReport:
        report = self.registry.validate(descriptor.id_uri, doc)
        issues = list(report.errors)
        issues.extend(document_issues(doc, edge=descriptor.is_edge))
        issues.sort(key=lambda e: (e.path, e.keyword, e.message))
        return ValidationReport(not issues, tuple(issues))

    def summary(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "descriptors": len(self.descriptors),
            "nodes": self.graph.node_count,
            "edges": self.graph.edge_count,
        }


class ProjectManager:
    """Creates, loads and hands out projects.

    With a data directory, every subdirectory is loaded as a project on
    startup and new projects persist their journals there.
    """

    def __init__(self, data_dir: Path | str | None = None, *,
                 schema_base: str = DEFAULT_SCHEMA_BASE,
                 known_functions: frozenset[str] = DEFAULT_KNOWN_FUNCTIONS,
                 fsync: bool = False):
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.schema_base = schema_base
        self.known_functions = frozenset(known_functions)
        self.fsync = fsync
        self._lock = RLock()
        self._projects: dict[str, Project] = {}
        if self.data_dir is not None and self.data_dir.exists():
            for child in sorted(self.data_dir.iterdir()):
                if child.is_dir() and PROJECT_NAME_RE.match(child.name):
                    self._projects[child.name] = self._build(child.name)

    def _build(self, name: str) -> Project:
        directory = None if self.data_dir is None else self.data_dir / name
        return Project(
            name,
            schema_base=self.schema_base,
            known_functions=self.known_functions,
            directory=directory,
            fsync=self.fsync,
        )

    def create_project(self, name: Any) -> Project:
        if not isinstance(name, str) or not PROJECT_NAME_RE.match(name):
            raise InvalidProjectNameError(str(name))
        with self._lock:
            if name in self._projects:
                raise DuplicateProjectError(name)
            project = self._build(name)
            self._projects[name] = project
            return project

    def get(self, name: str) -> Project:
        try:
            return self._projects[name]
        except KeyError:
            raise UnknownProjectError(name) from None

    def names(self) -> list[str]:
        return sorted(self._projects)

    def summaries(self) -> list[dict[str, Any]]:
        return [self._projects[name].summary() for name in self.names()]
