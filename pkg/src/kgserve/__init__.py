"""Schema-validated knowledge-graph service.

Descriptors written in an extended JSON Schema dialect define node and
edge types; uploaded data is validated against them and materialized as
a labelled property graph whose schema (the reachability graph) is
derived from the descriptors themselves.
"""

from .config import ServiceConfig, load_config
from .descriptors import (
    Descriptor,
    DescriptorError,
    MetaSchema,
    generate_bulk_descriptor,
    validate_descriptor,
    validate_settings,
)
from .graph_store import EdgeRecord, KnowledgeGraph, NodeRecord
from .ontology import Project, ProjectManager, ReachabilityGraph
from .schema_engine import (
    SchemaRegistry,
    ValidationIssue,
    ValidationReport,
    canonical_json,
)
from .service import create_app

__all__ = [
    "Descriptor",
    "DescriptorError",
    "EdgeRecord",
    "KnowledgeGraph",
    "MetaSchema",
    "NodeRecord",
    "Project",
    "ProjectManager",
    "ReachabilityGraph",
    "SchemaRegistry",
    "ServiceConfig",
    "ValidationIssue",
    "ValidationReport",
    "canonical_json",
    "create_app",
    "generate_bulk_descriptor",
    "load_config",
    "validate_descriptor",
    "validate_settings",
]

__version__ = "0.1.0"
