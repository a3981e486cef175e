"""HTTP layer: projects, descriptor upload, data upload, graph reads.

Every non-2xx response body is a single error object with a machine
``code``, a human ``message``, and where applicable a JSON Pointer
``path`` into the request body plus an embedded validation report under
``details``. Responses are serialized canonically (sorted members) so
exports are byte-reproducible.

Status mapping: 400 malformed JSON or invalid project name, 404 unknown
route/project/title/label/id, 409 duplicates, 422 semantic validation
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
from pathlib import Path
from typing import Any

import uvicorn
from fastapi import FastAPI, Request, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from .config import ConfigError, ServiceConfig, load_config
from .descriptors import (
    BASIC_DEFINITIONS_PATH,
    EDGE_VALIDATOR_PATH,
    NODE_VALIDATOR_PATH,
    DescriptorError,
    MetaSchemaViolationError,
    bundled_schema,
)
from .graph_store import GraphStoreError, UnknownLabelError
from .ontology import (
    DataValidationError,
    DuplicateProjectError,
    DuplicateTitleError,
    InvalidProjectNameError,
    ProjectError,
    ProjectManager,
    UnknownProjectError,
    UnknownTitleError,
)
from .schema_engine import canonical_json


class CanonicalJSONResponse(Response):
    media_type = "application/json"

    def render(self, content: Any) -> bytes:
        return canonical_json(content).encode("utf-8")


class MalformedBodyError(Exception):
    pass


def api_error(status: int, code: str, message: str, *,
              path: str | None = None,
              details: Any = None) -> CanonicalJSONResponse:
    body: dict[str, Any] = {"code": code, "message": message}
    if path is not None:
        body["path"] = path
    if details is not None:
        body["details"] = details
    return CanonicalJSONResponse(body, status_code=status)


def _domain_error(exc: Exception) -> CanonicalJSONResponse:
    """Map a domain exception onto the error contract."""
    if isinstance(exc, InvalidProjectNameError):
        return api_error(400, exc.code, exc.message)
    if isinstance(exc, (UnknownProjectError, UnknownTitleError, UnknownLabelError)):
        return api_error(404, exc.code, exc.message)
    if isinstance(exc, (DuplicateProjectError, DuplicateTitleError)):
        return api_error(409, exc.code, exc.message)
    if isinstance(exc, DataValidationError):
        errors = exc.report.errors
        return api_error(422, exc.code, exc.message,
                         path=errors[0].path if errors else None,
                         details=exc.report.to_json())
    if isinstance(exc, MetaSchemaViolationError):
        details = exc.report.to_json() if exc.report is not None else None
        return api_error(422, exc.code, exc.message, details=details)
    if isinstance(exc, DescriptorError):
        return api_error(422, exc.code, exc.message)
    if isinstance(exc, ProjectError):
        status = 409 if exc.code.startswith("duplicate") else 422
        return api_error(status, exc.code, exc.message)
    if isinstance(exc, GraphStoreError):
        return api_error(422, exc.code, exc.message)
    raise exc


async def _read_json(request: Request) -> Any:
    raw = await request.body()
    try:
        return json.loads(raw)
    except ValueError:
        raise MalformedBodyError from None


def create_app(config: ServiceConfig | None = None,
               manager: ProjectManager | None = None) -> FastAPI:
    config = config if config is not None else ServiceConfig()
    if manager is None:
        manager = ProjectManager(
            config.data_dir,
            schema_base=config.schema_base,
            known_functions=config.known_functions,
            fsync=config.fsync,
        )
    app = FastAPI(title="kgserve", docs_url=None, redoc_url=None,
                  openapi_url=None)
    app.state.manager = manager

    @app.exception_handler(MalformedBodyError)
    async def _malformed(request: Request, exc: MalformedBodyError):
        return api_error(400, "malformed_json", "request body is not valid JSON")

    @app.exception_handler(ProjectError)
    async def _project_error(request: Request, exc: ProjectError):
        return _domain_error(exc)

    @app.exception_handler(DescriptorError)
    async def _descriptor_error(request: Request, exc: DescriptorError):
        return _domain_error(exc)

    @app.exception_handler(GraphStoreError)
    async def _store_error(request: Request, exc: GraphStoreError):
        return _domain_error(exc)

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(
            exc.status_code, "http_error")
        return api_error(exc.status_code, code, str(exc.detail))

    @app.exception_handler(Exception)
    async def _unhandled(request: Request, exc: Exception):
        return api_error(500, "internal_error", "internal server error")

    # -- projects --------------------------------------------------------

    @app.post("/projects")
    async def create_project(request: Request):
        body = await _read_json(request)
        if not isinstance(body, dict) or "name" not in body:
            return api_error(400, "invalid_name",
                             "body must be an object with a \"name\" member")
        project = manager.create_project(body["name"])
        return CanonicalJSONResponse(project.summary(), status_code=201)

    @app.get("/projects")
    async def list_projects():
        return CanonicalJSONResponse(manager.summaries())

    @app.get("/projects/{name}")
    async def project_summary(name: str):
        return CanonicalJSONResponse(manager.get(name).summary())

    # -- descriptors -----------------------------------------------------

    @app.post("/projects/{name}/descriptors")
    async def upload_descriptor(name: str, request: Request):
        project = manager.get(name)
        body = await _read_json(request)
        descriptor, bulk, warnings = project.register_descriptor(body)
        result = {
            "title": descriptor.title,
            "role": descriptor.role,
            "bulk_title": bulk["title"],
            "warnings": warnings,
        }
        return CanonicalJSONResponse(result, status_code=201)

    @app.get("/projects/{name}/descriptors")
    async def list_descriptors(name: str):
        project = manager.get(name)
        listing = [
            {"title": d.title, "role": d.role}
            for _, d in sorted(project.descriptors.items())
        ]
        return CanonicalJSONResponse(listing)

    @app.get("/projects/{name}/descriptors/{title}")
    async def get_descriptor(name: str, title: str):
        project = manager.get(name)
        project.descriptor(title)
        return CanonicalJSONResponse(project.documents[title])

    @app.get("/projects/{name}/descriptors/{title}/bulk")
    async def get_bulk_descriptor(name: str, title: str):
        project = manager.get(name)
        project.descriptor(title)
        return CanonicalJSONResponse(project.bulk_descriptors[title])

    @app.get("/projects/{name}/schema")
    async def get_reachability(name: str):
        return CanonicalJSONResponse(manager.get(name).reachability().to_json())

    # -- data ------------------------------------------------------------

    @app.post("/projects/{name}/data/{title}/bulk")
    async def upload_bulk(name: str, title: str, request: Request):
        project = manager.get(name)
        body = await _read_json(request)
        inserted = project.upload_bulk(title, body)
        return CanonicalJSONResponse({"inserted": inserted}, status_code=201)

    @app.post("/projects/{name}/data/{title}")
    async def upload_data(name: str, title: str, request: Request):
        project = manager.get(name)
        body = await _read_json(request)
        record = project.upload_document(title, body)
        return CanonicalJSONResponse(
            {"label": record.label, "id": record.id}, status_code=201)

    # -- graph reads -----------------------------------------------------

    @app.get("/projects/{name}/graph/nodes/{label}/{node_id}")
    async def get_node(name: str, label: str, node_id: str):
        project = manager.get(name)
        with project.lock:
            record = project.graph.get_node(label, node_id)
        if record is None:
            return api_error(404, "unknown_id",
                             f"no {label!r} node with id {node_id!r}")
        return CanonicalJSONResponse(record.to_json())

    @app.get("/projects/{name}/graph/export")
    async def export_graph(name: str):
        project = manager.get(name)
        with project.lock:
            snapshot = project.graph.export()
        return CanonicalJSONResponse(snapshot)

    # -- bundled meta-schemas ---------------------------------------------

    def _mount_schema(relpath: str) -> None:
        body = bundled_schema(relpath)

        async def serve_schema():
            return CanonicalJSONResponse(body)

        app.get("/schemas/" + relpath)(serve_schema)

    for relpath in (NODE_VALIDATOR_PATH, EDGE_VALIDATOR_PATH,
                    BASIC_DEFINITIONS_PATH):
        _mount_schema(relpath)

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="kgserve-server",
        description="Knowledge-graph descriptor/data service.")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file (keys: listen, data_dir, "
                             "fsync, known_functions)")
    parser.add_argument("--listen", default=None,
                        help="host:port to bind (default 127.0.0.1:8000)")
    parser.add_argument("--data-dir", default=None,
                        help="directory for per-project journals; "
                             "omitted means in-memory only")
    parser.add_argument("--fsync", choices=["always", "never"], default=None,
                        help="fsync every journal append (default never)")
    parser.add_argument("--known-functions", default=None,
                        help="comma separated settings function names "
                             "(default unique,index)")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        overrides: dict[str, Any] = {}
        if args.listen is not None:
            overrides["listen"] = args.listen
        if args.data_dir is not None:
            overrides["data_dir"] = Path(args.data_dir)
        if args.fsync is not None:
            overrides["fsync"] = args.fsync == "always"
        if args.known_functions is not None:
            overrides["known_functions"] = frozenset(
                v.strip() for v in args.known_functions.split(",") if v.strip())
        config = dataclasses.replace(config, **overrides)
    except ConfigError as exc:
        parser.error(str(exc))
    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="warning")


if __name__ == "__main__":
    main()
