"""Benchmark CLI: seeded student-mobility fixture, single vs bulk upload
timing, CSV reporting.

The fixture models exchange records between higher-education institutions:
node documents for institutions (HE, with an abstract institute parent),
countries, subjects and academic years, and one mobility edge document per
record carrying origin/destination country, subject, year, distance and
bearing. Same seed, same bytes.

Timings are wall-clock around each HTTP request, measured client side,
after five discarded warm-up requests. The tool reports ratios (bulk vs
single for equal n); absolute numbers are machine-bound and not targets.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import httpx

from .descriptors import DEFAULT_SCHEMA_BASE

MODE_SINGLE = "single"
MODE_BULK = "bulk"

WARMUP_REQUESTS = 5

COUNTRIES = (
    ("D", "DE"), ("UK", "UK"), ("F", "FR"), ("E", "ES"), ("I", "IT"),
    ("NL", "NL"), ("B", "BE"), ("PL", "PL"), ("S", "SE"), ("SF", "FI"),
)
CITIES = (
    "KONSTAN", "BATH", "PARIS", "MADRID", "ROMA", "DELFT", "LEUVEN",
    "WARSZAW", "LUND", "HELSINK", "BERLIN", "LYON", "GRANADA", "MILANO",
)
SUBJECTS = tuple(str(i) for i in range(1, 11))
YEARS = ("2008-09", "2009-10", "2010-11", "2011-12", "2012-13", "2013-14")

EDGE_TITLE = "mobility"
NODE_TITLES = ("he", "country", "subject", "year")


class BenchError(Exception):
    pass


class BenchAborted(BenchError):
    """A request failed mid-run; carries the partial result."""

    def __init__(self, message: str, partial: "BenchResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class BenchResult:
    mode: str
    n_records: int
    wall_times_ms: tuple[float, ...]
    complete: bool = True

    @property
    def total_ms(self) -> float:
        return sum(self.wall_times_ms)

    @property
    def throughput_rps(self) -> float:
        return self.n_records / (self.total_ms / 1000.0) if self.total_ms else 0.0


@dataclass(frozen=True)
class Fixture:
    descriptors: tuple[dict[str, Any], ...]  # in registration order
    nodes: dict[str, list[dict[str, Any]]]   # title -> documents
    edges: list[dict[str, Any]]              # mobility documents


def _node_descriptor(base: str, title: str, *, parents: list[str] | None = None,
                     extra_properties: dict[str, Any] | None = None) -> dict[str, Any]:
    properties: dict[str, Any] = {
        "id": {"$ref": "../basic/basic_definitions.json#/definitions/id"},
        "name": {"type": "string", "minLength": 1, "maxLength": 1000},
    }
    if extra_properties:
        properties.update(extra_properties)
    doc: dict[str, Any] = {
        "$schema": base + "validators/node_validator.json#",
        "id": base + f"erasmus/{title}.json#",
        "title": title,
        "type": "object",
        "properties": properties,
        "additionalProperties": {
            "$ref": "../basic/basic_definitions.json#/definitions/default_property"},
        "required": ["id", "name"],
        "graph_element": "node",
    }
    if parents is not None:
        doc["parents"] = parents
    return doc


def fixture_descriptors(base: str = DEFAULT_SCHEMA_BASE) -> tuple[dict[str, Any], ...]:
    """The six descriptors of the mobility model, in an order where every
    parent and endpoint reference points backwards."""
    mobility = {
        "$schema": base + "validators/edge_validator.json#",
        "id": base + "erasmus/mobility.json#",
        "title": EDGE_TITLE,
        "type": "object",
        "properties": {
            "id": {"$ref": "../basic/basic_definitions.json#/definitions/id"},
            "name": {"type": "string", "minLength": 1, "maxLength": 1000},
            "distance": {"type": "integer", "minimum": 0},
            "direction": {"type": "number", "minimum": 0, "maximum": 360},
        },
        "additionalProperties": {
            "$ref": "../basic/basic_definitions.json#/definitions/default_property"},
        "required": ["id", "name"],
        "graph_element": "edge",
        "direction": "single",
        "source_label": "he",
        "target_label": "he",
    }
    return (
        _node_descriptor(base, "institute"),
        _node_descriptor(base, "he", parents=["institute"],
                         extra_properties={"country": {"type": "string"}}),
        _node_descriptor(base, "country"),
        _node_descriptor(base, "subject"),
        _node_descriptor(base, "year"),
        mobility,
    )


def generate_fixture(n: int, seed: int, *,
                     base: str = DEFAULT_SCHEMA_BASE) -> Fixture:
    """n mobility records plus the node documents they mention,
    deterministic for a given seed. Node documents are deduplicated by id
    and sorted by id."""
    if n < 1:
        raise BenchError("n must be at least 1")
    rng = random.Random(seed)
    institutions = []
    for prefix, country in COUNTRIES:
        for city in rng.sample(CITIES, 4):
            code = f"{prefix:<3}{city}{rng.randint(1, 99):02d}"
            institutions.append((code, country))

    he: dict[str, dict[str, Any]] = {}
    countries: dict[str, dict[str, Any]] = {}
    subjects: dict[str, dict[str, Any]] = {}
    years: dict[str, dict[str, Any]] = {}
    edges = []
    for i in range(1, n + 1):
        src, dst = rng.sample(institutions, 2)
        subject = rng.choice(SUBJECTS)
        year = rng.choice(YEARS)
        for code, country in (src, dst):
            he[code] = {"id": code, "name": code, "country": country}
            countries[country] = {"id": country, "name": country}
        subjects[subject] = {"id": subject, "name": f"subject {subject}"}
        years[year] = {"id": year, "name": year}
        edges.append({
            "id": f"m{i:06d}",
            "name": f"{src[0]} -> {dst[0]}",
            "source": src[0],
            "target": dst[0],
            "from_country": src[1],
            "to_country": dst[1],
            "subject": subject,
            "year": year,
            "distance": rng.randint(50, 3500),
            "direction": round(rng.uniform(0.0, 360.0), 12),
        })

    def ordered(docs: dict[str, dict[str, Any]]) -> list[dict[str, Any]]:
        return [docs[key] for key in sorted(docs)]

    nodes = {
        "he": ordered(he),
        "country": ordered(countries),
        "subject": ordered(subjects),
        "year": ordered(years),
    }
    return Fixture(fixture_descriptors(base), nodes, edges)


def write_fixture(fixture: Fixture, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "descriptors.json": list(fixture.descriptors),
        "nodes.json": fixture.nodes,
        "edges.json": {EDGE_TITLE: fixture.edges},
    }
    written = []
    for name, payload in files.items():
        path = out_dir / name
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


def load_fixture(out_dir: Path) -> Fixture:
    descriptors = json.loads((out_dir / "descriptors.json").read_text("utf-8"))
    nodes = json.loads((out_dir / "nodes.json").read_text("utf-8"))
    edges = json.loads((out_dir / "edges.json").read_text("utf-8"))
    return Fixture(tuple(descriptors), nodes, edges[EDGE_TITLE])


# -- driving the service -------------------------------------------------


def _post(client: httpx.Client, path: str, body: Any,
          what: str) -> httpx.Response:
    try:
        response = client.post(path, json=body)
    except httpx.HTTPError as exc:
        raise BenchError(f"{what} failed: {exc}") from exc
    if response.status_code // 100 != 2:
        raise BenchError(
            f"{what} failed: HTTP {response.status_code} {response.text[:300]}")
    return response


def setup_project(client: httpx.Client, project: str, fixture: Fixture) -> None:
    """Create the project, register descriptors, load node documents.
    None of this is timed."""
    _post(client, "/projects", {"name": project},
          f"creating project {project!r}")
    for descriptor in fixture.descriptors:
        _post(client, f"/projects/{project}/descriptors", descriptor,
              f"registering descriptor {descriptor.get('title')!r}")
    for title in NODE_TITLES:
        _post(client, f"/projects/{project}/data/{title}/bulk",
              fixture.nodes[title], f"loading {title} nodes")


def _warm_up(client: httpx.Client, project: str, fixture: Fixture) -> None:
    # re-upserting an existing node keeps counts stable while exercising
    # the parse/validate/write path
    doc = fixture.nodes["he"][0]
    for _ in range(WARMUP_REQUESTS):
        _post(client, f"/projects/{project}/data/he", doc, "warm-up request")


def _chunks(items: list[Any], size: int) -> Iterable[list[Any]]:
    for start in range(0, len(items), size):
        yield items[start:start + size]


def run_bench(url: str, project: str, mode: str, n: int, batch: int = 1000,
              seed: int = 1, *, clients: int = 1,
              client: httpx.Client | None = None,
              fixture: Fixture | None = None,
              skip_setup: bool = False) -> BenchResult:
    """Upload n mobility edges in the given mode and time each request.

    ``client`` may be injected (tests); otherwise one is opened against
    ``url``. ``clients`` > 1 issues requests from a thread pool and is
    outside the measured contract.
    """
    if mode not in (MODE_SINGLE, MODE_BULK):
        raise BenchError(f"unknown mode {mode!r}")
    fixture = fixture if fixture is not None else generate_fixture(n, seed)
    own_client = client is None
    client = client if client is not None else httpx.Client(
        base_url=url, timeout=60.0)
    try:
        if not skip_setup:
            setup_project(client, project, fixture)
        _warm_up(client, project, fixture)

        edges = fixture.edges[:n]
        if mode == MODE_SINGLE:
            payloads = [(f"/projects/{project}/data/{EDGE_TITLE}", doc)
                        for doc in edges]
        else:
            payloads = [(f"/projects/{project}/data/{EDGE_TITLE}/bulk", group)
                        for group in _chunks(edges, batch)]

        times: list[float] = []

        def timed_post(item: tuple[str, Any]) -> float:
            path, body = item
            t0 = time.perf_counter()
            _post(client, path, body, f"insert to {path}")
            return (time.perf_counter() - t0) * 1000.0

        try:
            if clients <= 1:
                for item in payloads:
                    times.append(timed_post(item))
            else:
                with ThreadPoolExecutor(max_workers=clients) as pool:
                    times.extend(pool.map(timed_post, payloads))
        except BenchError as exc:
            raise BenchAborted(
                str(exc), BenchResult(mode, n, tuple(times), complete=False)
            ) from exc
        return BenchResult(mode, n, tuple(times))
    finally:
        if own_client:
            client.close()


# -- reporting ------------------------------------------------------------


def write_csv(results: list[BenchResult], out: Path) -> None:
    """mode,n,request_index,ms rows; an incomplete run is flagged with a
    trailing comment line."""
    with out.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["mode", "n", "request_index", "ms"])
        for result in results:
            for index, ms in enumerate(result.wall_times_ms):
                writer.writerow([result.mode, result.n_records, index,
                                 f"{ms:.3f}"])
        for result in results:
            if not result.complete:
                handle.write(f"# incomplete: {result.mode} run aborted after "
                             f"{len(result.wall_times_ms)} requests\n")


def read_csv(path: Path) -> tuple[list[BenchResult], bool]:
    rows: dict[tuple[str, int], list[float]] = {}
    complete = True
    with path.open("r", encoding="utf-8", newline="") as handle:
        for line_no, line in enumerate(handle):
            if line.startswith("#"):
                complete = False
                continue
            row = next(csv.reader([line]))
            if line_no == 0:
                continue
            mode, n, _, ms = row
            rows.setdefault((mode, int(n)), []).append(float(ms))
    results = [
        BenchResult(mode, n, tuple(times), complete=complete)
        for (mode, n), times in sorted(rows.items())
    ]
    return results, complete


def summarize(results: list[BenchResult], *, complete: bool = True) -> str:
    lines = [f"{'mode':<8}{'n':>8}{'requests':>10}{'total ms':>12}{'rps':>12}"]
    for result in results:
        lines.append(
            f"{result.mode:<8}{result.n_records:>8}"
            f"{len(result.wall_times_ms):>10}{result.total_ms:>12.1f}"
            f"{result.throughput_rps:>12.1f}")
    by_key = {(r.mode, r.n_records): r for r in results}
    for (mode, n), result in sorted(by_key.items()):
        if mode != MODE_SINGLE:
            continue
        bulk = by_key.get((MODE_BULK, n))
        if bulk and bulk.total_ms:
            lines.append(
                f"speedup (bulk vs single, n={n}): "
                f"{result.total_ms / bulk.total_ms:.1f}x")
    if not complete:
        lines.append("warning: CSV contains an incomplete run")
    return "\n".join(lines)


# -- CLI -------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kgserve-bench",
        description="Fixture generation and single-vs-bulk upload timing.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_fixture = sub.add_parser("fixture", help="write a seeded fixture")
    p_fixture.add_argument("--n", type=int, default=1000)
    p_fixture.add_argument("--seed", type=int, default=1)
    p_fixture.add_argument("--out", type=Path, required=True,
                           help="output directory")

    p_bench = sub.add_parser("bench", help="time uploads against a server")
    p_bench.add_argument("--url", default="http://127.0.0.1:8000")
    p_bench.add_argument("--project", required=True)
    p_bench.add_argument("--mode", choices=[MODE_SINGLE, MODE_BULK],
                         required=True)
    p_bench.add_argument("--n", type=int, default=1000)
    p_bench.add_argument("--batch", type=int, default=1000)
    p_bench.add_argument("--seed", type=int, default=1)
    p_bench.add_argument("--clients", type=int, default=1,
                         help="parallel client threads (default 1)")
    p_bench.add_argument("--out", type=Path, default=None,
                         help="CSV path (default <mode>.csv)")

    p_report = sub.add_parser("report", help="summarize a timing CSV")
    p_report.add_argument("--out", type=Path, required=True,
                          help="CSV path to read")

    args = parser.parse_args(argv)

    if args.verb == "fixture":
        fixture = generate_fixture(args.n, args.seed)
        for path in write_fixture(fixture, args.out):
            print(path)
        return 0

    if args.verb == "bench":
        out = args.out if args.out is not None else Path(f"{args.mode}.csv")
        try:
            result = run_bench(args.url, args.project, args.mode, args.n,
                               args.batch, args.seed, clients=args.clients)
        except BenchAborted as exc:
            write_csv([exc.partial], out)
            print(f"aborted: {exc}", file=sys.stderr)
            print(summarize([exc.partial], complete=False))
            return 1
        except BenchError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        write_csv([result], out)
        print(summarize([result]))
        return 0

    results, complete = read_csv(args.out)
    print(summarize(results, complete=complete))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
