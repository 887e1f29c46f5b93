"""Profiled workload ingestion and the bipartite table/query structure.

A workload is a set of tables with sizes and a set of queries with measured
cost and runtime in both backends, plus the scan edges connecting them.
Profiles arrive as input documents; this module validates them and exposes
neighbor lookups over the bipartite graph.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Mapping, Optional

from .money import dollars_str, micros_from_dollars


class WorkloadError(ValueError):
    """Raised when a workload document fails validation."""


class Backend(enum.Enum):
    PER_BYTE = "PER_BYTE"
    PER_COMPUTE = "PER_COMPUTE"


@dataclass(frozen=True)
class TableRef:
    name: str
    size: int  # bytes


@dataclass(frozen=True)
class QueryProfile:
    id: str
    cost_src: int  # micro-dollars in the source backend
    cost_dest: int  # micro-dollars in the destination backend
    runtime_src: float  # seconds
    runtime_dest: float  # seconds
    scans: frozenset[str]


@dataclass(frozen=True)
class WorkloadProfile:
    """Immutable, validated workload; safe to share across threads."""

    tables: tuple[TableRef, ...]
    queries: tuple[QueryProfile, ...]
    source_backend: Backend
    deadline: Optional[float] = None  # seconds; None means unconstrained

    @cached_property
    def table_by_name(self) -> dict[str, TableRef]:
        return {t.name: t for t in self.tables}

    @cached_property
    def query_by_id(self) -> dict[str, QueryProfile]:
        return {q.id: q for q in self.queries}

    @cached_property
    def readers(self) -> dict[str, frozenset[str]]:
        """Map table name -> ids of queries scanning it (may be empty)."""
        acc: dict[str, set[str]] = {t.name: set() for t in self.tables}
        for q in self.queries:
            for t in q.scans:
                acc[t].add(q.id)
        return {name: frozenset(ids) for name, ids in acc.items()}

    @property
    def edge_count(self) -> int:
        return sum(len(q.scans) for q in self.queries)


def _require_nonnegative(value, what: str):
    if value < 0:
        raise WorkloadError(f"negative measurement: {what}")
    return value


def _query_from_json(doc: Mapping) -> QueryProfile:
    qid = str(doc["id"])
    scans = doc.get("scans", [])
    if not scans:
        raise WorkloadError(f"query {qid!r} scans no tables")
    cost_src = micros_from_dollars(doc["cost_src"])
    cost_dest = micros_from_dollars(doc["cost_dest"])
    runtime_src = float(doc["runtime_src_s"])
    runtime_dest = float(doc["runtime_dest_s"])
    _require_nonnegative(cost_src, f"cost_src of {qid!r}")
    _require_nonnegative(cost_dest, f"cost_dest of {qid!r}")
    _require_nonnegative(runtime_src, f"runtime_src_s of {qid!r}")
    _require_nonnegative(runtime_dest, f"runtime_dest_s of {qid!r}")
    return QueryProfile(qid, cost_src, cost_dest, runtime_src, runtime_dest,
                        frozenset(str(t) for t in scans))


def load_workload(doc: Mapping) -> WorkloadProfile:
    """Validate a parsed workload document and resolve all cross-references."""
    try:
        backend = Backend(doc["source_backend"])
    except (KeyError, ValueError) as exc:
        raise WorkloadError(f"bad source_backend: {doc.get('source_backend')!r}") from exc

    deadline = doc.get("deadline_seconds")
    if deadline is not None:
        deadline = float(deadline)
        _require_nonnegative(deadline, "deadline_seconds")

    tables = []
    seen_tables: set[str] = set()
    for entry in doc.get("tables", []):
        name = str(entry["name"])
        if name in seen_tables:
            raise WorkloadError(f"duplicate identifier: table {name!r}")
        seen_tables.add(name)
        size = int(entry["size_bytes"])
        _require_nonnegative(size, f"size_bytes of {name!r}")
        tables.append(TableRef(name, size))

    queries = []
    seen_queries: set[str] = set()
    for entry in doc.get("queries", []):
        q = _query_from_json(entry)
        if q.id in seen_queries:
            raise WorkloadError(f"duplicate identifier: query {q.id!r}")
        seen_queries.add(q.id)
        for t in q.scans:
            if t not in seen_tables:
                raise WorkloadError(f"dangling edge: query {q.id!r} scans unknown table {t!r}")
        queries.append(q)

    return WorkloadProfile(tuple(tables), tuple(queries), backend, deadline)


def load_workload_path(path) -> WorkloadProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return load_workload(json.load(fh))


def workload_to_json(workload: WorkloadProfile) -> dict:
    """Serialize back to the input schema; load_workload(result) round-trips."""
    doc: dict = {"source_backend": workload.source_backend.value}
    if workload.deadline is not None:
        doc["deadline_seconds"] = workload.deadline
    doc["tables"] = [{"name": t.name, "size_bytes": t.size} for t in workload.tables]
    doc["queries"] = [
        {
            "id": q.id,
            "cost_src": dollars_str(q.cost_src),
            "cost_dest": dollars_str(q.cost_dest),
            "runtime_src_s": q.runtime_src,
            "runtime_dest_s": q.runtime_dest,
            "scans": sorted(q.scans),
        }
        for q in workload.queries
    ]
    return doc


def save_workload(workload: WorkloadProfile, path) -> None:
    Path(path).write_text(json.dumps(workload_to_json(workload), indent=2) + "\n",
                          encoding="utf-8")


def neighbors(workload: WorkloadProfile, side: str, ident: str) -> frozenset[str]:
    """Queries scanning a table (side="table") or tables a query scans (side="query")."""
    if side == "table":
        hit = workload.readers.get(ident)
        if hit is None:
            raise KeyError(f"not found: table {ident!r}")
        return hit
    if side == "query":
        q = workload.query_by_id.get(ident)
        if q is None:
            raise KeyError(f"not found: query {ident!r}")
        return q.scans
    raise ValueError(f"side must be 'table' or 'query', got {side!r}")
