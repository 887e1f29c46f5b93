"""Single-query cut search over an operator DAG.

Cutting a query plan at one node splits it into an upstream subquery (billed
per compute-second) and a downstream subquery (billed per byte scanned). The
search ranks candidate cut nodes by their savings opportunity, pays to
evaluate the upstream runtime only for the most promising ones, and tightens
the remaining candidates' opportunities after each measurement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Mapping, Optional, Union

from .cost_model import (
    PriceBook,
    migration_cost,
    per_byte_query_cost,
    per_compute_query_cost,
)
from .inter import DEFAULT_BANDWIDTH_BYTES_PER_S
from .money import dollars_str, micros_from_dollars
from .workload import TableRef

FrOracle = Union[Mapping[str, float], Callable[[str], float]]


class DagError(ValueError):
    """Raised when a query DAG document fails validation."""


@dataclass(frozen=True)
class DagNode:
    id: str
    operator_kind: str
    output_cardinality: int  # rows
    row_size: int  # bytes per row
    children: tuple[str, ...]  # upstream inputs

    @property
    def output_bytes(self) -> int:
        return self.output_cardinality * self.row_size


@dataclass(frozen=True)
class QueryDag:
    """Operator DAG of one query with per-node output sizes.

    ``fr_values`` holds measured upstream-subquery runtimes when the profile
    carries them (oracle mode); otherwise the caller injects runtimes per
    evaluation. ``downstream_runtime`` is an optional oracle for the runtime
    of the part below a cut, used only for deadline checks.
    """

    query_id: str
    nodes: tuple[DagNode, ...]
    root: str
    base_tables: dict[str, TableRef]  # leaf node id -> table
    baseline_cost_src: int
    baseline_runtime_src: float
    fr_values: Optional[dict[str, float]] = None
    downstream_runtime: Optional[dict[str, float]] = None

    @cached_property
    def node_by_id(self) -> dict[str, DagNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def upstream_sets(self) -> dict[str, frozenset[str]]:
        """Node id -> that node plus everything feeding into it."""
        acc: dict[str, frozenset[str]] = {}

        def visit(node_id: str) -> frozenset[str]:
            hit = acc.get(node_id)
            if hit is None:
                node = self.node_by_id[node_id]
                members = {node_id}
                for child in node.children:
                    members |= visit(child)
                hit = acc[node_id] = frozenset(members)
            return hit

        for n in self.nodes:
            visit(n.id)
        return acc

    @cached_property
    def leaves(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if not n.children)

    def downstream_leaves(self, node_id: str) -> tuple[str, ...]:
        """Base-table leaves that feed the subquery below a cut at node_id."""
        upstream = self.upstream_sets[node_id]
        return tuple(leaf for leaf in self.leaves if leaf not in upstream)

    def is_downstream_of(self, node_id: str, other: str) -> bool:
        return other != node_id and other in self.upstream_sets[node_id]


def load_query_dag(doc: Mapping) -> QueryDag:
    """Validate a query DAG document: acyclic, single root, leaves are tables."""
    raw_nodes = doc.get("nodes", [])
    if not raw_nodes:
        raise DagError("empty DAG")
    nodes = []
    base_tables = {}
    seen = set()
    for entry in raw_nodes:
        nid = str(entry["id"])
        if nid in seen:
            raise DagError(f"duplicate identifier: node {nid!r}")
        seen.add(nid)
        card = int(entry["card"])
        row_size = int(entry["row_size_bytes"])
        if card < 0 or row_size < 0:
            raise DagError(f"negative measurement: node {nid!r}")
        children = tuple(str(c) for c in entry.get("children", []))
        nodes.append(DagNode(nid, str(entry.get("op", "")), card, row_size, children))
        if "base_table" in entry:
            tbl = entry["base_table"]
            size = int(tbl["size_bytes"])
            if size < 0:
                raise DagError(f"negative measurement: base table of {nid!r}")
            base_tables[nid] = TableRef(str(tbl["name"]), size)

    by_id = {n.id: n for n in nodes}
    referenced = set()
    for n in nodes:
        for child in n.children:
            if child not in by_id:
                raise DagError(f"dangling edge: node {n.id!r} reads unknown node {child!r}")
            referenced.add(child)

    roots = [n.id for n in nodes if n.id not in referenced]
    if len(roots) != 1:
        raise DagError(f"expected exactly one root, found {sorted(roots)}")
    root = roots[0]

    # Cycle check and root reachability in one downstream walk from the root.
    order = []
    state: dict[str, int] = {}
    stack = [(root, 0)]
    while stack:
        nid, phase = stack.pop()
        if phase == 0:
            if state.get(nid) == 1:
                raise DagError("cycle detected")
            if state.get(nid) == 2:
                continue
            state[nid] = 1
            stack.append((nid, 1))
            for child in by_id[nid].children:
                if state.get(child) != 2:
                    stack.append((child, 0))
        else:
            state[nid] = 2
            order.append(nid)
    unreachable = seen - set(order)
    if unreachable:
        raise DagError(f"nodes cannot reach the root: {sorted(unreachable)}")

    for n in nodes:
        if not n.children and n.id not in base_tables:
            raise DagError(f"leaf {n.id!r} carries no base table")
        if n.children and n.id in base_tables:
            raise DagError(f"non-leaf {n.id!r} carries a base table")

    fr_entries = {n.id: entry.get("fr_s") for n, entry in zip(nodes, raw_nodes)}
    fr_values = None
    if all(v is not None for v in fr_entries.values()):
        fr_values = {nid: float(v) for nid, v in fr_entries.items()}
        for v in fr_values.values():
            if v < 0:
                raise DagError("negative measurement: fr_s")

    down_entries = {
        n.id: float(entry["downstream_runtime_s"])
        for n, entry in zip(nodes, raw_nodes)
        if "downstream_runtime_s" in entry
    }

    dag = QueryDag(
        query_id=str(doc.get("query_id", "")),
        nodes=tuple(nodes),
        root=root,
        base_tables=base_tables,
        baseline_cost_src=micros_from_dollars(doc["baseline_cost_src"]),
        baseline_runtime_src=float(doc["baseline_runtime_src_s"]),
        fr_values=fr_values,
        downstream_runtime=down_entries or None,
    )
    if dag.baseline_cost_src < 0 or dag.baseline_runtime_src < 0:
        raise DagError("negative measurement: baseline")
    if fr_values is not None:
        _check_fr_monotonic(dag, fr_values)
    return dag


def _check_fr_monotonic(dag: QueryDag, fr: Mapping[str, float]) -> None:
    # A node's upstream subquery contains each child's, so its runtime cannot
    # be smaller than any child's.
    for node in dag.nodes:
        for child in node.children:
            if fr[node.id] < fr[child]:
                raise DagError(
                    "runtime oracle violates monotonicity: "
                    f"fr({node.id!r}) < fr({child!r})"
                )


def load_query_dag_path(path) -> QueryDag:
    with open(path, "r", encoding="utf-8") as fh:
        return load_query_dag(json.load(fh))


def dag_to_json(dag: QueryDag) -> dict:
    doc = {
        "query_id": dag.query_id,
        "baseline_cost_src": dollars_str(dag.baseline_cost_src),
        "baseline_runtime_src_s": dag.baseline_runtime_src,
        "nodes": [],
    }
    for n in dag.nodes:
        entry: dict = {
            "id": n.id,
            "op": n.operator_kind,
            "card": n.output_cardinality,
            "row_size_bytes": n.row_size,
            "children": list(n.children),
        }
        if n.id in dag.base_tables:
            tbl = dag.base_tables[n.id]
            entry["base_table"] = {"name": tbl.name, "size_bytes": tbl.size}
        if dag.fr_values is not None:
            entry["fr_s"] = dag.fr_values[n.id]
        if dag.downstream_runtime and n.id in dag.downstream_runtime:
            entry["downstream_runtime_s"] = dag.downstream_runtime[n.id]
        doc["nodes"].append(entry)
    return doc


def save_query_dag(dag: QueryDag, path) -> None:
    Path(path).write_text(json.dumps(dag_to_json(dag), indent=2) + "\n", encoding="utf-8")


def cut_costs(
    dag: QueryDag,
    node_id: str,
    prices: PriceBook,
    scan_migrated_output: bool = True,
) -> tuple[int, int]:
    """(downstream per-byte cost, migration cost) of a cut at node_id.

    Migration ships the node's output once plus every base table the
    downstream subquery still reads. The downstream per-byte bill covers
    those base-table scans and, unless ``scan_migrated_output`` is off, the
    scan of the shipped intermediate itself.
    """
    node = dag.node_by_id.get(node_id)
    if node is None:
        raise KeyError(f"not found: node {node_id!r}")
    down_leaves = dag.downstream_leaves(node_id)

    scan_bytes = node.output_bytes if scan_migrated_output else 0
    for leaf in down_leaves:
        scan_bytes += dag.node_by_id[leaf].output_bytes
    scan_cost = per_byte_query_cost(scan_bytes, prices)

    # A table read by several downstream scan operators migrates once.
    down_tables = {dag.base_tables[leaf].name: dag.base_tables[leaf].size
                   for leaf in down_leaves}
    move = migration_cost(node.output_bytes, prices)
    for name in sorted(down_tables):
        move += migration_cost(down_tables[name], prices)
    return scan_cost, move


def opportunity(
    dag: QueryDag,
    node_id: str,
    prices: PriceBook,
    scan_migrated_output: bool = True,
) -> int:
    """Upper bound on savings from a cut at node_id, before paying upstream runtime.

    Negative means the cut can never beat running the whole query in the
    source backend.
    """
    scan_cost, move = cut_costs(dag, node_id, prices, scan_migrated_output)
    return dag.baseline_cost_src - (move + scan_cost)


@dataclass
class CutEvaluation:
    node: str
    opportunity: int  # bound at evaluation time
    fr_evaluated: bool
    actual_savings: Optional[int] = None
    feasible: bool = True


@dataclass(frozen=True)
class IntraPlanResult:
    """Outcome of a cut search; ``cut is None`` means keep the baseline."""

    query_id: str
    cut: Optional[CutEvaluation]
    plan_cost: int
    baseline_cost: int
    search_cost: int  # compute bill for the upstream runtimes evaluated
    fr_evaluations: int
    evaluations: tuple[CutEvaluation, ...]
    downstream_unmodeled: bool = False

    @property
    def savings(self) -> int:
        return self.baseline_cost - self.plan_cost


def _resolve_oracle(dag: QueryDag, fr_oracle: Optional[FrOracle]) -> Callable[[str], float]:
    if fr_oracle is None:
        fr_oracle = dag.fr_values
    if fr_oracle is None:
        raise DagError("no upstream-runtime oracle: profile has no fr_s and none was injected")
    if callable(fr_oracle):
        return fr_oracle
    mapping = fr_oracle
    return lambda node_id: mapping[node_id]


def _cut_runtime(dag: QueryDag, node_id: str, fr_u: float, bandwidth: float) -> tuple[float, bool]:
    """(end-to-end runtime of the cut plan, downstream-was-modeled flag)."""
    node = dag.node_by_id[node_id]
    down_tables = {dag.base_tables[leaf].name: dag.base_tables[leaf].size
                   for leaf in dag.downstream_leaves(node_id)}
    shipped = node.output_bytes + sum(down_tables.values())
    runtime = fr_u + shipped / bandwidth
    if dag.downstream_runtime and node_id in dag.downstream_runtime:
        return runtime + dag.downstream_runtime[node_id], True
    return runtime, False


def intra_plan(
    dag: QueryDag,
    prices: PriceBook,
    deadline: Optional[float] = None,
    max_iters: Optional[int] = None,
    fr_oracle: Optional[FrOracle] = None,
    bandwidth: float = DEFAULT_BANDWIDTH_BYTES_PER_S,
    scan_migrated_output: bool = True,
) -> IntraPlanResult:
    """Opportunity-guided cut search with a billed upstream-runtime oracle.

    Ranks positive-opportunity nodes, evaluates the upstream runtime of the
    best candidate (adding its compute cost to the search ledger), then
    prunes candidates that provably cannot beat the measured savings and
    tightens bounds of nodes downstream of the evaluated one. Stops after
    ``max_iters`` evaluations (default: number of nodes) or when no
    candidates remain, and returns the best feasible cut or the baseline.

    The root is never a candidate: cutting there migrates the whole query,
    which is the inter-query planner's decision.
    """
    fr = _resolve_oracle(dag, fr_oracle)
    limit = max_iters if max_iters is not None else len(dag.nodes)
    if limit < 1:
        raise ValueError("max_iters must be >= 1")

    original: dict[str, int] = {}
    bound: dict[str, int] = {}
    for node in dag.nodes:
        if node.id == dag.root:
            continue
        value = opportunity(dag, node.id, prices, scan_migrated_output)
        if value > 0:
            original[node.id] = value
            bound[node.id] = value

    evaluations: list[CutEvaluation] = []
    search_cost = 0
    downstream_unmodeled = False
    iters = 0
    while bound and iters < limit:
        picked = max(bound, key=lambda nid: (bound[nid], nid))
        fr_u = float(fr(picked))
        if fr_u < 0:
            raise DagError(f"negative measurement: fr({picked!r})")
        upstream_cost = per_compute_query_cost(fr_u, prices)
        search_cost += upstream_cost
        actual = original[picked] - upstream_cost

        feasible = True
        if deadline is not None:
            runtime, modeled = _cut_runtime(dag, picked, fr_u, bandwidth)
            feasible = runtime <= deadline
            if not modeled:
                downstream_unmodeled = True
        evaluations.append(
            CutEvaluation(picked, bound[picked], True, actual, feasible)
        )
        del bound[picked]
        iters += 1

        for nid in list(bound):
            if bound[nid] < actual:
                del bound[nid]
        for nid in list(bound):
            if dag.is_downstream_of(nid, picked):
                # The candidate's upstream contains the evaluated subquery,
                # so its runtime bill is at least this large.
                tightened = min(bound[nid], original[nid] - upstream_cost)
                if tightened < 0:
                    del bound[nid]
                else:
                    bound[nid] = tightened

    best = None
    for ev in evaluations:
        if ev.actual_savings is not None and ev.actual_savings > 0 and ev.feasible:
            if best is None or (ev.actual_savings, ev.node) > (best.actual_savings, best.node):
                best = ev
    plan_cost = dag.baseline_cost_src - best.actual_savings if best else dag.baseline_cost_src
    return IntraPlanResult(
        query_id=dag.query_id,
        cut=best,
        plan_cost=plan_cost,
        baseline_cost=dag.baseline_cost_src,
        search_cost=search_cost,
        fr_evaluations=iters,
        evaluations=tuple(evaluations),
        downstream_unmodeled=downstream_unmodeled,
    )


def exhaustive_cuts(
    dag: QueryDag,
    prices: PriceBook,
    deadline: Optional[float] = None,
    fr_oracle: Optional[FrOracle] = None,
    bandwidth: float = DEFAULT_BANDWIDTH_BYTES_PER_S,
    scan_migrated_output: bool = True,
) -> IntraPlanResult:
    """Oracle that prices a cut at every non-root operator (no billing).

    Requires every upstream runtime up front; used to cross-validate
    intra_plan, which must match it when allowed to run unpruned.
    """
    fr = _resolve_oracle(dag, fr_oracle)
    evaluations = []
    best = None
    downstream_unmodeled = False
    for node in dag.nodes:
        if node.id == dag.root:
            continue
        value = opportunity(dag, node.id, prices, scan_migrated_output)
        fr_u = float(fr(node.id))
        actual = value - per_compute_query_cost(fr_u, prices)
        feasible = True
        if deadline is not None:
            runtime, modeled = _cut_runtime(dag, node.id, fr_u, bandwidth)
            feasible = runtime <= deadline
            if not modeled:
                downstream_unmodeled = True
        ev = CutEvaluation(node.id, value, True, actual, feasible)
        evaluations.append(ev)
        if actual > 0 and feasible:
            if best is None or (actual, node.id) > (best.actual_savings, best.node):
                best = ev
    plan_cost = dag.baseline_cost_src - best.actual_savings if best else dag.baseline_cost_src
    return IntraPlanResult(
        query_id=dag.query_id,
        cut=best,
        plan_cost=plan_cost,
        baseline_cost=dag.baseline_cost_src,
        search_cost=0,
        fr_evaluations=0,
        evaluations=tuple(evaluations),
        downstream_unmodeled=downstream_unmodeled,
    )
