"""Inter-query placement: which tables and queries migrate to the other backend.

Three solvers share one plan evaluation:

* ``greedy_plan`` prunes the bipartite graph with upper/lower bounds, then
  peels the least-promising table one at a time, recording every intermediate
  plan and returning the cheapest one inside the deadline.
* ``optimal_plan`` solves the underlying project-selection problem exactly
  with a min-cut.
* ``brute_force_plan`` enumerates all table subsets and is the oracle the
  other two are validated against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .cost_model import CostBreakdown, PriceBook, migration_cost, query_savings
from .mincut import FlowNetwork
from .money import dollars_str
from .workload import WorkloadProfile

DEFAULT_BANDWIDTH_BYTES_PER_S = 125_000_000  # 1 Gbit/s

BRUTE_FORCE_TABLE_LIMIT = 20


class PlanError(ValueError):
    """Raised for incoherent plan requests."""


class OracleLimitError(PlanError):
    """Raised when an instance exceeds the brute-force oracle's size limit."""


class PlanType(enum.Enum):
    SOURCE_ONLY = "SOURCE_ONLY"
    DEST_ONLY = "DEST_ONLY"
    MULTI = "MULTI"


@dataclass(frozen=True)
class BoundValue:
    """A table's savings upper bound or a query's savings lower bound."""

    subject: str
    value: int


@dataclass(frozen=True)
class InterPlan:
    migrate_tables: frozenset[str]
    migrate_queries: frozenset[str]
    cost: CostBreakdown
    baseline_cost: int
    runtime: float
    baseline_runtime: float
    plan_type: PlanType
    deadline_met: bool = True

    @property
    def savings(self) -> int:
        return self.baseline_cost - self.cost.total

    @property
    def savings_pct(self) -> float:
        if self.baseline_cost == 0:
            return 0.0
        return 100.0 * self.savings / self.baseline_cost

    @property
    def speedup_pct(self) -> float:
        """Positive means the plan is faster than the baseline."""
        if self.baseline_runtime == 0:
            return 0.0
        return 100.0 * (self.baseline_runtime - self.runtime) / self.baseline_runtime

    def to_json(self) -> dict:
        return {
            "plan_type": self.plan_type.value,
            "migrate_tables": sorted(self.migrate_tables),
            "migrate_queries": sorted(self.migrate_queries),
            "cost": self.cost.to_json(),
            "baseline_total": dollars_str(self.baseline_cost),
            "savings_pct": self.savings_pct,
            "runtime_s": self.runtime,
            "baseline_runtime_s": self.baseline_runtime,
            "deadline_met": self.deadline_met,
        }


class _Instance:
    """Savings/migration-cost weights of one workload under one price book."""

    def __init__(self, workload: WorkloadProfile, prices: PriceBook):
        self.workload = workload
        self.move_cost = {t.name: migration_cost(t.size, prices) for t in workload.tables}
        self.savings = {q.id: query_savings(q.cost_dest, q.cost_src) for q in workload.queries}
        self.scans = {q.id: q.scans for q in workload.queries}
        self.readers = workload.readers
        # Queries with non-positive savings never migrate; migrating them can
        # only add migration cost.
        self.positive = [q.id for q in workload.queries if self.savings[q.id] > 0]


def _effective_deadline(workload: WorkloadProfile, deadline: Optional[float]) -> float:
    if deadline is not None:
        return deadline
    if workload.deadline is not None:
        return workload.deadline
    return math.inf


def plan_cost_runtime(
    workload: WorkloadProfile,
    prices: PriceBook,
    migrate_tables: Iterable[str],
    migrate_queries: Iterable[str],
    bandwidth: float = DEFAULT_BANDWIDTH_BYTES_PER_S,
) -> tuple[CostBreakdown, float]:
    """Cost breakdown and runtime of one candidate plan.

    Cost is migration for every migrated table, destination execution for
    migrated queries, and source execution for the rest. The two backends run
    their lanes serially but independently of each other; migration gates the
    destination lane, so runtime is
    ``max(source lane, migration time + destination lane)``.
    """
    tables = set(migrate_tables)
    queries = set(migrate_queries)
    for t in tables:
        if t not in workload.table_by_name:
            raise PlanError(f"incoherent plan: unknown table {t!r}")
    for qid in queries:
        q = workload.query_by_id.get(qid)
        if q is None:
            raise PlanError(f"incoherent plan: unknown query {qid!r}")
        if not q.scans <= tables:
            raise PlanError(f"incoherent plan: query {qid!r} scans unmigrated tables")

    migration = sum(migration_cost(workload.table_by_name[t].size, prices) for t in tables)
    moved = sum(q.cost_dest for q in workload.queries if q.id in queries)
    remaining = sum(q.cost_src for q in workload.queries if q.id not in queries)

    migration_time = sum(workload.table_by_name[t].size for t in tables) / bandwidth
    src_lane = sum(q.runtime_src for q in workload.queries if q.id not in queries)
    dest_lane = migration_time + sum(q.runtime_dest for q in workload.queries if q.id in queries)
    return CostBreakdown.build(migration, moved, remaining), max(src_lane, dest_lane)


class _SearchState:
    """Mutable bipartite pruning state shared by ReducePlan and the greedy walk.

    Tables are either alive (still candidates to migrate), paid (pulled in by
    a forced query, migration cost already charged), or pinned to the source.
    Queries are alive (feasible candidates with positive savings), forced
    (strictly beneficial, will migrate), or out. Running plan aggregates for
    the current migrate-everything-still-in-play plan are maintained
    incrementally so the walk never re-prices a plan from scratch.
    """

    def __init__(self, inst: _Instance):
        self.inst = inst
        w = inst.workload
        self.alive_tables = set(inst.move_cost)
        self.alive_queries = set(inst.positive)
        self.paid_tables: set[str] = set()
        self.forced_queries: set[str] = set()
        self.events: list[tuple[str, str, int]] = []
        self.sigma_sum = {t: 0 for t in self.alive_tables}
        for qid in self.alive_queries:
            for t in inst.scans[qid]:
                self.sigma_sum[t] += inst.savings[qid]
        self.unpaid_sum = {
            qid: sum(inst.move_cost[t] for t in inst.scans[qid]) for qid in self.alive_queries
        }
        self.pending_tables = set(self.alive_tables)
        self.pending_queries = set(self.alive_queries)
        # Current-plan aggregates: all tables and all positive queries are in.
        positive = self.alive_queries
        self.migration_sum = sum(inst.move_cost.values())
        self.migration_bytes = sum(t.size for t in w.tables)
        self.moved_sum = sum(q.cost_dest for q in w.queries if q.id in positive)
        self.remaining_sum = sum(q.cost_src for q in w.queries if q.id not in positive)
        self.dest_lane_rt = sum(q.runtime_dest for q in w.queries if q.id in positive)
        self.src_lane_rt = sum(q.runtime_src for q in w.queries if q.id not in positive)

    def table_bound(self, t: str) -> int:
        """Best-case net savings unlockable by migrating t."""
        return self.sigma_sum[t] - self.inst.move_cost[t]

    def query_bound(self, qid: str) -> int:
        """Worst-case net savings of migrating qid alone."""
        return self.inst.savings[qid] - self.unpaid_sum[qid]

    def _remove_query(self, qid: str) -> None:
        self.alive_queries.discard(qid)
        self.pending_queries.discard(qid)
        q = self.inst.workload.query_by_id[qid]
        self.moved_sum -= q.cost_dest
        self.remaining_sum += q.cost_src
        self.dest_lane_rt -= q.runtime_dest
        self.src_lane_rt += q.runtime_src
        for t in self.inst.scans[qid]:
            if t in self.alive_tables:
                self.sigma_sum[t] -= self.inst.savings[qid]
                self.pending_tables.add(t)

    def pin_table(self, t: str) -> None:
        """Keep t in the source; every query scanning it becomes infeasible."""
        self.alive_tables.discard(t)
        self.pending_tables.discard(t)
        self.migration_sum -= self.inst.move_cost[t]
        self.migration_bytes -= self.inst.workload.table_by_name[t].size
        for qid in list(self.inst.readers[t]):
            if qid in self.alive_queries:
                self._remove_query(qid)

    def _pay_table(self, t: str) -> None:
        self.alive_tables.discard(t)
        self.pending_tables.discard(t)
        self.paid_tables.add(t)
        for qid in self.inst.readers[t]:
            if qid in self.alive_queries:
                self.unpaid_sum[qid] -= self.inst.move_cost[t]
                self.pending_queries.add(qid)

    def _force_query(self, qid: str) -> None:
        self.forced_queries.add(qid)
        self.alive_queries.discard(qid)
        self.pending_queries.discard(qid)
        for t in self.inst.scans[qid]:
            if t in self.alive_tables:
                self._pay_table(t)

    def settle(self) -> None:
        """Run the pruning rules to a fixpoint.

        Drops tables whose upper bound went negative (with their dependent
        queries) and force-migrates queries whose lower bound is positive
        (paying their tables, which stops charging other readers for them).
        """
        while self.pending_tables or self.pending_queries:
            for t in sorted(self.pending_tables):
                self.pending_tables.discard(t)
                if t in self.alive_tables and self.table_bound(t) < 0:
                    self.events.append(("drop_table", t, self.table_bound(t)))
                    self.pin_table(t)
            for qid in sorted(self.pending_queries):
                self.pending_queries.discard(qid)
                if qid in self.alive_queries and self.query_bound(qid) > 0:
                    self.events.append(("force_query", qid, self.query_bound(qid)))
                    self._force_query(qid)

    def plan_sets(self) -> tuple[frozenset[str], frozenset[str]]:
        return (
            frozenset(self.alive_tables | self.paid_tables),
            frozenset(self.alive_queries | self.forced_queries),
        )

    def plan_scalars(self, bandwidth: float) -> tuple[int, float]:
        """(total cost, runtime) of the current plan, from running aggregates."""
        total = self.migration_sum + self.moved_sum + self.remaining_sum
        runtime = max(
            self.src_lane_rt,
            self.migration_bytes / bandwidth + self.dest_lane_rt,
        )
        return total, runtime

    def pin_cheapest_bound(self) -> None:
        """One greedy step: pin the table with the smallest upper bound."""
        pinned = min(self.alive_tables, key=lambda t: (self.table_bound(t), t))
        self.pin_table(pinned)
        self.settle()


def table_upper_bounds(workload: WorkloadProfile, prices: PriceBook) -> list[BoundValue]:
    """Each table's best-case net savings: its positive queries' savings minus
    its migration cost, before any pruning."""
    state = _SearchState(_Instance(workload, prices))
    return [BoundValue(t.name, state.table_bound(t.name)) for t in workload.tables]


def query_lower_bounds(workload: WorkloadProfile, prices: PriceBook) -> list[BoundValue]:
    """Each positive-savings query's worst-case net: its savings minus all of
    its tables' migration costs, before any pruning."""
    state = _SearchState(_Instance(workload, prices))
    return [
        BoundValue(q.id, state.query_bound(q.id))
        for q in workload.queries
        if q.id in state.alive_queries
    ]


def reduce_plan(
    workload: WorkloadProfile, prices: PriceBook
) -> tuple[frozenset[str], frozenset[str], frozenset[str], frozenset[str]]:
    """Fixpoint pruning pass over the full workload.

    Returns (remaining tables, remaining queries, forced tables, forced
    queries): the forced sets are strictly beneficial to migrate, the
    remaining sets still need the greedy or optimal search.
    """
    state = _SearchState(_Instance(workload, prices))
    state.settle()
    return (
        frozenset(state.alive_tables),
        frozenset(state.alive_queries),
        frozenset(state.paid_tables),
        frozenset(state.forced_queries),
    )


def _classify(workload: WorkloadProfile, tables: frozenset[str], queries: frozenset[str]) -> PlanType:
    if not tables:
        return PlanType.SOURCE_ONLY
    scanned = {t for q in workload.queries for t in q.scans}
    if tables == scanned and queries == {q.id for q in workload.queries}:
        return PlanType.DEST_ONLY
    return PlanType.MULTI


def _build_plan(
    workload: WorkloadProfile,
    prices: PriceBook,
    tables: frozenset[str],
    queries: frozenset[str],
    bandwidth: float,
    deadline_met: bool = True,
) -> InterPlan:
    cost, runtime = plan_cost_runtime(workload, prices, tables, queries, bandwidth)
    base_cost, base_runtime = plan_cost_runtime(workload, prices, (), (), bandwidth)
    return InterPlan(
        migrate_tables=tables,
        migrate_queries=queries,
        cost=cost,
        baseline_cost=base_cost.total,
        runtime=runtime,
        baseline_runtime=base_runtime,
        plan_type=_classify(workload, tables, queries),
        deadline_met=deadline_met,
    )


def greedy_plan(
    workload: WorkloadProfile,
    prices: PriceBook,
    deadline: Optional[float] = None,
    bandwidth: float = DEFAULT_BANDWIDTH_BYTES_PER_S,
) -> InterPlan:
    """Bound-pruned greedy search over migration plans.

    After the initial pruning fixpoint, repeatedly pins the table with the
    smallest upper bound to the source, re-prunes, and records each
    intermediate plan's cost and runtime. The do-nothing baseline is always
    recorded, so a plan within the deadline exists whenever the baseline
    fits. Only the winning step is re-walked to materialize its sets.
    """
    inst = _Instance(workload, prices)
    state = _SearchState(inst)
    state.settle()

    base_cost, base_runtime = plan_cost_runtime(workload, prices, (), (), bandwidth)
    recorded = [(base_cost.total, base_runtime, -1)]
    step = 0
    recorded.append((*state.plan_scalars(bandwidth), step))
    while state.alive_tables:
        state.pin_cheapest_bound()
        step += 1
        recorded.append((*state.plan_scalars(bandwidth), step))

    effective = _effective_deadline(workload, deadline)
    within = [entry for entry in recorded if entry[1] <= effective]
    if not within:
        # Even the do-nothing baseline misses the deadline; report it flagged.
        return _build_plan(workload, prices, frozenset(), frozenset(), bandwidth,
                           deadline_met=False)
    _, _, best_step = min(within)
    if best_step < 0:
        return _build_plan(workload, prices, frozenset(), frozenset(), bandwidth)
    # Deterministic pinning makes the walk replayable.
    state = _SearchState(inst)
    state.settle()
    for _ in range(best_step):
        state.pin_cheapest_bound()
    tables, queries = state.plan_sets()
    return _build_plan(workload, prices, tables, queries, bandwidth)


def optimal_plan(
    workload: WorkloadProfile,
    prices: PriceBook,
    deadline: Optional[float] = None,
    bandwidth: float = DEFAULT_BANDWIDTH_BYTES_PER_S,
) -> InterPlan:
    """Exact cost-optimal plan via min-cut on the project-selection network.

    The network has one node per table (source-side edge weighted by its
    migration cost) and per positive-savings query (sink-side edge weighted
    by its savings); scan edges get effectively infinite capacity so a query
    can only sit on the migrate side together with all its tables. Min-cut
    optimizes cost only: if its plan misses the deadline, the search falls
    back to the deadline-aware greedy.
    """
    inst = _Instance(workload, prices)
    tables = sorted({t for qid in inst.positive for t in inst.scans[qid]})
    if not inst.positive or not tables:
        return _build_plan(workload, prices, frozenset(), frozenset(), bandwidth)

    t_index = {t: i + 2 for i, t in enumerate(tables)}
    q_index = {qid: len(tables) + 2 + i for i, qid in enumerate(inst.positive)}
    net = FlowNetwork(2 + len(tables) + len(inst.positive))
    finite_total = sum(inst.move_cost[t] for t in tables) + sum(
        inst.savings[qid] for qid in inst.positive
    )
    infinite = finite_total + 1
    for t in tables:
        net.add_edge(0, t_index[t], inst.move_cost[t])
    for qid in inst.positive:
        net.add_edge(q_index[qid], 1, inst.savings[qid])
        for t in inst.scans[qid]:
            net.add_edge(t_index[t], q_index[qid], infinite)

    net.max_flow(0, 1)
    source_side = net.min_cut_source_side(0)
    migrate_queries = frozenset(qid for qid in inst.positive if q_index[qid] not in source_side)
    migrate_tables = frozenset(
        t for t in tables
        if t_index[t] not in source_side and inst.readers[t] & migrate_queries
    )

    effective = _effective_deadline(workload, deadline)
    plan = _build_plan(workload, prices, migrate_tables, migrate_queries, bandwidth)
    if plan.runtime <= effective:
        return plan
    return greedy_plan(workload, prices, deadline=effective, bandwidth=bandwidth)


def brute_force_plan(
    workload: WorkloadProfile,
    prices: PriceBook,
    deadline: Optional[float] = None,
    bandwidth: float = DEFAULT_BANDWIDTH_BYTES_PER_S,
) -> InterPlan:
    """Exhaustive subset oracle: evaluates every table subset.

    For each subset S the migrated queries are the positive-savings queries
    whose whole scan set lies in S. Only usable on small instances.
    """
    names = [t.name for t in workload.tables]
    if len(names) > BRUTE_FORCE_TABLE_LIMIT:
        raise OracleLimitError(
            f"instance too large for oracle: {len(names)} tables > {BRUTE_FORCE_TABLE_LIMIT}"
        )
    inst = _Instance(workload, prices)
    bit = {name: 1 << i for i, name in enumerate(names)}
    query_masks = [(qid, sum(bit[t] for t in inst.scans[qid]), inst.savings[qid])
                   for qid in inst.positive]
    move = [inst.move_cost[name] for name in names]

    effective = _effective_deadline(workload, deadline)
    need_runtime = effective != math.inf
    best_key = None
    best_sets = None
    any_within = False
    for mask in range(1 << len(names)):
        objective = 0
        queries = []
        for qid, qmask, saved in query_masks:
            if qmask & ~mask == 0:
                objective += saved
                queries.append(qid)
        m = mask
        i = 0
        while m:
            if m & 1:
                objective -= move[i]
            m >>= 1
            i += 1
        tables = frozenset(name for name in names if bit[name] & mask)
        qset = frozenset(queries)
        if need_runtime:
            _, runtime = plan_cost_runtime(workload, prices, tables, qset, bandwidth)
            if runtime > effective:
                continue
            any_within = True
        key = (-objective, len(tables), tuple(sorted(tables)))
        if best_key is None or key < best_key:
            best_key = key
            best_sets = (tables, qset)
    if need_runtime and not any_within:
        return _build_plan(workload, prices, frozenset(), frozenset(), bandwidth, deadline_met=False)
    return _build_plan(workload, prices, best_sets[0], best_sets[1], bandwidth)
