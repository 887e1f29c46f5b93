"""Price what-if sweeps, payback arithmetic, and a seeded workload generator.

Sweeps re-run the inter-query planner over a grid of hypothetical prices for
one field (per-byte rate or egress) and report how the plan type, savings,
and speedup move. The generator builds reproducible synthetic workloads with
a controllable balance of CPU- and IO-bound queries for property tests and
benchmarks.
"""

from __future__ import annotations

import enum
import io
import random
from dataclasses import dataclass, replace as dataclasses_replace
from fractions import Fraction
from typing import Optional

from .cost_model import (
    GB,
    PriceBook,
    default_price_book,
    per_byte_query_cost,
    per_compute_query_cost,
)
from .inter import (
    DEFAULT_BANDWIDTH_BYTES_PER_S,
    InterPlan,
    PlanType,
    greedy_plan,
    optimal_plan,
)
from .money import dollars_str, rational, round_micros
from .workload import Backend, QueryProfile, TableRef, WorkloadProfile

SWEEP_CSV_HEADER = (
    "price,plan_type,savings_pct,speedup_pct,"
    "migrated_tables,migrated_queries,total_cost,runtime_s"
)


class SweepError(ValueError):
    pass


class VariedPrice(enum.Enum):
    P_BYTE = "p_byte"
    EGRESS = "egress"


@dataclass(frozen=True)
class SweepSpec:
    workload: WorkloadProfile
    varied_price: VariedPrice
    grid: tuple[Fraction, ...]  # dollars per TB
    prices: PriceBook

    def __post_init__(self):
        if not self.grid:
            raise SweepError("empty price grid")
        if any(p < 0 for p in self.grid):
            raise SweepError("negative price in grid")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise SweepError("grid must be strictly increasing")


@dataclass(frozen=True)
class SweepRow:
    price: Fraction  # dollars per TB of the varied field
    plan_type: PlanType
    savings_pct: float
    speedup_pct: float
    migrated_tables: int
    migrated_queries: int
    total_cost: int
    runtime_s: float


def price_grid(low, high, steps: int) -> tuple[Fraction, ...]:
    """Evenly spaced grid of ``steps`` prices from low to high inclusive."""
    lo, hi = rational(low), rational(high)
    if steps < 1:
        raise SweepError("steps must be >= 1")
    if steps == 1:
        if lo != hi:
            raise SweepError("single-step grid needs equal endpoints")
        return (lo,)
    if hi <= lo:
        raise SweepError("inverted price range")
    step = (hi - lo) / (steps - 1)
    return tuple(lo + i * step for i in range(steps))


def _plan_row(price: Fraction, plan: InterPlan) -> SweepRow:
    return SweepRow(
        price=price,
        plan_type=plan.plan_type,
        savings_pct=plan.savings_pct,
        speedup_pct=plan.speedup_pct,
        migrated_tables=len(plan.migrate_tables),
        migrated_queries=len(plan.migrate_queries),
        total_cost=plan.cost.total,
        runtime_s=plan.runtime,
    )


def _rescale_per_byte_costs(workload: WorkloadProfile, factor: Fraction) -> WorkloadProfile:
    """Scale the pay-per-byte side of every profiled query cost.

    Profiled per-byte costs are price times bytes scanned, so a hypothetical
    per-byte price rescales them proportionally; runtimes and the
    per-compute side are price-independent measurements and stay put.
    """
    queries = []
    for q in workload.queries:
        if workload.source_backend is Backend.PER_BYTE:
            q = dataclasses_replace(q, cost_src=round_micros(q.cost_src * factor))
        else:
            q = dataclasses_replace(q, cost_dest=round_micros(q.cost_dest * factor))
        queries.append(q)
    return dataclasses_replace(workload, queries=tuple(queries))


def run_sweep(
    spec: SweepSpec,
    solver: str = "greedy",
    bandwidth: float = DEFAULT_BANDWIDTH_BYTES_PER_S,
) -> list[SweepRow]:
    """Plan the workload at every grid point; rows come back in price order.

    An egress grid reprices migration directly. A per-byte grid instead
    rescales the per-byte side of the profiled query costs relative to the
    reference book, which is how a scan-price change reaches the planner.
    """
    solve = {"greedy": greedy_plan, "mincut": optimal_plan}.get(solver)
    if solve is None:
        raise SweepError(f"unknown sweep solver: {solver!r}")
    if spec.varied_price is VariedPrice.P_BYTE and spec.prices.p_byte == 0:
        raise SweepError("reference per-byte price is zero; profiled costs cannot be rescaled")
    rows = []
    for price in spec.grid:
        prices = spec.prices.replace_price(spec.varied_price.value, price)
        workload = spec.workload
        if spec.varied_price is VariedPrice.P_BYTE:
            workload = _rescale_per_byte_costs(workload, prices.p_byte / spec.prices.p_byte)
        plan = solve(workload, prices, bandwidth=bandwidth)
        rows.append(_plan_row(price, plan))
    return rows


def sweep_rows_to_csv(rows: list[SweepRow]) -> str:
    out = io.StringIO()
    out.write(SWEEP_CSV_HEADER + "\n")
    for row in rows:
        out.write(
            f"{float(row.price)!r},{row.plan_type.value},"
            f"{row.savings_pct:.6f},{row.speedup_pct:.6f},"
            f"{row.migrated_tables},{row.migrated_queries},"
            f"{dollars_str(row.total_cost)},{row.runtime_s:.6f}\n"
        )
    return out.getvalue()


def payback_iterations(profiling_cost: int, baseline_cost: int, plan_cost: int) -> Optional[int]:
    """Workload executions needed for plan savings to cover profiling cost.

    None (not applicable) when the plan saves nothing per run.
    """
    if min(profiling_cost, baseline_cost, plan_cost) < 0:
        raise ValueError("negative cost")
    per_run = baseline_cost - plan_cost
    if per_run <= 0:
        return None
    return -(-profiling_cost // per_run)


def generate_workload(
    seed: int,
    n_tables: int,
    n_queries: int,
    cpu_bound_fraction: float,
    size_range: tuple[int, int] = (4 * GB, 64 * GB),
    source_backend: Backend = Backend.PER_BYTE,
    prices: Optional[PriceBook] = None,
    deadline: Optional[float] = None,
    scans_per_query: tuple[int, int] = (1, 3),
) -> WorkloadProfile:
    """Deterministic pseudo-random workload with a chosen CPU/IO balance.

    IO-bound queries scan more than their runtime justifies, so they price
    cheaper per-compute; CPU-bound queries are the mirror case. Each query
    joins between ``scans_per_query`` tables (capped at the table count).
    Identical arguments always produce an identical workload.
    """
    if n_tables < 1 or n_queries < 1:
        raise ValueError("need at least one table and one query")
    if not 0.0 <= cpu_bound_fraction <= 1.0:
        raise ValueError("cpu_bound_fraction must be within [0, 1]")
    lo, hi = size_range
    if lo < 0 or hi < lo:
        raise ValueError("bad size_range")
    k_lo, k_hi = scans_per_query
    if k_lo < 1 or k_hi < k_lo:
        raise ValueError("bad scans_per_query")
    prices = prices if prices is not None else default_price_book()
    if prices.p_byte == 0 or prices.p_sec == 0:
        raise ValueError("generator needs nonzero per-byte and per-compute prices")

    rng = random.Random(seed)
    width = len(str(n_tables - 1))
    tables = tuple(
        TableRef(f"t{idx:0{width}d}", rng.randint(lo, hi)) for idx in range(n_tables)
    )

    queries = []
    qwidth = len(str(n_queries - 1))
    ratio = Fraction(prices.p_byte, prices.p_sec)  # seconds' worth per byte
    for idx in range(n_queries):
        k = rng.randint(min(k_lo, n_tables), min(k_hi, n_tables))
        scanned = rng.sample(range(n_tables), k)
        # Joins re-read inputs, so scan volume can exceed the raw table sizes.
        scan_bytes = int(sum(tables[i].size for i in scanned) * rng.uniform(3.0, 14.0))
        cpu_bound = rng.random() < cpu_bound_fraction
        breakeven_runtime = float(ratio * scan_bytes)
        factor = rng.uniform(1.5, 6.0) if cpu_bound else rng.uniform(0.05, 0.6)
        compute_runtime = breakeven_runtime * factor
        byte_runtime = compute_runtime * rng.uniform(0.4, 1.6)

        byte_cost = per_byte_query_cost(scan_bytes, prices)
        compute_cost = per_compute_query_cost(compute_runtime, prices)
        if source_backend is Backend.PER_BYTE:
            profile = QueryProfile(
                id=f"q{idx:0{qwidth}d}",
                cost_src=byte_cost,
                cost_dest=compute_cost,
                runtime_src=byte_runtime,
                runtime_dest=compute_runtime,
                scans=frozenset(tables[i].name for i in scanned),
            )
        else:
            profile = QueryProfile(
                id=f"q{idx:0{qwidth}d}",
                cost_src=compute_cost,
                cost_dest=byte_cost,
                runtime_src=compute_runtime,
                runtime_dest=byte_runtime,
                scans=frozenset(tables[i].name for i in scanned),
            )
        queries.append(profile)

    return WorkloadProfile(tables, tuple(queries), source_backend, deadline)
