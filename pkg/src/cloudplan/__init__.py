"""Cost-aware placement of analytical queries across two cloud pricing models."""

from .cost_model import (
    CostBreakdown,
    PriceBook,
    break_even_scan_bytes,
    default_price_book,
    migration_cost,
    per_byte_query_cost,
    per_compute_query_cost,
    query_savings,
)
from .inter import (
    InterPlan,
    PlanType,
    brute_force_plan,
    greedy_plan,
    optimal_plan,
    plan_cost_runtime,
    reduce_plan,
)
from .intra import QueryDag, cut_costs, exhaustive_cuts, intra_plan, opportunity
from .simulate import generate_workload, payback_iterations, run_sweep
from .workload import Backend, WorkloadProfile, load_workload, neighbors

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "CostBreakdown",
    "InterPlan",
    "PlanType",
    "PriceBook",
    "QueryDag",
    "WorkloadProfile",
    "break_even_scan_bytes",
    "brute_force_plan",
    "cut_costs",
    "default_price_book",
    "exhaustive_cuts",
    "generate_workload",
    "greedy_plan",
    "intra_plan",
    "load_workload",
    "migration_cost",
    "neighbors",
    "opportunity",
    "optimal_plan",
    "payback_iterations",
    "per_byte_query_cost",
    "per_compute_query_cost",
    "plan_cost_runtime",
    "query_savings",
    "reduce_plan",
    "run_sweep",
]
