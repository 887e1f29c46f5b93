"""Replay the bundled fixtures through every solver and print the outcomes.

Covers the 3-table bipartite instance (net savings $1 under all three
inter-query solvers), the deadline example (the $40 plan fits a 3 h bound,
the $65 plan wins without one), and the two measured single-query profiles.
"""

import json
import math
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from cloudplan.cost_model import PriceBook
from cloudplan.inter import brute_force_plan, greedy_plan, optimal_plan
from cloudplan.intra import intra_plan, load_query_dag_path
from cloudplan.money import dollars_str
from cloudplan.workload import load_workload_path

FIXTURES = REPO / "fixtures"


def prices(name):
    return PriceBook.from_json(json.loads((FIXTURES / name).read_text()))


def main():
    worked = prices("prices_worked_examples.json")

    print("== bipartite worked example (net savings should be $1 everywhere) ==")
    w = load_workload_path(FIXTURES / "bipartite_savings_workload.json")
    for label, solver in (("greedy", greedy_plan), ("min-cut", optimal_plan),
                          ("brute force", brute_force_plan)):
        plan = solver(w, worked)
        print(f"  {label:<12} savings ${dollars_str(plan.savings)}  "
              f"migrate tables={sorted(plan.migrate_tables)} queries={sorted(plan.migrate_queries)}")

    print("== deadline example ==")
    w = load_workload_path(FIXTURES / "deadline_workload.json")
    bounded = greedy_plan(w, worked)
    free = greedy_plan(w, worked, deadline=math.inf)
    print(f"  3 h bound:  saves ${dollars_str(bounded.savings)} in {bounded.runtime / 3600:.2f} h "
          f"(tables {sorted(bounded.migrate_tables)})")
    print(f"  unbounded:  saves ${dollars_str(free.savings)} in {free.runtime / 3600:.2f} h "
          f"(tables {sorted(free.migrate_tables)})")

    print("== measured single-query profiles ==")
    intra_prices = prices("prices_intra_gcp.json")
    for name in ("q67_dag.json", "q86_dag.json"):
        dag = load_query_dag_path(FIXTURES / name)
        result = intra_plan(dag, intra_prices)
        print(f"  {dag.query_id:<16} cut at {result.cut.node:<18} "
              f"plan ${dollars_str(result.plan_cost)} vs baseline ${dollars_str(result.baseline_cost)} "
              f"(search cost ${dollars_str(result.search_cost)}, "
              f"{result.fr_evaluations} runtime evaluations)")


if __name__ == "__main__":
    main()
