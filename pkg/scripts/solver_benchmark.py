"""Time the greedy search against the min-cut solver as instances grow.

The greedy's work tracks the table count while the flow solver's tracks the
table-query edge count, so the gap widens on join-heavy workloads.
"""

import sys
import time
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from cloudplan.cost_model import default_price_book
from cloudplan.inter import greedy_plan, optimal_plan
from cloudplan.simulate import generate_workload

SIZES = [
    (24, 100),
    (100, 1000),
    (400, 2500),
]


def main():
    prices = default_price_book()
    print(f"{'tables':>7} {'queries':>8} {'edges':>7} {'greedy':>9} {'min-cut':>9} {'same plan cost':>15}")
    for n_tables, n_queries in SIZES:
        w = generate_workload(3, n_tables, n_queries, 0.4, scans_per_query=(2, 10))
        started = time.perf_counter()
        greedy = greedy_plan(w, prices)
        greedy_s = time.perf_counter() - started
        started = time.perf_counter()
        mincut = optimal_plan(w, prices)
        mincut_s = time.perf_counter() - started
        print(f"{n_tables:>7} {n_queries:>8} {w.edge_count:>7} "
              f"{greedy_s:>8.2f}s {mincut_s:>8.2f}s {str(greedy.savings == mincut.savings):>15}")


if __name__ == "__main__":
    main()
