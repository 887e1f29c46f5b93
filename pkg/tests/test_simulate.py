import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cloudplan.cost_model import default_price_book
from cloudplan.inter import PlanType, greedy_plan, optimal_plan
from cloudplan.simulate import (
    SweepError,
    SweepSpec,
    VariedPrice,
    generate_workload,
    payback_iterations,
    price_grid,
    run_sweep,
    sweep_rows_to_csv,
)
from cloudplan.workload import Backend


class TestPayback:
    def test_free_profiling(self):
        assert payback_iterations(0, 10_000_000, 4_000_000) == 0

    def test_not_applicable_when_nothing_saved(self):
        assert payback_iterations(65_170_000, 5_000_000, 5_000_000) is None
        assert payback_iterations(100, 5, 7) is None

    def test_ceiling_arithmetic(self):
        # $100 of profiling earned back at $40 a run needs 3 runs.
        assert payback_iterations(100_000_000, 50_000_000, 10_000_000) == 3

    @given(st.integers(min_value=0, max_value=10**12),
           st.integers(min_value=0, max_value=10**12),
           st.integers(min_value=0, max_value=10**12))
    def test_ceil_division_identities(self, profiling, baseline, plan):
        result = payback_iterations(profiling, baseline, plan)
        saved = baseline - plan
        if saved <= 0:
            assert result is None
        else:
            assert result == math.ceil(profiling / saved)
            assert result * saved >= profiling
            assert (result - 1) * saved < profiling or result == 0


class TestGenerator:
    def test_same_seed_same_workload(self):
        a = generate_workload(7, 5, 12, 0.4)
        b = generate_workload(7, 5, 12, 0.4)
        assert a == b

    def test_different_seed_differs(self):
        assert generate_workload(1, 5, 12, 0.4) != generate_workload(2, 5, 12, 0.4)

    def test_all_io_bound_queries_prefer_per_compute(self):
        # In a per-byte source every query's scan bill exceeds its
        # destination compute bill.
        w = generate_workload(3, 6, 30, 0.0)
        assert all(q.cost_src > q.cost_dest for q in w.queries)

    def test_all_cpu_bound_queries_prefer_per_byte(self):
        w = generate_workload(3, 6, 30, 1.0)
        assert all(q.cost_src < q.cost_dest for q in w.queries)

    def test_per_compute_source_mirrors_the_comparison(self):
        w = generate_workload(5, 6, 30, 1.0, source_backend=Backend.PER_COMPUTE)
        assert all(q.cost_src > q.cost_dest for q in w.queries)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            generate_workload(0, 0, 5, 0.5)
        with pytest.raises(ValueError):
            generate_workload(0, 5, 5, 1.5)


class TestSweep:
    def make_spec(self, seed=11, varied=VariedPrice.EGRESS, grid=("0", "60", "120", "600")):
        w = generate_workload(seed, 5, 16, 0.25)
        return SweepSpec(w, varied, tuple(Fraction(g) for g in grid), default_price_book())

    def test_spec_validation(self):
        w = generate_workload(0, 2, 2, 0.0)
        with pytest.raises(SweepError):
            SweepSpec(w, VariedPrice.EGRESS, (), default_price_book())
        with pytest.raises(SweepError):
            SweepSpec(w, VariedPrice.EGRESS, (Fraction(2), Fraction(1)), default_price_book())
        with pytest.raises(SweepError):
            SweepSpec(w, VariedPrice.EGRESS, (Fraction(-1), Fraction(1)), default_price_book())

    def test_single_point_equals_direct_plan(self):
        w = generate_workload(11, 5, 16, 0.25)
        prices = default_price_book()
        spec = SweepSpec(w, VariedPrice.P_BYTE, (Fraction("6.25"),), prices)
        (row,) = run_sweep(spec)
        plan = greedy_plan(w, prices)
        assert row.total_cost == plan.cost.total
        assert row.plan_type == plan.plan_type
        assert row.savings_pct == plan.savings_pct
        assert row.migrated_tables == len(plan.migrate_tables)

    def test_rows_are_recomputable_from_raw_plans(self):
        spec = self.make_spec()
        rows = run_sweep(spec, solver="mincut")
        for price, row in zip(spec.grid, rows):
            plan = optimal_plan(spec.workload, spec.prices.replace_price("egress", price))
            assert row.savings_pct == pytest.approx(
                100.0 * (plan.baseline_cost - plan.cost.total) / plan.baseline_cost
            )
            assert row.speedup_pct == pytest.approx(
                100.0 * (plan.baseline_runtime - plan.runtime) / plan.baseline_runtime
            )

    @given(st.integers(min_value=0, max_value=10**4))
    @settings(max_examples=25, deadline=None)
    def test_egress_monotonicity_under_optimal_solver(self, seed):
        w = generate_workload(seed, 2 + seed % 6, 4 + seed % 12, 0.25)
        spec = SweepSpec(
            w, VariedPrice.EGRESS,
            tuple(Fraction(v) for v in (0, 30, 120, 480, 5000)),
            default_price_book(),
        )
        rows = run_sweep(spec, solver="mincut")
        savings = [row.savings_pct for row in rows]
        assert all(a >= b - 1e-9 for a, b in zip(savings, savings[1:]))

    def test_endpoints_free_egress_saves_and_dear_egress_locks_in(self):
        spec = self.make_spec(grid=("0", "120", "1000000"))
        rows = run_sweep(spec, solver="mincut")
        has_positive = any(q.cost_src > q.cost_dest for q in spec.workload.queries)
        assert has_positive
        assert rows[0].savings_pct > 0
        assert rows[-1].plan_type is PlanType.SOURCE_ONLY

    def test_scan_price_moves_read_heavy_plans_across_backends(self):
        # All-IO-bound workload in a per-byte source: a cheap scan price
        # keeps it put, a dear one pushes it out.
        w = generate_workload(23, 6, 24, 0.0)
        spec = SweepSpec(
            w, VariedPrice.P_BYTE,
            tuple(Fraction(v) for v in ("0.05", "6.25", "500")),
            default_price_book(),
        )
        rows = run_sweep(spec, solver="mincut")
        assert rows[0].plan_type is PlanType.SOURCE_ONLY
        assert rows[-1].plan_type in (PlanType.DEST_ONLY, PlanType.MULTI)
        assert rows[-1].savings_pct > rows[0].savings_pct

    def test_per_byte_sweep_needs_reference_price(self):
        w = generate_workload(23, 3, 6, 0.0)
        zero_ref = default_price_book().replace_price("p_byte", 0)
        spec = SweepSpec(w, VariedPrice.P_BYTE, (Fraction(1), Fraction(2)), zero_ref)
        with pytest.raises(SweepError, match="rescaled"):
            run_sweep(spec)

    def test_determinism(self):
        spec = self.make_spec()
        assert sweep_rows_to_csv(run_sweep(spec)) == sweep_rows_to_csv(run_sweep(spec))

    def test_csv_shape(self):
        rows = run_sweep(self.make_spec(grid=("0", "120")))
        text = sweep_rows_to_csv(rows)
        lines = text.strip().split("\n")
        assert lines[0] == ("price,plan_type,savings_pct,speedup_pct,"
                            "migrated_tables,migrated_queries,total_cost,runtime_s")
        assert len(lines) == 3
        assert lines[1].startswith("0.0,")


class TestPriceGrid:
    def test_linear_grid(self):
        assert price_grid("0", "10", 3) == (Fraction(0), Fraction(5), Fraction(10))

    def test_single_point(self):
        assert price_grid("4", "4", 1) == (Fraction(4),)

    def test_inverted_range(self):
        with pytest.raises(SweepError, match="inverted"):
            price_grid("10", "1", 4)
