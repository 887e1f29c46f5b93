import math
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cloudplan.cost_model import (
    GB,
    TB,
    CostBreakdown,
    PriceBook,
    PriceError,
    break_even_scan_bytes,
    default_price_book,
    migration_cost,
    per_byte_query_cost,
    per_compute_query_cost,
    query_savings,
)

HOUR = 3600


def book(**kw) -> PriceBook:
    return PriceBook(**kw)


def per_byte(dollars_per_tb: str) -> Fraction:
    return Fraction(Decimal(dollars_per_tb)) * Fraction(10**6, TB)


def per_hour(dollars_per_hour: str) -> Fraction:
    return Fraction(Decimal(dollars_per_hour)) * Fraction(10**6, HOUR)


class TestMigrationCost:
    def test_egress_only_one_tb(self):
        # $120/TB egress with every other charge zeroed: 1 TB costs $120.
        prices = book(egress=per_byte("120"), storage_months=Fraction(0))
        assert migration_cost(TB, prices) == 120_000_000

    def test_zero_size_table_is_free(self):
        assert migration_cost(0, default_price_book()) == 0

    def test_term_by_term_oracle_10gb(self):
        # Independent spreadsheet-style evaluation: egress + read/write ops
        # (rounded up to whole operations) + blob storage, each term exact.
        prices = book(
            egress=per_byte("90"),
            p_read=Fraction(Decimal("0.05")) * Fraction(10**6, 10_000),
            p_write=Fraction(Decimal("0.004")) * Fraction(10**6, 10_000),
            p_blob=Fraction(Decimal("0.023")) * Fraction(10**6, GB),
            storage_months=Fraction(1),
        )
        size = 10 * GB
        egress_term = Decimal("90") / TB * size * 10**6
        ops = math.ceil(size / (8 * 2**20))
        ops_term = (Decimal("0.05") + Decimal("0.004")) / 10_000 * ops * 10**6
        blob_term = Decimal("0.023") / GB * size * 10**6
        expected = round(egress_term + ops_term + blob_term)
        assert ops == 1193
        assert expected == 1_136_442
        assert migration_cost(size, prices) == expected

    def test_rejects_negative_size(self):
        with pytest.raises(ValueError):
            migration_cost(-1, default_price_book())

    @given(st.integers(min_value=0, max_value=10**13), st.integers(min_value=0, max_value=10**13))
    def test_monotone_in_size(self, a, b):
        prices = default_price_book()
        lo, hi = sorted((a, b))
        assert migration_cost(lo, prices) <= migration_cost(hi, prices)

    @given(st.integers(min_value=0, max_value=10**12), st.integers(min_value=0, max_value=500))
    def test_monotone_in_each_price(self, size, bump):
        base = default_price_book()
        reference = migration_cost(size, base)
        for field in ("egress", "p_read", "p_write", "p_blob"):
            raised = PriceBook(
                **{
                    **{f: getattr(base, f) for f in (
                        "p_blob", "p_read", "p_write", "p_sec", "p_byte", "egress")},
                    "ops_chunk_bytes": base.ops_chunk_bytes,
                    "storage_months": base.storage_months,
                    field: getattr(base, field) + Fraction(bump, 1000),
                }
            )
            assert migration_cost(size, raised) >= reference


class TestQuerySavings:
    def test_worked_example(self):
        # $25.84 at the source vs $1 at the destination.
        assert query_savings(1_000_000, 25_840_000) == 24_840_000

    def test_equal_costs(self):
        assert query_savings(5, 5) == 0

    def test_migration_loss(self):
        assert query_savings(5_000_000, 2_000_000) == -3_000_000

    @given(st.integers(min_value=0, max_value=10**12), st.integers(min_value=0, max_value=10**12))
    def test_antisymmetric(self, a, b):
        assert query_savings(a, b) == -query_savings(b, a)


class TestBreakEven:
    def test_one_tb_boundary(self):
        prices = book(p_sec=per_hour("1"), p_byte=per_byte("6.25"))
        assert break_even_scan_bytes(6.25 * HOUR, prices) == float(TB)

    def test_zero_runtime(self):
        prices = book(p_sec=per_hour("1"), p_byte=per_byte("6.25"))
        assert break_even_scan_bytes(0, prices) == 0

    def test_slope_is_0p16_tb_per_hour(self):
        prices = book(p_sec=per_hour("1"), p_byte=per_byte("6.25"))
        assert break_even_scan_bytes(HOUR, prices) == 0.16 * 1e12

    def test_zero_per_byte_price_is_an_error(self):
        with pytest.raises(PriceError, match="per-byte price is zero; boundary undefined"):
            break_even_scan_bytes(10, book(p_sec=per_hour("1")))

    @given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=0, max_value=1000))
    def test_linear_in_runtime(self, runtime, scale):
        prices = book(p_sec=per_hour("1.086"), p_byte=per_byte("6.25"))
        assert break_even_scan_bytes(scale * runtime, prices) == pytest.approx(
            scale * break_even_scan_bytes(runtime, prices)
        )


class TestExecutionCosts:
    def test_per_byte_one_tb(self):
        assert per_byte_query_cost(TB, book(p_byte=per_byte("6.25"))) == 6_250_000

    def test_per_byte_zero(self):
        assert per_byte_query_cost(0, default_price_book()) == 0

    def test_per_byte_direct_multiplication(self):
        # 2.5 TB at $5/TB, checked by hand: $12.50.
        assert per_byte_query_cost(int(2.5 * TB), book(p_byte=per_byte("5"))) == 12_500_000

    def test_per_compute_one_hour(self):
        assert per_compute_query_cost(HOUR, book(p_sec=per_hour("1.086"))) == 1_086_000

    def test_per_compute_zero(self):
        assert per_compute_query_cost(0, default_price_book()) == 0

    def test_per_compute_unit_conversion(self):
        assert per_compute_query_cost(3600, book(p_sec=per_hour("4"))) == 4_000_000


class TestPriceBook:
    def test_from_json_converts_human_units(self):
        prices = default_price_book()
        assert prices.p_byte == Fraction(6_250_000, TB)
        assert prices.p_sec == Fraction(1_086_000, HOUR)
        assert prices.egress == Fraction(120 * 10**6, TB)
        assert prices.p_read == Fraction(4_000, 10_000)
        assert prices.ops_chunk_bytes == 8 * 2**20
        assert prices.storage_months == Fraction(1, 30)

    def test_json_round_trip(self):
        prices = default_price_book()
        assert PriceBook.from_json(prices.to_json()) == prices

    def test_rejects_unknown_fields(self):
        with pytest.raises(PriceError, match="unknown price fields"):
            PriceBook.from_json({"p_bite_per_tb": "6.25"})

    def test_rejects_negative_price(self):
        with pytest.raises(PriceError, match="negative price"):
            PriceBook(p_byte=Fraction(-1))

    def test_rejects_zero_chunk(self):
        with pytest.raises(PriceError):
            PriceBook(ops_chunk_bytes=0)

    def test_replace_price(self):
        prices = default_price_book().replace_price("egress", "90")
        assert prices.egress == Fraction(90 * 10**6, TB)
        assert prices.p_byte == default_price_book().p_byte


def test_cost_breakdown_total_is_sum_of_parts():
    b = CostBreakdown.build(3, 4, 5)
    assert b.total == 12
    assert b.to_json()["total"] == "0.000012"
