"""Price book and the closed-form cost formulas every planner consumes.

The two backend pricing models are pay-per-byte (billed on bytes scanned)
and pay-per-compute (billed on compute-seconds). Moving a table between
backends pays egress per byte, one read plus one write operation per storage
chunk, and blob storage for the staging period.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .money import dollars_str, fraction_str, rational, round_micros

GB = 10**9
TB = 10**12
MIB = 2**20
SECONDS_PER_HOUR = 3600
OPS_PER_PRICE_BATCH = 10_000

# JSON field -> (PriceBook field, micro-dollars per base unit per human unit)
_PRICE_FIELDS = {
    "p_blob_per_gb_month": ("p_blob", Fraction(10**6, GB)),
    "p_read_per_10k": ("p_read", Fraction(10**6, OPS_PER_PRICE_BATCH)),
    "p_write_per_10k": ("p_write", Fraction(10**6, OPS_PER_PRICE_BATCH)),
    "p_sec_per_hour": ("p_sec", Fraction(10**6, SECONDS_PER_HOUR)),
    "p_byte_per_tb": ("p_byte", Fraction(10**6, TB)),
    "egress_per_tb": ("egress", Fraction(10**6, TB)),
}


class PriceError(ValueError):
    """Raised for invalid price books or undefined price-derived quantities."""


@dataclass(frozen=True)
class PriceBook:
    """Per-unit prices for one source/destination backend pair.

    All prices are exact rationals in micro-dollars per base unit (byte,
    operation, or second). ``ops_chunk_bytes`` is how many bytes one
    read/write operation covers; ``storage_months`` is the fraction of a
    month migrated data sits in blob storage.
    """

    p_blob: Fraction = Fraction(0)
    p_read: Fraction = Fraction(0)
    p_write: Fraction = Fraction(0)
    p_sec: Fraction = Fraction(0)
    p_byte: Fraction = Fraction(0)
    egress: Fraction = Fraction(0)
    ops_chunk_bytes: int = 8 * MIB
    storage_months: Fraction = Fraction(1, 30)

    def __post_init__(self):
        for name in ("p_blob", "p_read", "p_write", "p_sec", "p_byte", "egress"):
            if getattr(self, name) < 0:
                raise PriceError(f"negative price: {name}")
        if self.ops_chunk_bytes <= 0:
            raise PriceError("ops_chunk_bytes must be positive")
        if self.storage_months < 0:
            raise PriceError("storage_months must be >= 0")

    @classmethod
    def from_json(cls, doc: Mapping) -> "PriceBook":
        """Build a PriceBook from the human-unit JSON schema ($/TB, $/hr, ...)."""
        known = set(_PRICE_FIELDS) | {"ops_chunk_mib", "storage_months"}
        unknown = set(doc) - known
        if unknown:
            raise PriceError(f"unknown price fields: {sorted(unknown)}")
        kwargs = {}
        for key, (field, per_unit) in _PRICE_FIELDS.items():
            if key in doc:
                kwargs[field] = rational(doc[key]) * per_unit
        if "ops_chunk_mib" in doc:
            chunk = rational(doc["ops_chunk_mib"]) * MIB
            if chunk.denominator != 1:
                raise PriceError("ops_chunk_mib must resolve to whole bytes")
            kwargs["ops_chunk_bytes"] = int(chunk)
        if "storage_months" in doc:
            kwargs["storage_months"] = rational(doc["storage_months"])
        return cls(**kwargs)

    def to_json(self) -> dict:
        doc = {}
        for key, (field, per_unit) in _PRICE_FIELDS.items():
            doc[key] = fraction_str(getattr(self, field) / per_unit)
        doc["ops_chunk_mib"] = fraction_str(Fraction(self.ops_chunk_bytes, MIB))
        doc["storage_months"] = fraction_str(self.storage_months)
        return doc

    def replace_price(self, field: str, dollars_per_tb) -> "PriceBook":
        """Return a copy with ``p_byte`` or ``egress`` set to a new $/TB value."""
        if field not in ("p_byte", "egress"):
            raise PriceError(f"not a sweepable price: {field}")
        per_byte = rational(dollars_per_tb) * Fraction(10**6, TB)
        return dataclasses.replace(self, **{field: per_byte})


def default_price_book() -> PriceBook:
    """List prices for a BigQuery-source / Redshift-destination pair (early 2024)."""
    return PriceBook.from_json(
        {
            "p_blob_per_gb_month": "0.023",
            "p_read_per_10k": "0.004",
            "p_write_per_10k": "0.05",
            "p_sec_per_hour": "1.086",
            "p_byte_per_tb": "6.25",
            "egress_per_tb": "120",
            "ops_chunk_mib": 8,
            "storage_months": "1/30",
        }
    )


@dataclass(frozen=True)
class CostBreakdown:
    """A plan's cost split into migration, moved-query, and remaining-query parts."""

    migration: int
    moved_queries: int
    remaining_queries: int
    total: int

    @classmethod
    def build(cls, migration: int, moved_queries: int, remaining_queries: int) -> "CostBreakdown":
        return cls(migration, moved_queries, remaining_queries,
                   migration + moved_queries + remaining_queries)

    def to_json(self) -> dict:
        return {
            "migration": dollars_str(self.migration),
            "moved_queries": dollars_str(self.moved_queries),
            "remaining_queries": dollars_str(self.remaining_queries),
            "total": dollars_str(self.total),
        }


def migration_cost(table_size: int, prices: PriceBook) -> int:
    """One-time cost to move a table of ``table_size`` bytes to the destination.

    Charges egress per byte, one read and one write operation per started
    storage chunk (operation counts round up), and blob storage for the
    staging period. Zero-size tables cost nothing.
    """
    if table_size < 0:
        raise ValueError("negative table size")
    ops = -(-table_size // prices.ops_chunk_bytes)
    exact = (
        prices.egress * table_size
        + (prices.p_read + prices.p_write) * ops
        + prices.p_blob * prices.storage_months * table_size
    )
    return round_micros(exact)


def query_savings(cost_dest: int, cost_src: int) -> int:
    """Money saved by running a query in the destination instead of the source.

    Positive means migrating the query saves money.
    """
    return cost_src - cost_dest


def break_even_scan_bytes(runtime: float, prices: PriceBook) -> float:
    """Scan size at which a query costs the same under both pricing models.

    A query running ``runtime`` seconds costs the same per-compute as one
    scanning ``(p_sec / p_byte) * runtime`` bytes costs per-byte.
    """
    if prices.p_byte == 0:
        raise PriceError("per-byte price is zero; boundary undefined")
    return float(Fraction(prices.p_sec, prices.p_byte) * Fraction(runtime))


def per_byte_query_cost(bytes_scanned: int, prices: PriceBook) -> int:
    """Execution cost of a query in the pay-per-byte backend."""
    if bytes_scanned < 0:
        raise ValueError("negative scan size")
    return round_micros(prices.p_byte * bytes_scanned)


def per_compute_query_cost(runtime: float, prices: PriceBook) -> int:
    """Execution cost of a query in the pay-per-compute backend."""
    if runtime < 0:
        raise ValueError("negative runtime")
    return round_micros(prices.p_sec * Fraction(runtime))
