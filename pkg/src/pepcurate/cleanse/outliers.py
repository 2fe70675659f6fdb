"""Regression label aggregation over repeated measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..errors import EmptyValues, MixedUnits
from ..seqcore import DatasetRecord

IQR_K = 1.5


def iqr_aggregate(values: Sequence[float]) -> tuple[list[float], float]:
    """Drop values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR] and average the rest.

    Quartiles use linear interpolation between order statistics (numpy's
    default ``linear`` method).
    """
    vals = [float(v) for v in values]
    if not vals:
        raise EmptyValues("iqr_aggregate needs at least one value")
    q1, q3 = np.percentile(vals, [25, 75])
    iqr = q3 - q1
    lo, hi = q1 - IQR_K * iqr, q3 + IQR_K * iqr
    kept = [v for v in vals if lo <= v <= hi]
    return kept, math.fsum(kept) / len(kept)


@dataclass
class AggregationStats:
    total: int = 0
    removed: int = 0
    unique: int = 0


def aggregate_duplicates(records: Sequence[DatasetRecord]):
    """Collapse records sharing a sequence into one, IQR-filtering their labels.

    Returns (records, stats, report_rows) where report rows are
    ``(sequence, n_measurements, n_removed, final_label)`` in first-seen order.

    Raises:
        MixedUnits: the records carry more than one distinct unit tag.
    """
    units = {r.unit for r in records}
    if len(units) > 1:
        raise MixedUnits(f"inconsistent unit tags: {sorted(units)}")
    groups: dict[str, list[DatasetRecord]] = {}
    for r in records:
        groups.setdefault(r.sequence, []).append(r)
    stats = AggregationStats(total=len(records))
    out, rows = [], []
    for seq, recs in groups.items():
        kept, mean = iqr_aggregate([r.label for r in recs])
        removed = len(recs) - len(kept)
        stats.removed += removed
        out.append(replace(recs[0], label=mean))
        rows.append((seq, len(recs), removed, mean))
    stats.unique = len(out)
    return out, stats, rows
