"""Histogram and composition distributions, Jensen-Shannon validation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch, EmptyClass, EmptyValues, NotNormalized
from ..seqcore import AA_INDEX, scalar_features

NORM_TOL = 1e-9

# report field name -> attribute
JS_FIELDS = {
    "Length_js": "length",
    "Charge_js": "charge",
    "Hydrophobicity_js": "hydrophobicity",
    "1mers_js": "mers1",
    "2mers_js": "mers2",
}


@dataclass(frozen=True)
class DistributionSpec:
    bins: int = 30
    scalar_threshold: float = 0.2
    mer1_threshold: float = 0.05
    mer2_threshold: float = 0.15

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if min(self.scalar_threshold, self.mer1_threshold, self.mer2_threshold) <= 0:
            raise ValueError("thresholds must be positive")


@dataclass(frozen=True)
class JsReport:
    length: float
    charge: float
    hydrophobicity: float
    mers1: float
    mers2: float
    spec: DistributionSpec = DistributionSpec()

    @property
    def values(self) -> tuple[float, ...]:
        return (self.length, self.charge, self.hydrophobicity, self.mers1, self.mers2)

    @property
    def max_js(self) -> float:
        return max(self.values)

    @property
    def passed(self) -> bool:
        s = self.spec
        return (max(self.length, self.charge, self.hydrophobicity) <= s.scalar_threshold
                and self.mers1 <= s.mer1_threshold and self.mers2 <= s.mer2_threshold)

    def to_dict(self) -> dict:
        out = {name: getattr(self, attr) for name, attr in JS_FIELDS.items()}
        out["pass"] = self.passed
        return out


def js_divergence(p, q) -> float:
    """Base-2 Jensen-Shannon divergence, 0 log 0 taken as 0."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise DimensionMismatch(f"distributions of length {p.size} and {q.size}")
    for v in (p, q):
        if np.any(v < 0) or abs(math.fsum(v) - 1.0) > NORM_TOL:
            raise NotNormalized("inputs must be non-negative and sum to 1")
    m = 0.5 * (p + q)

    def kl(a):
        nz = a > 0
        return math.fsum(a[nz] * np.log2(a[nz] / m[nz]))

    return float(min(1.0, max(0.0, 0.5 * kl(p) + 0.5 * kl(q))))


def shared_range(*arrays) -> tuple[float, float]:
    """[min, max] over the union; a degenerate range is widened by 0.5 each way."""
    vals = [np.asarray(a, dtype=float).ravel() for a in arrays if len(a)]
    if not vals:
        raise EmptyValues("no values to span")
    lo = float(min(v.min() for v in vals))
    hi = float(max(v.max() for v in vals))
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def bin_index(values, bins: int, lo: float, hi: float, clamp: bool = True) -> np.ndarray:
    """Right-open bins of equal width; ``hi`` itself belongs to the last bin."""
    v = np.asarray(values, dtype=float)
    idx = np.floor((v - lo) / (hi - lo) * bins).astype(np.int64)
    idx[v == hi] = bins - 1
    return np.clip(idx, 0, bins - 1) if clamp else idx


def feature_histogram(values, bins: int = 30, range: tuple[float, float] | None = None) -> np.ndarray:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyValues("feature_histogram needs at least one value")
    lo, hi = shared_range(v) if range is None else range
    if not lo < hi:
        raise ValueError("range must satisfy min < max")
    counts = np.bincount(bin_index(v, bins, lo, hi), minlength=bins).astype(float)
    return counts / v.size


def mean_composition(seqs: Sequence[str], n: int) -> np.ndarray | None:
    """Class-level n-mer distribution: the mean of per-sequence frequency vectors.

    Sequences shorter than ``n`` contribute nothing; None when none qualify.
    """
    total = np.zeros(20 ** n)
    used = 0
    for s in seqs:
        if len(s) < n:
            continue
        idx = np.fromiter((AA_INDEX[c] for c in s), dtype=np.int64, count=len(s))
        if n == 2:
            idx = idx[:-1] * 20 + idx[1:]
        total += np.bincount(idx, minlength=20 ** n) / idx.size
        used += 1
    if not used:
        return None
    total /= used
    return total / total.sum()


def _mer_js(pos, neg, n) -> float:
    a, b = mean_composition(pos, n), mean_composition(neg, n)
    if a is None and b is None:
        return 0.0
    if a is None or b is None:
        return 1.0
    return js_divergence(a, b)


def validate_distributions(pos: Sequence[str], neg: Sequence[str], spec: DistributionSpec = DistributionSpec(),
                           pos_features: np.ndarray | None = None,
                           neg_features: np.ndarray | None = None) -> JsReport:
    """The five JS values and their threshold conjunction.

    Scalar histograms share a [min, max] range taken over both classes.
    Precomputed (n, 3) feature matrices may be passed to skip recomputation.
    """
    pos, neg = list(pos), list(neg)
    if not pos or not neg:
        raise EmptyClass("validate_distributions needs both classes")
    fp = scalar_features(pos) if pos_features is None else pos_features
    fn = scalar_features(neg) if neg_features is None else neg_features
    scal = []
    for j in range(3):
        rng = shared_range(fp[:, j], fn[:, j])
        scal.append(js_divergence(feature_histogram(fp[:, j], spec.bins, rng),
                                  feature_histogram(fn[:, j], spec.bins, rng)))
    return JsReport(scal[0], scal[1], scal[2], _mer_js(pos, neg, 1), _mer_js(pos, neg, 2), spec)
