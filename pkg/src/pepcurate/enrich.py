"""k-mer enrichment: one-sided Fisher test, BH control and motif merging.

Each k-mer seen in at least one positive gets a 2x2 table built on presence
per sequence::

                 contains   lacks
    positives       a         b
    negatives       c         d

A hit must satisfy all of: support (a) >= min_support, total occurrences
across positives >= min_pos, q (or p without FDR) <= alpha, and
Haldane-corrected odds ratio >= min_score.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import EmptyClass
from .io import write_table

MIN_JACCARD_NOTE = "min_jaccard is applied to motif support sets (single linkage)"


@dataclass(frozen=True)
class ContingencyTable:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError(f"negative cell in {self}")

    @property
    def degenerate(self) -> bool:
        """A zero row or column margin (the test carries no information)."""
        return 0 in (self.a + self.b, self.c + self.d, self.a + self.c, self.b + self.d)


@dataclass
class EnrichmentParams:
    k: int | None = None            # None: choose_k on the mean length
    alpha: float = 0.05
    min_score: float = 4.0
    min_support: int = 5
    min_pos: int = 3
    min_jaccard: float = 0.6
    fdr: bool = True

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        for name in ("alpha", "min_score", "min_support", "min_pos", "min_jaccard"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class MotifHit:
    kmer: str
    table: ContingencyTable
    p: float
    q: float
    odds: float
    support: frozenset
    occurrences: int = 0


@dataclass
class MotifCluster:
    kmers: list[str]
    support: frozenset = field(default_factory=frozenset)


class _LogFact:
    def __init__(self, n: int = 64):
        self.table = gammaln(np.arange(n + 1) + 1.0)

    def __call__(self, n: int) -> float:
        if n >= len(self.table):
            self.table = gammaln(np.arange(max(n + 1, 2 * len(self.table))) + 1.0)
        return self.table[n]

    def array(self, n: int) -> np.ndarray:
        self(n)
        return self.table


_LF = _LogFact()


def _upper_tail(a: int, row1: int, col1: int, total: int) -> float:
    lf = _LF.array(total)
    hi = min(row1, col1)
    if a > hi:
        return 0.0
    x = np.arange(a, hi + 1)
    log_terms = (lf[col1] - lf[x] - lf[col1 - x]
                 + lf[total - col1] - lf[row1 - x] - lf[total - col1 - row1 + x]
                 - (lf[total] - lf[row1] - lf[total - row1]))
    return float(min(1.0, max(0.0, math.fsum(np.exp(log_terms)))))


def fisher_exact_greater(t: ContingencyTable) -> float:
    """P(X >= a) under the hypergeometric null with the table's margins.

    Degenerate tables (a zero margin) return 1.0; see ``ContingencyTable.degenerate``.
    """
    if t.degenerate or t.a == 0:
        return 1.0
    row1, col1 = t.a + t.b, t.a + t.c
    total = t.a + t.b + t.c + t.d
    lo = max(0, row1 + col1 - total)
    if t.a <= lo:
        return 1.0
    return _upper_tail(t.a, row1, col1, total)


def bh_fdr(pvals: Sequence[float], alpha: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Benjamini-Hochberg step-up. Returns (reject mask, q-values)."""
    p = np.asarray(pvals, dtype=float)
    m = p.size
    if m == 0:
        return np.zeros(0, dtype=bool), np.zeros(0)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    order = np.argsort(p, kind="stable")
    ranked = p[order]
    ranks = np.arange(1, m + 1)
    passing = np.nonzero(ranked <= ranks * alpha / m)[0]
    reject = np.zeros(m, dtype=bool)
    if passing.size:
        cutoff = ranked[passing[-1]]
        reject = p <= cutoff
    adj = np.minimum.accumulate((ranked * m / ranks)[::-1])[::-1]
    q = np.empty(m)
    q[order] = np.minimum(adj, 1.0)
    q = np.maximum(q, p)
    return reject, q


def odds_ratio(t: ContingencyTable) -> float:
    a, b, c, d = t.a, t.b, t.c, t.d
    if 0 in (a, b, c, d):
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    return (a * d) / (b * c)


def choose_k(mean_length: float) -> int:
    if mean_length <= 0:
        raise ValueError("mean length must be positive")
    return 5 if mean_length > 15 else 3


def find_enriched_kmers(pos: Sequence[str], neg: Sequence[str],
                        params: EnrichmentParams = EnrichmentParams(),
                        pos_ids: Sequence | None = None) -> list[MotifHit]:
    pos = [str(s) for s in pos]
    neg = [str(s) for s in neg]
    if not pos or not neg:
        raise EmptyClass("enrichment needs both positive and negative sequences")
    ids = list(pos_ids) if pos_ids is not None else list(range(len(pos)))
    k = params.k or choose_k(sum(map(len, pos + neg)) / (len(pos) + len(neg)))
    support: dict[str, list] = {}
    occ: Counter = Counter()
    for rid, s in zip(ids, pos):
        windows = [s[i:i + k] for i in range(len(s) - k + 1)]
        occ.update(windows)
        for w in set(windows):
            support.setdefault(w, []).append(rid)
    neg_count: Counter = Counter()
    for s in neg:
        neg_count.update({s[i:i + k] for i in range(len(s) - k + 1)})
    kmers = sorted(support)
    n_pos, n_neg = len(pos), len(neg)
    tables = []
    cache: dict[tuple[int, int], float] = {}
    pvals = np.empty(len(kmers))
    for i, km in enumerate(kmers):
        a, c = len(support[km]), neg_count.get(km, 0)
        t = ContingencyTable(a, n_pos - a, c, n_neg - c)
        tables.append(t)
        if (a, c) not in cache:
            cache[(a, c)] = fisher_exact_greater(t)
        pvals[i] = cache[(a, c)]
    _, q = bh_fdr(pvals, params.alpha) if len(kmers) else (None, np.zeros(0))
    hits = []
    for i, km in enumerate(kmers):
        t = tables[i]
        score = q[i] if params.fdr else pvals[i]
        o = odds_ratio(t)
        if (t.a >= params.min_support and occ[km] >= params.min_pos
                and score <= params.alpha and o >= params.min_score):
            hits.append(MotifHit(km, t, float(pvals[i]), float(q[i]), o, frozenset(support[km]), occ[km]))
    hits.sort(key=lambda h: (h.q, -h.odds, h.kmer))
    return hits


def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def merge_motifs(hits: Sequence[MotifHit], min_jaccard: float = 0.6) -> list[MotifCluster]:
    """Single-linkage merge of hits whose support sets overlap by Jaccard >= min_jaccard."""
    n = len(hits)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if find(i) != find(j) and jaccard(hits[i].support, hits[j].support) >= min_jaccard - 1e-12:
                ri, rj = find(i), find(j)
                parent[max(ri, rj)] = min(ri, rj)
    clusters: dict[int, MotifCluster] = {}
    for i, h in enumerate(hits):
        r = find(i)
        cl = clusters.setdefault(r, MotifCluster([], frozenset()))
        cl.kmers.append(h.kmer)
        cl.support = cl.support | h.support
    return list(clusters.values())


def write_enrichment_report(path, hits: Sequence[MotifHit]) -> None:
    rows = [(h.kmer, h.table.a, h.table.b, h.table.c, h.table.d, h.p, h.q, h.odds, len(h.support))
            for h in hits]
    write_table(path, ("kmer", "a", "b", "c", "d", "p", "q", "odds", "support_size"), rows,
                comment=MIN_JACCARD_NOTE)
