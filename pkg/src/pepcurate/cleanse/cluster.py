"""Greedy clustering, redundancy removal and similarity filtering.

Processing order is length descending, then lexicographic, then input
index, so the first member of a cluster in that order is its longest
member (ties broken lexicographically) and serves as representative.

Two linkage rules are available:

``single`` (default)
    clusters are connected components of the linking graph. Sequences that
    only link through an intermediate still end up together, which is what
    groups chains of near-duplicates such as A~B~C where A and C differ by
    more than the identity budget.
``representative``
    CD-HIT style: each sequence joins the first representative it links to,
    otherwise it founds a new cluster; every member links to its representative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from .align import AlignmentParams, _buffers, align_pair


@dataclass
class ClusterAssignment:
    labels: list[int]                # cluster id per input index
    representatives: list[int]       # input index of each cluster's representative

    @property
    def n_clusters(self) -> int:
        return len(self.representatives)

    def members(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.representatives]
        for i, c in enumerate(self.labels):
            out[c].append(i)
        return out

    def sizes(self) -> list[int]:
        sizes = [0] * len(self.representatives)
        for c in self.labels:
            sizes[c] += 1
        return sizes


def processing_order(seqs: Sequence[str]) -> np.ndarray:
    return np.array(sorted(range(len(seqs)), key=lambda i: (-len(seqs[i]), seqs[i], i)), dtype=np.int64)


def greedy_cluster(seqs: Sequence[str], params: AlignmentParams = AlignmentParams(),
                   linkage: str = "single", prefilter: bool = True) -> ClusterAssignment:
    seqs = [str(s) for s in seqs]
    if not seqs:
        return ClusterAssignment([], [])
    p = K.Packed(seqs)
    buf, work = _buffers(p)
    order = processing_order(seqs)
    args = (p.codes, p.offs, p.lens, p.pm, p.pm_off, p.nwords, order,
            params.min_seq_id, params.min_cov, params.cov_code, prefilter, buf, work)
    if linkage == "single":
        root = K.single_linkage(*args)
    elif linkage == "representative":
        root = K.representative_linkage(*args)
    else:
        raise ValueError(f"linkage must be 'single' or 'representative', got {linkage!r}")
    cluster_of_root: dict[int, int] = {}
    reps: list[int] = []
    for i in order:
        r = int(root[i])
        if r not in cluster_of_root:
            cluster_of_root[r] = len(reps)
            reps.append(r)
    return ClusterAssignment([cluster_of_root[int(root[i])] for i in range(len(seqs))], reps)


def remove_redundancy(seqs: Sequence[str], params: AlignmentParams = AlignmentParams(),
                      linkage: str = "single", return_indices: bool = False):
    """Keep one representative per cluster, in input order."""
    seqs = [str(s) for s in seqs]
    ca = greedy_cluster(seqs, params, linkage)
    keep = sorted(ca.representatives)
    return keep if return_indices else [seqs[i] for i in keep]


def filter_similar_to(pool: Sequence[str], positives: Sequence[str], identity_threshold: float = 0.6,
                      params: AlignmentParams = AlignmentParams(), prefilter: bool = True,
                      return_indices: bool = False):
    """Drop pool members linking to any positive at the lowered identity threshold."""
    pool = [str(s) for s in pool]
    positives = [str(s) for s in positives]
    if not pool or not positives:
        keep = list(range(len(pool)))
        return keep if return_indices else list(pool)
    prm = params.with_identity(identity_threshold)
    p = K.Packed(pool + positives)
    buf, work = _buffers(p)
    hit = K.any_link(p.codes, p.offs, p.lens, p.pm, p.pm_off, p.nwords,
                     np.arange(len(pool), dtype=np.int64),
                     np.arange(len(pool), len(pool) + len(positives), dtype=np.int64),
                     prm.min_seq_id, prm.min_cov, prm.cov_code, prefilter, buf, work)
    keep = [i for i in range(len(pool)) if not hit[i]]
    return keep if return_indices else [pool[i] for i in keep]


def isolation_sweep(seqs: Sequence[str], thresholds: Sequence[float],
                    params: AlignmentParams = AlignmentParams(), linkage: str = "single") -> dict[float, float]:
    """Fraction of sequences left as singleton clusters at each identity threshold."""
    seqs = [str(s) for s in seqs]
    out = {}
    for t in thresholds:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"threshold {t} outside (0, 1]")
        if not seqs:
            out[t] = 0.0
            continue
        ca = greedy_cluster(seqs, params.with_identity(t), linkage)
        out[t] = sum(1 for s in ca.sizes() if s == 1) / len(seqs)
    return out


def cluster_report_rows(ids: Sequence[str], seqs: Sequence[str], ca: ClusterAssignment):
    """Rows for the cluster TSV: record_id, cluster_id, representative_id, identity_to_rep."""
    rows = []
    for i, c in enumerate(ca.labels):
        rep = ca.representatives[c]
        ident = 1.0 if rep == i else align_pair(seqs[i], seqs[rep]).identity
        rows.append((ids[i], c, ids[rep], round(ident, 6)))
    return rows
