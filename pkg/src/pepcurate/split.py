"""Dataset splitting strategies and the leakage auditor.

Every cluster-based strategy reduces to a list of clusters (lists of record
indices) that are allocated whole. Allocation: clusters are shuffled with the
seed, stably sorted by size descending, and each is given to the partition
with the largest remaining deficit ``frac * n - assigned`` (ties go to train,
then valid, then test). A cluster larger than the train target still goes
wherever the rule sends it (train, being first), with a GiantComponentWarning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cleanse import AlignmentParams, cross_group_links, greedy_cluster
from .errors import BadFractions, GiantComponentWarning
from .fingerprint import Fingerprint, similarity_matrix
from .enrich import MotifCluster, MotifHit
from .io import write_json, write_table

PARTITIONS = ("train", "valid", "test")


@dataclass(frozen=True)
class SplitParams:
    frac_train: float = 0.8
    frac_valid: float = 0.1
    frac_test: float = 0.1
    seed: int = 0

    def __post_init__(self):
        fr = self.fractions
        if any(f < 0 or not math.isfinite(f) for f in fr):
            raise BadFractions(f"fractions must be non-negative, got {fr}")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise BadFractions(f"fractions must sum to 1, got {sum(fr)}")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.frac_train, self.frac_valid, self.frac_test)


@dataclass
class SplitAssignment:
    partition: list[str]
    cluster: list[int]
    strategy: str
    ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.ids:
            self.ids = [str(i) for i in range(len(self.partition))]

    def __len__(self) -> int:
        return len(self.partition)

    def counts(self) -> dict[str, int]:
        out = {p: 0 for p in PARTITIONS}
        for p in self.partition:
            out[p] += 1
        return out

    def indices(self, part: str) -> list[int]:
        return [i for i, p in enumerate(self.partition) if p == part]

    def rows(self):
        return [(rid, p, c, self.strategy) for rid, p, c in zip(self.ids, self.partition, self.cluster)]


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def groups(self) -> list[list[int]]:
        """Components as sorted member lists, ordered by smallest member."""
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return list(out.values())


# =============================================================================
# Allocation
# =============================================================================


def allocate(clusters: Sequence[Sequence[int]], n: int, params: SplitParams,
             weights: Sequence[float] | None = None, stages: Sequence[int] | None = None) -> list[str]:
    """Assign whole clusters to partitions by the largest-deficit rule.

    ``weights`` default to cluster sizes. ``stages`` (lower first) lets
    callers allocate one group of clusters before another, e.g. motif
    components before motif-free ones.
    """
    w = [float(len(c)) for c in clusters] if weights is None else [float(x) for x in weights]
    st = [0] * len(clusters) if stages is None else list(stages)
    total = sum(w)
    targets = [f * total for f in params.fractions]
    rng = np.random.default_rng(params.seed)
    shuffled = rng.permutation(len(clusters)) if clusters else np.zeros(0, dtype=int)
    order = sorted(shuffled.tolist(), key=lambda c: (st[c], -w[c]))
    assigned = [0.0, 0.0, 0.0]
    out = [""] * n
    for c in order:
        deficits = [targets[p] - assigned[p] for p in range(3)]
        best = max(range(3), key=lambda p: (deficits[p], -p))
        if w[c] > targets[0] + 1e-9 and len(clusters) > 0:
            warnings.warn(GiantComponentWarning(
                f"cluster of weight {w[c]:g} exceeds the train target {targets[0]:g}; "
                f"assigned to {PARTITIONS[best]}"), stacklevel=3)
        assigned[best] += w[c]
        for i in clusters[c]:
            out[i] = PARTITIONS[best]
    return out


def _cluster_labels(clusters: Sequence[Sequence[int]], n: int) -> list[int]:
    lab = [-1] * n
    for cid, members in enumerate(clusters):
        for i in members:
            lab[i] = cid
    return lab


def _from_clusters(clusters, n, params, strategy, ids, stages=None, weights=None) -> SplitAssignment:
    part = allocate(clusters, n, params, weights=weights, stages=stages)
    return SplitAssignment(part, _cluster_labels(clusters, n), strategy, list(ids or []))


# =============================================================================
# Strategies
# =============================================================================


def random_split(n: int, params: SplitParams = SplitParams(), ids=None) -> SplitAssignment:
    if n < 3:
        raise ValueError("random_split needs at least 3 records")
    perm = np.random.default_rng(params.seed).permutation(n)
    n_valid = math.floor(params.frac_valid * n + 0.5)
    n_test = math.floor(params.frac_test * n + 0.5)
    n_train = n - n_valid - n_test
    part = [""] * n
    for k, i in enumerate(perm.tolist()):
        part[i] = "train" if k < n_train else ("valid" if k < n_train + n_valid else "test")
    return SplitAssignment(part, list(range(n)), "random", list(ids or []))


def _motif_lists(motifs) -> list[list[str]]:
    """Normalize motif clusters / hits / plain k-mer lists to lists of k-mers."""
    out = []
    for m in motifs or []:
        if isinstance(m, MotifCluster):
            out.append(list(m.kmers))
        elif isinstance(m, MotifHit):
            out.append([m.kmer])
        elif isinstance(m, str):
            out.append([m])
        else:
            out.append([str(x) for x in m])
    return out


def motif_membership(seqs: Sequence[str], motifs) -> list[list[int]]:
    """For each motif cluster, the records containing any of its k-mers."""
    groups = _motif_lists(motifs)
    lookup: dict[int, dict[str, list[int]]] = {}
    for g, kms in enumerate(groups):
        for km in kms:
            lookup.setdefault(len(km), {}).setdefault(km, []).append(g)
    members: list[set[int]] = [set() for _ in groups]
    for i, s in enumerate(seqs):
        for k, table in lookup.items():
            for j in range(len(s) - k + 1):
                for g in table.get(s[j:j + k], ()):
                    members[g].add(i)
    return [sorted(m) for m in members]


def _motif_union(seqs, motifs, uf: UnionFind) -> set[int]:
    bearing: set[int] = set()
    for members in motif_membership(seqs, motifs):
        for i in members[1:]:
            uf.union(members[0], i)
        bearing.update(members)
    return bearing


def kmer_groups(seqs: Sequence[str], motif_clusters) -> list[list[int]]:
    seqs = [str(s) for s in seqs]
    uf = UnionFind(len(seqs))
    _motif_union(seqs, motif_clusters, uf)
    return uf.groups()


def kmer_split(seqs: Sequence[str], motif_clusters, params: SplitParams = SplitParams(), ids=None) -> SplitAssignment:
    """Records containing any k-mer of the same motif cluster stay together."""
    return _from_clusters(kmer_groups(seqs, motif_clusters), len(seqs), params, "kmer", ids)


def identity_groups(seqs: Sequence[str], identity_threshold: float = 0.3,
                    align: AlignmentParams = AlignmentParams()) -> list[list[int]]:
    ca = greedy_cluster([str(s) for s in seqs], align.with_identity(identity_threshold))
    return _ordered(ca.members())


def identity_split(seqs: Sequence[str], identity_threshold: float = 0.3, params: SplitParams = SplitParams(),
                   align: AlignmentParams = AlignmentParams(), ids=None) -> SplitAssignment:
    clusters = identity_groups(seqs, identity_threshold, align)
    return _from_clusters(clusters, len(seqs), params, "identity", ids)


def _ordered(groups: list[list[int]]) -> list[list[int]]:
    return sorted((sorted(g) for g in groups), key=lambda g: g[0])


def _identity_union(seqs, align: AlignmentParams, uf: UnionFind) -> None:
    ca = greedy_cluster(seqs, align)
    for members in ca.members():
        for i in members[1:]:
            uf.union(members[0], i)


def hybrid_groups(seqs: Sequence[str], motif_clusters, identity_threshold: float = 0.3,
                  align: AlignmentParams = AlignmentParams()) -> tuple[list[list[int]], list[int]]:
    """Hybrid clusters and their allocation stage (0 motif-bearing, 1 motif-free).

    Identity links are taken over all records, so a motif-free sequence that
    is homologous to a motif-bearing one joins that component. This is what
    keeps both leakage checks clean at once.
    """
    seqs = [str(s) for s in seqs]
    uf = UnionFind(len(seqs))
    bearing = _motif_union(seqs, motif_clusters, uf)
    _identity_union(seqs, align.with_identity(identity_threshold), uf)
    clusters = _ordered(uf.groups())
    stages = [0 if any(i in bearing for i in c) else 1 for c in clusters]
    return clusters, stages


def hybrid_split(seqs: Sequence[str], motif_clusters, identity_threshold: float = 0.3,
                 params: SplitParams = SplitParams(), align: AlignmentParams = AlignmentParams(),
                 ids=None) -> SplitAssignment:
    """Motif components first, then identity clusters of the motif-free records."""
    clusters, stages = hybrid_groups(seqs, motif_clusters, identity_threshold, align)
    return _from_clusters(clusters, len(seqs), params, "hybrid", ids, stages=stages)


def assign_clusters(clusters: Sequence[Sequence[int]], n: int, params: SplitParams, strategy: str,
                    ids=None, stages=None) -> SplitAssignment:
    """Allocate precomputed clusters; lets repeated splits share one clustering."""
    return _from_clusters(clusters, n, params, strategy, ids, stages=stages)


def similarity_components(fps: Sequence[Fingerprint], tau: float = 0.95) -> list[list[int]]:
    n = len(fps)
    uf = UnionFind(n)
    if n > 1:
        sim = similarity_matrix(fps)
        iu, ju = np.nonzero(np.triu(sim >= tau, 1))
        for i, j in zip(iu.tolist(), ju.tolist()):
            uf.union(i, j)
    return _ordered(uf.groups())


def ecfp_split(fps: Sequence[Fingerprint], tau: float = 0.95, params: SplitParams = SplitParams(),
               ids=None) -> SplitAssignment:
    return _from_clusters(similarity_components(fps, tau), len(fps), params, "ecfp", ids)


def cold_start_split(pairs: Sequence, protein_identity_threshold: float = 0.3,
                     params: SplitParams = SplitParams(), align: AlignmentParams = AlignmentParams(),
                     ids=None) -> SplitAssignment:
    """Pairs follow their protein's cluster; no protein cluster spans partitions.

    ``pairs`` holds (peptide, protein) tuples or dicts with those keys.
    """
    proteins = [p["protein"] if isinstance(p, dict) else p[1] for p in pairs]
    uniq = list(dict.fromkeys(proteins))
    pidx = {p: i for i, p in enumerate(uniq)}
    ca = greedy_cluster(uniq, align.with_identity(protein_identity_threshold))
    pclusters = _ordered(ca.members())
    cluster_of_protein = {}
    for cid, members in enumerate(pclusters):
        for m in members:
            cluster_of_protein[m] = cid
    rec_clusters: list[list[int]] = [[] for _ in pclusters]
    for r, prot in enumerate(proteins):
        rec_clusters[cluster_of_protein[pidx[prot]]].append(r)
    return _from_clusters(rec_clusters, len(pairs), params, "cold_start", ids)


# =============================================================================
# Audit
# =============================================================================


def audit_leakage(assignment: SplitAssignment, seqs: Sequence[str], motifs=None,
                  identity_threshold: float | None = 0.3, tau: float = 0.95,
                  fingerprints: Sequence[Fingerprint] | None = None,
                  align: AlignmentParams = AlignmentParams(), limit: int = 1000) -> dict:
    """Independent check of the three leakage guarantees.

    (i) an enriched k-mer found in two or more partitions, (ii) a
    cross-partition pair that links at the identity threshold, (iii) a
    cross-partition fingerprint pair with Tanimoto >= tau (only when
    fingerprints are given).
    """
    seqs = [str(s) for s in seqs]
    n = len(seqs)
    if n != len(assignment):
        raise ValueError("assignment and sequences differ in length")
    ids = assignment.ids
    part = assignment.partition
    report: dict = {"n_records": n, "motif_violations": [], "identity_violations": [],
                    "n_identity_violations": 0, "fingerprint_violations": [],
                    "n_fingerprint_violations": 0}
    kmers = sorted({km for group in _motif_lists(motifs) for km in group})
    for km in kmers:
        where: dict[str, int] = {}
        for i, s in enumerate(seqs):
            if km in s:
                where[part[i]] = where.get(part[i], 0) + 1
        if len(where) >= 2:
            report["motif_violations"].append({"kmer": km, "partitions": dict(sorted(where.items()))})
    if identity_threshold is not None and n > 1:
        group = [PARTITIONS.index(p) for p in part]
        pairs, total = cross_group_links(seqs, group, align.with_identity(identity_threshold), limit=limit)
        report["identity_violations"] = [[ids[i], ids[j], part[i], part[j]] for i, j in pairs]
        report["n_identity_violations"] = total
    else:
        report["identity_violations"] = "skipped"
    if fingerprints is not None and n > 1:
        sim = similarity_matrix(fingerprints)
        iu, ju = np.nonzero(np.triu(sim >= tau, 1))
        fv = [(i, j) for i, j in zip(iu.tolist(), ju.tolist()) if part[i] != part[j]]
        report["fingerprint_violations"] = [[ids[i], ids[j], round(float(sim[i, j]), 6)] for i, j in fv[:limit]]
        report["n_fingerprint_violations"] = len(fv)
    else:
        report["fingerprint_violations"] = "skipped"
    report["clean"] = (not report["motif_violations"] and report["n_identity_violations"] == 0
                       and report["n_fingerprint_violations"] == 0)
    return report


def write_split(path, assignment: SplitAssignment) -> None:
    write_table(path, ("record_id", "partition", "cluster_id", "strategy"), assignment.rows())


def write_audit(path, report: dict) -> None:
    write_json(path, report)
