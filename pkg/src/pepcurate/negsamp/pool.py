"""Negative-pool construction: correlation exclusion, dedup, redundancy removal."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from ..cleanse import AlignmentParams, filter_similar_to, remove_redundancy
from ..errors import EmptyPoolAfterExclusion, EmptySet
from ..seqcore import is_canonical

RELATED_OVERLAP = 0.05


def overlap_ratio(a: Iterable[str], b: Iterable[str]) -> float:
    """Shared sequences over the size of the smaller set."""
    a, b = set(a), set(b)
    if not a or not b:
        raise EmptySet("overlap_ratio needs two non-empty sets")
    return len(a & b) / min(len(a), len(b))


def load_expert_groups(path=None) -> dict[str, list[str]]:
    """Expert-curated groups of mutually related datasets (editable JSON)."""
    if path is None:
        text = resources.files(__package__).joinpath("data/expert_groups.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    groups = json.loads(text)
    return {str(k): [str(x) for x in v] for k, v in groups.items()}


def expert_exclusions_for(target: str, groups: Mapping[str, Sequence[str]] | None = None) -> set[str]:
    """Every dataset sharing an expert group with ``target``."""
    groups = load_expert_groups() if groups is None else groups
    out: set[str] = set()
    for members in groups.values():
        if target in members:
            out.update(members)
    out.discard(target)
    return out


@dataclass
class SamplingPool:
    sequences: list[str]
    sources: list[str]
    excluded_datasets: dict[str, str] = field(default_factory=dict)   # name -> reason
    n_raw: int = 0
    n_noncanonical: int = 0
    n_duplicates: int = 0
    n_redundant: int = 0

    def __len__(self) -> int:
        return len(self.sequences)

    def subset(self, keep: Sequence[int]) -> "SamplingPool":
        return SamplingPool([self.sequences[i] for i in keep], [self.sources[i] for i in keep],
                            dict(self.excluded_datasets), self.n_raw, self.n_noncanonical,
                            self.n_duplicates, self.n_redundant)


def build_pool(datasets: Mapping[str, Sequence[str]], target: str, positives: Sequence[str] | None = None,
               expert_exclusions: Iterable[str] | None = None, auto_threshold: float = RELATED_OVERLAP,
               redundancy: AlignmentParams | None = AlignmentParams()) -> SamplingPool:
    """Union of every dataset unrelated to ``target``.

    A dataset is excluded when it is the target itself, is listed in
    ``expert_exclusions`` (default: the shipped expert groups containing the
    target), or shares more than ``auto_threshold`` of the smaller set with the
    target positives. Survivors are canonical-filtered, deduplicated (first
    source in name order wins) and passed through redundancy removal unless
    ``redundancy`` is None.
    """
    positives = list(datasets.get(target, ())) if positives is None else list(positives)
    if expert_exclusions is None:
        expert_exclusions = expert_exclusions_for(target)
    expert = set(expert_exclusions)
    pos_set = set(positives)
    excluded: dict[str, str] = {}
    kept_names = []
    for name in sorted(datasets):
        seqs = datasets[name]
        if name == target:
            excluded[name] = "target"
        elif name in expert:
            excluded[name] = "expert"
        elif pos_set and seqs and overlap_ratio(seqs, pos_set) > auto_threshold:
            excluded[name] = "overlap"
        else:
            kept_names.append(name)
    seqs, srcs, seen = [], [], set()
    n_raw = n_nc = n_dup = 0
    for name in kept_names:
        for s in datasets[name]:
            n_raw += 1
            s = str(s).strip().upper()
            if not s or not is_canonical(s):
                n_nc += 1
                continue
            if s in seen or s in pos_set:
                n_dup += 1
                continue
            seen.add(s)
            seqs.append(s)
            srcs.append(name)
    if not seqs:
        raise EmptyPoolAfterExclusion(f"no pool members left after excluding {sorted(excluded)}")
    pool = SamplingPool(seqs, srcs, excluded, n_raw, n_nc, n_dup)
    if redundancy is not None:
        keep = remove_redundancy(seqs, redundancy, return_indices=True)
        pool = pool.subset(keep)
        pool.n_redundant = len(seqs) - len(keep)
    return pool


def length_bin(length: int, width: int = 1) -> int:
    return (length - 1) // width


def expand_pool_external(pool: SamplingPool, positives: Sequence[str], external: Sequence[str],
                         coverage: int = 10, bin_width: int = 1, identity_threshold: float = 0.6,
                         params: AlignmentParams = AlignmentParams(), source: str = "external"):
    """Top up length bins whose pool count is below ``coverage`` x the positive count.

    Candidates come from ``external`` in file order and must pass the same
    filters as the bioactive pool: canonical, not already present, no link to
    a positive at ``identity_threshold``, no redundant link to the pool and no
    redundancy among the additions.

    Returns (expanded pool, report) where report maps each deficient length
    bin to ``{"positives", "before", "target", "added", "shortfall"}``.
    """
    need: dict[int, int] = {}
    pos_bins: dict[int, int] = {}
    for s in positives:
        b = length_bin(len(s), bin_width)
        pos_bins[b] = pos_bins.get(b, 0) + 1
    have: dict[int, int] = {}
    for s in pool.sequences:
        b = length_bin(len(s), bin_width)
        have[b] = have.get(b, 0) + 1
    for b, n in pos_bins.items():
        if have.get(b, 0) < coverage * n:
            need[b] = coverage * n - have.get(b, 0)
    report: dict[int, dict] = {}
    if not need:
        return pool, report
    present = set(pool.sequences) | set(positives)
    cands, seen = [], set()
    for s in external:
        s = str(s).strip().upper()
        if s and s not in present and s not in seen and is_canonical(s) and length_bin(len(s), bin_width) in need:
            seen.add(s)
            cands.append(s)
    cands = filter_similar_to(cands, list(positives), identity_threshold, params)
    cands = filter_similar_to(cands, pool.sequences, params.min_seq_id, params)
    cands = remove_redundancy(cands, params)
    added: dict[int, list[str]] = {b: [] for b in need}
    for s in cands:
        b = length_bin(len(s), bin_width)
        if len(added[b]) < need[b]:
            added[b].append(s)
    out = pool.subset(range(len(pool)))
    for b in sorted(need):
        out.sequences.extend(added[b])
        out.sources.extend([source] * len(added[b]))
        report[b] = {"positives": pos_bins[b], "before": have.get(b, 0), "target": coverage * pos_bins[b],
                     "added": len(added[b]), "shortfall": need[b] - len(added[b])}
    return out, report


def filter_pool(pool: SamplingPool, positives: Sequence[str], identity_threshold: float = 0.6,
                params: AlignmentParams = AlignmentParams()) -> SamplingPool:
    """Drop pool members linking to any positive at the lowered identity threshold."""
    keep = filter_similar_to(pool.sequences, list(positives), identity_threshold, params, return_indices=True)
    return pool.subset(keep)
