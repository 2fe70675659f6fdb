"""Pairwise identity and the linking predicate behind redundancy removal.

Alignment is end-gap-free (leading and trailing gaps on either sequence cost
nothing) with match +1, mismatch -1 and gap -2. Coverage is the aligned span
of each sequence, from its first to its last aligned residue, divided by its
length. A fragment therefore aligns without penalty but reports low coverage.
Identity is identical columns divided by the shorter length. Any non-canonical
letter (X and the other ambiguity codes) never counts as identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K


@dataclass(frozen=True)
class AlignmentParams:
    min_seq_id: float = 0.9
    min_cov: float = 0.9
    cov_mode: str = "both"        # both | longer
    id_mode: str = "shorter_len"

    def __post_init__(self):
        for name in ("min_seq_id", "min_cov"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if self.cov_mode not in ("both", "longer"):
            raise ValueError(f"cov_mode must be 'both' or 'longer', got {self.cov_mode!r}")
        if self.id_mode != "shorter_len":
            raise ValueError("only id_mode='shorter_len' is supported")

    def with_identity(self, min_seq_id: float) -> "AlignmentParams":
        return AlignmentParams(min_seq_id, self.min_cov, self.cov_mode, self.id_mode)

    @property
    def cov_code(self) -> int:
        return K.COV_BOTH if self.cov_mode == "both" else K.COV_LONGER


@dataclass(frozen=True)
class AlignmentResult:
    score: int
    identical: int
    identity: float
    cov_query: float
    cov_target: float


def _buffers(packed: K.Packed):
    buf = np.zeros((8, packed.max_len + 1), dtype=np.int64)
    work = np.zeros(max(packed.max_words, 1), dtype=np.uint64)
    return buf, work


def align_pair(a: str, b: str) -> AlignmentResult:
    a, b = str(a), str(b)
    if not a or not b:
        raise ValueError("cannot align an empty sequence")
    p = K.Packed([a, b])
    buf, _ = _buffers(p)
    score, ident, sa, sb = K.pair_result(p.codes, p.offs, p.lens, 0, 1, buf)
    return AlignmentResult(int(score), int(ident), ident / min(len(a), len(b)),
                           sa / len(a), sb / len(b))


def pair_links(a: str, b: str, params: AlignmentParams = AlignmentParams(), prefilter: bool = True) -> bool:
    p = K.Packed([str(a), str(b)])
    buf, work = _buffers(p)
    return bool(K.links(p.codes, p.offs, p.lens, p.pm, p.pm_off, p.nwords, 0, 1,
                        params.min_seq_id, params.min_cov, params.cov_code, prefilter, buf, work))


def lcs_length(a: str, b: str) -> int:
    p = K.Packed([str(a), str(b)])
    _, work = _buffers(p)
    return int(K.lcs_length(p.codes, p.offs, p.lens, p.pm, p.pm_off, p.nwords, 0, 1, work))


def cross_group_links(seqs, groups, params: AlignmentParams, prefilter: bool = True,
                      limit: int = 100000) -> tuple[list[tuple[int, int]], int]:
    """Linking pairs whose group labels differ; returns (pairs[:limit], total)."""
    p = K.Packed(seqs)
    if p.n < 2:
        return [], 0
    buf, work = _buffers(p)
    g = np.asarray(groups, dtype=np.int64)
    pairs, total = K.cross_links(p.codes, p.offs, p.lens, p.pm, p.pm_off, p.nwords, g,
                                 params.min_seq_id, params.min_cov, params.cov_code, prefilter,
                                 buf, work, limit)
    return [(int(i), int(j)) for i, j in pairs], int(total)
