"""numba kernels for pairwise alignment, the LCS prefilter and clustering.

Sequences are packed into one int8 code array (0..19 canonical, 20 for
anything else) with offsets and lengths. For the bit-parallel LCS each
sequence also owns ``ceil(L/64)`` rows of a (words, 20) uint64 match-mask
table.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..seqcore import AA_INDEX

NONCANON = 20
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)

COV_BOTH = 0
COV_LONGER = 1


class Packed:
    """Sequences in the flat layout the kernels expect."""

    def __init__(self, seqs):
        seqs = [str(s) for s in seqs]
        self.n = len(seqs)
        self.lens = np.array([len(s) for s in seqs], dtype=np.int64)
        self.offs = np.zeros(self.n, dtype=np.int64)
        if self.n:
            self.offs[1:] = np.cumsum(self.lens)[:-1]
        joined = "".join(seqs)
        lut = np.full(128, NONCANON, dtype=np.int8)
        for aa, i in AA_INDEX.items():
            lut[ord(aa)] = i
        raw = np.frombuffer(joined.encode("ascii", "replace"), dtype=np.uint8)
        self.codes = lut[np.minimum(raw, 127)] if raw.size else np.zeros(0, dtype=np.int8)
        self.nwords = (self.lens + 63) // 64
        self.pm_off = np.zeros(self.n, dtype=np.int64)
        if self.n:
            self.pm_off[1:] = np.cumsum(self.nwords)[:-1]
        total = int(self.nwords.sum()) if self.n else 0
        self.pm = np.zeros((max(total, 1), NONCANON), dtype=np.uint64)
        if raw.size:
            seq_of = np.repeat(np.arange(self.n), self.lens)
            pos = np.arange(raw.size) - self.offs[seq_of]
            keep = self.codes < NONCANON
            rows = self.pm_off[seq_of] + pos // 64
            bits = np.left_shift(np.uint64(1), (pos % 64).astype(np.uint64))
            np.bitwise_or.at(self.pm, (rows[keep], self.codes[keep].astype(np.int64)), bits[keep])
        self.max_words = int(self.nwords.max()) if self.n else 1
        self.max_len = int(self.lens.max()) if self.n else 1


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - _ONE
        c += 1
    return c


@njit(cache=True)
def lcs_length(codes, offs, lens, pm, pm_off, nwords, a, b, work):
    """Length of the longest common subsequence of a and b (Hyyro's bit-vector form)."""
    nw = nwords[b]
    w0 = pm_off[b]
    for w in range(nw):
        work[w] = _ALL
    a0 = offs[a]
    for k in range(a0, a0 + lens[a]):
        c = codes[k]
        if c >= NONCANON:
            continue
        carry = _ZERO
        for w in range(nw):
            pmw = pm[w0 + w, c]
            v = work[w]
            u = v & pmw
            t = v + u
            c1 = t < v
            s = t + carry
            c2 = s < t
            carry = _ONE if (c1 or c2) else _ZERO
            work[w] = s | (v & ~pmw)
    lb = lens[b]
    zeros = 0
    for w in range(nw):
        v = work[w]
        nbits = lb - 64 * w
        if nbits < 64:
            v |= ~((_ONE << np.uint64(nbits)) - _ONE)
        zeros += 64 - _popcount(v)
    return zeros


@njit(cache=True)
def _before(codes, offs, lens, a, b):
    """True when a should be the row (query) sequence of the pair."""
    if lens[a] != lens[b]:
        return lens[a] > lens[b]
    oa, ob = offs[a], offs[b]
    for k in range(lens[a]):
        if codes[oa + k] != codes[ob + k]:
            return codes[oa + k] < codes[ob + k]
    return a <= b


@njit(cache=True)
def align_dp(codes, offs, lens, a, b, buf):
    """End-gap-free alignment (+1 / -1 / gap -2).

    Returns (score, identical, span_a, span_b). Cells are compared on
    (score, identical) and ties prefer diagonal, then up, then left.
    """
    la, lb = lens[a], lens[b]
    oa, ob = offs[a], offs[b]
    ps, pn, pi, pj = buf[0], buf[1], buf[2], buf[3]
    cs, cn, ci, cj = buf[4], buf[5], buf[6], buf[7]
    for j in range(lb + 1):
        ps[j] = 0
        pn[j] = 0
        pi[j] = 0
        pj[j] = j
    bs, bn, bsa, bsb = 0, 0, 0, 0
    for i in range(1, la + 1):
        cs[0] = 0
        cn[0] = 0
        ci[0] = i
        cj[0] = 0
        ca = codes[oa + i - 1]
        for j in range(1, lb + 1):
            cb = codes[ob + j - 1]
            m = 1 if (ca == cb and ca < NONCANON) else 0
            s = ps[j - 1] + (1 if m else -1)
            nn = pn[j - 1] + m
            si, sj = pi[j - 1], pj[j - 1]
            us, un = ps[j] - 2, pn[j]
            if us > s or (us == s and un > nn):
                s, nn, si, sj = us, un, pi[j], pj[j]
            ls, ln = cs[j - 1] - 2, cn[j - 1]
            if ls > s or (ls == s and ln > nn):
                s, nn, si, sj = ls, ln, ci[j - 1], cj[j - 1]
            cs[j] = s
            cn[j] = nn
            ci[j] = si
            cj[j] = sj
        if cs[lb] > bs or (cs[lb] == bs and cn[lb] > bn):
            bs, bn, bsa, bsb = cs[lb], cn[lb], i - ci[lb], lb - cj[lb]
        for j in range(lb + 1):
            ps[j] = cs[j]
            pn[j] = cn[j]
            pi[j] = ci[j]
            pj[j] = cj[j]
    for j in range(1, lb + 1):
        if ps[j] > bs or (ps[j] == bs and pn[j] > bn):
            bs, bn, bsa, bsb = ps[j], pn[j], la - pi[j], j - pj[j]
    return bs, bn, bsa, bsb


@njit(cache=True)
def pair_result(codes, offs, lens, a, b, buf):
    """Oriented alignment of a and b; spans are returned in (a, b) order."""
    if _before(codes, offs, lens, a, b):
        s, n, sa, sb = align_dp(codes, offs, lens, a, b, buf)
        return s, n, sa, sb
    s, n, sb, sa = align_dp(codes, offs, lens, b, a, buf)
    return s, n, sa, sb


@njit(cache=True)
def links(codes, offs, lens, pm, pm_off, nwords, a, b, min_id, min_cov, cov_mode,
          prefilter, buf, work):
    la, lb = lens[a], lens[b]
    short = la if la < lb else lb
    long_ = la if la > lb else lb
    if short == 0:
        return False
    need_id = min_id * short - 1e-9
    if prefilter:
        # The chosen alignment scores >= 0 (the empty alignment is a candidate),
        # so mismatches + 2*gaps <= identical and the covered span of a sequence
        # of length L is at most 2*identical: identical >= cov*L/2.
        # Both coverage modes constrain the longer sequence.
        need_cov = min_cov * long_ / 2.0 - 1e-9
        bound = need_id if need_id > need_cov else need_cov
        if short < bound:
            return False
        # identical residues form a common subsequence
        q = b if la >= lb else a
        t = a if la >= lb else b
        if lcs_length(codes, offs, lens, pm, pm_off, nwords, t, q, work) < bound:
            return False
    s, n, sa, sb = pair_result(codes, offs, lens, a, b, buf)
    if n < need_id:
        return False
    ca = sa >= min_cov * la - 1e-9
    cb = sb >= min_cov * lb - 1e-9
    if cov_mode == COV_BOTH:
        return ca and cb
    return ca if la >= lb else cb


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def single_linkage(codes, offs, lens, pm, pm_off, nwords, order, min_id, min_cov,
                   cov_mode, prefilter, buf, work):
    """Union-find over all linking pairs; root of each set = earliest in ``order``."""
    n = order.shape[0]
    parent = np.arange(lens.shape[0])
    rank_of = np.empty(lens.shape[0], dtype=np.int64)
    for k in range(n):
        rank_of[order[k]] = k
    for x in range(n):
        a = order[x]
        for y in range(x + 1, n):
            b = order[y]
            ra = _find(parent, a)
            rb = _find(parent, b)
            if ra == rb:
                continue
            if links(codes, offs, lens, pm, pm_off, nwords, a, b, min_id, min_cov, cov_mode,
                     prefilter, buf, work):
                if rank_of[ra] < rank_of[rb]:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
    for k in range(lens.shape[0]):
        parent[k] = _find(parent, k)
    return parent


@njit(cache=True)
def representative_linkage(codes, offs, lens, pm, pm_off, nwords, order, min_id, min_cov,
                           cov_mode, prefilter, buf, work):
    """CD-HIT style: join the first representative that links, else found a cluster."""
    n = order.shape[0]
    assign = np.full(lens.shape[0], -1, dtype=np.int64)
    reps = np.empty(n, dtype=np.int64)
    nrep = 0
    for x in range(n):
        a = order[x]
        for r in range(nrep):
            if links(codes, offs, lens, pm, pm_off, nwords, reps[r], a, min_id, min_cov,
                     cov_mode, prefilter, buf, work):
                assign[a] = reps[r]
                break
        if assign[a] < 0:
            assign[a] = a
            reps[nrep] = a
            nrep += 1
    return assign


@njit(cache=True)
def any_link(codes, offs, lens, pm, pm_off, nwords, queries, targets, min_id, min_cov,
             cov_mode, prefilter, buf, work):
    """For each query, whether it links to at least one target."""
    out = np.zeros(queries.shape[0], dtype=np.bool_)
    for x in range(queries.shape[0]):
        for y in range(targets.shape[0]):
            if links(codes, offs, lens, pm, pm_off, nwords, queries[x], targets[y], min_id,
                     min_cov, cov_mode, prefilter, buf, work):
                out[x] = True
                break
    return out


@njit(cache=True)
def cross_links(codes, offs, lens, pm, pm_off, nwords, group, min_id, min_cov, cov_mode,
                prefilter, buf, work, limit):
    """Linking pairs (i < j) whose group labels differ, up to ``limit`` pairs."""
    n = lens.shape[0]
    out = np.empty((limit, 2), dtype=np.int64)
    k = 0
    for a in range(n):
        for b in range(a + 1, n):
            if group[a] == group[b]:
                continue
            if links(codes, offs, lens, pm, pm_off, nwords, a, b, min_id, min_cov, cov_mode,
                     prefilter, buf, work):
                if k < limit:
                    out[k, 0] = a
                    out[k, 1] = b
                k += 1
    return out[:min(k, limit)], k
