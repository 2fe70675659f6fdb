"""Distribution-matching negative samplers.

Every sampler draws without replacement from a pool that is assumed to be
disjoint from the positives (run ``filter_pool`` first) and returns pool
indices. All of them work on the scalar property vector (length, net
charge, GRAVY); the kernel, transport and moment methods z-score it with the
positives' mean and standard deviation.

The requested size is ``round(ratio * len(positives))`` (half up). A pool
smaller than that raises ``InsufficientPool`` whose ``partial`` attribute
holds the whole pool as the best available result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit
from scipy.special import logsumexp

from ..errors import BackfillWarning, DegenerateBandwidth, InsufficientPool
from ..seqcore import scalar_features
from .distributions import DistributionSpec, bin_index
from .ot import sinkhorn_capacity

CHUNK = 1024


@dataclass
class NegativeSet:
    strategy: str
    indices: list[int]
    sequences: list[str]
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.indices)


def n_requested(n_pos: int, ratio: float) -> int:
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    return int(math.floor(ratio * n_pos + 0.5))


class _Problem:
    """Shared preprocessing: features, z-scores and the size check."""

    def __init__(self, strategy, pool, positives, ratio, pool_features=None, pos_features=None):
        self.strategy = strategy
        self.pool = [str(s) for s in pool]
        self.positives = [str(s) for s in positives]
        if not self.positives:
            raise ValueError("no positives to match")
        self.k = n_requested(len(self.positives), ratio)
        if len(self.pool) < self.k:
            raise InsufficientPool(
                f"{strategy}: pool of {len(self.pool)} cannot supply {self.k} negatives",
                partial=self.result(range(len(self.pool)), shortfall=self.k - len(self.pool)))
        self.fpool = scalar_features(self.pool) if pool_features is None else np.asarray(pool_features, float)
        self.fpos = scalar_features(self.positives) if pos_features is None else np.asarray(pos_features, float)
        self.mu = self.fpos.mean(axis=0)
        self.sd = self.fpos.std(axis=0)

    def z(self, drop_constant=False):
        sd = self.sd.copy()
        keep = np.ones(sd.size, dtype=bool)
        if drop_constant:
            keep = sd > 0
        sd[sd == 0] = 1.0
        zp = (self.fpos - self.mu) / sd
        zq = (self.fpool - self.mu) / sd
        return zp[:, keep], zq[:, keep], keep

    def result(self, idx, **info) -> NegativeSet:
        idx = [int(i) for i in idx]
        return NegativeSet(self.strategy, idx, [self.pool[i] for i in idx], info)


def _sqdist(x, y) -> np.ndarray:
    d = (x * x).sum(1)[:, None] + (y * y).sum(1)[None, :] - 2.0 * x @ y.T
    return np.maximum(d, 0.0)


# --------------------------------------------------------------------------
# histogram matching


def _largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    raw = weights / weights.sum() * total
    base = np.floor(raw).astype(np.int64)
    rem = total - base.sum()
    order = np.lexsort((np.arange(raw.size), -(raw - base)))
    base[order[:rem]] += 1
    return base


def sample_bin_matched(pool: Sequence[str], positives: Sequence[str], ratio: float = 1.0,
                       spec: DistributionSpec = DistributionSpec(), seed: int = 0,
                       pool_features=None, pos_features=None) -> NegativeSet:
    """Joint length x charge histogram matching.

    Both axes use ``spec.bins`` equal-width bins over the positives' range.
    Each occupied joint bin gets a quota proportional to its positive count
    (largest remainder); members are drawn at random inside it. A bin short of
    members is backfilled with unused members from the nearest bins
    (Chebyshev distance on bin coordinates, random within a ring), with a
    ``BackfillWarning``.
    """
    pb = _Problem("bin_matched", pool, positives, ratio, pool_features, pos_features)
    rng = np.random.default_rng(seed)
    coords_pos, coords_pool = [], []
    for j in (0, 1):
        lo, hi = pb.fpos[:, j].min(), pb.fpos[:, j].max()
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        coords_pos.append(bin_index(pb.fpos[:, j], spec.bins, lo, hi))
        coords_pool.append(bin_index(pb.fpool[:, j], spec.bins, lo, hi, clamp=False))
    cp = np.stack(coords_pos, 1)
    cq = np.stack(coords_pool, 1)
    cells, counts = np.unique(cp, axis=0, return_counts=True)
    quota = _largest_remainder(counts.astype(float), pb.k)
    rank = rng.permutation(len(pb.pool))          # random priority, shared by all steps
    used = np.zeros(len(pb.pool), dtype=bool)
    chosen: list[int] = []
    deficits = []
    for cell, q in zip(cells, quota):
        members = np.nonzero((cq[:, 0] == cell[0]) & (cq[:, 1] == cell[1]))[0]
        members = members[np.argsort(rank[members], kind="stable")][:q]
        used[members] = True
        chosen.extend(members.tolist())
        if len(members) < q:
            deficits.append((cell, q - len(members)))
    backfilled = 0
    for cell, short in deficits:
        free = np.nonzero(~used)[0]
        dist = np.abs(cq[free] - cell).max(axis=1)
        take = free[np.lexsort((rank[free], dist))][:short]
        used[take] = True
        chosen.extend(take.tolist())
        backfilled += len(take)
    if backfilled:
        warnings.warn(f"bin_matched: {backfilled} negatives backfilled from neighbouring bins", BackfillWarning,
                      stacklevel=2)
    return pb.result(chosen, backfilled=backfilled)


# --------------------------------------------------------------------------
# KDE importance sampling


def kde_log_density(points: np.ndarray, data: np.ndarray, bandwidth: float) -> np.ndarray:
    """Log of the mean isotropic Gaussian kernel (unnormalized) at each point."""
    out = np.empty(points.shape[0])
    for s in range(0, points.shape[0], CHUNK):
        d = _sqdist(points[s:s + CHUNK], data)
        out[s:s + CHUNK] = logsumexp(-d / (2.0 * bandwidth ** 2), axis=1) - math.log(data.shape[0])
    return out


def scott_factor(n: int, d: int) -> float:
    return n ** (-1.0 / (d + 4))


def sample_kde_importance(pool: Sequence[str], positives: Sequence[str], ratio: float = 1.0, seed: int = 0,
                          pool_features=None, pos_features=None) -> NegativeSet:
    """Draw pool members with probability proportional to the positives' KDE.

    Features are z-scored, so Scott's rule gives one bandwidth
    n^(-1/(d+4)) for every dimension. Sampling without replacement uses the
    Gumbel top-k trick on log densities. A constant positive feature is
    dropped with ``DegenerateBandwidth``.
    """
    pb = _Problem("kde_importance", pool, positives, ratio, pool_features, pos_features)
    zp, zq, keep = pb.z(drop_constant=True)
    if not keep.all():
        warnings.warn(f"kde_importance: constant positive feature(s) "
                      f"{[n for n, k in zip(('length', 'charge', 'hydrophobicity'), keep) if not k]} dropped",
                      DegenerateBandwidth, stacklevel=2)
    rng = np.random.default_rng(seed)
    if zp.shape[1] == 0:
        logw = np.zeros(len(pb.pool))
        h = float("nan")
    else:
        h = scott_factor(zp.shape[0], zp.shape[1])
        logw = kde_log_density(zq, zp, h)
    keys = logw + rng.gumbel(size=logw.size)
    order = np.lexsort((np.arange(keys.size), -keys))
    return pb.result(order[:pb.k], bandwidth=h)


# --------------------------------------------------------------------------
# kernel herding


def median_bandwidth(x: np.ndarray, rng: np.random.Generator, max_points: int = 1000) -> float:
    if x.shape[0] > max_points:
        x = x[np.sort(rng.choice(x.shape[0], max_points, replace=False))]
    d = np.sqrt(_sqdist(x, x)[np.triu_indices(x.shape[0], 1)])
    med = float(np.median(d)) if d.size else 0.0
    return med if med > 0 else 1.0


def _rbf(x, y, sigma):
    return np.exp(-_sqdist(x, y) / (2.0 * sigma ** 2))


def mmd2(x: np.ndarray, y: np.ndarray, sigma: float) -> float:
    """Biased (V-statistic) squared MMD under the RBF kernel."""
    return float(max(0.0, _rbf(x, x, sigma).mean() + _rbf(y, y, sigma).mean() - 2.0 * _rbf(x, y, sigma).mean()))


def sample_mmd_herding(pool: Sequence[str], positives: Sequence[str], ratio: float = 1.0, seed: int = 0,
                       pool_features=None, pos_features=None) -> NegativeSet:
    """Greedy herding on MMD against the positives.

    Step t picks the unused pool point x maximizing
    mean_p k(x, p) - sum_{s in S} k(x, s) / (t + 1),
    which is the point whose addition lowers the biased MMD^2 the most.
    Ties go to the lowest pool index. The RBF bandwidth is the median
    pairwise distance over positives and pool (seeded subsample of 1000).
    """
    pb = _Problem("mmd_herding", pool, positives, ratio, pool_features, pos_features)
    zp, zq, _ = pb.z()
    rng = np.random.default_rng(seed)
    sigma = median_bandwidth(np.vstack([zp, zq]), rng)
    mu = np.empty(zq.shape[0])
    for s in range(0, zq.shape[0], CHUNK):
        mu[s:s + CHUNK] = _rbf(zq[s:s + CHUNK], zp, sigma).mean(axis=1)
    acc = np.zeros(zq.shape[0])
    used = np.zeros(zq.shape[0], dtype=bool)
    chosen = []
    for t in range(pb.k):
        score = mu - acc / (t + 1)
        score[used] = -np.inf
        j = int(np.argmax(score))
        chosen.append(j)
        used[j] = True
        acc += _rbf(zq, zq[j:j + 1], sigma)[:, 0]
    return pb.result(chosen, bandwidth=sigma)


# --------------------------------------------------------------------------
# nearest neighbour


def sample_nearest_neighbor(pool: Sequence[str], positives: Sequence[str], ratio: float = 1.0, seed: int = 0,
                            pool_features=None, pos_features=None) -> NegativeSet:
    """Each positive, in seeded order, takes its nearest unused pool member.

    With ratio > 1 the positive order is cycled until the quota is filled.
    Distance ties go to the lowest pool index.
    """
    pb = _Problem("nearest_neighbor", pool, positives, ratio, pool_features, pos_features)
    zp, zq, _ = pb.z()
    order = np.random.default_rng(seed).permutation(zp.shape[0])
    used = np.zeros(zq.shape[0], dtype=bool)
    chosen, dists = [], []
    qn = (zq * zq).sum(1)
    for t in range(pb.k):
        p = zp[order[t % order.size]]
        d = qn - 2.0 * zq @ p + p @ p
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        chosen.append(j)
        dists.append(math.sqrt(max(0.0, float(d[j]))))
    return pb.result(chosen, positive_order=order.tolist(), distances=dists)


# --------------------------------------------------------------------------
# entropic optimal transport


def transport_cost(zp: np.ndarray, zq: np.ndarray) -> np.ndarray:
    """Squared Euclidean cost divided by its median (1 when the median is 0)."""
    C = _sqdist(zp, zq)
    med = float(np.median(C))
    return C / med if med > 0 else C


def sample_sinkhorn_ot(pool: Sequence[str], positives: Sequence[str], ratio: float = 1.0, epsilon: float = 0.05,
                       iters: int = 1000, seed: int = 0, pool_features=None, pos_features=None) -> NegativeSet:
    """Pool members receiving the most mass from the positives.

    Positives carry uniform mass; each pool column may absorb at most 1/k, so
    the mass has to spread over at least k members, the ones closest to the
    positive distribution. See ``ot.sinkhorn_capacity``. Ties in column mass
    go to the lowest index. ``seed`` is accepted for interface symmetry; the
    method is deterministic.
    """
    pb = _Problem("sinkhorn_ot", pool, positives, ratio, pool_features, pos_features)
    zp, zq, _ = pb.z()
    C = transport_cost(zp, zq)
    res = sinkhorn_capacity(np.full(zp.shape[0], 1.0 / zp.shape[0]), 1.0 / pb.k, C, epsilon, iters,
                            return_plan=False)
    order = np.lexsort((np.arange(zq.shape[0]), -res.column_mass))
    return pb.result(order[:pb.k], converged=res.converged, iterations=res.iterations,
                     violation=res.violation)


# --------------------------------------------------------------------------
# moment matching


def moment_objective(sel: np.ndarray, target_mean: np.ndarray, target_std: np.ndarray) -> float:
    return float(np.abs(sel.mean(0) - target_mean).sum() + np.abs(sel.std(0) - target_std).sum())


@njit(cache=True)
def _moment_obj(a1, a2, k, tm, ts):
    tot = 0.0
    for f in range(a1.size):
        m = a1[f] / k
        v = a2[f] / k - m * m
        sd = np.sqrt(v) if v > 0 else 0.0
        tot += abs(m - tm[f]) + abs(sd - ts[f])
    return tot


@njit(cache=True)
def _moment_swaps(zq, inside, tm, ts, k, max_evals):
    n, d = zq.shape
    s1 = np.zeros(d)
    s2 = np.zeros(d)
    for i in range(n):
        if inside[i]:
            for f in range(d):
                s1[f] += zq[i, f]
                s2[f] += zq[i, f] ** 2
    cur = _moment_obj(s1, s2, k, tm, ts)
    trace = [cur]
    evals = 0
    c1 = np.empty(d)
    c2 = np.empty(d)
    local_min = False
    while evals < max_evals:
        # visit selected members worst first by the first-order removal gain
        g1 = np.empty(d)
        g2 = np.empty(d)
        for f in range(d):
            m = s1[f] / k
            v = s2[f] / k - m * m
            sd = np.sqrt(v) if v > 1e-300 else 1e-150
            sm = 1.0 if m > tm[f] else (-1.0 if m < tm[f] else 0.0)
            ss = 1.0 if sd > ts[f] else (-1.0 if sd < ts[f] else 0.0)
            g1[f] = sm / k - ss * m / (k * sd)
            g2[f] = ss / (2.0 * k * sd)
        sel = np.nonzero(inside)[0]
        phi = np.empty(sel.size)
        for t in range(sel.size):
            acc = 0.0
            for f in range(d):
                x = zq[sel[t], f]
                acc += g1[f] * x + g2[f] * x * x
            phi[t] = -acc
        visit = sel[np.argsort(phi, kind="mergesort")]
        swapped = False
        capped = False
        for i in visit:
            if evals >= max_evals:
                capped = True
                break
            evals += 1
            best, bj = cur - 1e-12, -1
            for j in range(n):
                if inside[j]:
                    continue
                for f in range(d):
                    c1[f] = s1[f] - zq[i, f] + zq[j, f]
                    c2[f] = s2[f] - zq[i, f] ** 2 + zq[j, f] ** 2
                val = _moment_obj(c1, c2, k, tm, ts)
                if val < best:
                    best, bj = val, j
            if bj >= 0:
                inside[i] = False
                inside[bj] = True
                for f in range(d):
                    s1[f] += zq[bj, f] - zq[i, f]
                    s2[f] += zq[bj, f] ** 2 - zq[i, f] ** 2
                cur = _moment_obj(s1, s2, k, tm, ts)
                trace.append(cur)
                swapped = True
                break
        if not swapped:
            local_min = not capped
            break
    return inside, np.array(trace), evals, local_min


def sample_moment_matched(pool: Sequence[str], positives: Sequence[str], ratio: float = 1.0, seed: int = 0,
                          max_evals: int = 200000, pool_features=None, pos_features=None) -> NegativeSet:
    """Greedy swap search on sum over features of |mean diff| + |std diff|.

    Starts from a seeded random subset. Each step visits selected members
    worst first, ranked by the first-order change of the objective when the
    member is removed, and swaps the first one for which some unused member
    gives a strict improvement (the best such unused member, lowest index on
    ties). The search stops at a local minimum, i.e. once every selected
    member was visited without improvement, or after ``max_evals`` visits.
    ``info["trace"]`` records the objective after every accepted swap.
    """
    pb = _Problem("moment_matched", pool, positives, ratio, pool_features, pos_features)
    zp, zq, _ = pb.z()
    rng = np.random.default_rng(seed)
    n, k = zq.shape[0], pb.k
    inside = np.zeros(n, dtype=np.bool_)
    inside[rng.choice(n, k, replace=False)] = True
    inside, trace, evals, local_min = _moment_swaps(np.ascontiguousarray(zq), inside, zp.mean(0), zp.std(0),
                                                    float(k), max_evals)
    return pb.result(np.nonzero(inside)[0], objective=float(trace[-1]), trace=trace.tolist(),
                     evaluations=int(evals), local_minimum=bool(local_min))


SAMPLERS = {
    "bin_matched": sample_bin_matched,
    "kde_importance": sample_kde_importance,
    "mmd_herding": sample_mmd_herding,
    "moment_matched": sample_moment_matched,
    "nearest_neighbor": sample_nearest_neighbor,
    "sinkhorn_ot": sample_sinkhorn_ot,
}
