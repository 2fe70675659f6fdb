"""Strategy selection and the end-to-end negative-sampling run."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InsufficientPool
from ..io import write_json, write_table
from ..seqcore import AA_INDEX, scalar_features
from .distributions import DistributionSpec, JsReport, validate_distributions
from .pool import SamplingPool
from .samplers import SAMPLERS, NegativeSet

DIVERSITY_WEIGHT = 0.1
DIVERSITY_NOTE = ("diversity = 1 - mean pairwise cosine similarity of the concatenated 1-mer and 2-mer "
                  "composition vectors (an interpretation; the trade-off weight is configurable)")


def sequence_diversity(seqs: Sequence[str]) -> float:
    """Mean pairwise dissimilarity, 1 - cos, over distinct pairs.

    With unit vectors u_i, sum_{i != j} u_i.u_j = |sum u_i|^2 - n, so the
    mean is obtained in linear time.
    """
    n = len(seqs)
    if n < 2:
        return 0.0
    total = np.zeros(420)
    for s in seqs:
        idx = np.fromiter((AA_INDEX[c] for c in s), dtype=np.int64, count=len(s))
        v = np.bincount(idx, minlength=20).astype(float)
        if idx.size > 1:
            v = np.concatenate([v, np.bincount(idx[:-1] * 20 + idx[1:], minlength=400)])
        else:
            v = np.concatenate([v, np.zeros(400)])
        total += v / np.linalg.norm(v)
    mean_cos = (total @ total - n) / (n * (n - 1))
    return float(1.0 - mean_cos)


@dataclass
class Candidate:
    negatives: NegativeSet
    report: JsReport
    diversity: float
    score: float

    def row(self) -> dict:
        return {"strategy": self.negatives.strategy, "n": len(self.negatives), **self.report.to_dict(),
                "max_js": self.report.max_js, "diversity": self.diversity, "score": self.score}


def select_best(candidates: Sequence[NegativeSet], positives: Sequence[str],
                spec: DistributionSpec = DistributionSpec(), weight: float = DIVERSITY_WEIGHT):
    """Lowest max-JS minus ``weight`` x diversity among passing candidates.

    When none passes, the candidate with the lowest max-JS is returned and
    the returned flag is False. Ties go to strategy-name order.
    Returns (chosen Candidate, passed, scoreboard rows in strategy order).
    """
    if not candidates:
        raise ValueError("select_best needs at least one candidate")
    pos = list(positives)
    fpos = scalar_features(pos)
    scored = []
    for c in sorted(candidates, key=lambda c: c.strategy):
        rep = validate_distributions(pos, c.sequences, spec, pos_features=fpos)
        div = sequence_diversity(c.sequences)
        scored.append(Candidate(c, rep, div, rep.max_js - weight * div))
    passing = [c for c in scored if c.report.passed]
    if passing:
        best = min(passing, key=lambda c: c.score)
    else:
        best = min(scored, key=lambda c: c.report.max_js)
    return best, bool(passing), [c.row() for c in scored]


@dataclass
class NegSampResult:
    chosen: Candidate
    passed: bool
    scoreboard: list[dict]
    sources: list[str]
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def sequences(self) -> list[str]:
        return self.chosen.negatives.sequences


def run_bdnegsamp(pool: SamplingPool, positives: Sequence[str], ratio: float = 1.0,
                  spec: DistributionSpec = DistributionSpec(), seed: int = 0,
                  strategies: Sequence[str] | None = None, weight: float = DIVERSITY_WEIGHT,
                  workers: int = 1) -> NegSampResult:
    """Run the samplers on a filtered pool and keep the best negative set.

    Strategies share only immutable inputs, so ``workers`` > 1 runs them in
    threads; results are consumed in strategy-name order and do not depend
    on the worker count. A strategy failing with ``InsufficientPool`` is
    recorded in ``failures``; if all fail the error propagates.
    """
    names = sorted(strategies or SAMPLERS)
    for n in names:
        if n not in SAMPLERS:
            raise ValueError(f"unknown strategy {n!r}; choose from {sorted(SAMPLERS)}")
    pos = [str(s) for s in positives]
    fpool = scalar_features(pool.sequences)
    fpos = scalar_features(pos)

    def run(name):
        kw = dict(pool_features=fpool, pos_features=fpos, seed=seed)
        if name == "bin_matched":
            kw["spec"] = spec
        try:
            return SAMPLERS[name](pool.sequences, pos, ratio, **kw), None
        except InsufficientPool as exc:
            return None, exc

    # one recorder around all strategies (catch_warnings is not thread-local);
    # re-emitted in sorted order so the log is independent of scheduling
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                outcomes = list(ex.map(run, names))
        else:
            outcomes = [run(n) for n in names]
    for w in sorted(caught, key=lambda w: (w.category.__name__, str(w.message))):
        warnings.warn(w.message, w.category, stacklevel=2)
    results, failures, last_exc = [], {}, None
    for name, (res, exc) in zip(names, outcomes):
        if exc is not None:
            failures[name] = str(exc)
            last_exc = exc
        else:
            results.append(res)
    if not results:
        raise last_exc
    best, passed, board = select_best(results, pos, spec, weight)
    sources = [pool.sources[i] for i in best.negatives.indices]
    return NegSampResult(best, passed, board, sources, failures)


def write_negatives(path, result: NegSampResult) -> None:
    strat = result.chosen.negatives.strategy
    write_table(path, ("sequence", "label", "strategy", "source"),
                ((s, 0, strat, src) for s, src in zip(result.sequences, result.sources)))


def write_js_report(path, result: NegSampResult) -> None:
    payload = dict(result.chosen.report.to_dict())
    payload["strategy"] = result.chosen.negatives.strategy
    payload["selected_pass"] = result.passed
    payload["scoreboard"] = result.scoreboard
    payload["failures"] = result.failures
    payload["diversity_definition"] = DIVERSITY_NOTE
    write_json(path, payload)
