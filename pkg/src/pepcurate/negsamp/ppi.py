"""Shuffled negatives for peptide-protein interaction data."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ExhaustedCombinations


def ppi_shuffle_negatives(positive_pairs: Sequence[tuple[str, str]], ratio: int = 5,
                          seed: int = 0) -> list[tuple[str, str]]:
    """``ratio`` random (peptide, protein) recombinations per positive pair.

    Peptides and proteins are drawn uniformly from the distinct values seen
    in the positives. A draw is rejected when it is a positive pair or was
    already drawn. When the requested count exceeds half of the free
    combinations, the free pairs are enumerated and sampled directly instead
    of by rejection.

    Raises:
        ExhaustedCombinations: fewer than two distinct peptides or proteins,
            or more negatives requested than non-positive pairs exist.
    """
    pairs = [(str(p), str(q)) for p, q in positive_pairs]
    peptides = sorted({p for p, _ in pairs})
    proteins = sorted({q for _, q in pairs})
    if len(peptides) < 2 or len(proteins) < 2:
        raise ExhaustedCombinations(
            f"{len(peptides)} peptide(s) x {len(proteins)} protein(s): no recombination to draw from")
    positives = set(pairs)
    need = ratio * len(pairs)
    free = len(peptides) * len(proteins) - len(positives)
    if need > free:
        raise ExhaustedCombinations(f"{need} negatives requested but only {free} non-positive pairs exist")
    rng = np.random.default_rng(seed)
    if need > free // 2:
        pool = [(p, q) for p in peptides for q in proteins if (p, q) not in positives]
        return [pool[i] for i in rng.permutation(len(pool))[:need]]
    out, drawn = [], set()
    while len(out) < need:
        pair = (peptides[int(rng.integers(len(peptides)))], proteins[int(rng.integers(len(proteins)))])
        if pair in positives or pair in drawn:
            continue
        drawn.add(pair)
        out.append(pair)
    return out
