"""Negative sampling for non-canonical positives via canonical homologs.

Positives given in BILN are mapped to their nearest canonical homolog, the
canonical sampler runs on those, and the selected negatives are written as a
handoff CSV (one ``canonical_sequence`` column) for an external
canonical -> non-canonical converter, which this package does not provide.
"""

from __future__ import annotations

from typing import Sequence

from ..io import write_table
from ..notation import nearest_canonical_homolog
from ..seqcore import is_canonical
from .distributions import DistributionSpec
from .pool import SamplingPool
from .select import NegSampResult, run_bdnegsamp

_BILN_MARKS = set("-.[]()")


def map_to_canonical(positives: Sequence[str]) -> list[str]:
    """BILN (or plain residue) strings to canonical residue strings.

    A string of canonical letters without BILN separators is taken as a
    residue sequence, so "AKK" means A-K-K rather than one monomer "AKK".
    """
    out = []
    for p in positives:
        p = str(p).strip()
        if p and is_canonical(p) and not _BILN_MARKS & set(p):
            out.append(p)
        else:
            out.append(nearest_canonical_homolog(p).residues)
    return out


def nc_negsamp_bridge(nc_positives: Sequence[str], pool: SamplingPool, spec: DistributionSpec = DistributionSpec(),
                      handoff_path=None, ratio: float = 1.0, seed: int = 0,
                      strategies: Sequence[str] | None = None) -> tuple[NegSampResult, list[str]]:
    """Returns (sampling result, mapped canonical positives).

    Raises:
        MissingHomolog: a positive uses a monomer with no canonical homolog.
    """
    mapped = map_to_canonical(nc_positives)
    result = run_bdnegsamp(pool, mapped, ratio, spec, seed, strategies)
    if handoff_path is not None:
        write_handoff(handoff_path, result.sequences)
    return result, mapped


def write_handoff(path, sequences: Sequence[str]) -> None:
    write_table(path, ("canonical_sequence",), ((s,) for s in sequences))
