"""Peptide sequence representation, validation and physicochemical descriptors.

Charge model
------------
Net charge is the Henderson-Hasselbalch sum over ionizable groups. The pKa
constants are the EMBOSS set::

    N-terminus 8.6   C-terminus 3.6
    K 10.8   R 12.5   H 6.5          (basic, +1 when protonated)
    D 3.9    E 4.1    C 8.5   Y 10.1 (acidic, -1 when deprotonated)

Hydrophobicity is the Kyte-Doolittle GRAVY score (mean hydropathy index per
residue), see ``KYTE_DOOLITTLE``.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AmbiguousResidue,
    EmptySequence,
    IllegalCharacter,
    NoRoot,
    SequenceTooShort,
)

CANONICAL = "ACDEFGHIKLMNPQRSTVWY"
AMBIGUITY = frozenset("XUBJOZ")
_CANONICAL_SET = frozenset(CANONICAL)
AA_INDEX = {aa: i for i, aa in enumerate(CANONICAL)}

PKA_N_TERM = 8.6
PKA_C_TERM = 3.6
PKA_BASIC = {"K": 10.8, "R": 12.5, "H": 6.5}
PKA_ACIDIC = {"D": 3.9, "E": 4.1, "C": 8.5, "Y": 10.1}

KYTE_DOOLITTLE = {
    "A": 1.8, "R": -4.5, "N": -3.5, "D": -3.5, "C": 2.5,
    "Q": -3.5, "E": -3.5, "G": -0.4, "H": -3.2, "I": 4.5,
    "L": 3.8, "K": -3.9, "M": 1.9, "F": 2.8, "P": -1.6,
    "S": -0.8, "T": -0.7, "W": -0.9, "Y": -1.3, "V": 4.2,
}

DEFAULT_PH = 7.0


class Policy(str, enum.Enum):
    STRICT_CANONICAL = "strict_canonical"
    ALLOW_AMBIGUITY = "allow_ambiguity"
    DROP_RECORD = "drop_record"


@dataclass(frozen=True)
class PeptideSequence:
    """A validated, upper-case residue string.

    ``ambiguous`` is set when the sequence carries any of X/U/B/J/O/Z, which
    only happens under the ``allow_ambiguity`` policy. ``notes`` holds
    free-form provenance flags (e.g. ``"cap_collapsed"`` from X-collapse).
    """

    residues: str
    id: str | None = None
    ambiguous: bool = False
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.residues:
            raise EmptySequence("peptide sequence must have length >= 1")

    def __len__(self) -> int:
        return len(self.residues)

    def __str__(self) -> str:
        return self.residues


@dataclass(frozen=True)
class PropertyVector:
    length: int
    net_charge: float
    hydrophobicity: float
    isoelectric_point: float


@dataclass
class KmerProfile:
    k: int
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass
class DatasetRecord:
    """One row of a curated dataset.

    ``label`` is 0/1 for classification and a finite float for regression;
    ``unit`` tags regression labels so mixed-unit groups can be detected.
    """

    sequence: str
    label: float | int | None = None
    source: str = ""
    id: str = ""
    unit: str = ""

    def __post_init__(self):
        if isinstance(self.label, float) and not math.isfinite(self.label):
            raise ValueError(f"non-finite label for record {self.id!r}")


# =============================================================================
# Validation
# =============================================================================


def validate_sequence(text: str, policy: Policy | str = Policy.DROP_RECORD,
                      id: str | None = None) -> PeptideSequence | None:
    """Normalize and validate a raw residue string.

    Returns ``None`` under ``drop_record`` when the sequence holds ambiguity
    codes: the caller is expected to discard the record.

    Raises:
        EmptySequence: nothing left after trimming whitespace.
        IllegalCharacter: a non-letter character is present.
        AmbiguousResidue: ambiguity code under ``strict_canonical``.
    """
    policy = Policy(policy)
    if text is None:
        raise EmptySequence("missing sequence")
    cleaned = str(text).strip().upper()
    if not cleaned:
        raise EmptySequence("empty sequence after whitespace trim")
    bad = sorted({ch for ch in cleaned if not ("A" <= ch <= "Z")})
    if bad:
        raise IllegalCharacter(f"illegal characters {bad!r} in {cleaned!r}")
    ambiguous = any(ch in AMBIGUITY for ch in cleaned)
    if ambiguous:
        if policy is Policy.STRICT_CANONICAL:
            raise AmbiguousResidue(f"ambiguity code in {cleaned!r}")
        if policy is Policy.DROP_RECORD:
            return None
    return PeptideSequence(cleaned, id=id, ambiguous=ambiguous)


def _residues(seq: PeptideSequence | str) -> str:
    return seq.residues if isinstance(seq, PeptideSequence) else str(seq)


def _require_canonical(residues: str) -> None:
    for ch in residues:
        if ch not in _CANONICAL_SET:
            raise AmbiguousResidue(f"non-canonical residue {ch!r} in {residues!r}")


def is_canonical(seq: PeptideSequence | str) -> bool:
    return all(ch in _CANONICAL_SET for ch in _residues(seq))


# =============================================================================
# k-mers and composition
# =============================================================================


def kmers(seq: PeptideSequence | str, k: int) -> KmerProfile:
    if k < 1:
        raise ValueError("k must be >= 1")
    s = _residues(seq)
    return KmerProfile(k, dict(Counter(s[i:i + k] for i in range(len(s) - k + 1))))


def kmer_set(seq: PeptideSequence | str, k: int) -> set[str]:
    s = _residues(seq)
    return {s[i:i + k] for i in range(len(s) - k + 1)}


def nmer_alphabet(n: int) -> list[str]:
    """Fixed lexicographic ordering of the 20**n canonical n-mers."""
    return ["".join(p) for p in product(CANONICAL, repeat=n)]


def composition(seq: PeptideSequence | str, n: int = 1) -> np.ndarray:
    """Frequency vector over the 20**n canonical n-mers, summing to 1."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    s = _residues(seq)
    if len(s) < n:
        raise SequenceTooShort(f"sequence of length {len(s)} has no {n}-mers")
    _require_canonical(s)
    idx = np.fromiter((AA_INDEX[ch] for ch in s), dtype=np.int64, count=len(s))
    if n == 2:
        idx = idx[:-1] * 20 + idx[1:]
    counts = np.bincount(idx, minlength=20 ** n).astype(float)
    return counts / counts.sum()


# =============================================================================
# Physicochemical properties
# =============================================================================


def _charge_from_counts(counts: dict[str, int], pH: float) -> float:
    pos = 1.0 / (1.0 + 10.0 ** (pH - PKA_N_TERM))
    neg = 1.0 / (1.0 + 10.0 ** (PKA_C_TERM - pH))
    for aa, pka in PKA_BASIC.items():
        if counts.get(aa):
            pos += counts[aa] / (1.0 + 10.0 ** (pH - pka))
    for aa, pka in PKA_ACIDIC.items():
        if counts.get(aa):
            neg += counts[aa] / (1.0 + 10.0 ** (pka - pH))
    return pos - neg


def net_charge(seq: PeptideSequence | str, pH: float = DEFAULT_PH) -> float:
    s = _residues(seq)
    _require_canonical(s)
    return _charge_from_counts(Counter(s), pH)


def gravy(seq: PeptideSequence | str) -> float:
    s = _residues(seq)
    _require_canonical(s)
    return math.fsum(KYTE_DOOLITTLE[ch] for ch in s) / len(s)


def isoelectric_point(seq: PeptideSequence | str, tol: float = 1e-4) -> float:
    """Bisection root of the net charge on [0, 14].

    The bracket is shrunk well below ``tol`` so that the residual charge at
    the returned pH stays below 1e-3 even for long, steeply titrating peptides.
    """
    s = _residues(seq)
    _require_canonical(s)
    counts = Counter(s)
    lo, hi = 0.0, 14.0
    if _charge_from_counts(counts, lo) < 0 or _charge_from_counts(counts, hi) > 0:
        raise NoRoot(f"net charge of {s!r} does not change sign on [0, 14]")
    # charge is strictly decreasing in pH
    while hi - lo > min(tol, 1e-4) * 1e-3:
        mid = 0.5 * (lo + hi)
        if _charge_from_counts(counts, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def properties(seq: PeptideSequence | str, pH: float = DEFAULT_PH) -> PropertyVector:
    s = _residues(seq)
    return PropertyVector(len(s), net_charge(s, pH), gravy(s), isoelectric_point(s))


SCALAR_FEATURES = ("length", "charge", "hydrophobicity")


def scalar_features(seqs: Sequence[PeptideSequence | str], pH: float = DEFAULT_PH) -> np.ndarray:
    """(n, 3) matrix of length, net charge and GRAVY for canonical sequences."""
    out = np.empty((len(seqs), 3), dtype=float)
    for i, seq in enumerate(seqs):
        s = _residues(seq)
        _require_canonical(s)
        counts = Counter(s)
        out[i, 0] = len(s)
        out[i, 1] = _charge_from_counts(counts, pH)
        out[i, 2] = math.fsum(KYTE_DOOLITTLE[aa] * c for aa, c in counts.items()) / len(s)
    return out


def filter_by_length(records: Iterable, max_len: int) -> list:
    """Keep records with at most ``max_len`` residues, preserving order.

    Works on plain strings, ``PeptideSequence`` and ``DatasetRecord`` alike.
    """
    kept = []
    for rec in records:
        s = rec.sequence if isinstance(rec, DatasetRecord) else _residues(rec)
        if len(s) <= max_len:
            kept.append(rec)
    return kept
