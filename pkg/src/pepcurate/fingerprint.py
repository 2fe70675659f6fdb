"""Morgan (ECFP-style) circular fingerprints and set-level similarity metrics.

Hashing is fixed so fingerprints are bit-exact across implementations:

* every integer is encoded as 8 bytes little-endian two's complement and fed
  to 64-bit FNV-1a (offset 0xcbf29ce484222325, prime 0x100000001b3);
* layer 0 id of an atom = FNV(Z, heavy degree, formal charge, H count, aromatic);
* layer r id = FNV(previous id, then the (bond order, neighbor previous id)
  pairs sorted ascending); aromatic bonds use order 4;
* every id of every layer 0..radius sets bit ``id % width``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyGeneratedSet, EmptyMolecule, TooFewMolecules, WidthMismatch
from .notation.graph import MolecularGraph

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF
WIDTHS = (512, 1024, 2048)
DEFAULT_RADIUS = 2
DEFAULT_WIDTH = 1024
ECFP6_RADIUS = 3


def fnv1a_64(values: Sequence[int]) -> int:
    h = FNV_OFFSET
    data = struct.pack(f"<{len(values)}q", *[v - (1 << 64) if v >= 1 << 63 else v for v in values])
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK
    return h


@dataclass(frozen=True)
class Fingerprint:
    bits: int           # bit i of this integer is fingerprint bit i
    width: int
    radius: int

    @property
    def popcount(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> list[int]:
        b, out, i = self.bits, [], 0
        while b:
            if b & 1:
                out.append(i)
            b >>= 1
            i += 1
        return out

    def to_array(self) -> np.ndarray:
        arr = np.zeros(self.width, dtype=np.uint8)
        arr[self.on_bits()] = 1
        return arr

    def to_hex(self) -> str:
        return self.bits.to_bytes(self.width // 8, "little").hex()

    @classmethod
    def from_hex(cls, text: str, radius: int = DEFAULT_RADIUS) -> "Fingerprint":
        raw = bytes.fromhex(text)
        return cls(int.from_bytes(raw, "little"), len(raw) * 8, radius)

    @classmethod
    def from_bits(cls, on: Sequence[int], width: int = DEFAULT_WIDTH, radius: int = DEFAULT_RADIUS) -> "Fingerprint":
        bits = 0
        for i in on:
            if not 0 <= i < width:
                raise ValueError(f"bit {i} outside width {width}")
            bits |= 1 << i
        return cls(bits, width, radius)


def morgan_fingerprint(graph: MolecularGraph, radius: int = DEFAULT_RADIUS,
                       width: int = DEFAULT_WIDTH) -> Fingerprint:
    if not 0 <= radius <= 4:
        raise ValueError("radius must be in 0..4")
    if width not in WIDTHS:
        raise ValueError(f"width must be one of {WIDTHS}")
    n = len(graph)
    if n == 0:
        raise EmptyMolecule("cannot fingerprint an empty molecule")
    ids = [
        fnv1a_64((a.number, graph.degree(i), a.charge, a.hcount, int(a.aromatic)))
        for i, a in enumerate(graph.atoms)
    ]
    bits = 0
    for v in ids:
        bits |= 1 << (v % width)
    for _ in range(radius):
        new = []
        for i in range(n):
            env = sorted((o, ids[j]) for j, o in graph.neighbors(i).items())
            seq = [ids[i]]
            for o, v in env:
                seq.extend((o, v))
            new.append(fnv1a_64(seq))
        ids = new
        for v in ids:
            bits |= 1 << (v % width)
    return Fingerprint(bits, width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    if a.width != b.width:
        raise WidthMismatch(f"fingerprint widths differ: {a.width} vs {b.width}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union


def similarity_matrix(fps: Sequence[Fingerprint]) -> np.ndarray:
    """Dense all-pairs Tanimoto matrix (exact: counts are small integers)."""
    if not fps:
        return np.zeros((0, 0))
    widths = {f.width for f in fps}
    if len(widths) != 1:
        raise WidthMismatch(f"mixed fingerprint widths {sorted(widths)}")
    mat = np.stack([f.to_array() for f in fps]).astype(np.float64)
    inter = mat @ mat.T
    pop = mat.sum(axis=1)
    union = pop[:, None] + pop[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 1.0)
    return sim


def internal_diversity(fps: Sequence[Fingerprint]) -> float:
    """1 minus the mean Tanimoto over unordered pairs."""
    n = len(fps)
    if n < 2:
        raise TooFewMolecules("internal diversity needs at least 2 molecules")
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += tanimoto(fps[i], fps[j])
    return 1.0 - total / (n * (n - 1) / 2)


def novelty(generated: Sequence[Fingerprint], reference: Sequence[Fingerprint]) -> float:
    """Fraction of generated molecules whose fingerprint matches no reference.

    Structural identity is approximated by exact fingerprint equality.
    """
    if not generated:
        raise EmptyGeneratedSet("no generated molecules")
    known = {(f.width, f.bits) for f in reference}
    absent = sum(1 for f in generated if (f.width, f.bits) not in known)
    return absent / len(generated)


def fidelity(generated: Sequence[Fingerprint], reference: Sequence[Fingerprint]) -> dict[str, float]:
    """Paired fidelity: exact-match rate and mean Tanimoto of generated[i] vs reference[i]."""
    if not generated:
        raise EmptyGeneratedSet("no generated molecules")
    if len(generated) != len(reference):
        raise ValueError("fidelity needs one reference per generated molecule")
    sims = [tanimoto(g, r) for g, r in zip(generated, reference)]
    exact = sum(1 for g, r in zip(generated, reference) if g.bits == r.bits)
    return {"exact_match_rate": exact / len(sims), "mean_tanimoto": sum(sims) / len(sims)}


def write_fingerprints(path, ids: Sequence[str], fps: Sequence[Fingerprint]) -> None:
    """One ``id<TAB>hex`` line per record."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rid, f in zip(ids, fps):
            fh.write(f"{rid}\t{f.to_hex()}\n")
