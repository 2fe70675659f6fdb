"""Monomer library.

CSV format (header required)::

    symbol,smiles,homolog

``smiles`` marks attachment points R1/R2/R3 as atom-mapped wildcards
``[*:1]``, ``[*:2]``, ``[*:3]`` (backbone amine, backbone acid, side chain).
``homolog`` is the closest canonical letter; ``-`` marks a monomer that has
no residue equivalent and is dropped when mapping to a canonical sequence
(terminal caps), and an empty field means no mapping is known.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..errors import InputError, NotationError, UnknownMonomer
from ..seqcore import CANONICAL
from .graph import MolecularGraph
from .smiles import parse_smiles

DROP = "-"


@dataclass(frozen=True)
class MonomerDef:
    symbol: str
    structure: str
    canonical_homolog: str | None = None
    graph: MolecularGraph = field(compare=False, repr=False, default=None)
    attachments: dict = field(compare=False, repr=False, default=None)

    @property
    def is_canonical(self) -> bool:
        return self.symbol in CANONICAL

    @property
    def is_cap(self) -> bool:
        return self.canonical_homolog == DROP


def build_monomer(symbol: str, smiles: str, homolog: str | None) -> MonomerDef:
    g = parse_smiles(smiles)
    if not g.is_connected():
        raise NotationError(f"monomer {symbol!r}: structure is not connected")
    attach = {}
    for w in g.wildcards():
        r = g.atoms[w].atom_class
        if r not in (1, 2, 3):
            raise NotationError(f"monomer {symbol!r}: attachment class must be 1..3, got {r}")
        if r in attach:
            raise NotationError(f"monomer {symbol!r}: duplicate attachment R{r}")
        if g.degree(w) != 1:
            raise NotationError(f"monomer {symbol!r}: R{r} must have exactly one neighbor")
        attach[r] = w
    if not attach:
        raise NotationError(f"monomer {symbol!r}: no attachment points")
    homolog = (homolog or "").strip() or None
    if homolog not in (None, DROP) and homolog not in CANONICAL:
        raise NotationError(f"monomer {symbol!r}: homolog {homolog!r} is not a canonical letter")
    return MonomerDef(symbol, smiles, homolog, g, dict(sorted(attach.items())))


class MonomerLibrary:
    """Immutable after construction; safe to share between workers."""

    def __init__(self, monomers):
        self._by_symbol: dict[str, MonomerDef] = {}
        for m in monomers:
            if m.symbol in self._by_symbol:
                raise InputError(f"duplicate monomer symbol {m.symbol!r}")
            self._by_symbol[m.symbol] = m

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._by_symbol

    def __iter__(self):
        return iter(self._by_symbol.values())

    def __len__(self) -> int:
        return len(self._by_symbol)

    def get(self, symbol: str) -> MonomerDef:
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise UnknownMonomer(f"monomer {symbol!r} is not in the library") from None

    @property
    def symbols(self) -> list[str]:
        return list(self._by_symbol)

    @classmethod
    def from_rows(cls, rows) -> "MonomerLibrary":
        return cls(build_monomer(r["symbol"].strip(), r["smiles"].strip(), r.get("homolog")) for r in rows)

    @classmethod
    def from_csv(cls, path) -> "MonomerLibrary":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or {"symbol", "smiles"} - set(reader.fieldnames):
                raise InputError(f"{path}: monomer library needs 'symbol,smiles,homolog' header")
            return cls.from_rows(list(reader))


@lru_cache(maxsize=1)
def default_library() -> MonomerLibrary:
    ref = resources.files("pepcurate.notation") / "data" / "monomers.csv"
    with resources.as_file(ref) as p:
        return MonomerLibrary.from_csv(Path(p))


def load_library(path=None) -> MonomerLibrary:
    return default_library() if path is None else MonomerLibrary.from_csv(path)
