"""BILN subset.

Grammar::

    document  := chain ("." chain)*
    chain     := monomer ("-" monomer)*
    monomer   := symbol crosslink*
    symbol    := NAME | "[" NAME "]"        NAME = [A-Za-z0-9_]+
    crosslink := "(" INT "," ("1" | "2" | "3") ")"

Each crosslink id must occur exactly twice; the two half-edges name the
R-groups that are bonded. Bare single letters and bracketed names are
equivalent (``A`` == ``[A]``); serialization brackets every symbol longer
than one character.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import UnbalancedBracket, UnknownGrammar, UnpairedBondId

_NAME = re.compile(r"[A-Za-z0-9_]+")
_LINK = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


@dataclass(frozen=True, order=True)
class Crosslink:
    """One half of a cross-link: ``bond_id`` pairs it with its partner."""

    bond_id: int
    chain: int
    pos: int
    r_group: int


@dataclass
class BilnDocument:
    chains: list[list[str]]
    crosslinks: list[Crosslink] = field(default_factory=list)

    def bonds(self) -> list[tuple[tuple[int, int, int], tuple[int, int, int]]]:
        """Paired crosslinks as ((chain, pos, r), (chain, pos, r)), ordered by id."""
        by_id: dict[int, list[Crosslink]] = {}
        for h in self.crosslinks:
            by_id.setdefault(h.bond_id, []).append(h)
        out = []
        for bid in sorted(by_id):
            a, b = by_id[bid]
            out.append(((a.chain, a.pos, a.r_group), (b.chain, b.pos, b.r_group)))
        return out

    @property
    def monomers(self) -> list[str]:
        return [m for chain in self.chains for m in chain]

    def __str__(self) -> str:
        return serialize_biln(self)


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth_sq, depth_par, cur = [], 0, 0, []
    for ch in text:
        if ch == "[":
            depth_sq += 1
        elif ch == "]":
            depth_sq -= 1
        elif ch == "(":
            depth_par += 1
        elif ch == ")":
            depth_par -= 1
        if ch == sep and depth_sq == 0 and depth_par == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _check_balance(text: str) -> None:
    sq = par = 0
    for ch in text:
        if ch == "[":
            if sq:
                raise UnbalancedBracket(f"nested '[' in {text!r}")
            sq += 1
        elif ch == "]":
            sq -= 1
        elif ch == "(" and not sq:
            par += 1
        elif ch == ")" and not sq:
            par -= 1
        if sq < 0 or par < 0 or par > 1:
            raise UnbalancedBracket(f"unbalanced brackets in {text!r}")
    if sq or par:
        raise UnbalancedBracket(f"unbalanced brackets in {text!r}")


def _parse_monomer(token: str, text: str) -> tuple[str, list[tuple[int, int]]]:
    token = token.strip()
    if token.startswith("["):
        end = token.index("]")
        name, rest = token[1:end], token[end + 1:]
    else:
        m = _NAME.match(token)
        if m is None:
            raise UnknownGrammar(f"bad monomer token {token!r} in {text!r}")
        name, rest = m.group(0), token[m.end():]
    if not _NAME.fullmatch(name):
        raise UnknownGrammar(f"bad monomer name {name!r} in {text!r}")
    links = []
    while rest:
        m = _LINK.match(rest)
        if m is None:
            raise UnknownGrammar(f"bad crosslink suffix {rest!r} in {text!r}")
        bid, r = int(m.group(1)), int(m.group(2))
        if r not in (1, 2, 3):
            raise UnknownGrammar(f"R-group must be 1, 2 or 3 in {token!r}")
        links.append((bid, r))
        rest = rest[m.end():]
    return name, links


def parse_biln(text: str) -> BilnDocument:
    """Parse BILN text.

    Raises:
        UnbalancedBracket: mismatched '[' / '('.
        UnpairedBondId: a crosslink id not occurring exactly twice.
        UnknownGrammar: anything else outside the subset.
    """
    if text is None or not text.strip():
        raise UnknownGrammar("empty BILN text")
    text = text.strip()
    _check_balance(text)
    chains: list[list[str]] = []
    halves: list[Crosslink] = []
    for ci, chain_text in enumerate(_split_top(text, ".")):
        if not chain_text.strip():
            raise UnknownGrammar(f"empty chain in {text!r}")
        chain = []
        for pi, tok in enumerate(_split_top(chain_text, "-")):
            if not tok.strip():
                raise UnknownGrammar(f"empty monomer in {text!r}")
            name, links = _parse_monomer(tok, text)
            chain.append(name)
            halves.extend(Crosslink(bid, ci, pi, r) for bid, r in links)
        chains.append(chain)
    seen: dict[int, list[Crosslink]] = {}
    for h in halves:
        seen.setdefault(h.bond_id, []).append(h)
    for bid, hs in seen.items():
        if len(hs) != 2:
            raise UnpairedBondId(f"bond id {bid} occurs {len(hs)} time(s) in {text!r}")
        a, b = hs
        if (a.chain, a.pos) == (b.chain, b.pos):
            raise UnknownGrammar(f"bond id {bid} joins a monomer to itself in {text!r}")
    return BilnDocument(chains, halves)


def canonical_biln(doc: BilnDocument) -> BilnDocument:
    """Renumber bond ids 1, 2, ... by order of first appearance."""
    ordered = sorted(doc.crosslinks, key=lambda h: (h.chain, h.pos, h.bond_id, h.r_group))
    remap: dict[int, int] = {}
    for h in ordered:
        remap.setdefault(h.bond_id, len(remap) + 1)
    links = sorted((Crosslink(remap[h.bond_id], h.chain, h.pos, h.r_group) for h in doc.crosslinks),
                   key=lambda h: (h.chain, h.pos, h.bond_id))
    return BilnDocument([list(c) for c in doc.chains], links)


def _symbol_text(name: str) -> str:
    return name if len(name) == 1 else f"[{name}]"


def serialize_biln(doc: BilnDocument, canonical: bool = True) -> str:
    if canonical:
        doc = canonical_biln(doc)
    suffix: dict[tuple[int, int], list[Crosslink]] = {}
    for h in doc.crosslinks:
        suffix.setdefault((h.chain, h.pos), []).append(h)
    chains = []
    for ci, chain in enumerate(doc.chains):
        toks = []
        for pi, name in enumerate(chain):
            links = sorted(suffix.get((ci, pi), []), key=lambda h: (h.bond_id, h.r_group))
            toks.append(_symbol_text(name) + "".join(f"({h.bond_id},{h.r_group})" for h in links))
        chains.append("-".join(toks))
    return ".".join(chains)
