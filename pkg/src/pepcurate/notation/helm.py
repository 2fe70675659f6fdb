"""HELM subset: peptide polymers and pairwise connections.

Layout::

    POLYMERS $ CONNECTIONS $ GROUPS $ ANNOTATIONS $ VERSION

POLYMERS is ``PEPTIDE<n>{m.m.m}`` joined by ``|``; CONNECTIONS is
``P1,P2,pos:Rr-pos:Rr`` joined by ``|`` (positions 1-based). GROUPS and
ANNOTATIONS must be empty; VERSION may be empty or ``V2.0``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import MalformedSections, UnknownPolymerType, UnrepresentableFeature
from .biln import BilnDocument, Crosslink, canonical_biln

_POLYMER = re.compile(r"^([A-Z]+)(\d+)\{(.*)\}$")
_CONNECTION = re.compile(r"^([A-Z]+\d+),([A-Z]+\d+),(\d+):R(\d+)-(\d+):R(\d+)$")
_NAME = re.compile(r"[A-Za-z0-9_]+")
_KNOWN_TYPES = {"PEPTIDE", "RNA", "CHEM", "BLOB", "G"}


@dataclass(frozen=True, order=True)
class Endpoint:
    polymer: str
    pos: int      # 1-based, as written in HELM
    r_group: int


@dataclass
class HelmDocument:
    polymers: dict[str, list[str]]
    connections: list[tuple[Endpoint, Endpoint]] = field(default_factory=list)

    def __str__(self) -> str:
        return serialize_helm(self)


def _split_monomers(body: str, text: str) -> list[str]:
    out, cur, depth = [], [], 0
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if depth < 0 or depth > 1:
            raise MalformedSections(f"bad brackets in polymer {body!r} of {text!r}")
        if ch == "." and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise MalformedSections(f"unclosed '[' in polymer {body!r} of {text!r}")
    out.append("".join(cur))
    names = []
    for tok in out:
        name = tok[1:-1] if tok.startswith("[") and tok.endswith("]") else tok
        if not _NAME.fullmatch(name) or (name == tok and len(name) != 1):
            raise MalformedSections(f"bad monomer {tok!r} in {text!r}")
        names.append(name)
    return names


def parse_helm(text: str) -> HelmDocument:
    """Parse a HELM string restricted to peptide polymers.

    Raises:
        MalformedSections: wrong section layout, unclosed braces, bad references.
        UnknownPolymerType: a non-PEPTIDE polymer.
    """
    if text is None or not text.strip():
        raise MalformedSections("empty HELM text")
    text = text.strip()
    sections = text.split("$")
    if len(sections) != 5:
        raise MalformedSections(f"expected 5 '$'-separated sections, got {len(sections)} in {text!r}")
    poly_text, conn_text, groups, annotations, version = sections
    if groups.strip() or annotations.strip():
        raise MalformedSections(f"groups/annotations sections are not supported: {text!r}")
    if version.strip() not in ("", "V2.0"):
        raise MalformedSections(f"unknown HELM version {version!r}")
    if not poly_text:
        raise MalformedSections(f"no polymers in {text!r}")
    polymers: dict[str, list[str]] = {}
    for chunk in poly_text.split("|"):
        m = _POLYMER.match(chunk)
        if m is None:
            raise MalformedSections(f"bad polymer {chunk!r} in {text!r}")
        ptype = m.group(1)
        if ptype != "PEPTIDE":
            if ptype in _KNOWN_TYPES:
                raise UnknownPolymerType(f"polymer type {ptype} is not supported")
            raise UnknownPolymerType(f"unknown polymer type {ptype!r}")
        pid = ptype + m.group(2)
        if pid in polymers:
            raise MalformedSections(f"duplicate polymer id {pid}")
        if not m.group(3):
            raise MalformedSections(f"empty polymer {pid}")
        polymers[pid] = _split_monomers(m.group(3), text)
    connections = []
    if conn_text:
        for chunk in conn_text.split("|"):
            m = _CONNECTION.match(chunk.strip())
            if m is None:
                raise MalformedSections(f"bad connection {chunk!r} in {text!r}")
            a = Endpoint(m.group(1), int(m.group(3)), int(m.group(4)))
            b = Endpoint(m.group(2), int(m.group(5)), int(m.group(6)))
            for e in (a, b):
                if e.polymer not in polymers or not 1 <= e.pos <= len(polymers[e.polymer]):
                    raise MalformedSections(f"connection endpoint {e} out of range in {text!r}")
                if e.r_group not in (1, 2, 3):
                    raise MalformedSections(f"R-group must be 1..3 in {chunk!r}")
            if (a.polymer, a.pos) == (b.polymer, b.pos):
                raise MalformedSections(f"connection joins a monomer to itself: {chunk!r}")
            connections.append((a, b))
    return HelmDocument(polymers, connections)


def _conn_key(doc: HelmDocument, e: Endpoint) -> tuple:
    return (list(doc.polymers).index(e.polymer), e.pos, e.r_group)


def serialize_helm(doc: HelmDocument) -> str:
    polys = "|".join(
        f"{pid}{{" + ".".join(m if len(m) == 1 else f"[{m}]" for m in mons) + "}"
        for pid, mons in doc.polymers.items()
    )
    conns = []
    for a, b in doc.connections:
        if _conn_key(doc, b) < _conn_key(doc, a):
            a, b = b, a
        conns.append((_conn_key(doc, a), _conn_key(doc, b), a, b))
    conns.sort(key=lambda t: (t[0], t[1]))
    conn_text = "|".join(f"{a.polymer},{b.polymer},{a.pos}:R{a.r_group}-{b.pos}:R{b.r_group}"
                         for _, _, a, b in conns)
    return f"{polys}${conn_text}$$$"


def _check_name(name: str) -> None:
    if not _NAME.fullmatch(name):
        raise UnrepresentableFeature(f"monomer name {name!r} cannot be written in both notations")


def biln_to_helm(doc: BilnDocument) -> HelmDocument:
    """Chain i becomes PEPTIDE<i+1>; crosslinks become connections."""
    polymers = {}
    for ci, chain in enumerate(doc.chains):
        for name in chain:
            _check_name(name)
        polymers[f"PEPTIDE{ci + 1}"] = list(chain)
    conns = []
    for (ca, pa, ra), (cb, pb, rb) in doc.bonds():
        conns.append((Endpoint(f"PEPTIDE{ca + 1}", pa + 1, ra), Endpoint(f"PEPTIDE{cb + 1}", pb + 1, rb)))
    out = HelmDocument(polymers, conns)
    return parse_helm(serialize_helm(out))


def helm_to_biln(doc: HelmDocument) -> BilnDocument:
    """Polymers become chains in listed order; connections become crosslinks."""
    ids = list(doc.polymers)
    chains = []
    for pid in ids:
        for name in doc.polymers[pid]:
            _check_name(name)
        chains.append(list(doc.polymers[pid]))
    halves = []
    ordered = sorted(doc.connections, key=lambda ab: sorted((_conn_key(doc, ab[0]), _conn_key(doc, ab[1]))))
    for bid, (a, b) in enumerate(ordered, 1):
        halves.append(Crosslink(bid, ids.index(a.polymer), a.pos - 1, a.r_group))
        halves.append(Crosslink(bid, ids.index(b.polymer), b.pos - 1, b.r_group))
    return canonical_biln(BilnDocument(chains, halves))
