"""SMILES subset reader and writer.

Supported: organic-subset atoms (B C N O P S F Cl Br I and aromatic
b c n o p s), bracket atoms ``[isotope? symbol chirality? Hn? charge? :class?]``,
bonds ``- = # :``, branches, ring closures (``1``..``9`` and ``%nn``), and
dot-disconnected components. ``@``/``@@`` are kept on the atom with the
neighbor order they refer to. ``/`` and ``\\`` parse as single bonds; their
marks are recorded in ``graph.annotations["directional_bonds"]`` but not
written back out.

The writer walks each component depth-first from its lowest-ranked atom,
ranking atoms by (atomic number, degree, charge, index). Output is stable
for a given graph but is not a canonical form; compare molecules by graph
isomorphism instead.
"""

from __future__ import annotations

import re

from ..errors import RingClosureMismatch, UnsupportedSmilesFeature
from .graph import AROMATIC, ATOMIC_NUMBER, DOUBLE, SINGLE, TRIPLE, Atom, MolecularGraph

ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I", "*")
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")
_AROMATIC_BRACKET = {"b", "c", "n", "o", "p", "s", "se", "as"}

_VALENCES = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
    "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,), "*": (0,),
}

_BOND_CHARS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC, "/": SINGLE, "\\": SINGLE}
_BRACKET_RE = re.compile(
    r"^(?P<iso>\d+)?"
    r"(?P<sym>\*|[A-Z][a-z]?|se|as|[bcnops])"
    r"(?P<chiral>@@|@)?"
    r"(?P<h>H\d*)?"
    r"(?P<charge>[+-]+\d*)?"
    r"(?::(?P<cls>\d+))?$"
)


def implicit_hcount(element: str, aromatic: bool, bond_sum: int) -> int:
    """Hydrogens implied for an organic-subset atom with the given bond-order sum."""
    if aromatic:
        bond_sum += 1
    for v in _VALENCES.get(element, ()):
        if v >= bond_sum:
            return v - bond_sum
    return 0


def _bond_sum(g: MolecularGraph, i: int) -> int:
    return sum(1 if o == AROMATIC else o for o in g.neighbors(i).values())


def _parse_bracket(body: str, text: str) -> Atom:
    m = _BRACKET_RE.match(body)
    if m is None:
        raise UnsupportedSmilesFeature(f"unsupported bracket atom [{body}] in {text!r}")
    sym = m.group("sym")
    aromatic = sym[0].islower()
    element = sym.capitalize() if aromatic else sym
    if element not in ATOMIC_NUMBER:
        raise UnsupportedSmilesFeature(f"unknown element {sym!r} in {text!r}")
    h = m.group("h")
    hcount = 0 if h is None else int(h[1:] or 1)
    charge = 0
    raw = m.group("charge")
    if raw:
        sign = 1 if raw[0] == "+" else -1
        signs = raw.rstrip("0123456789")
        digits = raw[len(signs):]
        if len(set(signs)) != 1 or (digits and len(signs) > 1):
            raise UnsupportedSmilesFeature(f"bad charge {raw!r} in {text!r}")
        charge = sign * (int(digits) if digits else len(signs))
    return Atom(
        element=element,
        charge=charge,
        hcount=hcount,
        aromatic=aromatic,
        atom_class=int(m.group("cls") or 0),
        isotope=int(m.group("iso") or 0),
        chiral=m.group("chiral"),
    )


def parse_smiles(text: str) -> MolecularGraph:
    """Parse a SMILES string into a graph with explicit hydrogen counts.

    Raises:
        UnsupportedSmilesFeature: syntax outside the supported subset.
        RingClosureMismatch: a ring bond digit is opened but never closed.
    """
    s = text.strip()
    if not s:
        raise UnsupportedSmilesFeature("empty SMILES")
    g = MolecularGraph()
    refs: list[list] = []
    bracket: list[bool] = []
    directional: dict[tuple[int, int], str] = {}
    rings: dict[int, tuple[int, int | None, int, str | None]] = {}
    branch: list[int | None] = []
    prev: int | None = None
    pending: int | None = None
    pending_char: str | None = None
    pos, n = 0, len(s)

    def default_order(a: int, b: int) -> int:
        return AROMATIC if g.atoms[a].aromatic and g.atoms[b].aromatic else SINGLE

    def add(atom: Atom, is_bracket: bool) -> None:
        nonlocal prev, pending, pending_char
        idx = g.add_atom(atom)
        refs.append([])
        bracket.append(is_bracket)
        if prev is not None:
            g.add_bond(prev, idx, pending if pending is not None else default_order(prev, idx))
            if pending_char in ("/", "\\"):
                directional[(prev, idx)] = pending_char
            refs[prev].append(idx)
            refs[idx].append(prev)
        elif pending is not None:
            raise UnsupportedSmilesFeature(f"bond with no preceding atom in {text!r}")
        if is_bracket and atom.hcount:
            refs[idx].append(-1)
        prev, pending, pending_char = idx, None, None

    while pos < n:
        ch = s[pos]
        if ch == "[":
            end = s.find("]", pos)
            if end < 0:
                raise UnsupportedSmilesFeature(f"unclosed bracket atom in {text!r}")
            add(_parse_bracket(s[pos + 1:end], text), True)
            pos = end + 1
        elif s.startswith(("Cl", "Br"), pos):
            add(Atom(s[pos:pos + 2]), False)
            pos += 2
        elif ch in "BCNOPSFI*":
            add(Atom(ch), False)
            pos += 1
        elif ch in AROMATIC_ORGANIC:
            add(Atom(ch.upper(), aromatic=True), False)
            pos += 1
        elif ch in _BOND_CHARS:
            if pending is not None:
                raise UnsupportedSmilesFeature(f"consecutive bond symbols in {text!r}")
            pending, pending_char = _BOND_CHARS[ch], ch
            pos += 1
        elif ch == "(":
            if prev is None or pending is not None:
                raise UnsupportedSmilesFeature(f"misplaced branch in {text!r}")
            branch.append(prev)
            pos += 1
        elif ch == ")":
            if not branch or pending is not None:
                raise UnsupportedSmilesFeature(f"unbalanced ')' in {text!r}")
            prev = branch.pop()
            pos += 1
        elif ch == ".":
            if pending is not None or branch:
                raise UnsupportedSmilesFeature(f"misplaced '.' in {text!r}")
            prev = None
            pos += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if pos + 2 >= n or not s[pos + 1:pos + 3].isdigit():
                    raise UnsupportedSmilesFeature(f"bad %nn ring label in {text!r}")
                num, pos = int(s[pos + 1:pos + 3]), pos + 3
            else:
                num, pos = int(ch), pos + 1
            if prev is None:
                raise UnsupportedSmilesFeature(f"ring label with no atom in {text!r}")
            if num in rings:
                other, order, slot, mark = rings.pop(num)
                if other == prev:
                    raise RingClosureMismatch(f"ring {num} closes on its own atom in {text!r}")
                if order is not None and pending is not None and order != pending:
                    raise RingClosureMismatch(f"conflicting bond orders on ring {num} in {text!r}")
                use = pending if pending is not None else order
                try:
                    g.add_bond(other, prev, use if use is not None else default_order(other, prev))
                except ValueError:
                    raise RingClosureMismatch(f"ring {num} duplicates an existing bond in {text!r}") from None
                mark = pending_char if pending_char in ("/", "\\") else mark
                if mark in ("/", "\\"):
                    directional[(other, prev)] = mark
                refs[other][slot] = prev
                refs[prev].append(other)
            else:
                rings[num] = (prev, pending, len(refs[prev]), pending_char)
                refs[prev].append(None)
            pending, pending_char = None, None
        else:
            raise UnsupportedSmilesFeature(f"unsupported character {ch!r} in {text!r}")

    if rings:
        raise RingClosureMismatch(f"unclosed ring bond(s) {sorted(rings)} in {text!r}")
    if branch:
        raise UnsupportedSmilesFeature(f"unbalanced '(' in {text!r}")
    if pending is not None:
        raise UnsupportedSmilesFeature(f"dangling bond at end of {text!r}")

    for i, a in enumerate(g.atoms):
        if not bracket[i]:
            a.hcount = implicit_hcount(a.element, a.aromatic, _bond_sum(g, i))
        if a.chiral:
            order = refs[i]
            if not bracket[i] or len(order) not in (3, 4):
                a.chiral = None
            else:
                a.ref_order = tuple(order)
    if directional:
        g.annotations["directional_bonds"] = directional
    return g


# =============================================================================
# Writer
# =============================================================================


def _rank(g: MolecularGraph, i: int) -> tuple:
    a = g.atoms[i]
    return (a.number, g.degree(i), a.charge, i)


def _atom_token(g: MolecularGraph, i: int, chiral: str | None) -> str:
    a = g.atoms[i]
    organic = a.element in ORGANIC and (not a.aromatic or a.element.lower() in AROMATIC_ORGANIC)
    if (organic and not chiral and a.charge == 0 and a.isotope == 0 and a.atom_class == 0
            and implicit_hcount(a.element, a.aromatic, _bond_sum(g, i)) == a.hcount):
        return a.element.lower() if a.aromatic else a.element
    out = ["["]
    if a.isotope:
        out.append(str(a.isotope))
    out.append(a.element.lower() if a.aromatic else a.element)
    if chiral:
        out.append(chiral)
    if a.hcount:
        out.append("H" if a.hcount == 1 else f"H{a.hcount}")
    if a.charge:
        sign = "+" if a.charge > 0 else "-"
        out.append(sign if abs(a.charge) == 1 else f"{sign}{abs(a.charge)}")
    if a.atom_class:
        out.append(f":{a.atom_class}")
    out.append("]")
    return "".join(out)


def _bond_token(g: MolecularGraph, i: int, j: int) -> str:
    order = g.bond_order(i, j)
    both_aromatic = g.atoms[i].aromatic and g.atoms[j].aromatic
    if order == DOUBLE:
        return "="
    if order == TRIPLE:
        return "#"
    if order == AROMATIC:
        return "" if both_aromatic else ":"
    return "-" if both_aromatic else ""


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"


def _parity(seq: list[int]) -> int:
    p = 0
    for x in range(len(seq)):
        for y in range(x + 1, len(seq)):
            if seq[x] > seq[y]:
                p ^= 1
    return p


def _chiral_out(g: MolecularGraph, i: int, written: list[int]) -> str | None:
    a = g.atoms[i]
    if not a.chiral or sorted(written) != sorted(a.ref_order):
        return None
    pos = {v: k for k, v in enumerate(a.ref_order)}
    flip = _parity([pos[v] for v in written])
    if not flip:
        return a.chiral
    return "@@" if a.chiral == "@" else "@"


def write_smiles(g: MolecularGraph) -> str:
    """Serialize every component, joined with '.'."""
    n = len(g)
    if n == 0:
        return ""
    visited = [False] * n
    order_index = [-1] * n
    parent = [-1] * n
    children: list[list[int]] = [[] for _ in range(n)]
    ring_events: list[list[int]] = [[] for _ in range(n)]
    roots = []
    counter = 0
    for start in sorted(range(n), key=lambda i: _rank(g, i)):
        if visited[start]:
            continue
        roots.append(start)
        visited[start] = True
        order_index[start] = counter
        counter += 1
        seen_ring = set()
        stack = [(start, iter(sorted(g.neighbors(start), key=lambda b: _rank(g, b))))]
        while stack:
            a, it = stack[-1]
            advanced = False
            for b in it:
                if b == parent[a]:
                    continue
                if visited[b]:
                    key = (min(a, b), max(a, b))
                    if key not in seen_ring:
                        seen_ring.add(key)
                        ring_events[a].append(b)
                        ring_events[b].append(a)
                    continue
                visited[b] = True
                parent[b] = a
                order_index[b] = counter
                counter += 1
                children[a].append(b)
                stack.append((b, iter(sorted(g.neighbors(b), key=lambda c: _rank(g, c)))))
                advanced = True
                break
            if not advanced:
                stack.pop()

    pieces = []
    for root in roots:
        out: list[str] = []
        open_digits: dict[tuple[int, int], int] = {}
        free: list[int] = []
        next_digit = 1
        # explicit emission stack: ("atom", i) or ("text", s)
        todo: list[tuple[str, object]] = [("atom", root)]
        while todo:
            kind, val = todo.pop()
            if kind == "text":
                out.append(val)
                continue
            i = val
            events = sorted(ring_events[i], key=lambda b: order_index[b])
            written = [] if parent[i] < 0 else [parent[i]]
            if g.atoms[i].hcount and g.atoms[i].chiral:
                written.append(-1)
            ring_tokens = []
            released = []
            for b in events:
                key = (min(i, b), max(i, b))
                if key in open_digits:
                    d = open_digits.pop(key)
                    ring_tokens.append(_ring_label(d))
                    released.append(d)
                else:
                    if free:
                        free.sort()
                        d = free.pop(0)
                    else:
                        d, next_digit = next_digit, next_digit + 1
                    open_digits[key] = d
                    ring_tokens.append(_bond_token(g, i, b) + _ring_label(d))
                written.append(b)
            free.extend(released)
            kids = children[i]
            written.extend(kids)
            prefix = "" if parent[i] < 0 else _bond_token(g, parent[i], i)
            out.append(prefix + _atom_token(g, i, _chiral_out(g, i, written)) + "".join(ring_tokens))
            frames: list[tuple[str, object]] = []
            for k, c in enumerate(kids):
                if k < len(kids) - 1:
                    frames += [("text", "("), ("atom", c), ("text", ")")]
                else:
                    frames.append(("atom", c))
            todo.extend(reversed(frames))
        pieces.append("".join(out))
    return ".".join(pieces)
