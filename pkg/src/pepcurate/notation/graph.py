"""Minimal molecular graph: heavy atoms as nodes, hydrogens as counts."""

from __future__ import annotations

from dataclasses import dataclass, replace

SINGLE, DOUBLE, TRIPLE, AROMATIC = 1, 2, 3, 4

_SYMBOLS = (
    "* H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni "
    "Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe "
    "Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg "
    "Tl Pb Bi Po At Rn"
).split()
ATOMIC_NUMBER = {sym: z for z, sym in enumerate(_SYMBOLS)}


@dataclass
class Atom:
    """A heavy atom (or ``*`` attachment wildcard).

    ``hcount`` is the number of attached hydrogens, always explicit in the
    graph regardless of how the SMILES spelled it. ``chiral`` ('@'/'@@')
    is interpreted against ``ref_order``: the neighbor indices in the order
    they were written, with -1 standing for the implicit hydrogen.
    """

    element: str
    charge: int = 0
    hcount: int = 0
    aromatic: bool = False
    atom_class: int = 0
    isotope: int = 0
    chiral: str | None = None
    ref_order: tuple[int, ...] = ()

    @property
    def number(self) -> int:
        return ATOMIC_NUMBER[self.element]


class MolecularGraph:
    def __init__(self):
        self.atoms: list[Atom] = []
        self._adj: list[dict[int, int]] = []
        # parse-time annotations not carried by atoms/bonds, e.g. cis/trans marks
        self.annotations: dict = {}

    # construction -------------------------------------------------------

    def add_atom(self, atom: Atom) -> int:
        self.atoms.append(atom)
        self._adj.append({})
        return len(self.atoms) - 1

    def add_bond(self, i: int, j: int, order: int = SINGLE) -> None:
        if i == j:
            raise ValueError("self-loop bond")
        if j in self._adj[i]:
            raise ValueError(f"bond {i}-{j} already present")
        self._adj[i][j] = order
        self._adj[j][i] = order

    def remove_bond(self, i: int, j: int) -> int:
        order = self._adj[i].pop(j)
        del self._adj[j][i]
        return order

    # queries ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, i: int) -> dict[int, int]:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def bond_order(self, i: int, j: int) -> int | None:
        return self._adj[i].get(j)

    @property
    def bonds(self) -> list[tuple[int, int, int]]:
        return sorted((i, j, o) for i, nb in enumerate(self._adj) for j, o in nb.items() if i < j)

    def wildcards(self) -> list[int]:
        return [i for i, a in enumerate(self.atoms) if a.element == "*"]

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                a = stack.pop()
                comp.append(a)
                for b in self._adj[a]:
                    if not seen[b]:
                        seen[b] = True
                        stack.append(b)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.atoms) > 0 and len(self.components()) == 1

    # editing ------------------------------------------------------------

    def copy(self) -> "MolecularGraph":
        g = MolecularGraph()
        g.atoms = [replace(a) for a in self.atoms]
        g._adj = [dict(nb) for nb in self._adj]
        g.annotations = dict(self.annotations)
        return g

    def extend(self, other: "MolecularGraph") -> int:
        """Append a disjoint copy of ``other``; returns the index offset."""
        offset = len(self.atoms)
        for a in other.atoms:
            ref = tuple(r if r < 0 else r + offset for r in a.ref_order)
            self.atoms.append(replace(a, ref_order=ref))
        for nb in other._adj:
            self._adj.append({j + offset: o for j, o in nb.items()})
        return offset

    def replace_neighbor(self, atom: int, old: int, new: int) -> None:
        """Keep the stereo reference order valid when a neighbor is swapped."""
        a = self.atoms[atom]
        if a.chiral and old in a.ref_order:
            if new < 0 and -1 in a.ref_order:
                a.chiral, a.ref_order = None, ()
            else:
                a.ref_order = tuple(new if r == old else r for r in a.ref_order)

    def without_atoms(self, drop: set[int]) -> "MolecularGraph":
        keep = [i for i in range(len(self.atoms)) if i not in drop]
        remap = {old: new for new, old in enumerate(keep)}
        g = MolecularGraph()
        for old in keep:
            a = self.atoms[old]
            ref = a.ref_order
            if a.chiral:
                if any(r >= 0 and r not in remap for r in ref):
                    a = replace(a, chiral=None, ref_order=())
                else:
                    a = replace(a, ref_order=tuple(r if r < 0 else remap[r] for r in ref))
            g.add_atom(replace(a))
        for old in keep:
            for j, o in self._adj[old].items():
                if j in remap and remap[old] < remap[j]:
                    g.add_bond(remap[old], remap[j], o)
        return g

    def permuted(self, perm: list[int]) -> "MolecularGraph":
        """Relabel atoms so that old atom ``perm[k]`` becomes atom ``k``."""
        inv = {old: new for new, old in enumerate(perm)}
        g = MolecularGraph()
        for old in perm:
            a = self.atoms[old]
            g.add_atom(replace(a, ref_order=tuple(r if r < 0 else inv[r] for r in a.ref_order)))
        for i, j, o in self.bonds:
            g.add_bond(inv[i], inv[j], o)
        return g

    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.element not in ("*", "H"))

    def __repr__(self) -> str:
        return f"<MolecularGraph atoms={len(self.atoms)} bonds={len(self.bonds)}>"
