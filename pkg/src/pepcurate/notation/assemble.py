"""Monomer assembly and sequence-level mappings.

Assembly condenses residue i's R2 with residue i+1's R1 inside each chain and
then applies every crosslink. Condensing two attachments removes both
wildcards and bonds the atoms they were attached to. Attachments left unused
are capped: an acyl carbon (one carrying ``=O``) gets OH, anything else
gets H. A free R1 amine therefore ends up as NH2 and a free R2 carbonyl as COOH.
"""

from __future__ import annotations

from ..errors import MissingHomolog, NotationError, OccupiedAttachment
from ..seqcore import CANONICAL, PeptideSequence
from .biln import BilnDocument, parse_biln, serialize_biln
from .graph import DOUBLE, SINGLE, MolecularGraph
from .helm import HelmDocument, biln_to_helm, helm_to_biln, parse_helm, serialize_helm
from .library import MonomerLibrary, default_library
from .smiles import write_smiles


def _as_biln(doc) -> BilnDocument:
    if isinstance(doc, BilnDocument):
        return doc
    if isinstance(doc, HelmDocument):
        return helm_to_biln(doc)
    if isinstance(doc, str):
        return parse_biln(doc)
    raise TypeError(f"expected BilnDocument, HelmDocument or BILN text, got {type(doc).__name__}")


def _is_acyl_carbon(g: MolecularGraph, i: int) -> bool:
    if g.atoms[i].element != "C":
        return False
    return any(g.atoms[j].element == "O" and o == DOUBLE for j, o in g.neighbors(i).items())


def assemble_molecule(doc, library: MonomerLibrary | None = None) -> MolecularGraph:
    """Build the full molecular graph of a BILN/HELM document.

    Raises:
        UnknownMonomer: a token missing from the library.
        OccupiedAttachment: an R-group used by two bonds.
    """
    doc = _as_biln(doc)
    lib = library or default_library()
    g = MolecularGraph()
    sites: dict[tuple[int, int, int], int] = {}   # (chain, pos, r) -> wildcard atom
    names: dict[tuple[int, int], str] = {}
    for ci, chain in enumerate(doc.chains):
        for pi, sym in enumerate(chain):
            mono = lib.get(sym)
            off = g.extend(mono.graph)
            names[(ci, pi)] = sym
            for r, w in mono.attachments.items():
                sites[(ci, pi, r)] = w + off

    links = []
    for ci, chain in enumerate(doc.chains):
        for pi in range(len(chain) - 1):
            links.append(((ci, pi, 2), (ci, pi + 1, 1)))
    links.extend(doc.bonds())

    used: set[tuple[int, int, int]] = set()
    drop: set[int] = set()
    for a, b in links:
        for site in (a, b):
            if site not in sites:
                raise NotationError(f"monomer {names[site[:2]]!r} at chain {site[0] + 1} position "
                                    f"{site[1] + 1} has no R{site[2]} attachment")
            if site in used:
                raise OccupiedAttachment(f"R{site[2]} of {names[site[:2]]!r} at chain {site[0] + 1} "
                                         f"position {site[1] + 1} is used twice")
            used.add(site)
        wa, wb = sites[a], sites[b]
        xa, = g.neighbors(wa)
        xb, = g.neighbors(wb)
        g.remove_bond(wa, xa)
        g.remove_bond(wb, xb)
        g.add_bond(xa, xb, SINGLE)
        g.replace_neighbor(xa, wa, xb)
        g.replace_neighbor(xb, wb, xa)
        drop.update((wa, wb))

    for site, w in sites.items():
        if site in used:
            continue
        x, = g.neighbors(w)
        if _is_acyl_carbon(g, x):
            atom = g.atoms[w]
            atom.element, atom.hcount, atom.atom_class = "O", 1, 0
        else:
            g.remove_bond(w, x)
            g.atoms[x].hcount += 1
            g.replace_neighbor(x, w, -1)
            drop.add(w)

    out = g.without_atoms(drop)
    for atom in out.atoms:
        atom.atom_class = 0
    return out


# =============================================================================
# Conversions
# =============================================================================


def to_smiles(doc, library: MonomerLibrary | None = None) -> str:
    return write_smiles(assemble_molecule(doc, library))


def convert(text: str, src: str, dst: str, library: MonomerLibrary | None = None) -> str:
    """Convert one record between ``fasta``, ``biln``, ``helm`` and ``smiles``."""
    src, dst = src.lower(), dst.lower()
    if src == "fasta":
        doc = fasta_to_biln(text)
    elif src == "biln":
        doc = parse_biln(text)
    elif src == "helm":
        doc = helm_to_biln(parse_helm(text))
    else:
        raise ValueError(f"unsupported source format {src!r}")
    if dst == "biln":
        return serialize_biln(doc)
    if dst == "helm":
        return serialize_helm(biln_to_helm(doc))
    if dst == "smiles":
        return to_smiles(doc, library)
    if dst == "fasta":
        return nearest_canonical_homolog(doc, library).residues
    raise ValueError(f"unsupported target format {dst!r}")


def fasta_to_biln(seq) -> BilnDocument:
    residues = seq.residues if isinstance(seq, PeptideSequence) else str(seq).strip().upper()
    return BilnDocument([list(residues)], [])


def collapse_noncanonical(doc, library: MonomerLibrary | None = None) -> PeptideSequence:
    """Map every non-canonical monomer, caps included, to 'X'.

    Caps change the residue count relative to the canonical homolog
    sequence, so when one is collapsed the result carries the note
    ``"cap_collapsed"``.
    """
    doc = _as_biln(doc)
    lib = library or default_library()
    out, capped = [], False
    for sym in doc.monomers:
        if sym in CANONICAL:
            out.append(sym)
        else:
            out.append("X")
            if sym in lib and lib.get(sym).is_cap:
                capped = True
    residues = "".join(out)
    return PeptideSequence(residues, ambiguous="X" in residues,
                           notes=("cap_collapsed",) if capped else ())


def nearest_canonical_homolog(doc, library: MonomerLibrary | None = None) -> PeptideSequence:
    """Replace each monomer by its canonical homolog; caps are dropped.

    Raises:
        MissingHomolog: listing every monomer without a usable homolog.
    """
    doc = _as_biln(doc)
    lib = library or default_library()
    out, missing = [], []
    for sym in doc.monomers:
        if sym in CANONICAL:
            out.append(sym)
            continue
        mono = lib.get(sym) if sym in lib else None
        if mono is None or mono.canonical_homolog is None:
            missing.append(sym)
        elif not mono.is_cap:
            out.append(mono.canonical_homolog)
    if missing:
        raise MissingHomolog(missing)
    if not out:
        raise NotationError("document has no residues after dropping caps")
    return PeptideSequence("".join(out))
