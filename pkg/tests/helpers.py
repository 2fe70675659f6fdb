"""Shared test oracles and fixtures (no pepcurate logic is reused here)."""

import networkx as nx

AA = "ACDEFGHIKLMNPQRSTVWY"

# 20 BILN documents: linear, multi-chain, caps, non-canonical, disulfides
BILN_CORPUS = [
    "G",
    "G-G",
    "A-G-C",
    "K-W-K-L-F-K-K",
    "A-G.K-D",
    "[ac]-A-G-[am]",
    "[ac]-K-L-L-K-[am]",
    "A-[meA]-G",
    "[Aib]-[Aib]-L-[Nle]",
    "[dA]-[dK]-[dF]-P",
    "[Hyp]-G-P-[Orn]-[Cit]",
    "S-[pS]-T-Y",
    "C(1,3)-G-C(1,3)",
    "C(1,3)-A-A-C(1,3)-K",
    "C(1,3)-C(2,3)-A-C(1,3)-C(2,3)",
    "G-C(1,3)-K-K-C(2,3)-W-C(1,3)-R-C(2,3)-G",
    "C(1,3)-A-A-C(1,3).C(2,3)-K-C(2,3)",
    "A-C(1,3)-G.H-C(1,3)-V",
    "K(1,3)-G-G-E(1,3)",
    "[ac]-C(1,3)-[Sar]-F-C(1,3)-[am]",
]


def to_nx(g):
    """networkx view of a MolecularGraph (heavy atoms, explicit H counts)."""
    out = nx.Graph()
    for i, a in enumerate(g.atoms):
        out.add_node(i, el=a.element, charge=a.charge, h=a.hcount, ar=bool(a.aromatic), cls=a.atom_class)
    for i, j, o in g.bonds:
        out.add_edge(i, j, order=o)
    return out


def isomorphic(g1, g2) -> bool:
    return nx.is_isomorphic(
        to_nx(g1), to_nx(g2),
        node_match=lambda x, y: x == y,
        edge_match=lambda x, y: x["order"] == y["order"],
    )


def random_seqs(rng, n, lo=8, hi=30):
    return ["".join(rng.choice(list(AA), int(rng.integers(lo, hi + 1)))) for _ in range(n)]


def twin_fixture(rng, n=100, n_decoys=None):
    """Positives, a pool of their property twins plus far decoys, and twin indices.

    A twin is the half-rotation of a positive: same length and composition,
    hence identical length, charge and GRAVY, but a different string.
    """
    pos = []
    while len(pos) < n:
        s = "".join(rng.choice(list(AA), int(rng.integers(8, 41))))
        t = s[len(s) // 2:] + s[:len(s) // 2]
        if t != s and s not in pos:
            pos.append(s)
    twins = [s[len(s) // 2:] + s[:len(s) // 2] for s in pos]
    decoys = []
    for _ in range(n_decoys if n_decoys is not None else 2 * n):
        decoys.append("".join(rng.choice(list("KRWFLI"), int(rng.integers(45, 60)))))
    pool = decoys[: len(decoys) // 2] + twins + decoys[len(decoys) // 2:]
    start = len(decoys) // 2
    return pos, pool, set(range(start, start + n))
