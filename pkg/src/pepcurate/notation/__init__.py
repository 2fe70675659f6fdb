"""Peptide notations: BILN, HELM, SMILES and the monomer library behind them."""

from .assemble import (
    assemble_molecule,
    collapse_noncanonical,
    convert,
    fasta_to_biln,
    nearest_canonical_homolog,
    to_smiles,
)
from .biln import BilnDocument, Crosslink, canonical_biln, parse_biln, serialize_biln
from .graph import AROMATIC, DOUBLE, SINGLE, TRIPLE, Atom, MolecularGraph
from .helm import Endpoint, HelmDocument, biln_to_helm, helm_to_biln, parse_helm, serialize_helm
from .library import MonomerDef, MonomerLibrary, default_library, load_library
from .smiles import parse_smiles, write_smiles

__all__ = [
    "AROMATIC", "DOUBLE", "SINGLE", "TRIPLE", "Atom", "BilnDocument", "Crosslink", "Endpoint",
    "HelmDocument", "MolecularGraph", "MonomerDef", "MonomerLibrary", "assemble_molecule",
    "biln_to_helm", "canonical_biln", "collapse_noncanonical", "convert", "default_library",
    "fasta_to_biln", "helm_to_biln", "load_library", "nearest_canonical_homolog", "parse_biln",
    "parse_helm", "parse_smiles", "serialize_biln", "serialize_helm", "to_smiles", "write_smiles",
]
