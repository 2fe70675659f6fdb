"""Deterministic peptide dataset curation."""

__version__ = "0.1.0"
