"""Exception hierarchy shared by every stage of the curation toolkit.

Each exception carries an ``exit_code`` so the command line front end can map
failures onto its documented exit-code scheme without a lookup table.
"""

from __future__ import annotations


class CurationError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class InputError(CurationError):
    """Malformed input (parse level)."""

    exit_code = 2


class EmptyResultError(CurationError):
    exit_code = 3


# --- sequences -------------------------------------------------------------


class EmptySequence(InputError):
    pass


class IllegalCharacter(InputError):
    pass


class AmbiguousResidue(InputError):
    pass


class SequenceTooShort(InputError):
    pass


class NoRoot(CurationError):
    pass


# --- notation --------------------------------------------------------------


class NotationError(InputError):
    pass


class UnbalancedBracket(NotationError):
    pass


class UnpairedBondId(NotationError):
    pass


class UnknownGrammar(NotationError):
    pass


class MalformedSections(NotationError):
    pass


class UnknownPolymerType(NotationError):
    pass


class UnrepresentableFeature(NotationError):
    pass


class UnknownMonomer(NotationError):
    pass


class OccupiedAttachment(NotationError):
    pass


class MissingHomolog(NotationError):
    def __init__(self, monomers):
        self.monomers = sorted(set(monomers))
        super().__init__("no canonical homolog for: " + ", ".join(self.monomers))


class UnsupportedSmilesFeature(NotationError):
    pass


class RingClosureMismatch(NotationError):
    pass


# --- fingerprints ----------------------------------------------------------


class EmptyMolecule(CurationError):
    pass


class WidthMismatch(CurationError):
    pass


class TooFewMolecules(CurationError):
    pass


class EmptyGeneratedSet(CurationError):
    pass


# --- cleaning / enrichment -------------------------------------------------


class MixedUnits(InputError):
    pass


class EmptyClass(CurationError):
    pass


# --- splitting -------------------------------------------------------------


class BadFractions(InputError):
    pass


# --- negative sampling -----------------------------------------------------


class EmptySet(CurationError):
    pass


class EmptyPoolAfterExclusion(EmptyResultError):
    pass


class DimensionMismatch(CurationError):
    pass


class NotNormalized(CurationError):
    pass


class EmptyValues(CurationError):
    pass


class InsufficientPool(CurationError):
    exit_code = 5

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ExhaustedCombinations(CurationError):
    exit_code = 5


class AuditViolation(CurationError):
    exit_code = 4


# --- warnings --------------------------------------------------------------


class CurationWarning(UserWarning):
    """Base warning; the CLI mirrors every instance into the run log."""


class GiantComponentWarning(CurationWarning):
    pass


class BackfillWarning(CurationWarning):
    pass


class DegenerateBandwidth(CurationWarning):
    pass


class NoConvergence(CurationWarning):
    pass
