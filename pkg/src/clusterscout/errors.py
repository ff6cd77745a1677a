"""Exception taxonomy shared by all modules."""


class ClusterScoutError(Exception):
    """Base class for every error raised by this package."""


# --- data ---------------------------------------------------------------

class MalformedInput(ClusterScoutError):
    pass


class EmptySelection(ClusterScoutError):
    pass


class ParseError(ClusterScoutError):
    """Filter-expression syntax error. Carries the character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownFeature(ClusterScoutError):
    pass


class InvalidRate(ClusterScoutError):
    pass


# --- clustering ---------------------------------------------------------

class DimensionMismatch(ClusterScoutError):
    pass


class DegenerateVector(ClusterScoutError):
    pass


class InvalidCombination(ClusterScoutError):
    pass


class TooFewRows(ClusterScoutError):
    pass


class TooFewFeatures(ClusterScoutError):
    pass


# --- projection ---------------------------------------------------------

class PerplexityTooLarge(ClusterScoutError):
    pass


# --- validation / insight -----------------------------------------------

class SingleCluster(ClusterScoutError):
    pass


class LengthMismatch(ClusterScoutError):
    pass


class MissingLabels(ClusterScoutError):
    pass


class UnknownCluster(ClusterScoutError):
    pass


class NotApplicable(ClusterScoutError):
    pass


# --- tour ---------------------------------------------------------------

class AllParamsFixed(ClusterScoutError):
    pass


class NoViableCandidate(ClusterScoutError):
    pass


# --- session / service ----------------------------------------------------

class NothingToUndo(ClusterScoutError):
    pass


class NothingToRedo(ClusterScoutError):
    pass


class SchemaMismatch(ClusterScoutError):
    pass


class CorruptPayload(ClusterScoutError):
    pass


class UnknownId(ClusterScoutError):
    pass
