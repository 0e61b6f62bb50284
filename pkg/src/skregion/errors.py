"""Exception hierarchy shared by all modules."""


class SkRegionError(Exception):
    """Base class for every error raised by this package."""


class PmfError(SkRegionError, ValueError):
    """A probability table failed validation."""


class NegativeProbability(PmfError):
    pass


class NotNormalized(PmfError):
    pass


class NonFiniteProbability(PmfError):
    pass


class ShapeMismatch(PmfError):
    pass


class PmfFormatError(SkRegionError, ValueError):
    """A PMF or config file could not be read or parsed."""


class BadSubset(SkRegionError, ValueError):
    pass


class OverlappingSets(SkRegionError, ValueError):
    pass


class BadPartition(SkRegionError, ValueError):
    pass


class EmptySample(SkRegionError, ValueError):
    pass


class InformationError(SkRegionError, ArithmeticError):
    """An information measure came out negative beyond round-off."""


class BudgetZero(SkRegionError, ValueError):
    pass


class BudgetExceeded(SkRegionError, RuntimeError):
    pass


class DegenerateRates(SkRegionError, ValueError):
    pass


class EncoderFailure(SkRegionError):
    """Terminal 3 could not encode the observed block."""


class DecodeFailure(SkRegionError):
    """A legitimate decoder found zero or several candidates.

    ``layer`` is 0 when the common codeword failed and 1 when only the
    private layer failed; in the latter case ``k0`` and ``i0`` hold the
    successfully decoded common key row and codeword index.
    """

    def __init__(self, msg, layer=0, k0=None, i0=None):
        super().__init__(msg)
        self.layer = layer
        self.k0 = k0
        self.i0 = i0


class ZeroEvidence(SkRegionError):
    """Every candidate codeword tuple has zero likelihood."""
