"""Exception types raised across the package."""


class HolonomyError(Exception):
    """Base class for all package errors."""


class RankDeficient(HolonomyError):
    """A matrix that must be full rank is not (within the relative tolerance)."""

    def __init__(self, smin, smax, link=None, singular_values=None):
        self.smin = float(smin)
        self.smax = float(smax)
        self.link = link
        self.singular_values = singular_values
        where = f" at link {link}" if link is not None else ""
        super().__init__(f"rank deficient{where}: sigma_min={smin:.3e}, sigma_max={smax:.3e}")


class ZeroInput(HolonomyError):
    pass


class NotPositive(HolonomyError):
    def __init__(self, min_eig, where=None):
        self.min_eig = float(min_eig)
        self.where = where
        at = f" at s={where}" if where is not None else ""
        super().__init__(f"matrix not positive definite{at}: min eigenvalue {min_eig:.3e}")


class NotHermitian(HolonomyError):
    pass


class NotAntiHermitian(HolonomyError):
    pass


class NegativeEigenvalue(HolonomyError):
    pass


class EmptyPath(HolonomyError):
    pass


class NonMonotoneGrid(HolonomyError):
    pass


class DimensionMismatch(HolonomyError, ValueError):
    pass


class BadArity(HolonomyError, ValueError):
    pass


class UnknownName(HolonomyError, KeyError):
    pass


class ParamOutOfRange(HolonomyError, ValueError):
    pass


class NotMaximalKraus(HolonomyError):
    pass


class BadBasis(HolonomyError):
    pass


class NotCyclic(HolonomyError):
    pass


class XNormOne(HolonomyError):
    pass


class DerivativeUnavailable(HolonomyError):
    pass


class IntegratorFailure(HolonomyError):
    pass


class FrameDiscontinuity(HolonomyError):
    pass


class VanishingTrace(HolonomyError):
    def __init__(self, block, value):
        self.block = block
        self.value = value
        super().__init__(f"Wilson-line trace of block {block} vanishes: |tr|={abs(value):.3e}")


class CompletionFailure(HolonomyError):
    pass
