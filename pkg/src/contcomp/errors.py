"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ContCompError(Exception):
    """Base class for library errors."""


class DomainError(ContCompError, ValueError):
    """An argument left the domain of a map (negative radicand, pole, log of a nonpositive)."""


class EvaluationOverflow(ContCompError, OverflowError):
    """An intermediate value grew past the representable magnitude."""


class NoConvergence(ContCompError):
    """An iteration hit its depth or iteration budget without meeting the tolerance."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class NegativeTerm(ContCompError, ValueError):
    """A criterion that needs nonnegative addends received a negative one."""


class ExponentOutOfRange(ContCompError, ValueError):
    """A per-term exponent is outside the range allowed by the map family."""


class HypothesisNotCertified(ContCompError, ValueError):
    """A criterion's analytic hypotheses were not asserted by the caller."""


class NoFixedPointLocated(ContCompError):
    """Fixed-point refinement did not settle."""


class PrecisionExhausted(ContCompError):
    """Working precision is too small to decide the next digit."""


class DigitOverflow(ContCompError):
    """An unbounded digit is too large to represent reliably."""


class UnknownConstant(ContCompError, KeyError):
    """The requested constant is not registered."""


class DerivativeUnavailable(ContCompError, ValueError):
    """Newton mode was requested for a map without a derivative."""
