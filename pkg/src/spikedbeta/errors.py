"""Exception hierarchy.

Two families: ``InputError`` for bad user input (CLI exit 1) and
``VerificationError`` for numerical checks that did not pass (CLI exit 2).
"""


class SpikedError(Exception):
    """Base class for all package errors."""


class InputError(SpikedError, ValueError):
    pass


class VerificationError(SpikedError, RuntimeError):
    pass


# potential
class EmptyCoefficients(InputError):
    pass


class OddDegree(InputError):
    pass


class NonpositiveLeading(InputError):
    pass


class InconsistentInputs(InputError):
    pass


# numerics
class NonFiniteIntegrand(VerificationError):
    pass


class EvaluationPointOutsideOpenInterval(InputError):
    pass


class TailNotDecaying(VerificationError):
    pass


class NonSmoothInput(InputError):
    pass


# equilibrium
class NewtonDiverged(VerificationError):
    def __init__(self, msg, last=None, residuals=None):
        super().__init__(msg)
        self.last = last
        self.residuals = residuals


class MultiBandSuspected(VerificationError):
    pass


class DegreeMismatch(VerificationError):
    pass


# phase
class BranchCut(InputError):
    pass


class NonpositiveSpike(InputError):
    pass


class SearchHorizonExceeded(VerificationError):
    pass


class NoInteriorMaximum(InputError):
    pass


class AtEdge(InputError):
    pass


# limit laws
class NuRequired(InputError):
    pass


class OutsideDomain(InputError):
    pass


class SubcriticalUnsupported(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class DegenerateGap(InputError):
    pass


# sampler
class UnsupportedBeta(InputError):
    pass


class EmptySample(InputError):
    pass


class SeriesTruncationInsufficient(VerificationError):
    pass


# jack
class ContourDisagreement(VerificationError):
    pass


# appendix
class DomainViolation(InputError):
    pass


class SupportNotNormalized(InputError):
    pass


class IndicatorStarvation(VerificationError):
    pass
