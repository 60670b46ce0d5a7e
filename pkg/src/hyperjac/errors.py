"""Exception hierarchy.

Every error raised by the package derives from :class:`HyperjacError`.
:class:`InputError` subclasses signal bad arguments (CLI exit code 1),
:class:`NumericalError` subclasses signal a numerical procedure that did not
reach its tolerance (CLI exit code 2).
"""


class HyperjacError(Exception):
    """Base class for all package errors."""


class InputError(HyperjacError, ValueError):
    pass


class NumericalError(HyperjacError, ArithmeticError):
    pass


# curvegeom
class OddCount(InputError):
    pass


class DuplicateBranchPoint(InputError):
    pass


class PointNotOnCurve(InputError):
    pass


class PathTooCloseToBranchPoint(InputError):
    pass


class NonconvergentContinuation(NumericalError):
    pass


# periods
class IndexOutOfRange(InputError, IndexError):
    pass


class WeierstrassPoint(InputError):
    pass


class QuadratureNonconvergence(NumericalError):
    pass


class SingularPeriodMatrix(NumericalError):
    pass


class CutChainSelfIntersecting(InputError):
    pass


# theta
class InvalidPeriodMatrix(InputError):
    pass


class NonIntegerCharacteristic(InputError):
    pass


# jacobian / ajmap
class RiemannConstantValidationFailed(NumericalError):
    pass


class PathConstructionFailed(NumericalError):
    pass


# locus
class GenusMismatch(InputError):
    pass


class CoincidentPoints(InputError):
    pass


class JEquivalentPair(InputError):
    pass


class CorrectorDiverged(NumericalError):
    pass


class RankDegenerate(NumericalError):
    pass


class ProjectionInconsistent(NumericalError):
    pass


class AmbiguousClassification(NumericalError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


# thirdkind
class NoUsableOddCharacteristic(NumericalError):
    pass


class PathThroughPole(InputError):
    pass


class LogBranchLost(NumericalError):
    pass
