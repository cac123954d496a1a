"""Exception hierarchy shared by all modules."""


class PonceletError(Exception):
    """Base class; ``code`` is the CLI exit code the error maps to."""

    code = 2


class InputError(PonceletError):
    code = 2


class DynamicsError(PonceletError):
    code = 3


# confocal
class NonFiniteInput(InputError):
    pass


class ConvergenceFailure(PonceletError):
    pass


class NegativeRadicand(InputError):
    pass


class DegenerateLine(InputError):
    pass


class RootIsolationFailure(PonceletError):
    pass


# dynamics
class PointNotOnQuadric(DynamicsError):
    pass


class GrazingIncidence(DynamicsError):
    pass


class EscapeDetected(DynamicsError):
    pass


class CornerHit(DynamicsError):
    pass


class InflectionAmbiguous(DynamicsError):
    pass


class EmptyRange(InputError):
    pass


class UnbalancedCounts(DynamicsError):
    pass


class OrderViolation(DynamicsError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InvalidSignature(InputError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IntegrationFailure(DynamicsError):
    pass


# series
class CenterMismatch(InputError):
    pass


class DivisionByZeroConstantTerm(InputError):
    pass


class BranchPointCenter(InputError):
    pass


class SubstitutionPole(InputError):
    pass


# conditions
class NegativeDiscriminant(InputError):
    pass


class InsufficientOrder(InputError):
    pass


class VacuousCondition(InputError):
    pass


class HypothesisViolated(InputError):
    pass


# abeljacobi
class IntervalCrossesNegativeRegion(InputError):
    pass


class DegenerateCurve(InputError):
    pass


class NoValidMuPair(InputError):
    pass


class SearchExhausted(PonceletError):
    code = 4
