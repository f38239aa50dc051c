"""Exception hierarchy shared by all stabpath modules."""


class StabPathError(Exception):
    """Base class for every error raised by stabpath."""


class DegenerateSamples(StabPathError):
    pass


class InconclusiveGerm(StabPathError):
    pass


class NotASubgroup(StabPathError):
    pass


class EvalDomain(StabPathError):
    pass


class SpreadTooLarge(StabPathError):
    pass


class ZeroCharge(StabPathError):
    pass


class GridTooCoarse(StabPathError):
    pass


class PhaseOverlap(StabPathError):
    pass


class NonTransitive(StabPathError):
    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class EmptyClass(StabPathError):
    pass


class NotGluable(StabPathError):
    pass


class NotInGluedLocus(StabPathError):
    pass


class BadTwistDirections(StabPathError):
    pass


class BadKappa(StabPathError):
    pass


class ScenarioParseError(StabPathError):
    """Malformed scenario file (CLI exit code 2)."""


class GermValidationError(StabPathError):
    """An analytic germ disagrees with the numerically tracked one (CLI exit code 3)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
