__author__ = 'islnoma'


class ISLException(Exception):
    pass


class ConfigException(ISLException):
    pass


class DomainException(ISLException, ValueError):
    pass


class SatIndexException(ISLException, IndexError):
    pass


class DegeneratePairException(DomainException):
    pass


class PulseModelException(ISLException):
    pass


class SingularPulseException(PulseModelException):
    pass


class ShapeException(ISLException, ValueError):
    pass


class AllocationException(DomainException):
    pass


class UndefinedFairnessException(DomainException):
    pass


class UndefinedSeparationException(DomainException):
    pass


class PrepartitionException(ISLException):
    pass


class EmptyCandidateSetException(ISLException):
    pass


class InfeasibleScenarioException(ISLException):
    pass


class SearchAbortedException(ISLException):
    pass
