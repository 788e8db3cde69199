class ToruslabError(Exception):
    r"""
    Base class of every error raised by toruslab.
    """
    exit_code = 1


class UsageError(ToruslabError):
    exit_code = 1


class DomainError(ToruslabError):
    r"""
    A well-formed request whose geometry or dynamics cannot be processed.
    """
    exit_code = 2


class MalformedInput(DomainError):
    pass


class NotClosed(DomainError):
    pass


class SelfIntersecting(DomainError):
    pass


class Inessential(DomainError):
    pass


class OverlappingSegments(DomainError):
    pass


class CoreOverlap(OverlappingSegments):
    pass


class NotIsotopic(DomainError):
    pass


class NoArc(DomainError):
    pass


class EmptyProjection(DomainError):

    def __init__(self, which, message=None):
        self.which = which
        super().__init__(message or f"curve {which} has empty projection")


class NonTransverse(DomainError):
    pass


class NoPath(DomainError):
    pass


class BudgetTooSmall(DomainError):
    pass


class NotPLWord(DomainError):
    pass


class NonInvertible(DomainError):
    pass


class NotAMarking(DomainError):
    pass


class ConditionFailed(DomainError):

    def __init__(self, failed, report=None):
        self.failed = list(failed)
        self.report = report
        super().__init__("failed conditions: " + ", ".join(self.failed))
