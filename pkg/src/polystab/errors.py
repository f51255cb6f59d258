"""Exception hierarchy shared by the solver pipeline."""


class PolystabError(Exception):
    """Base class for all errors raised by polystab."""


class ParseError(PolystabError):
    """Malformed configuration document."""


class ValidationError(PolystabError):
    """A parameter violates its admissible range."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(PolystabError):
    """Argument outside the domain of a formula (e.g. Z <= 0, omega == 0)."""


class BranchLoss(PolystabError):
    """The closure algebra has no root on the physical branch."""


class NoConvergence(PolystabError):
    """An iteration exhausted its budget."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class BracketFailure(PolystabError):
    """No sign change of the wall-velocity mismatch was found."""


class SingularTransform(PolystabError):
    """The elastic wave speed vanishes somewhere in the channel."""


class AssemblyError(PolystabError):
    """Coefficient profiles are inconsistent with the requested grid."""


class FactorizationSingular(PolystabError):
    """The shifted pencil is singular to working precision."""
