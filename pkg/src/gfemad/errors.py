"""Exception hierarchy shared by every module."""


class GfemError(Exception):
    pass


class InvalidArgumentError(GfemError, ValueError):
    pass


class OutOfDomainError(GfemError, ValueError):
    """A point lies outside the element or mesh it was evaluated on."""


class DomainError(GfemError, ValueError):
    """An enrichment was evaluated where it is not real-valued."""


class OverflowGuardError(GfemError, OverflowError):
    """An exponential enrichment would overflow or is not defined for gamma."""


class ModeConflictError(GfemError):
    """Strong Dirichlet enforcement requested with an enrichment that is nonzero on the Dirichlet boundary."""


class AssemblyError(GfemError):
    pass


class SingularSystemError(GfemError):
    def __init__(self, message, dof=None):
        super().__init__(message)
        self.dof = dof


class DegenerateEnrichmentError(GfemError):
    pass


class ConfigError(GfemError, ValueError):
    pass
