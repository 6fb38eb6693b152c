"""Exception hierarchy shared by the simulator modules."""


class NVPhaseError(Exception):
    """Base class for all simulator errors."""


class ContractError(NVPhaseError, ValueError):
    """An input violated a documented precondition."""


class DimensionError(ContractError):
    """A matrix exceeded the supported dimension."""


class DegenerateError(ContractError):
    """A closed form is undefined at a degenerate parameter point."""


class SingularParameterError(ContractError):
    """A closed form has a vanishing denominator at the requested parameters."""


class ConvergenceError(NVPhaseError, RuntimeError):
    """A numerical procedure did not reach its tolerance."""


class NonCyclicError(NVPhaseError, RuntimeError):
    """The evolved state is too far from the initial ray to define a phase."""
