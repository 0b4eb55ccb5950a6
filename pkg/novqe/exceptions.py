class NovqeError(Exception):
    """Base class for all errors raised by novqe."""


class ConfigurationError(NovqeError, ValueError):
    """Invalid model, solver, or experiment configuration."""


class DimensionError(NovqeError, ValueError):
    """Mismatched mode or qubit counts, or an index out of range."""


class HermiticityError(NovqeError, ValueError):
    """Tensors or observables which are not Hermitian."""


class DomainError(NovqeError, ValueError):
    """An argument outside the domain of a formula."""


class AllocationError(NovqeError, ValueError):
    """Shots cannot be distributed over the terms of an observable."""


class BudgetError(AllocationError):
    """A shot budget leaves fewer shots per evaluation than measured terms."""


class OptimizationError(NovqeError, RuntimeError):
    """The optimizer met a non-finite objective value."""


class StateError(NovqeError, ValueError):
    """An invalid quantum state, or a state of the wrong kind."""


class EmptySectorError(NovqeError, ValueError):
    """A particle-number sector without basis states."""
