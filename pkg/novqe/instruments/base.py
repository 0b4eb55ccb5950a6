from abc import ABC
from abc import abstractmethod
from collections.abc import Callable
from functools import wraps

from novqe.types import Solver


class BaseInstrument(ABC):
    """Base class for solver instruments.

    An instrument is called with the solver and one of its methods and returns
    the decorated method.
    """

    @abstractmethod
    def __call__(
        self, solver: Solver, func: Callable, **dkwargs
    ) -> Callable:  # pragma: no cover
        pass


class Identity(BaseInstrument):
    """Decorates with a no-op."""

    def __call__(self, solver: Solver, func: Callable, **dkwargs) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            return func(*args, **kwargs)

        return wrapper
