import logging
from collections.abc import MutableMapping
from dataclasses import dataclass
from typing import Callable
from typing import Iterable
from typing import List
from typing import Set
from typing import Type

from sklearn.base import BaseEstimator

from novqe.config import DEFAULT_EXCLUDE
from novqe.config import DEFAULT_METHODS
from novqe.types import Solver
from novqe.utils import get_solvers_in_package
from novqe.utils import method_is_inherited

logger = logging.getLogger(__name__)


@dataclass
class ImplementedInstrument:
    callable: Callable
    kwargs: dict


class SolverMethodInstrumentation:
    """Container for the instruments stacked on one solver method.

    :param Solver solver: The solver class or instance owning the method.
    :param Callable func: The undecorated method.
    :param bool inherited: Whether a class method comes from a parent class.
    """

    def __init__(self, solver: Solver, func: Callable, inherited: bool = False):
        self.solver = solver
        self.func = func
        self.instrumented_func = func
        self.inherited = inherited
        self.instruments: List[ImplementedInstrument] = []

    @property
    def callables(self) -> List[Callable]:
        return [i.callable for i in self.instruments]

    def add(self, instrument: Callable, instrument_kwargs: dict):
        """Stack an instrument and rebuild ``instrumented_func``.

        :param Callable instrument: The decorator to apply
        :param dict instrument_kwargs: Keyword args for the decorator
        """
        self.instruments.append(ImplementedInstrument(instrument, instrument_kwargs))
        self._wrap_function()

    def contains(self, instrument: Callable, instrument_kwargs: dict) -> bool:
        """Whether ``instrument`` with these kwargs is already stacked."""
        return ImplementedInstrument(instrument, instrument_kwargs) in self.instruments

    def _wrap_function(self):
        self.instrumented_func = self.func
        for instrument in self.instruments:
            self.instrumented_func = instrument.callable(
                self.solver, self.instrumented_func, **instrument.kwargs
            )

    def remove(self, instrument: Callable):
        """Remove every occurrence of ``instrument``."""
        self.instruments = [i for i in self.instruments if i.callable != instrument]
        self._wrap_function()

    def empty(self) -> bool:
        return len(self.instruments) == 0


class SolverInstrumentor:
    """Apply an instrument to the methods of novqe solvers.

    Solvers are ``BaseEstimator`` subclasses: :class:`~novqe.vqe.VQE`,
    :class:`~novqe.adapt.AdaptVQE` and :class:`~novqe.noization.NOization`.
    The instrument is a decorator factory with signature
    ``(solver, func, **dkwargs)``:

    .. code-block:: python

        def instrument(solver, func, **dkwargs):

            @wraps(func)
            def wrapper(*args, **kwargs):
                print("Before executing")
                retval = func(*args, **kwargs)
                print("After executing")
                return retval

            return wrapper

    By default ``fit``, ``step`` and ``grow`` are instrumented.  Instances may be
    instrumented recursively, so that instrumenting a
    :class:`~novqe.noization.NOization` also reaches the solver it wraps.

    An instrumentor is itself callable on an instance, which makes it usable as
    the ``instrument`` hook of :func:`~novqe.experiment.run_experiment`.

    :param Callable instrument: The decorator factory.
    :param dict instrument_kwargs: Keyword args passed to the decorator.
    :param list(str) methods: Method names to instrument.
    :param list(Type) exclude: Types skipped during recursion.
    """

    def __init__(
        self,
        instrument: Callable,
        instrument_kwargs: dict = None,
        methods: List[str] = None,
        exclude: List[Type] = None,
    ):
        self.instrument = instrument
        self.instrument_kwargs = instrument_kwargs or {}
        self.methods = methods or DEFAULT_METHODS
        self.exclude = tuple(exclude or DEFAULT_EXCLUDE)

    def __call__(self, solver: BaseEstimator):
        self.instrument_instance(solver)

    @classmethod
    def _get_instrumentation_attribute_name(cls, method_name: str) -> str:
        return f"{cls._get_instrumentation_attribute_prefix()}{method_name}"

    @classmethod
    def _get_instrumentation_attribute_prefix(cls) -> str:
        return "_novqe_"

    def _children(self, obj: object) -> Iterable:
        if hasattr(obj, "__dict__"):
            prefix = self._get_instrumentation_attribute_prefix()
            for k, v in obj.__dict__.items():
                if k.startswith(prefix):
                    continue
                if isinstance(obj, BaseEstimator) and k in self.methods:
                    continue
                yield v
        elif isinstance(obj, MutableMapping):
            yield from obj.values()
        elif isinstance(obj, Iterable):
            yield from obj

    def _walk_solvers(self, obj: object, seen: Set[int] = None) -> Iterable:
        """Yield every solver instance reachable from ``obj``."""
        seen = set() if seen is None else seen
        if isinstance(obj, self.exclude) or id(obj) in seen:
            return
        seen.add(id(obj))
        if isinstance(obj, BaseEstimator):
            yield obj
        for child in self._children(obj):
            yield from self._walk_solvers(child, seen)

    # region instrumentation instance
    def instrument_instance(
        self,
        solver: BaseEstimator,
        recursive: bool = True,
        instrument_kwargs: dict = None,
    ):
        """Decorate the methods of a solver instance.

        :param BaseEstimator solver: A solver instance.
        :param bool recursive: Whether to also instrument solvers held by it.
        :param dict instrument_kwargs: Keyword args overriding the instrumentor's.
        """
        solvers = self._walk_solvers(solver) if recursive else [solver]
        for obj in list(solvers):
            for method_name in self.methods:
                self._instrument_instance_method(obj, method_name, instrument_kwargs)

    def _instrument_instance_method(
        self,
        solver: BaseEstimator,
        method_name: str,
        instrument_kwargs: dict = None,
    ):
        method = getattr(solver, method_name, None)
        if method is None:
            return

        dkwargs = instrument_kwargs or self.instrument_kwargs
        attribute_name = self._get_instrumentation_attribute_name(method_name)
        instr = solver.__dict__.get(attribute_name)
        if instr is None:
            instr = SolverMethodInstrumentation(solver, method)
            setattr(solver, attribute_name, instr)

        if not instr.contains(self.instrument, dkwargs):
            instr.add(self.instrument, dkwargs)
        setattr(solver, method_name, instr.instrumented_func)

    # endregion

    # region uninstrumentation instance
    def uninstrument_instance(
        self, solver: BaseEstimator, recursive: bool = True, full: bool = False
    ):
        """Remove this instrumentor's decorators from a solver instance.

        :param BaseEstimator solver: A solver instance.
        :param bool recursive: Whether to also uninstrument solvers held by it.
        :param bool full: Whether to remove every instrument, not only this one.
        """
        solvers = self._walk_solvers(solver) if recursive else [solver]
        for obj in list(solvers):
            self._uninstrument_instance(obj, full)

    def _uninstrument_instance(self, solver: BaseEstimator, full: bool = False):
        if full:
            prefix = self._get_instrumentation_attribute_prefix()
            methods = [
                name[len(prefix) :]
                for name, attr in list(solver.__dict__.items())
                if name.startswith(prefix)
                and isinstance(attr, SolverMethodInstrumentation)
            ]
        else:
            methods = self.methods

        for method_name in methods:
            attribute_name = self._get_instrumentation_attribute_name(method_name)
            instr = solver.__dict__.get(attribute_name)
            if instr is None:
                continue
            instr.remove(self.instrument)
            if full or instr.empty():
                # the instance attribute shadows the class method
                delattr(solver, method_name)
                delattr(solver, attribute_name)
            else:
                setattr(solver, method_name, instr.instrumented_func)

    # endregion

    # region solver classes
    def instrument_instance_classes(self, solver: BaseEstimator):
        """Instrument the classes of every solver reachable from an instance.

        Lighter than :meth:`instrument_package`, since only classes already in
        use are touched.

        :param BaseEstimator solver: A solver instance.
        """
        self.instrument_classes(self._get_instance_classes(solver))

    def uninstrument_instance_classes(self, solver: BaseEstimator, full: bool = False):
        self.uninstrument_classes(self._get_instance_classes(solver), full=full)

    def _get_instance_classes(self, obj: object) -> Set[Type[BaseEstimator]]:
        return {s.__class__ for s in self._walk_solvers(obj)}

    # endregion

    # region instrumentation package
    def instrument_package(self, package_name: str = "novqe"):
        """Instrument every solver class defined in a package.

        :param str package_name: A package name.
        """
        self.instrument_classes(get_solvers_in_package(package_name))

    def instrument_classes(self, solvers: Iterable[Type[BaseEstimator]]):
        for solver in solvers:
            self.instrument_class(solver)

    def instrument_class(self, solver: Type[BaseEstimator]):
        """Decorate the methods of a solver class.

        :param Type[BaseEstimator] solver: A solver class.
        """
        if issubclass(solver, self.exclude):
            logger.debug(f"Not instrumenting (excluded): {solver}")
            return
        logger.debug(f"Instrumenting: {solver}")
        for method_name in self.methods:
            self._instrument_class_method(solver, method_name)

    def _instrument_class_method(self, solver: Type[BaseEstimator], method_name: str):
        class_method = getattr(solver, method_name, None)
        if class_method is None:
            return

        attribute_name = self._get_instrumentation_attribute_name(method_name)
        instr = getattr(solver, attribute_name, None)
        # a parent class is instrumented, this one not yet
        if instr and instr.solver != solver:
            if method_is_inherited(solver, class_method):
                class_method = instr.func
            instr = None

        if instr is None:
            inherited = method_is_inherited(solver, class_method)
            instr = SolverMethodInstrumentation(solver, class_method, inherited)
            setattr(solver, attribute_name, instr)

        if not instr.contains(self.instrument, self.instrument_kwargs):
            instr.add(self.instrument, self.instrument_kwargs)
        setattr(solver, method_name, instr.instrumented_func)

    # endregion

    # region uninstrumentation package
    def uninstrument_package(self, package_name: str = "novqe", full: bool = False):
        self.uninstrument_classes(get_solvers_in_package(package_name), full=full)

    def uninstrument_classes(
        self, solvers: Iterable[Type[BaseEstimator]], full: bool = False
    ):
        for solver in solvers:
            self.uninstrument_class(solver, full=full)

    def uninstrument_class(self, solver: Type[BaseEstimator], full: bool = False):
        """Remove this instrumentor's decorators from a solver class.

        :param Type[BaseEstimator] solver: A solver class.
        :param bool full: Whether to remove every instrument, not only this one.
        """
        for method_name in self.methods:
            attribute_name = self._get_instrumentation_attribute_name(method_name)
            instr = solver.__dict__.get(attribute_name)
            if instr is None:
                continue
            instr.remove(self.instrument)
            if full or instr.empty():
                if instr.inherited:
                    delattr(solver, method_name)
                else:
                    setattr(solver, method_name, instr.func)
                delattr(solver, attribute_name)
            else:
                setattr(solver, method_name, instr.instrumented_func)

    # endregion
