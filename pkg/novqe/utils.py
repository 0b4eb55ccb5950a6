import inspect
import logging
import os
import warnings
from collections.abc import Callable
from functools import wraps
from importlib import import_module
from inspect import isclass
from pkgutil import walk_packages
from types import MethodType
from typing import List
from typing import Set
from typing import Type
from typing import Union

import numpy as np
from sklearn.base import BaseEstimator

from novqe.types import Seed
from novqe.types import Solver

logger = logging.getLogger(__name__)


def compose_decorators(decorators: List[Callable]) -> Callable:
    """Compose multiple decorators into one.

    Helper function for combining multiple instruments into one.

    :param list(Callable) decorators: A list of instrumentation decorators to be
        combined into a single decorator.
    """

    def composed(solver: Solver, func: Callable, **dkwargs) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            wrapped_func = func
            for decorator in decorators:
                wrapped_func = decorator(solver, wrapped_func, **dkwargs)
            return wrapped_func(*args, **kwargs)

        return wrapper

    return composed


def get_method_class_name(method: Callable) -> str:
    return method.__qualname__.split(".")[0]


def is_class_method(func: Callable) -> bool:
    """Indicate if the method belongs to a class (opposed to an instance)."""
    parameters = list(inspect.signature(func).parameters.keys())
    return bool(parameters) and parameters[0] == "self"


def is_instance_method(func: Callable) -> bool:
    """Indicate if the method belongs to an instance of a class."""
    return not is_class_method(func)


def method_is_inherited(solver: Solver, method: Callable) -> bool:
    """Indicate if the solver's method is inherited from a parent class."""
    method_class_name = get_method_class_name(method=method)

    try:
        solver_class_name = solver.__name__
    except AttributeError:
        solver_class_name = solver.__class__.__name__

    return method_class_name != solver_class_name


def has_instrumentation(solver: Solver, method_name: str) -> bool:
    """Indicate if the solver's method is instrumented."""
    return hasattr(solver, f"_novqe_{method_name}")


def non_self_arg(func: Callable, args: tuple, idx: int):
    """Get the value of a corresponding arg index ignoring self for class methods."""
    if is_class_method(func):
        return args[idx + 1]
    return args[idx]


def get_arg_by_key(func: Callable, args: tuple, key: str, kwargs: dict = None):
    """Get the value of an argument by the name found in a function's signature.

    Keyword arguments take precedence; ``None`` is returned when the argument was
    not passed at all.
    """
    if kwargs and key in kwargs:
        return kwargs[key]
    keys = list(inspect.signature(func).parameters.keys())
    idx = keys.index(key)
    if idx < len(args):
        return args[idx]
    return None


def get_solvers_in_packages(package_names: List[str]) -> Set[Type[BaseEstimator]]:
    """Get all solver classes from a list of packages.

    :param list(str) package_names: a list of package names from which to get solvers
    :return: A set of solver classes
    """
    solvers = set()
    for package_name in package_names:
        solvers = solvers.union(get_solvers_in_package(package_name=package_name))
    return solvers


def get_solvers_in_package(package_name: str = "novqe") -> Set[Type[BaseEstimator]]:
    """Get all solver classes (``BaseEstimator`` subclasses) defined in a package.

    Classes imported from other packages, such as ``BaseEstimator`` itself, are
    skipped.

    :param str package_name: a package name from which to get solvers
    :return: A set of solver classes
    """
    solvers = set()
    package = import_module(package_name)
    package_dir = os.path.dirname(package.__file__)
    for (_, module_name, _) in walk_packages(
        [package_dir], prefix=package.__name__ + "."
    ):
        if "test" in module_name:
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                module = import_module(module_name)
        except ImportError:
            logger.warning(f"Unable to import {module_name}")
            continue
        for module_attribute_name in dir(module):
            module_attribute = getattr(module, module_attribute_name)
            if (
                isclass(module_attribute)
                and issubclass(module_attribute, BaseEstimator)
                and module_attribute.__module__.startswith(package_name)
            ):
                solvers.add(module_attribute)
    return solvers


def get_name(solver: Solver, func: Union[Callable, MethodType]) -> str:
    if isinstance(func, MethodType):
        self_qname = f"{func.__self__.__class__.__qualname__}.{func.__name__}"
        if self_qname == func.__qualname__:
            return func.__qualname__
        return f"{self_qname} ({func.__qualname__})"

    if isinstance(solver, type):
        obj_name = solver.__qualname__
    else:
        obj_name = solver.__class__.__name__
    cls_name = func.__qualname__.split(".")[0]
    if obj_name == cls_name or "." not in func.__qualname__:
        return func.__qualname__
    return f"{obj_name}.{func.__name__} ({func.__qualname__})"


def as_seed_sequence(seed: Seed) -> np.random.SeedSequence:
    """Wrap an integer seed (of any size) or ``None`` into a ``SeedSequence``.

    Sequences are copied with a fresh spawn counter, so spawning from the same
    seed twice yields the same children.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            seed.entropy, spawn_key=seed.spawn_key, pool_size=seed.pool_size
        )
    if seed is not None and int(seed) < 0:
        raise ValueError(f"Seeds must be non-negative, got {seed}")
    return np.random.SeedSequence(seed)


def spawn_seeds(seed: Seed, n: int) -> List[np.random.SeedSequence]:
    """Derive ``n`` independent child seeds, reproducibly, from one seed."""
    return as_seed_sequence(seed).spawn(n)


def make_rng(seed: Seed) -> np.random.Generator:
    """Build the PCG64 generator used for every random draw in novqe."""
    return np.random.Generator(np.random.PCG64(as_seed_sequence(seed)))
