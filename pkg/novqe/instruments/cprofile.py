import cProfile
from collections.abc import Callable
from functools import wraps
from pathlib import Path

from novqe.instruments.base import BaseInstrument
from novqe.types import Solver


class CProfiler(BaseInstrument):
    """cProfile instrument which writes one stats dump per profiled call.

    ``dkwargs``:
        * ``out_dir``: output directory for stats dumps, none are written if unset
        * ``profiler_kwargs``: kwargs passed to ``cProfile.Profile.__init__()``
        * ``print_kwargs``: kwargs passed to ``Profile.print_stats()``; set to
          ``None`` to keep stdout quiet

    Dumps are named ``{count}-{call}-{qualname}.cprofile`` where ``count``
    enumerates instrumented methods and ``call`` enumerates their invocations.
    """

    def __init__(self):
        self.count = 0

    def __call__(self, solver: Solver, func: Callable, **dkwargs) -> Callable:
        out_dir = dkwargs.get("out_dir", None)
        profiler_kwargs = dkwargs.get("profiler_kwargs", {})
        print_kwargs = dkwargs.get("print_kwargs", {})

        count = self.count
        self.count += 1
        calls = [0]

        @wraps(func)
        def wrapper(*args, **kwargs):
            pr = cProfile.Profile(**profiler_kwargs)
            pr.enable()
            try:
                return func(*args, **kwargs)
            finally:
                pr.disable()
                if print_kwargs is not None:
                    print(func.__qualname__)
                    pr.print_stats(**print_kwargs)
                if out_dir is not None:
                    Path(out_dir).mkdir(parents=True, exist_ok=True)
                    name = f"{count}-{calls[0]}-{func.__qualname__}.cprofile"
                    pr.dump_stats(Path(out_dir) / name)
                calls[0] += 1

        return wrapper

    def reset(self):
        """Reset the instrumentation enumeration counter to 0."""
        self.count = 0
