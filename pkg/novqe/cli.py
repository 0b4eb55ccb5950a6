"""Command-line interface: ``novqe run|compare|oracle|dump-hamiltonian``."""
import argparse
import json
import logging
from pathlib import Path
from typing import Callable
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from novqe._version import __version__
from novqe.config import DEFAULT_NOISE_RATIOS
from novqe.encoding import jordan_wigner
from novqe.exceptions import ConfigurationError
from novqe.exceptions import NovqeError
from novqe.experiment import ExperimentConfig
from novqe.experiment import compare_tradeoff
from novqe.experiment import resolve_output_dir
from novqe.experiment import run_experiment
from novqe.hamiltonian import HubbardSpec
from novqe.hamiltonian import build_hubbard
from novqe.instrumentor import SolverInstrumentor
from novqe.instruments.cprofile import CProfiler
from novqe.instruments.logging import EnergyLogger
from novqe.instruments.logging import HamiltonianLogger
from novqe.instruments.logging import TimeElapsedLogger
from novqe.noization import NOization
from novqe.oracle import exact_natural_orbitals
from novqe.oracle import ground_energy

logger = logging.getLogger(__name__)


def _budget(value: str) -> Optional[int]:
    if value.lower() in ("exact", "none"):
        return None
    try:
        return int(float(value))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid shot budget: {value!r}")


def load_model(path: str) -> HubbardSpec:
    """Read a model from a bare model file or from an experiment config."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}: invalid JSON ({e})")
    if isinstance(data, dict) and "model" in data:
        data = data["model"]
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a JSON object")
    return HubbardSpec.from_dict(data)


def build_instrumentation(
    log_timings: bool = False, profile_dir: Optional[str] = None
) -> Optional[Callable[[NOization], None]]:
    """Instrumentors requested on the command line, combined into one hook."""
    instrumentors: List[Tuple[SolverInstrumentor, bool]] = []
    if log_timings:
        instrumentors.append((SolverInstrumentor(instrument=TimeElapsedLogger()), True))
        instrumentors.append((SolverInstrumentor(instrument=EnergyLogger()), True))
        instrumentors.append(
            (SolverInstrumentor(instrument=HamiltonianLogger(), methods=["fit"]), True)
        )
    if profile_dir is not None:
        profiler = SolverInstrumentor(
            instrument=CProfiler(),
            instrument_kwargs={"out_dir": profile_dir, "print_kwargs": None},
            methods=["fit"],
        )
        # only one profiler may be active at a time, so nested solvers are skipped
        instrumentors.append((profiler, False))
    if not instrumentors:
        return None

    def instrument(solver: NOization):
        for instrumentor, recursive in instrumentors:
            instrumentor.instrument_instance(solver, recursive=recursive)

    return instrument


def cmd_run(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    outcome = run_experiment(
        cfg,
        output_dir=args.output_dir,
        seed_offset=args.seed_offset,
        # only one profiler may be active at a time
        n_jobs=1 if args.profile_dir else args.n_jobs,
        instrument=build_instrumentation(args.log_timings, args.profile_dir),
    )
    print(f"experiment: {cfg.name}")
    print(f"E0: {outcome.e0:.10f}")
    for run in outcome.runs:
        print(f"seed {run.seed} repeat {run.repeat}: {run.energy:.10f}")
    report = outcome.report
    print(f"err: {report.err:.6e}  var: {report.var:.6e}  merit: {report.merit:.6e}")
    print(f"artifacts: {outcome.artifacts['report'].parent}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg_a = ExperimentConfig.from_file(args.config_a)
    cfg_b = ExperimentConfig.from_file(args.config_b)
    table = compare_tradeoff(
        cfg_a,
        cfg_b,
        ratios=args.ratios,
        budgets=args.budgets,
        output_dir=resolve_output_dir(args.output_dir),
        seed_offset=args.seed_offset,
        n_jobs=args.n_jobs,
    )
    print(table.to_string(index=False))
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    spec = load_model(args.model)
    tensors = build_hubbard(spec)
    sector = spec.n_sites if args.sector is None else args.sector
    print(f"E0 (all sectors): {ground_energy(tensors):.10f}")
    print(f"E0 (N={sector}): {ground_energy(tensors, sector):.10f}")
    _, noons = exact_natural_orbitals(tensors, sector)
    print(f"NOONs: {np.array2string(noons, precision=8)}")
    return 0


def cmd_dump_hamiltonian(args: argparse.Namespace) -> int:
    hamiltonian = jordan_wigner(build_hubbard(load_model(args.model)))
    if args.json:
        print(hamiltonian.to_json())
        return 0
    for coefficient, string in hamiltonian.terms:
        print(f"{coefficient: .12f} {string.letters}")
    print(f"{hamiltonian.offset: .12f} {'I' * hamiltonian.m}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="novqe", description="NOization and NOA-VQE simulator"
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add_run_options(sub: argparse.ArgumentParser):
        sub.add_argument("--output-dir", default=None)
        sub.add_argument("--seed-offset", type=int, default=0)
        sub.add_argument("--n-jobs", type=int, default=None)

    run = commands.add_parser("run", help="run one experiment config")
    run.add_argument("config")
    add_run_options(run)
    run.add_argument("--log-timings", action="store_true")
    run.add_argument("--profile-dir", default=None)
    run.set_defaults(handler=cmd_run)

    compare = commands.add_parser("compare", help="merit versus noise ratio")
    compare.add_argument("config_a")
    compare.add_argument("config_b")
    compare.add_argument(
        "--ratios", type=float, nargs="+", default=list(DEFAULT_NOISE_RATIOS)
    )
    compare.add_argument("--budgets", type=_budget, nargs="+", default=None)
    add_run_options(compare)
    compare.set_defaults(handler=cmd_compare)

    oracle = commands.add_parser("oracle", help="exact ground energy and NOONs")
    oracle.add_argument("model")
    oracle.add_argument("--sector", type=int, default=None)
    oracle.set_defaults(handler=cmd_oracle)

    dump = commands.add_parser("dump-hamiltonian", help="print the Pauli terms")
    dump.add_argument("model")
    dump.add_argument("--json", action="store_true")
    dump.set_defaults(handler=cmd_dump_hamiltonian)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    logging.basicConfig(
        level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.handler(args)
    except (NovqeError, OSError) as e:
        logger.error(f"novqe {args.command} failed: {e}")
        return 1
