"""Declarative experiments: configs, pipelines, metrics and artifacts."""
import json
import logging
import os
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from enum import Enum
from pathlib import Path
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np
import pandas as pd
from joblib import Parallel
from joblib import delayed

from novqe.adapt import AdaptVQE
from novqe.ansatz import ANSATZE
from novqe.config import CSV_SCHEMA_VERSION
from novqe.config import DEFAULT_MAX_OPS
from novqe.config import DEFAULT_N_ITER
from novqe.config import DEFAULT_N_REPEATS
from novqe.config import DEFAULT_NOISE_RATIOS
from novqe.config import DEFAULT_OUTPUT_DIR
from novqe.config import OUTPUT_DIR_ENV
from novqe.exceptions import BudgetError
from novqe.exceptions import ConfigurationError
from novqe.exceptions import NovqeError
from novqe.hamiltonian import HubbardSpec
from novqe.hamiltonian import build_hubbard
from novqe.noization import RDM_MODES
from novqe.noization import NOization
from novqe.noization import NoizationTrace
from novqe.oracle import ground_energy
from novqe.simulator import NoiseModel
from novqe.simulator import sycamore_noise
from novqe.utils import spawn_seeds
from novqe.vqe import VQE
from novqe.vqe import ShotBudget

logger = logging.getLogger(__name__)


class Method(str, Enum):
    VQE = "vqe"
    NOIZATION = "noization"
    NOA_VQE = "noa-vqe"


@dataclass(frozen=True)
class NoiseSettings:
    """Depolarizing noise at ratio ``r`` of the reference device error rates."""

    enabled: bool = False
    r: float = 1.0

    def model(self) -> NoiseModel:
        if not self.enabled:
            return NoiseModel.noiseless()
        return sycamore_noise(self.r)


_CONFIG_KEYS = {
    "name",
    "description",
    "model",
    "method",
    "ansatz",
    "layers",
    "k_steps",
    "max_ops",
    "noise",
    "shots",
    "seeds",
    "repeats",
    "rdm_mode",
    "rdm_shots",
    "n_jobs",
}


def _typed(data: dict, key: str, kind: type, path: str, default=None):
    value = data.get(key, default)
    if value is None:
        return None
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, kind) or (kind is not bool and isinstance(value, bool)):
        raise ConfigurationError(
            f"{path}{key}: expected {kind.__name__}, got {type(value).__name__}"
        )
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """A complete, reproducible experiment.

    :param str name: experiment name, also the artifact sub-directory
    :param HubbardSpec model: lattice model
    :param Method method: ``vqe``, ``noization`` or ``noa-vqe``
    :param str ansatz: circuit family for ``vqe`` and ``noization``
    :param int layers: fSim layers or LDCA cycles
    :param int k_steps: natural-orbital steps (1 for ``vqe``)
    :param int max_ops: ADAPT operator budget, ``noa-vqe`` only
    :param NoiseSettings noise: noise settings
    :param ShotBudget shots: shot budget
    :param tuple seeds: base seeds, one procedure per seed and repeat
    :param int repeats: repetitions of the whole procedure per seed
    :param str rdm_mode: 1-RDM measurement mode
    :param int rdm_shots: shots per 1-RDM observable in sampled mode
    :param int n_jobs: joblib workers across runs
    """

    name: str
    model: HubbardSpec
    method: Method = Method.VQE
    ansatz: str = "ldca"
    layers: int = 1
    k_steps: int = 1
    max_ops: Optional[int] = None
    noise: NoiseSettings = field(default_factory=NoiseSettings)
    shots: ShotBudget = field(default_factory=ShotBudget)
    seeds: Tuple[int, ...] = (0,)
    repeats: int = 1
    rdm_mode: str = "exact"
    rdm_shots: Optional[int] = None
    n_jobs: Optional[int] = None
    description: str = ""

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", Method(self.method))
        except ValueError:
            raise ConfigurationError(
                f"method: expected one of {[m.value for m in Method]}, "
                f"got {self.method!r}"
            )
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.seeds:
            raise ConfigurationError("seeds: at least one seed is required")
        if any(s < 0 for s in self.seeds):
            raise ConfigurationError("seeds: seeds must be non-negative")
        if self.repeats < 1:
            raise ConfigurationError(f"repeats: must be positive, got {self.repeats}")
        if self.k_steps < 1:
            raise ConfigurationError(f"k_steps: must be positive, got {self.k_steps}")
        if self.method is Method.VQE and self.k_steps != 1:
            raise ConfigurationError("k_steps: direct VQE runs use a single step")
        if self.method is not Method.NOA_VQE and self.max_ops is not None:
            raise ConfigurationError("max_ops: only valid for the noa-vqe method")
        if self.method is not Method.NOA_VQE and self.ansatz not in ANSATZE:
            raise ConfigurationError(
                f"ansatz: expected one of {sorted(ANSATZE)}, got {self.ansatz!r}"
            )
        if self.rdm_mode not in RDM_MODES:
            raise ConfigurationError(
                f"rdm_mode: expected one of {RDM_MODES}, got {self.rdm_mode!r}"
            )
        if self.shots.k_steps != self.k_steps:
            raise ConfigurationError(
                f"shots.k_steps: {self.shots.k_steps} differs from k_steps "
                f"{self.k_steps}"
            )

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        """Parse a JSON-compatible tree, naming the offending field on error."""
        if not isinstance(data, dict):
            raise ConfigurationError("config: expected a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigurationError(f"config: unknown keys {sorted(unknown)}")
        if "model" not in data or "name" not in data:
            raise ConfigurationError("config: 'name' and 'model' are required")
        model = data["model"]
        if not isinstance(model, dict):
            raise ConfigurationError("model: expected an object")
        unknown = set(model) - {"n_sites", "t", "u", "mu", "geometry"}
        if unknown:
            raise ConfigurationError(f"model: unknown keys {sorted(unknown)}")
        spec = HubbardSpec.from_dict(
            {
                key: _typed(model, key, kind, "model.")
                for key, kind in (
                    ("n_sites", int),
                    ("t", float),
                    ("u", float),
                    ("mu", float),
                    ("geometry", str),
                )
                if key in model
            }
        )

        method = _typed(data, "method", str, "", "vqe")
        k_steps = _typed(data, "k_steps", int, "", 1)

        noise = data.get("noise", {}) or {}
        if not isinstance(noise, dict) or set(noise) - {"enabled", "r"}:
            raise ConfigurationError("noise: expected {'enabled': bool, 'r': float}")
        noise = NoiseSettings(
            enabled=_typed(noise, "enabled", bool, "noise.", False),
            r=_typed(noise, "r", float, "noise.", 1.0),
        )

        shots = data.get("shots", "exact")
        if shots == "exact" or shots is None:
            shots = {}
        if not isinstance(shots, dict):
            raise ConfigurationError("shots: expected 'exact' or an object")
        unknown = set(shots) - {"total", "n_iter", "n_repeats", "exact"}
        if unknown:
            raise ConfigurationError(f"shots: unknown keys {sorted(unknown)}")
        try:
            budget = ShotBudget(
                total=_typed(shots, "total", int, "shots."),
                n_iter=_typed(shots, "n_iter", int, "shots.", DEFAULT_N_ITER),
                n_repeats=_typed(shots, "n_repeats", int, "shots.", DEFAULT_N_REPEATS),
                k_steps=k_steps,
                exact=_typed(shots, "exact", bool, "shots.", False),
            )
        except BudgetError as e:
            raise ConfigurationError(f"shots: {e}")

        seeds = data.get("seeds", [0])
        if not isinstance(seeds, list) or not all(
            isinstance(s, int) and not isinstance(s, bool) for s in seeds
        ):
            raise ConfigurationError("seeds: expected a list of integers")

        max_ops = _typed(data, "max_ops", int, "")
        if method == Method.NOA_VQE.value and max_ops is None:
            max_ops = DEFAULT_MAX_OPS
        return cls(
            name=_typed(data, "name", str, ""),
            description=_typed(data, "description", str, "", ""),
            model=spec,
            method=method,
            ansatz=_typed(data, "ansatz", str, "", "ldca"),
            layers=_typed(data, "layers", int, "", 1),
            k_steps=k_steps,
            max_ops=max_ops,
            noise=noise,
            shots=budget,
            seeds=tuple(seeds),
            repeats=_typed(data, "repeats", int, "", 1),
            rdm_mode=_typed(data, "rdm_mode", str, "", "exact"),
            rdm_shots=_typed(data, "rdm_shots", int, ""),
            n_jobs=_typed(data, "n_jobs", int, ""),
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: invalid JSON ({e})")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        shots = self.shots.to_dict()
        shots.pop("k_steps")
        return {
            "name": self.name,
            "description": self.description,
            "model": self.model.to_dict(),
            "method": self.method.value,
            "ansatz": self.ansatz,
            "layers": self.layers,
            "k_steps": self.k_steps,
            "max_ops": self.max_ops,
            "noise": {"enabled": self.noise.enabled, "r": self.noise.r},
            "shots": shots,
            "seeds": list(self.seeds),
            "repeats": self.repeats,
            "rdm_mode": self.rdm_mode,
            "rdm_shots": self.rdm_shots,
            "n_jobs": self.n_jobs,
        }


@dataclass(frozen=True)
class MetricsReport:
    """Bias, variance and figure of merit of repeated runs, relative to ``e0``."""

    err: float
    var: float
    merit: float
    energies: Tuple[float, ...]
    e0: float

    @classmethod
    def from_energies(cls, energies: Sequence[float], e0: float) -> "MetricsReport":
        energies = np.asarray(energies, dtype=float)
        err = float(np.mean(np.abs(energies - e0)) / abs(e0))
        var = float(np.mean(((energies - energies.mean()) / e0) ** 2))
        return cls(err, var, float(np.sqrt(err ** 2 + var)), tuple(energies), e0)

    def to_dict(self) -> dict:
        return {
            "err": self.err,
            "var": self.var,
            "merit": self.merit,
            "energies": list(self.energies),
            "e0": self.e0,
        }


@dataclass
class RunRecord:
    seed: int
    repeat: int
    trace: NoizationTrace

    @property
    def energy(self) -> float:
        return self.trace.final_energy


@dataclass
class ExperimentOutcome:
    config: ExperimentConfig
    e0: float
    report: MetricsReport
    runs: List[RunRecord]
    artifacts: Dict[str, Path] = field(default_factory=dict)


def resolve_output_dir(output_dir: Optional[Union[str, Path]] = None) -> Path:
    """Flag, then ``NOVQE_OUTPUT_DIR``, then the default directory."""
    return Path(output_dir or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)


def build_solver(cfg: ExperimentConfig) -> NOization:
    noise = cfg.noise.model()
    if cfg.method is Method.NOA_VQE:
        solver = AdaptVQE(max_ops=cfg.max_ops, budget=cfg.shots, noise=noise)
    else:
        solver = VQE(cfg.ansatz, cfg.layers, cfg.shots, noise)
    return NOization(solver, cfg.k_steps, cfg.rdm_mode, cfg.rdm_shots)


def run_single(
    cfg: ExperimentConfig,
    seed: int,
    repeat: int,
    instrument: Optional[Callable[[NOization], None]] = None,
) -> RunRecord:
    """One repetition of the configured procedure."""
    tensors = build_hubbard(cfg.model)
    noizer = build_solver(cfg)
    noizer.set_params(random_state=spawn_seeds(seed, cfg.repeats)[repeat])
    if instrument is not None:
        instrument(noizer)
    logger.info(f"{cfg.name}: seed {seed}, repeat {repeat}")
    noizer.fit(tensors)
    return RunRecord(seed, repeat, noizer.trace_)


# region artifacts
def write_csv(df: pd.DataFrame, path: Path, kind: str) -> Path:
    """Write a CSV whose first line records the schema version."""
    with open(path, "w", newline="") as f:
        f.write(f"# novqe-csv schema={CSV_SCHEMA_VERSION} table={kind}\n")
        df.to_csv(f, index=False)
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def _tables(runs: List[RunRecord], e0: float) -> Dict[str, pd.DataFrame]:
    energies, norms, weights, orbitals, restarts = [], [], [], [], []
    for run in runs:
        key = {"seed": run.seed, "repeat": run.repeat}
        for s in run.trace.steps:
            row = dict(key, step=s.step)
            energies.append(
                dict(
                    row,
                    energy=s.energy,
                    reference_energy=s.reference_energy,
                    accepted=s.accepted,
                    e0=e0,
                )
            )
            norms.append(
                dict(
                    row,
                    one_norm=s.one_norm,
                    n_terms=s.n_terms,
                    entropy=s.entropy,
                    no_entropy=s.no_entropy,
                )
            )
            weights.extend(
                dict(row, rank=rank, weight=w) for rank, w in enumerate(s.weights)
            )
            v = s.natural_orbitals.v
            orbitals.extend(
                dict(
                    row,
                    orbital=i,
                    component=p,
                    real=v[p, i].real,
                    imag=v[p, i].imag,
                    noon=s.noons[i],
                )
                for i in range(v.shape[1])
                for p in range(v.shape[0])
            )
            restarts.extend(
                dict(row, restart=r, evaluation=e, energy=energy)
                for r, trace in enumerate(s.result.restart_traces)
                for e, energy in enumerate(trace)
            )
    return {
        "energies": pd.DataFrame(energies),
        "one_norm": pd.DataFrame(norms),
        "weights": pd.DataFrame(weights),
        "orbitals": pd.DataFrame(orbitals),
        "restarts": pd.DataFrame(restarts),
    }


def write_artifacts(outcome: ExperimentOutcome, output_dir: Path) -> Dict[str, Path]:
    directory = Path(output_dir) / outcome.config.name
    directory.mkdir(parents=True, exist_ok=True)
    artifacts = {}
    trace = {
        "config": outcome.config.to_dict(),
        "e0": outcome.e0,
        "runs": [
            {"seed": r.seed, "repeat": r.repeat, "trace": r.trace.to_dict()}
            for r in outcome.runs
        ],
    }
    artifacts["trace"] = directory / "trace.json"
    artifacts["trace"].write_text(json.dumps(trace, indent=1, sort_keys=True))
    artifacts["report"] = directory / "report.json"
    artifacts["report"].write_text(
        json.dumps(outcome.report.to_dict(), indent=1, sort_keys=True)
    )
    for kind, df in _tables(outcome.runs, outcome.e0).items():
        artifacts[kind] = write_csv(df, directory / f"{kind}.csv", kind)
    logger.info(f"Wrote {len(artifacts)} artifacts to {directory}")
    return artifacts


# endregion


def run_experiment(
    cfg: ExperimentConfig,
    output_dir: Optional[Union[str, Path]] = None,
    seed_offset: int = 0,
    n_jobs: Optional[int] = None,
    instrument: Optional[Callable[[NOization], None]] = None,
    write: bool = True,
) -> ExperimentOutcome:
    """Run every (seed, repeat) of ``cfg`` and aggregate the final energies.

    :param ExperimentConfig cfg: the experiment
    :param output_dir: artifact directory, resolved by :func:`resolve_output_dir`
    :param int seed_offset: added to every base seed
    :param int n_jobs: joblib workers, defaults to ``cfg.n_jobs``
    :param instrument: callback applied to each run's solver before fitting
    :param bool write: write JSON and CSV artifacts
    """
    e0 = ground_energy(build_hubbard(cfg.model))
    logger.info(f"{cfg.name}: exact ground energy {e0:.10f}")
    jobs = [(s + seed_offset, r) for s in cfg.seeds for r in range(cfg.repeats)]
    runs = Parallel(n_jobs=n_jobs or cfg.n_jobs, prefer="threads")(
        delayed(run_single)(cfg, seed, repeat, instrument) for seed, repeat in jobs
    )
    for run in runs:
        if run.energy < e0 - 1e-9 and cfg.shots.exact:
            raise NovqeError(
                f"{cfg.name}: run energy {run.energy} below the exact ground "
                f"energy {e0}"
            )
    report = MetricsReport.from_energies([r.energy for r in runs], e0)
    logger.info(
        f"{cfg.name}: err {report.err:.3e}, var {report.var:.3e}, "
        f"merit {report.merit:.3e}"
    )
    outcome = ExperimentOutcome(cfg, e0, report, list(runs))
    if write:
        outcome.artifacts = write_artifacts(outcome, resolve_output_dir(output_dir))
    return outcome


def compare_tradeoff(
    cfg_a: ExperimentConfig,
    cfg_b: ExperimentConfig,
    ratios: Optional[Sequence[float]] = None,
    budgets: Optional[Sequence[Optional[int]]] = None,
    output_dir: Optional[Union[str, Path]] = None,
    seed_offset: int = 0,
    n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """Figure of merit of two pipelines over noise ratios and shot budgets.

    A ratio of 0 disables noise.  Budgets default to each config's own total.

    :return: one row per (config, budget, ratio)
    :raises ConfigurationError: if the configs target different models
    """
    if cfg_a.model != cfg_b.model:
        raise ConfigurationError(
            f"Cannot compare {cfg_a.name} and {cfg_b.name}: models differ "
            f"({cfg_a.model} vs {cfg_b.model})"
        )
    ratios = list(DEFAULT_NOISE_RATIOS if ratios is None else ratios)
    rows = []
    for cfg in (cfg_a, cfg_b):
        for budget in budgets or [cfg.shots.total]:
            shots = replace(cfg.shots, total=budget, exact=budget is None)
            for r in ratios:
                noise = NoiseSettings(enabled=r > 0, r=r)
                variant = replace(cfg, noise=noise, shots=shots)
                outcome = run_experiment(
                    variant, seed_offset=seed_offset, n_jobs=n_jobs, write=False
                )
                rows.append(
                    {
                        "config": cfg.name,
                        "method": cfg.method.value,
                        "ansatz": cfg.ansatz,
                        "budget": budget,
                        "r": r,
                        "err": outcome.report.err,
                        "var": outcome.report.var,
                        "merit": outcome.report.merit,
                        "e0": outcome.e0,
                    }
                )
    table = pd.DataFrame(rows)
    if output_dir is not None:
        directory = Path(output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"tradeoff_{cfg_a.name}_vs_{cfg_b.name}.csv"
        write_csv(table, path, "tradeoff")
    return table
