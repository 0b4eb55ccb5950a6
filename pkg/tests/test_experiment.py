import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from novqe.adapt import AdaptVQE
from novqe.config import DEFAULT_NOISE_RATIOS
from novqe.config import OUTPUT_DIR_ENV
from novqe.exceptions import ConfigurationError
from novqe.experiment import ExperimentConfig
from novqe.experiment import Method
from novqe.experiment import MetricsReport
from novqe.experiment import build_solver
from novqe.experiment import compare_tradeoff
from novqe.experiment import read_csv
from novqe.experiment import resolve_output_dir
from novqe.experiment import run_experiment
from novqe.hamiltonian import HubbardSpec
from novqe.vqe import VQE

EXPERIMENTS = Path(__file__).parent.parent / "experiments"


def _config(**overrides) -> dict:
    data = {"name": "x", "model": {"n_sites": 2}, "method": "noization"}
    data.update(overrides)
    return data


@pytest.mark.parametrize(
    "overrides, message",
    [
        ({"model": {"n_sites": "two"}}, "model.n_sites: expected int, got str"),
        ({"model": {"n_sites": 3}}, "n_sites"),
        ({"model": {"n_sites": 2, "v": 1}}, "model: unknown keys"),
        ({"method": "qpe"}, "method"),
        ({"ansatz": "uccsd"}, "ansatz"),
        ({"k_steps": 0}, "k_steps"),
        ({"method": "vqe", "k_steps": 2}, "k_steps"),
        ({"max_ops": 3}, "max_ops"),
        ({"seeds": []}, "seeds"),
        ({"seeds": [-1]}, "seeds"),
        ({"seeds": "0"}, "seeds"),
        ({"repeats": 0}, "repeats"),
        ({"rdm_mode": "shadow"}, "rdm_mode"),
        ({"noise": {"enabled": "yes"}}, "noise.enabled: expected bool"),
        ({"shots": {"total": "many"}}, "shots.total: expected int"),
        ({"shots": {"budget": 1}}, "shots: unknown keys"),
        ({"shots": 5}, "shots"),
        ({"extra": 1}, "config: unknown keys"),
    ],
)
def test_config_errors(overrides, message):
    with pytest.raises(ConfigurationError, match=message):
        ExperimentConfig.from_dict(_config(**overrides))


def test_config_requires_name_and_model():
    with pytest.raises(ConfigurationError, match="required"):
        ExperimentConfig.from_dict({"name": "x"})
    with pytest.raises(ConfigurationError, match="JSON object"):
        ExperimentConfig.from_dict([])


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    with pytest.raises(ConfigurationError, match="invalid JSON"):
        ExperimentConfig.from_file(path)


def test_config_defaults():
    cfg = ExperimentConfig.from_dict(_config())
    assert cfg.method is Method.NOIZATION
    assert cfg.ansatz == "ldca"
    assert cfg.seeds == (0,)
    assert cfg.shots.exact
    assert not cfg.noise.model().enabled
    assert cfg.model == HubbardSpec(n_sites=2)
    noa = ExperimentConfig.from_dict(_config(method="noa-vqe", k_steps=5))
    assert noa.max_ops == 10
    assert noa.shots.k_steps == 5


def test_config_round_trip():
    cfg = ExperimentConfig.from_dict(
        _config(shots={"total": 1_000_000, "n_iter": 100, "n_repeats": 2}, k_steps=2)
    )
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


@pytest.mark.parametrize("path", sorted(EXPERIMENTS.glob("*.json")), ids=str)
def test_shipped_configs_parse(path):
    cfg = ExperimentConfig.from_file(path)
    assert cfg.name == path.stem
    build_solver(cfg)


def test_tradeoff_configs():
    vqe = ExperimentConfig.from_file(EXPERIMENTS / "tradeoff_dimer_ldca_vqe.json")
    noization = ExperimentConfig.from_file(
        EXPERIMENTS / "tradeoff_dimer_fsim_noization.json"
    )
    assert vqe.shots.shots_per_evaluation() == 10_000
    assert noization.shots.shots_per_evaluation() == 3333
    assert vqe.model == noization.model
    assert vqe.noise.model() == noization.noise.model()


def test_build_solver():
    cfg = ExperimentConfig.from_dict(_config(method="noa-vqe", k_steps=5, max_ops=4))
    noizer = build_solver(cfg)
    assert isinstance(noizer.solver, AdaptVQE)
    assert noizer.solver.max_ops == 4
    assert noizer.n_steps == 5
    cfg = ExperimentConfig.from_dict(_config(ansatz="fsim", layers=2))
    assert isinstance(build_solver(cfg).solver, VQE)
    assert build_solver(cfg).solver.layers == 2


def test_metrics_report():
    report = MetricsReport.from_energies([-1.9, -2.1], -2.0)
    assert report.err == pytest.approx(0.05)
    assert report.var == pytest.approx(0.0025)
    assert report.merit == pytest.approx(np.sqrt(0.05 ** 2 + 0.0025))
    single = MetricsReport.from_energies([-1.5], -2.0)
    assert single.var == 0.0
    assert single.err == pytest.approx(0.25)
    assert single.merit == pytest.approx(single.err)
    exact = MetricsReport.from_energies([-2.0, -2.0], -2.0)
    assert exact.merit == 0.0


def test_run_experiment(tiny_config, tmp_path):
    cfg = ExperimentConfig.from_file(tiny_config)
    outcome = run_experiment(cfg, output_dir=tmp_path)
    assert len(outcome.runs) == 2
    assert outcome.e0 == pytest.approx(-2.5615528128088303, abs=1e-9)
    assert all(r.energy >= outcome.e0 - 1e-9 for r in outcome.runs)
    assert outcome.report.energies == tuple(r.energy for r in outcome.runs)

    directory = tmp_path / "tiny"
    assert outcome.artifacts["report"] == directory / "report.json"
    report = json.loads((directory / "report.json").read_text())
    assert report["merit"] == pytest.approx(outcome.report.merit)

    header = (directory / "energies.csv").read_text().splitlines()[0]
    assert header == "# novqe-csv schema=2 table=energies"
    energies = read_csv(directory / "energies.csv")
    assert list(energies.columns) == [
        "seed",
        "repeat",
        "step",
        "energy",
        "reference_energy",
        "accepted",
        "e0",
    ]
    assert len(energies) == 4
    orbitals = read_csv(directory / "orbitals.csv")
    assert len(orbitals) == 4 * 16
    assert {"one_norm", "n_terms", "entropy", "no_entropy"} <= set(
        read_csv(directory / "one_norm.csv").columns
    )
    assert (directory / "weights.csv").exists()
    assert (directory / "restarts.csv").exists()


def test_artifacts_are_reproducible(tiny_config, tmp_path):
    cfg = ExperimentConfig.from_file(tiny_config)
    run_experiment(cfg, output_dir=tmp_path / "a")
    run_experiment(cfg, output_dir=tmp_path / "b", n_jobs=2)
    for name in ("trace.json", "report.json", "energies.csv"):
        first = (tmp_path / "a" / "tiny" / name).read_bytes()
        assert first == (tmp_path / "b" / "tiny" / name).read_bytes()


def test_seed_offset_changes_runs(tiny_config):
    cfg = ExperimentConfig.from_file(tiny_config)
    base = run_experiment(cfg, write=False)
    shifted = run_experiment(cfg, seed_offset=10, write=False)
    assert [r.seed for r in shifted.runs] == [10, 11]
    assert not base.artifacts
    assert base.report.energies != shifted.report.energies


def test_output_dir_resolution(monkeypatch, tmp_path):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    assert resolve_output_dir().name == "novqe-output"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert resolve_output_dir() == tmp_path / "env"
    assert resolve_output_dir(tmp_path / "flag") == tmp_path / "flag"


def test_run_experiment_uses_the_environment(tiny_config, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    run_experiment(ExperimentConfig.from_file(tiny_config))
    assert (tmp_path / "tiny" / "trace.json").exists()


def test_compare_tradeoff(tiny_config, tmp_path):
    cfg_a = ExperimentConfig.from_file(tiny_config)
    cfg_b = replace(cfg_a, name="tiny_fsim", ansatz="fsim")
    table = compare_tradeoff(cfg_a, cfg_b, ratios=[0, 0.1], output_dir=tmp_path)
    assert len(table) == 4
    assert list(table.columns) == [
        "config",
        "method",
        "ansatz",
        "budget",
        "r",
        "err",
        "var",
        "merit",
        "e0",
    ]
    assert table["config"].tolist() == ["tiny", "tiny", "tiny_fsim", "tiny_fsim"]
    assert (table["merit"] >= 0).all()
    stored = read_csv(tmp_path / "tradeoff_tiny_vs_tiny_fsim.csv")
    assert len(stored) == 4


def test_compare_tradeoff_rejects_different_models(tiny_config):
    cfg_a = ExperimentConfig.from_file(tiny_config)
    cfg_b = replace(cfg_a, name="other", model=HubbardSpec(n_sites=2, u=4.0))
    with pytest.raises(ConfigurationError, match="models differ"):
        compare_tradeoff(cfg_a, cfg_b, ratios=[0])


@pytest.mark.slow
def test_noization_tradeoff_trend():
    ldca = ExperimentConfig.from_file(EXPERIMENTS / "tradeoff_dimer_ldca_vqe.json")
    fsim = ExperimentConfig.from_file(
        EXPERIMENTS / "tradeoff_dimer_fsim_noization.json"
    )
    assert ldca.shots.total == fsim.shots.total == 50_000_000
    assert ldca.repeats == fsim.repeats == 10
    table = compare_tradeoff(fsim, ldca)
    merit = table.pivot(index="r", columns="config", values="merit")
    assert merit.index.tolist() == list(DEFAULT_NOISE_RATIOS)
    assert (merit[fsim.name] <= merit[ldca.name]).all()
    assert merit.loc[1.0, ldca.name] >= 2 * merit.loc[0.01, ldca.name]
