from novqe.instrumentor import SolverInstrumentor
from novqe.instruments.cprofile import CProfiler


def test_cprofiler(vqe_model, dimer_pauli, capsys):
    instrumentor = SolverInstrumentor(instrument=CProfiler())
    vqe_model.fit(dimer_pauli)
    cprofile_line = """Ordered by: standard name"""
    assert cprofile_line not in capsys.readouterr().out

    instrumentor.instrument_instance(vqe_model)
    vqe_model.fit(dimer_pauli)
    assert cprofile_line in capsys.readouterr().out

    instrumentor.uninstrument_instance(vqe_model)
    vqe_model.fit(dimer_pauli)
    assert cprofile_line not in capsys.readouterr().out


def test_cprofiler_dumps(vqe_model, dimer_pauli, tmp_path, capsys):
    profiler = CProfiler()
    instrumentor = SolverInstrumentor(
        instrument=profiler,
        instrument_kwargs={"out_dir": tmp_path / "stats", "print_kwargs": None},
    )
    instrumentor.instrument_instance(vqe_model)
    vqe_model.fit(dimer_pauli)
    vqe_model.fit(dimer_pauli)
    assert capsys.readouterr().out == ""
    dumps = sorted(p.name for p in (tmp_path / "stats").iterdir())
    assert dumps == ["0-0-VQE.fit.cprofile", "0-1-VQE.fit.cprofile"]
    profiler.reset()
    assert profiler.count == 0
