import io

import pytest

from isoscat.analysis import TOLERANCES
from isoscat.cli import ConfigError, RunConfig, main, parse_loss, parse_override, run
from isoscat.graph import BoundaryCondition, paper_graph
from isoscat.io import parse_graph
from isoscat.solver import ConstantLoss, Lossless, SqrtFrequencyLoss


# several commands below use deliberately coarse grids
pytestmark = pytest.mark.filterwarnings("ignore:adjacent det phases:RuntimeWarning")


def invoke(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def report_dict(text):
    return dict(line.split(" = ", 1) for line in text.strip().splitlines())


def test_parse_loss():
    assert parse_loss("lossless") == Lossless()
    assert parse_loss("constant:0.02") == ConstantLoss(0.02)
    assert parse_loss("sqrt:0.1,1.0") == SqrtFrequencyLoss(0.1, 1e9)
    for bad in ("lossy", "constant:x", "sqrt:1", "constant:-1"):
        with pytest.raises(ConfigError):
            parse_loss(bad)


def test_parse_override():
    ov = parse_override("5:dirichlet@b")
    assert (ov.vertex, ov.bc, ov.target) == (5, BoundaryCondition.DIRICHLET, "b")
    assert parse_override("3:neumann").target == "a"
    with pytest.raises(ConfigError):
        parse_override("five:dirichlet")


def test_run_config_invariants():
    with pytest.raises(ConfigError):
        RunConfig("sweep", ("paper-I",), nu_min=2e9, nu_max=1e9)
    with pytest.raises(ConfigError):
        RunConfig("sweep", ("paper-I",), points=1)
    with pytest.raises(ConfigError):
        RunConfig("plot", ("paper-I",))


def test_compare_isoscattering_pair():
    code, text = invoke("compare", "paper-I", "paper-II", "--points", "2048", "--loss", "lossless")
    assert code == 0
    rep = report_dict(text)
    assert rep["verdict_isoscattering"] == "true"
    assert rep["n_points"] == "2048"
    assert float(rep["tol_amp"]) == TOLERANCES["exact"].amplitude


def test_compare_broken_symmetry():
    code, text = invoke("compare", "paper-I", "paper-II", "--set-bc", "5:dirichlet@b")
    assert code == 2
    assert report_dict(text)["verdict_isoscattering"] == "false"


def test_override_on_lead_vertex_is_error():
    code, _ = invoke("compare", "paper-I", "paper-II", "--set-bc", "1:dirichlet@b")
    assert code == 1


def test_override_unknown_vertex_is_error():
    code, _ = invoke("sweep", "paper-I", "--set-bc", "9:dirichlet")
    assert code == 1


def test_missing_file(capsys):
    code, _ = invoke("sweep", "missing.json")
    assert code == 1
    assert "file not found: missing.json" in capsys.readouterr().err


def test_bad_arguments():
    assert invoke("sweep")[0] == 1
    assert invoke("frobnicate")[0] == 1
    assert invoke("sweep", "paper-I", "--loss", "bogus")[0] == 1


def test_transplant_command():
    code, text = invoke("transplant", "paper-I", "paper-II", "--points", "256", "--loss", "constant:0.02")
    assert code == 0
    rep = report_dict(text)
    assert float(rep["transplant_residual_max"]) < 1e-9
    code, _ = invoke("transplant", "paper-I", "paper-I", "--points", "64")
    assert code == 2


def test_experimental_preset():
    code, text = invoke("compare", "paper-I", "paper-II", "--points", "64", "--tol", "experimental")
    assert code == 0
    assert report_dict(text)["tol_phase"] == "0.05"


def test_sweep_command_writes_file(tmp_path):
    out = tmp_path / "s.csv"
    code, _ = invoke("sweep", "paper-I", "--fmin", "0.5", "--fmax", "1.0", "--points", "11", "-o", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 12
    assert float(lines[1].split(",")[0]) == 0.5e9


def test_sweep_from_file_path(tmp_path):
    path = tmp_path / "g.json"
    assert invoke("builtin", "paper-II", "-o", str(path))[0] == 0
    assert parse_graph(path.read_text()) == paper_graph("II")
    code, text = invoke("sweep", str(path), "--points", "5")
    assert code == 0 and len(text.splitlines()) == 6


def test_spectrum_command():
    code, text = invoke("spectrum", "paper-I", "--kmax", "12")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "k_per_m,multiplicity,residual"
    assert len(lines) == 1 + 4
    assert float(lines[1].split(",")[0]) == pytest.approx(1.92536, abs=1e-4)


def test_poles_command():
    code, text = invoke("poles", "paper-II", "--re", "0", "10", "--grid", "120", "40")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "re_k_per_m,im_k_per_m,residual"
    assert all(float(l.split(",")[1]) < 0 for l in lines[1:])
    assert len(lines) > 1


def test_run_directly():
    out = io.StringIO()
    assert run(RunConfig("builtin", ("paper-I",)), out) == 0
    assert parse_graph(out.getvalue()) == paper_graph("I")
