import json
import math

import pytest

from cliffordflow.cli import RunConfig, UsageError, fan_out, main, resolve_N_s, threads
from cliffordflow.geometry import A_CLOSED_FORMS


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def files(path):
    return {p.relative_to(path): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_areas_prefix(tmp_path, capsys):
    assert run(tmp_path, "areas", "--n-max", "7") == 0
    lines = (tmp_path / "areas.csv").read_text().splitlines()
    header = lines[0].split(",")
    ia = header.index("a")
    for line in lines[1:7]:
        cols = line.split(",")
        assert abs(float(cols[ia]) - A_CLOSED_FORMS[int(cols[0])]) < 1e-12
    report = json.loads((tmp_path / "appendix_report.json").read_text())
    assert report["pass"] is True
    assert (tmp_path / "areas.meta.json").exists()


def test_areas_usage_error(tmp_path, capsys):
    assert run(tmp_path, "areas", "--n-max", "1") == 2
    assert "usage error" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(tmp_path):
    assert run(tmp_path, "areas", "--bogus") == 2
    assert run(tmp_path, "critical", "--epsilon", "-0.1") == 2


def test_critical_resolution_warning(tmp_path, caplog):
    # eps = 0.5 is above the bifurcation of the Clifford state from u = 0 on S^3,
    # so only the guard is checked here, then Newton lands on a constant
    code = run(tmp_path, "critical", "--n", "2", "--epsilon", "0.5", "--N-s", "16")
    assert "raising N_s to 26" in caplog.text
    assert code == 3
    assert resolve_N_s("latitude_s", 0.5, 16, 512) == 26


def test_critical_outputs(tmp_path, capsys):
    assert run(tmp_path, "critical", "--n", "3", "--epsilon", "0.05") == 0
    d = json.loads((tmp_path / "clifford_state.json").read_text())
    assert abs(math.tan(d["nodal_points"][0]) ** 2 - 2) < 0.02
    assert d["meta"]["config"]["n"] == [3]
    assert (tmp_path / "clifford_state.meta.json").exists()


def test_spectrum_example(tmp_path, capsys):
    assert run(tmp_path, "spectrum", "--n", "2", "--epsilon", "0.05") == 0
    d = json.loads((tmp_path / "spectrum.json").read_text())
    assert d["morse_index"] == 5 and d["nullity"] == 4
    assert (tmp_path / "spectrum.csv").read_text().startswith("k,l,mult,j,eigenvalue")


def test_flow_small(tmp_path, capsys):
    args = ["flow", "--n", "2", "--epsilon", "0.2", "--N-s", "64", "--N-theta", "32", "--t-end", "3"]
    assert run(tmp_path, *args) == 0
    d = json.loads((tmp_path / "flow_trace.json").read_text())
    assert d["termination"] == "ConvergedPlusOne"
    assert any((tmp_path / "snapshots").iterdir())


def test_shoot_small(tmp_path, capsys):
    args = ["shoot", "--n", "2", "--epsilon", "0.2", "--N-s", "64", "--N-theta", "32", "--bisect-tol", "1e-3",
            "--t-horizon", "60"]
    assert run(tmp_path, *args) == 0
    out = capsys.readouterr().out
    assert "t* =" in out and "plateau energy" in out and "normalization time" in out
    d = json.loads((tmp_path / "shoot.json").read_text())
    assert d["endpoint_terminations"] == ["ConvergedMinusOne", "ConvergedPlusOne"]
    assert d["bracket"][1] - d["bracket"][0] <= 1e-3


@pytest.mark.parametrize("args", [
    ["areas", "--n-max", "9"],
    ["tmin", "--n", "2", "3", "4"],
    ["spectrum", "--n", "3", "--epsilon", "0.05"],
    ["sweep", "--task", "critical", "--n", "2", "--epsilon", "0.2", "0.1"],
])
def test_determinism(tmp_path, capsys, args):
    assert run(tmp_path, *args) == 0
    first = files(tmp_path)
    assert run(tmp_path, *args) == 0
    assert files(tmp_path) == first
    # every data file carries metadata
    for p in first:
        if p.suffix == ".csv":
            assert (tmp_path / p).with_name(p.stem + ".meta.json").exists()
        elif p.suffix == ".json" and not p.name.endswith(".meta.json"):
            assert "meta" in json.loads((tmp_path / p).read_text())


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('n = [3]\nepsilon = [0.05]\nk_max = 4\n')
    out = tmp_path / "o"
    assert main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
    d = json.loads((out / "spectrum.json").read_text())
    assert d["n"] == 3 and d["meta"]["config"]["k_max"] == 4
    assert main(["spectrum", "--config", str(cfg), "--n", "2", "--out", str(out)]) == 0
    assert json.loads((out / "spectrum.json").read_text())["n"] == 2


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("colour = 3\n")
    assert main(["areas", "--config", str(bad)]) == 2
    bad.write_text("n = [\n")
    assert main(["areas", "--config", str(bad)]) == 2
    assert main(["areas", "--config", str(tmp_path / "missing.toml")]) == 5


def test_io_error_exit(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["areas", "--n-max", "7", "--out", str(blocker / "sub")]) == 5


def test_sweep_requires_known_task(tmp_path, capsys):
    assert run(tmp_path, "sweep", "--task", "nope") == 2


def test_runconfig_validation():
    with pytest.raises(UsageError):
        RunConfig(epsilon=[0.0]).validate()
    with pytest.raises(UsageError):
        RunConfig(bisect_tol=-1.0).validate()
    RunConfig().validate()


def test_fan_out_order(monkeypatch):
    monkeypatch.setenv("CLIFFORDFLOW_THREADS", "3")
    assert threads() == 3
    assert fan_out(lambda x: x * x, list(range(10))) == [x * x for x in range(10)]
    monkeypatch.setenv("CLIFFORDFLOW_THREADS", "many")
    with pytest.raises(UsageError):
        threads()
