import json
import subprocess
import sys

import pytest

from tumorbif import cli
from tumorbif.report import from_csv


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_stationary_json(capsys):
    code, out, _ = run(capsys, "stationary", "--beta", "1", "--sigma-tilde", "0.5", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    row = doc["rows"][0]
    assert set(row) == {"beta", "sigma_tilde", "gamma", "mu", "R", "residual", "derivs"}
    assert row["residual"] <= 1e-12
    assert set(row["derivs"]) >= {"sigma_s", "sigma_s_r", "p_s_rrr"}
    assert doc["meta"]["command"] == "stationary"


def test_stationary_csv_flattens(capsys):
    code, out, _ = run(capsys, "stationary", "--mu", "2.0")
    assert code == 0
    meta, rows = from_csv(out)
    assert rows[0]["mu"] == 2.0 and "derivs.sigma_s_r" in rows[0]
    assert meta["params"]["beta"] == 1.0


def test_invalid_sigma_exits_2(capsys):
    code, _, err = run(capsys, "stationary", "--sigma-tilde", "1.5")
    assert code == 2 and "error:" in err


@pytest.mark.parametrize("argv", [
    ["stationary", "--beta", "abc"],
    ["slope", "--grid", "beta=1;foo=2"],
    ["slope", "--grid", "beta=1:2"],
    ["slope", "--grid", "beta=1:2:0"],
    ["slope", "--grid", "beta"],
    ["bifurcation", "--n-max", "60"],
    ["certify", "--r-max", "25"],
    ["certify", "--inject-fault", "nonsense"],
    ["simulate", "--modes", "2,5=1"],
    ["simulate", "--modes", "bad"],
    ["simulate", "--t-samples", "1"],
    ["stationary", "--threads", "0"],
    ["stationary", "--config", "/nonexistent/file"],
])
def test_config_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["nosuch"])
    assert exc.value.code == 2


def test_parse_grid():
    g = cli.parse_grid("beta=0.1,1,10;sigma_tilde=0.1:0.9:0.1;R=0.25:1:0.25")
    assert g["beta"] == [0.1, 1.0, 10.0]
    assert g["sigma_tilde"] == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    assert g["R"] == [0.25, 0.5, 0.75, 1.0]
    assert cli.parse_grid(None) == {}


def test_config_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\nbeta = 3.0\nsigma-tilde = 0.4\nformat = json\n")
    _, out, _ = run(capsys, "stationary", "--config", str(conf), "--beta", "2.0")
    row = json.loads(out)["rows"][0]
    assert row["beta"] == 2.0 and row["sigma_tilde"] == 0.4


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("nonsense_key = 1\n")
    with pytest.raises(cli.ConfigError):
        cli.read_config_file(bad)
    bad.write_text("beta 1\n")
    with pytest.raises(cli.ConfigError):
        cli.read_config_file(bad)
    bad.write_text("format = xml\n")
    with pytest.raises(cli.ConfigError):
        cli.read_config_file(bad)


def test_bifurcation(capsys):
    code, out, _ = run(capsys, "bifurcation", "--n-max", "10", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["n"] for r in rows] == list(range(1, 11))
    assert rows[0]["mu_n"] is None and rows[0]["flag"] == "translation"
    assert rows[1]["flag"] == "bifurcation" and abs(rows[1]["lambda_n"]) <= 1e-12
    assert all(r["lambda_n"] < 0 for r in rows[2:])


def test_slope_single_point(capsys):
    code, out, _ = run(capsys, "slope", "--grid", "beta=1;sigma_tilde=0.5")
    assert code == 0
    _, rows = from_csv(out)
    assert len(rows) == 1
    assert rows[0]["slope"] < 0 and rows[0]["pass"] is True


def test_slope_threads_match(capsys):
    _, one, _ = run(capsys, "slope", "--threads", "1")
    _, many, _ = run(capsys, "slope", "--threads", "8")
    assert one == many
    assert len(from_csv(one)[1]) == 36


def test_table1(capsys):
    code, out, _ = run(capsys, "table1")
    assert code == 0
    rows = from_csv(out)[1]
    assert len(rows) == 14
    assert rows[3]["combined"] == 656308224


def test_certify_and_fault(capsys):
    code, out, _ = run(capsys, "certify")
    assert code == 0
    rows = from_csv(out)[1]
    assert {r["check"] for r in rows} == {"table1", "cancellation", "tail_bracket", "g1_series",
                                          "sweep", "sign_R"}
    assert all(r["pass"] for r in rows)
    code, out, _ = run(capsys, "certify", "--inject-fault", "table1")
    assert code == 1
    failed = [r for r in from_csv(out)[1] if not r["pass"]]
    assert failed and all(r["check"] in ("table1", "g1_series") for r in failed)


def test_byte_identical_reruns(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "certify", "--format", "json", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_files(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    code, stdout, _ = run(capsys, "simulate", "--out", str(out), "--method", "rk4")
    assert code == 0 and stdout == ""
    meta, rows = from_csv(out.read_text())
    assert meta["eps_axis"] == "first order in eps"
    assert list(rows[0]) == ["t", "n", "m", "amplitude"]
    assert {r["amplitude"] for r in rows if r["n"] == 1} == {1.0}
    stab = from_csv((tmp_path / "sim.stability.csv").read_text())[1]
    assert len(stab) == 21
    assert all(r["full_verdict"] == "unstable" for r in stab if r["eps"] != 0)
    verdicts = [r["axisym_verdict"] for r in stab]
    assert verdicts[:10] == ["stable"] * 10 and verdicts[10] == "neutral"


def test_simulate_json_and_seed(capsys):
    code, out, _ = run(capsys, "simulate", "--format", "json", "--seed", "7", "--n-max", "4")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["stability"]) == 21
    assert {(r["n"], r["m"]) for r in doc["rows"]} == {(n, m) for n in range(1, 5) for m in range(-n, n + 1)}
    _, again, _ = run(capsys, "simulate", "--format", "json", "--seed", "7", "--n-max", "4")
    assert again == out


def test_simulate_stiff_rk4_fails(capsys):
    code, _, err = run(capsys, "simulate", "--beta", "0.1", "--sigma-tilde", "0.9",
                       "--method", "rk4", "--modes", "16,0=1", "--n-max", "16")
    assert code == 1 and "exact" in err


def test_no_color(monkeypatch, capsys):
    monkeypatch.setenv("NO_COLOR", "1")
    _, _, err = run(capsys, "stationary", "--sigma-tilde", "2")
    assert "\033[" not in err


def test_figures(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    fig = tmp_path / "sim.png"
    assert run(capsys, "simulate", "--out", str(tmp_path / "s.csv"), "--figure", str(fig))[0] == 0
    assert fig.stat().st_size > 0 and (tmp_path / "sim.stability.png").stat().st_size > 0
    for cmd in ("slope", "bifurcation", "stationary", "certify"):
        path = tmp_path / f"{cmd}.png"
        assert run(capsys, cmd, "--out", str(tmp_path / f"{cmd}.csv"), "--figure", str(path))[0] == 0
        assert path.read_bytes()[:4] == b"\x89PNG"
    first = (tmp_path / "slope.png").read_bytes()
    run(capsys, "slope", "--out", str(tmp_path / "x.csv"), "--figure", str(tmp_path / "slope.png"))
    assert (tmp_path / "slope.png").read_bytes() == first


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tumorbif.cli", "table1", "--format", "json"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)["rows"]) == 14
