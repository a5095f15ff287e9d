import json
import subprocess
import sys

import numpy as np
import pytest

from rblab import __version__
from rblab import channels as ch
from rblab import clifford as cl
from rblab.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


DEP = {"n": 1, "m_list": [1, 2, 4, 8, 16, 32], "K": 20, "shots": 50, "seed": 5,
       "noise": {"type": "depolarizing", "p": 0.97}}


# -- plan ---------------------------------------------------------------------------

def test_plan_defaults(capsys):
    code, out, _ = run(capsys, "plan")
    assert code == 0
    assert 7.0e4 <= json.loads(out)["k"] <= 7.5e4


def test_plan_eps_1e2(capsys):
    assert json.loads(run(capsys, "plan", "--eps", 1e-2)[1])["k"] == 738


def test_plan_delta_one(capsys):
    code, out, err = run(capsys, "plan", "--delta", 1)
    assert code == 0 and json.loads(out)["k"] == 0
    assert "k = 0" in err
    assert json.loads(out)["warnings"]


@pytest.mark.parametrize("argv", [("--eps", -1), ("--delta", 0), ("--a", 0.5, "--b", 0.2),
                                  ("--b", 1.5)])
def test_plan_invalid_is_usage(capsys, argv):
    code, out, err = run(capsys, "plan", *argv)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "usage"


# -- parser ----------------------------------------------------------------------------

def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["plan", "--eps", "abc"],
                                  ["simulate", "--config", "x.json"]])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err)["exit_code"] == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rblab.cli", "plan", "--eps", "0.01"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["k"] == 738


# -- cliffords ----------------------------------------------------------------------------

def test_sample_then_decompose(capsys):
    code, out, _ = run(capsys, "sample-clifford", "--n", 3, "--count", 4, "--seed", 9)
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 4
    for line in lines:
        code, out, _ = run(capsys, "decompose", "--n", 3, "--hex", line)
        rep = json.loads(out)
        gates = [cl.Gate.parse(s) for s in rep["gates"]]
        assert cl.sequence_element(gates, 3) == cl.from_hex(line, 3)


def test_sample_is_seeded(capsys):
    a = run(capsys, "sample-clifford", "--n", 2, "--count", 3, "--seed", 1)[1]
    b = run(capsys, "sample-clifford", "--n", 2, "--count", 3, "--seed", 1)[1]
    assert a == b


def test_decompose_bad_hex_is_contract(capsys):
    code, _, err = run(capsys, "decompose", "--n", 1, "--hex", "ff 0")
    assert code == 3 and json.loads(err)["error"] == "contract"


# -- simulate / fit ------------------------------------------------------------------------

def test_simulate_manifest_and_determinism(tmp_path, capsys):
    cfg = write(tmp_path / "cfg.json", DEP)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "simulate", "--config", cfg, "--out", a)[0] == 0
    assert run(capsys, "simulate", "--config", cfg, "--out", b, "--threads", 3)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "m,seq,survival,successes,shots"
    man = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert {"config_hash", "seed", "version", "started", "finished", "outputs"} <= set(man)
    assert man["seed"] == 5 and man["version"] == __version__
    man_b = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    assert man["config_hash"] == man_b["config_hash"]


def test_fit_pipeline(tmp_path, capsys):
    cfg = write(tmp_path / "cfg.json", DEP)
    data = tmp_path / "d.csv"
    run(capsys, "simulate", "--config", cfg, "--out", data)
    out = tmp_path / "fit.json"
    code, _, _ = run(capsys, "fit", "--data", data, "--model", "both", "--out", out)
    assert code == 0
    rep = json.loads(out.read_text())
    assert set(rep["fits"]) == {"zeroth", "first"}
    z = rep["fits"]["zeroth"]
    assert abs(z["params"]["p"] - 0.97) < 0.02
    assert z["r"] == pytest.approx((1 - z["params"]["p"]) / 2)
    assert len(z["curve"]["m"]) == len(z["curve"]["fidelity"]) > 10
    assert "gate_dependent" in rep["comparison"]
    # identical manifests reproduce identical fits
    out2 = tmp_path / "fit2.json"
    run(capsys, "fit", "--data", data, "--model", "both", "--out", out2)
    assert json.loads(out2.read_text())["fits"] == rep["fits"]


def test_fit_needs_n_without_manifest(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("m,seq,survival,successes,shots\n1,0,0.9,0,0\n2,0,0.8,0,0\n3,0,0.75,0,0\n")
    assert run(capsys, "fit", "--data", data)[0] == 2
    assert run(capsys, "fit", "--data", data, "--n", 1)[0] == 0


def test_fit_bad_csv_is_contract(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("a,b\n1,2\n")
    code, _, err = run(capsys, "fit", "--data", data, "--n", 1)
    assert code == 3


def test_fit_missing_file(capsys):
    assert run(capsys, "fit", "--data", "/nonexistent.csv", "--n", 1)[0] == 2


def test_simulate_malformed_config(tmp_path, capsys):
    cfg = write(tmp_path / "cfg.json", {"n": 1, "K": 2})
    code, _, err = run(capsys, "simulate", "--config", cfg, "--out", tmp_path / "x.csv")
    assert code == 3 and json.loads(err)["error"] == "contract"


def test_simulate_capacity(tmp_path, capsys):
    cfg = write(tmp_path / "cfg.json", dict(DEP, n=3, noise={"type": "custom", "channels": {}}))
    code, _, err = run(capsys, "simulate", "--config", cfg, "--out", tmp_path / "x.csv")
    assert code == 4 and json.loads(err)["error"] == "capacity"


# -- analyze ------------------------------------------------------------------------------

def _analyze(tmp_path, capsys, noise, m_list=(1, 2, 4, 8, 16, 32, 64)):
    cfg = write(tmp_path / "cfg.json", {"n": 1, "m_list": list(m_list), "K": 1, "noise": noise})
    code, out, _ = run(capsys, "analyze", "--config", cfg, "--restarts", 8)
    assert code == 0
    return json.loads(out)


def test_analyze_depolarizing(tmp_path, capsys):
    rep = _analyze(tmp_path, capsys, {"type": "depolarizing", "p": 0.99})
    assert rep["gamma"] == [0.0]
    assert all(rep["perturbation_bounds"][k] == 0 for k in "123")
    assert not rep["pathology"]["pathological"]
    assert rep["comparison"]["gate_dependent"] is False
    assert rep["flat_curve"]["class"] == "NOT_FLAT"


def test_analyze_pathology(tmp_path, capsys):
    rep = _analyze(tmp_path, capsys, {"type": "inverse_gate_pathology"})
    assert rep["gamma"][0] == pytest.approx(1.0, abs=1e-6)
    assert rep["pathology"]["pathological"]


def test_analyze_over_rotation(tmp_path, capsys):
    rep = _analyze(tmp_path, capsys, {"type": "gate_dependent_unitary", "angles": 0.1})
    assert abs(rep["q_minus_p2"]) > 1e-4
    assert rep["gamma"][0] > 0


def test_analyze_n3_capacity(tmp_path, capsys):
    cfg = write(tmp_path / "cfg.json", dict(DEP, n=3))
    assert run(capsys, "analyze", "--config", cfg)[0] == 4


# -- diamond ------------------------------------------------------------------------------

def test_diamond_pauli(tmp_path, capsys):
    a = write(tmp_path / "a.json", ch.channel_to_json(ch.depolarizing(1.0, 2), "pauli"))
    b = write(tmp_path / "b.json", ch.channel_to_json(ch.depolarizing(0.9, 2), "pauli"))
    code, out, _ = run(capsys, "diamond", "--a", a, "--b", b)
    rep = json.loads(out)
    assert code == 0
    assert rep["diamond"] == pytest.approx(0.15, abs=1e-12)
    assert rep["certificate"]["primal"] == pytest.approx(rep["certificate"]["dual"], abs=1e-10)
    assert rep["delta_F"] <= rep["one_one_H"] + 1e-6 <= rep["diamond"] + 2e-6


def test_diamond_non_pauli_is_contract(tmp_path, capsys):
    a = write(tmp_path / "a.json", ch.channel_to_json(ch.amplitude_damping(0.2)))
    b = write(tmp_path / "b.json", ch.channel_to_json(np.eye(4)))
    assert run(capsys, "diamond", "--a", a, "--b", b)[0] == 3
