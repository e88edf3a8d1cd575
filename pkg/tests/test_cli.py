import io
import json
import math
import subprocess
import sys

import pytest

from spikedbeta import cli


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_predict_json():
    code, out, _ = run(["predict", "--potential", "gaussian", "--a", "2", "--beta", "2", "--n", "200"])
    assert code == 0
    doc = json.loads(out)
    (c,) = doc["result"]["components"]
    assert c["location"] == pytest.approx(1.5, abs=1e-12)
    assert c["scale"] == pytest.approx(1 / (2 * math.sqrt(200)), rel=1e-12)
    assert doc["provenance"]["version"] and len(doc["provenance"]["config_hash"]) == 16


def test_predict_csv_table():
    code, out, _ = run(["predict", "--a", "2", "--n", "200", "--format", "csv"])
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    assert lines[0] == "x,cdf" and len(lines) == 202
    x, F = map(float, lines[101].split(","))
    assert x == pytest.approx(1.5, abs=1e-12) and F == pytest.approx(0.5, abs=1e-12)


def test_eqm_reference_quartic():
    code, out, _ = run(["eqm", "--potential", "reference-quartic"])
    res = json.loads(out)["result"]
    assert code == 0 and res["all_conditions_ok"]
    assert all(res["conditions"][f"cond{i}_ok"] for i in range(1, 5))


def test_phase_sweep_csv_is_byte_stable():
    argv = ["phase", "--coeffs", "0,0,1", "--a-min", "0.5", "--a-max", "3", "--a-count", "6", "--format", "csv"]
    code, first, _ = run(argv)
    assert code == 0 and run(argv)[1] == first
    rows = [l.split(",") for l in first.splitlines() if not l.startswith("#")][1:]
    assert [r[1] for r in rows] == ["Subcritical"] * 2 + ["SupercriticalUnique"] * 4
    assert float(rows[3][3]) == pytest.approx(1.5, abs=1e-12)


def test_sample_then_ks(tmp_path):
    path = tmp_path / "s.csv"
    code, _, _ = run(["sample", "--a", "2", "--n", "100", "--trials", "400", "--seed", "3", "--format", "csv",
                      "--out", str(path)])
    assert code == 0
    text = path.read_text()
    assert text.startswith("# config_hash:")
    code, out, _ = run(["ks", "--sample", str(path), "--n", "100", "--tol-ks", "0.1"])
    res = json.loads(out)["result"]
    assert code == 0 and res["D"] < 0.1
    code, out, _ = run(["ks", "--sample", str(path), "--tol-ks", "1e-6"])
    assert code == 2
    path2 = tmp_path / "t.csv"
    run(["sample", "--a", "2", "--n", "100", "--trials", "400", "--seed", "3", "--format", "csv", "--out", str(path2)])
    assert path2.read_bytes() == path.read_bytes()


def test_ks_reads_json_sample_like_csv(tmp_path):
    args = ["sample", "--a", "2", "--n", "40", "--trials", "100", "--seed", "5"]
    run(args + ["--format", "csv", "--out", str(tmp_path / "s.csv")])
    run(args + ["--out", str(tmp_path / "s.json")])
    D = [json.loads(run(["ks", "--sample", str(tmp_path / f), "--tol-ks", "1"])[1])["result"]["D"]
         for f in ("s.csv", "s.json")]
    assert D[0] == pytest.approx(D[1], abs=1e-15)


def test_config_file_and_flag_override(tmp_path):
    cfgp = tmp_path / "c.json"
    cfgp.write_text(json.dumps({"potential": "gaussian", "a": 3.0, "n": 100}))
    code, out, _ = run(["predict", "--config", str(cfgp)])
    assert json.loads(out)["result"]["components"][0]["location"] == pytest.approx(1.5 + 1 / 3)
    code, out, _ = run(["predict", "--config", str(cfgp), "--a", "2"])
    assert json.loads(out)["result"]["components"][0]["location"] == pytest.approx(1.5)


@pytest.mark.parametrize("argv", [
    ["predict", "--a", "2", "--beta", "0"],
    ["sample", "--a", "2", "--n", "10"],
    ["predict", "--coeffs", "0,0,-1", "--a", "2"],
    ["predict", "--a", "1"],
    ["phase", "--a-min", "1"],
    ["nonsense"],
    ["ks", "--sample", "/nonexistent.csv"],
    ["predict", "--a", "nan"],
])
def test_input_errors_exit_1(argv):
    code, out, err = run(argv)
    assert code == 1 and out == "" and err.startswith("input error")


def test_unknown_config_key(tmp_path):
    cfgp = tmp_path / "c.json"
    cfgp.write_text(json.dumps({"spike": 2}))
    assert run(["predict", "--config", str(cfgp)])[0] == 1


def test_verify_commands():
    code, out, _ = run(["verify-jack"])
    assert code == 0 and json.loads(out)["result"]["all_ok"]
    code, out, _ = run(["verify-appendix"])
    doc = json.loads(out)
    assert code == 0 and doc["all_passed"] and len(doc["reports"]) > 40


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "spikedbeta.cli", "predict", "--a", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and '"location": 1.5' in r.stdout
