import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qwcrypt import __version__
from qwcrypt.cli import main
from qwcrypt.fock import haar_unitary, matrix_to_json
from qwcrypt.security import average_overlap, p_av


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def read_csv(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def metadata(path):
    return {ln[2:].split(":", 1)[0]: ln.split(":", 1)[1].strip()
            for ln in path.read_text().splitlines() if ln.startswith("# ")}


def test_simulate_hom(tmp_path):
    code, out = run(tmp_path, "simulate", "--m", "2", "--input", "11", "--unitary", "bs50")
    assert code == 0
    rows = {r["state"]: float(r["probability"]) for r in read_csv(out)}
    assert rows == {"20": pytest.approx(0.5), "02": pytest.approx(0.5), "11": pytest.approx(0.0, abs=1e-15)}
    meta = metadata(out)
    assert meta["command"] == "simulate" and meta["seed"] == "0"
    assert meta["version"] == f"qwcrypt {__version__}"
    assert json.loads(meta["config"])["unitary"] == "bs50"


def test_simulate_walk_t0(tmp_path):
    inp = "0" * 5 + "1" + "0" * 10
    code, out = run(tmp_path, "simulate", "--walk", "line8", "--coin", "hadamard", "--t", "0", "--input", inp)
    assert code == 0
    nonzero = [r for r in read_csv(out) if float(r["probability"]) > 0]
    assert nonzero == [{"state": inp, "probability": "1"}]


def test_simulate_samples_and_matrix_file(tmp_path):
    mat = tmp_path / "u.json"
    mat.write_text(json.dumps(matrix_to_json(haar_unitary(3, 2))))
    code, out = run(tmp_path, "simulate", "--input", "110", "--unitary", str(mat), "--samples", "500", "--seed", "4")
    assert code == 0
    rows = read_csv(out)
    assert sum(int(r["count"]) for r in rows) == 500


def test_missing_flag_is_validation_error(tmp_path):
    code, out = run(tmp_path, "simulate", "--m", "2", "--unitary", "bs50")
    assert code == 2 and not out.exists()
    code, out = run(tmp_path, "simulate", "--input", "11", "--unitary", "nonsense")
    assert code == 2 and not out.exists()
    assert main(["simulate", "--bogus"]) == 2
    assert main([]) == 2


def test_resource_cap_exit_code(tmp_path):
    code, out = run(tmp_path, "simulate", "--input", "111000", "--unitary", "haar:1", "--max-configs", "10")
    assert code == 3 and not out.exists()


def test_protocol_exact(tmp_path):
    code, out = run(tmp_path, "protocol", "--m", "3", "--d", "4", "--rounds", "exact", "--format", "json",
                    name="p.json")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["metadata"]["tv_distance"] < 1e-10
    assert doc["metadata"]["messages"] == 2
    assert len(doc["transcript"]["messages"]) == 2
    assert "key" in doc["transcript"]


def test_protocol_d1_key_zero(tmp_path):
    tpath = tmp_path / "t.json"
    code, out = run(tmp_path, "protocol", "--input", "10", "--d", "1", "--transcript", str(tpath))
    assert code == 0
    assert json.loads(tpath.read_text())["key"] == 0


def test_protocol_redact_key(tmp_path):
    tpath = tmp_path / "t.json"
    code, out = run(tmp_path, "protocol", "--input", "101", "--d", "8", "--redact-key", "--format", "json",
                    "--transcript", str(tpath), name="p.json")
    assert code == 0
    doc = json.loads(out.read_text())
    assert "key" not in doc["transcript"] and "key" not in doc["metadata"]
    assert "key" not in json.loads(tpath.read_text())


def test_protocol_sampled_rounds(tmp_path):
    code, out = run(tmp_path, "protocol", "--input", "11", "--unitary", "bs50", "--rounds", "200", "--d", "4")
    assert code == 0
    rows = {r["pattern"]: float(r["empirical_frequency"]) for r in read_csv(out)}
    assert rows["11"] == 0.0
    assert rows["20"] + rows["02"] == pytest.approx(1.0)
    assert main(["protocol", "--input", "11", "--rounds", "zero"]) == 2


def test_holevo(tmp_path):
    code, out = run(tmp_path, "holevo", "--m", "1", "--d", "64")
    assert code == 0 and float(read_csv(out)[0]["chi_exact"]) < 0.01
    code, out = run(tmp_path, "holevo", "--m", "4", "--d", "1")
    assert abs(float(read_csv(out)[0]["chi_exact"]) - 4.0) < 1e-10
    code, out = run(tmp_path, "holevo", "--m", "2", "--d", "256")
    assert float(read_csv(out)[0]["chi_exact"]) == pytest.approx(0.5, abs=0.01)
    code, out = run(tmp_path, "holevo", "--m", "11", "--d", "4", name="capped.csv")
    assert code == 3 and not out.exists()


def test_overlap(tmp_path):
    code, out = run(tmp_path, "overlap", "--d", "1024", "--m-max", "30")
    assert code == 0
    rows = read_csv(out)
    for m in range(1, 31):
        vals = [float(r["log_overlap"]) for r in rows if int(r["m"]) == m]
        assert int(np.argmin(vals)) in (m // 2, (m + 1) // 2)
    m1 = [float(r["log_overlap"]) for r in rows if r["m"] == "1"]
    assert m1[0] == pytest.approx(math.log(p_av(1, 1024)), abs=1e-9)
    assert m1[1] == pytest.approx(math.log(average_overlap(1, 1, 1024)), abs=1e-9)
    _, again = run(tmp_path, "overlap", "--d", "1024", "--m-max", "30", name="again.csv")
    assert out.read_bytes() == again.read_bytes()


def test_overlap_bad_range(tmp_path):
    code, out = run(tmp_path, "overlap", "--m-max", "0")
    assert code == 2 and not out.exists()


def test_regions(tmp_path):
    code, out = run(tmp_path, "regions", "--d-range", "1-8", "--m-range", "1-100", "--eps", "0.5,0.1,0.01")
    assert code == 0
    rows = read_csv(out)
    assert all(r["epsilon_class"] == "none" for r in rows if r["d"] == "1")
    d8 = [r for r in rows if r["d"] == "8"]
    assert abs(float(d8[-1]["p_av"]) - 0.125) < 1e-3
    rank = {"none": 0, "0.5": 1, "0.1": 2, "0.01": 3}
    for d in range(1, 9):
        classes = [rank[r["epsilon_class"]] for r in rows if r["d"] == str(d)]
        assert classes == sorted(classes)
    code, out = run(tmp_path, "regions", "--eps", "0.5,1.2", name="bad.csv")
    assert code == 2 and not out.exists()


def test_attack(tmp_path):
    code, out = run(tmp_path, "attack", "--m", "4", "--d", "16", "--trials", "1000000", "--seed", "7")
    assert code == 0
    row = read_csv(out)[0]
    p = p_av(4, 16)
    assert abs(float(row["exact_rate"]) - p) < 4 * math.sqrt(p * (1 - p) / 1e6)
    assert float(row["p_av"]) == pytest.approx(p)
    assert float(row["guess_bound"]) == pytest.approx(math.sqrt(8 / (math.pi * 4)))
    _, again = run(tmp_path, "attack", "--m", "4", "--d", "16", "--trials", "1000000", "--seed", "7",
                   "--threads", "3", name="again.csv")
    assert out.read_bytes() == again.read_bytes()
    code, out = run(tmp_path, "attack", "--m", "1", "--d", "9", "--trials", "1000", name="m1.csv")
    assert float(read_csv(out)[0]["complement_rate"]) == 1.0


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 3, "d": 8, "trials": 2000, "seed": 5}))
    code, out = run(tmp_path, "attack", "--config", str(cfg), "--d", "2")
    assert code == 0
    row = read_csv(out)[0]
    assert (row["m"], row["d"], row["trials"]) == ("3", "2", "2000")
    assert metadata(out)["seed"] == "5"
    cfg.write_text(json.dumps({"unknown_key": 1}))
    assert main(["attack", "--config", str(cfg)]) == 2


def test_json_format(tmp_path):
    code, out = run(tmp_path, "overlap", "--m-max", "2", "--d", "1", "--format", "json", name="o.json")
    doc = json.loads(out.read_text())
    assert doc["columns"] == ["m", "h", "log_overlap"]
    assert doc["rows"][1]["log_overlap"] == "-inf"
    assert doc["metadata"]["command"] == "overlap"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qwcrypt", "regions", "--eps", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "epsilon" in proc.stderr
