import csv
import io
import os
import subprocess
import sys

import pytest

from decoykit.channel import expected_tally
from decoykit.cli import main
from decoykit.io import TALLY_HEADER, parse_tally, read_config
from decoykit.optimize import evaluate

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs", "worked_example.cfg")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields(out):
    return dict(line.split(": ", 1) for line in out.splitlines() if ": " in line and not line.startswith("level"))


@pytest.fixture
def tally_file(tmp_path, capsys):
    path = tmp_path / "t.txt"
    assert run(capsys, "simulate", "--config", CONFIG, "--expected", "--out", str(path))[0] == 0
    return path


def test_simulate_expected_matches_library(tally_file):
    cfg = read_config(CONFIG)
    assert parse_tally(tally_file.read_text()) == expected_tally(cfg.protocol, cfg.params())


def test_rate_on_expected_tally(capsys, tally_file):
    code, out, _ = run(capsys, "rate", "--config", CONFIG, "--tally", str(tally_file))
    assert code == 0
    f = fields(out)
    cfg = read_config(CONFIG)
    rep = evaluate(cfg.protocol, cfg.params()).report
    assert float(f["key_length"]) == rep.key_length
    assert abs(float(f["rate"]) / 9.99621e-5 - 1) < 0.2
    assert f["confidence_bounds_applied"] == "12"
    assert "level 2: S=" in out


def test_rate_on_empty_tally_exits_2(capsys, tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text(TALLY_HEADER + "\n")
    code, out, _ = run(capsys, "rate", "--config", CONFIG, "--tally", str(path))
    assert code == 2
    assert float(fields(out)["key_length"]) == 0.0


def test_rate_on_bad_tally_exits_1(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text(TALLY_HEADER + "\n0 100 5 1\n1 100 5 6\n2 100 5 1\n")
    code, _, err = run(capsys, "rate", "--config", CONFIG, "--tally", str(path))
    assert code == 1
    assert "bad.txt:3:" in err


def test_rate_missing_file_exits_1(capsys, tmp_path):
    code, _, err = run(capsys, "rate", "--config", CONFIG, "--tally", str(tmp_path / "nope"))
    assert code == 1 and "error" in err


def test_sampled_simulation_is_deterministic(capsys):
    _, a, _ = run(capsys, "simulate", "--config", CONFIG, "--seed", "7")
    _, b, _ = run(capsys, "simulate", "--config", CONFIG, "--seed", "7")
    _, c, _ = run(capsys, "simulate", "--config", CONFIG, "--seed", "8")
    assert a == b != c
    assert a.startswith(TALLY_HEADER)


def test_uncertainty_and_q_flags_lower_rate(capsys, tally_file):
    base = float(fields(run(capsys, "rate", "--config", CONFIG, "--tally", str(tally_file))[1])["rate"])
    unc = run(capsys, "rate", "--config", CONFIG, "--tally", str(tally_file), "--intensity-uncertainty", "0.05")
    q = run(capsys, "rate", "--config", CONFIG, "--tally", str(tally_file), "--q-preset", "four-laser")
    assert float(fields(unc[1])["rate"]) < base
    assert float(fields(q[1])["rate"]) < base
    assert fields(q[1])["confidence_bounds_applied"] == "14"


def test_sweep_csv(capsys, tmp_path):
    out = tmp_path / "s.csv"
    args = ["sweep", "--config", CONFIG, "--vary", "loss_db", "--from", "10", "--to", "40", "--points", "7",
            "--out", str(out)]
    assert run(capsys, *args)[0] == 0
    first = out.read_bytes()
    rows = list(csv.reader(io.StringIO(first.decode())))
    assert rows[0][:3] == ["loss_db", "rate", "K"]
    assert len(rows) == 8
    rates = [float(r[1]) for r in rows[1:]]
    positive = [r for r in rates if r > 0]
    assert all(a > b for a, b in zip(positive, positive[1:]))
    assert rates[-1] == 0.0
    assert run(capsys, *args)[0] == 0
    assert out.read_bytes() == first


def test_sweep_single_point_matches_rate(capsys, tally_file):
    _, out, _ = run(capsys, "sweep", "--config", CONFIG, "--vary", "epsilon", "--from", "1e-7", "--to", "1e-7",
                    "--points", "1")
    rows = list(csv.reader(io.StringIO(out)))
    rate_out = fields(run(capsys, "rate", "--config", CONFIG, "--tally", str(tally_file))[1])
    assert float(rows[1][1]) == float(rate_out["rate"])


def test_sweep_rejects_unknown_key(capsys):
    code, _, err = run(capsys, "sweep", "--config", CONFIG, "--vary", "color", "--from", "0", "--to", "1")
    assert code == 1 and "--vary" in err


def test_optimize_writes_config(capsys, tmp_path):
    out = tmp_path / "best.cfg"
    code, stdout, _ = run(capsys, "optimize", "--config", CONFIG, "--starts", "2", "--max-evals", "150",
                          "--out", str(out))
    assert code == 0
    cfg = read_config(str(out))
    assert cfg.protocol.mus[0] == 0.0 and 0.5 < cfg.protocol.mus[2] < 0.8
    assert "rate =" in stdout


def test_detectors_csv(capsys):
    code, out, _ = run(capsys, "detectors", "--config", CONFIG, "--from", "20", "--to", "20", "--points", "1",
                       "--starts", "1", "--max-evals", "100")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["fiber_km", "snspd", "tes", "apd"]
    assert float(rows[1][0]) == 20.0 and all(float(v) > 0 for v in rows[1][1:])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "decoykit.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "decoykit" in res.stdout
