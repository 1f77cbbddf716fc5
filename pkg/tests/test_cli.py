import json
import math
import subprocess
import sys

import numpy as np
import pytest

from corrdecay import SpinSystem, certify, save_graph
from corrdecay.cli import main
from corrdecay.corpus import random_antiferro_system, random_connected_graph

from conftest import K2, P3, cycle


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, g in (("k2", K2), ("p3", P3), ("c6", cycle(6))):
        out[name] = str(tmp_path / f"{name}.txt")
        save_graph(g, out[name])
    return out


PARAMS = ["--beta", "0.5", "--gamma", "0.5", "--lambda", "1"]


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def fields(text):
    return dict(line.split(": ", 1) for line in text.splitlines() if ": " in line)


def test_exact_k2(capsys, files):
    code, out, _ = run(capsys, "exact", "--graph", files["k2"], *PARAMS)
    assert code == 0
    assert float(fields(out)["log_Z"]) == pytest.approx(math.log(3), abs=1e-15)


def test_malformed_graph_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2\n0 1\n1 1\n")
    code, _, err = run(capsys, "exact", "--graph", str(bad), *PARAMS)
    assert code == 1 and "bad.txt:3:" in err


def test_missing_params_exit_1(capsys, files):
    code, _, err = run(capsys, "exact", "--graph", files["k2"], "--beta", "0.5")
    assert code == 1


def test_cap_exit_2(capsys, tmp_path):
    p = tmp_path / "big.txt"
    save_graph(random_connected_graph(np.random.default_rng(0), 40, 4), p)
    code, _, err = run(capsys, "exact", "--graph", str(p), *PARAMS)
    assert code == 2 and "exceeds oracle cap" in err


def test_partition_vs_exact(capsys, files):
    code, out, _ = run(capsys, "partition", "--graph", files["p3"], *PARAMS, "--eps", "1e-3")
    assert code == 0
    hat = float(fields(out)["log_Z_hat"])
    _, out, _ = run(capsys, "exact", "--graph", files["p3"], *PARAMS)
    assert abs(math.expm1(hat - float(fields(out)["log_Z"]))) <= 1e-3


def test_certify_exit_3(capsys, files):
    args = ["certify", "--graph", files["c6"], "--beta", "0.2", "--gamma", "0.2", "--lambda", "1", "--arity", "2"]
    code, out, _ = run(capsys, *args)
    assert code == 3
    assert "[failure]" in out
    assert float(fields(out)["log_lambda_c"]) > 0


def test_partition_uncertified_exit_3(capsys, files):
    code, _, err = run(capsys, "partition", "--graph", files["c6"], "--beta", "0.2", "--gamma", "0.2",
                       "--lambda", "1", "--arity", "2")
    assert code == 3 and "vertex 0" in err


def test_ferro_exit_3(capsys, files):
    code, _, _ = run(capsys, "certify", "--graph", files["k2"], "--beta", "2", "--gamma", "2", "--lambda", "1")
    assert code == 3


def test_bad_eps_exit_1(capsys, files):
    code, _, _ = run(capsys, "partition", "--graph", files["k2"], *PARAMS, "--eps", "2")
    assert code == 1


def test_marginal(capsys, files):
    code, out, _ = run(capsys, "--format", "json-lines", "marginal", "--graph", files["p3"], *PARAMS,
                       "--vertex", "1", "--eps", "1e-4")
    rec = json.loads(out)
    assert code == 0 and rec["lo"] <= 0.5 + 1e-14 and rec["hi"] >= 0.5 - 1e-14
    code, out, _ = run(capsys, "marginal", "--graph", files["p3"], *PARAMS, "--vertex", "1", "--depth", "1")
    assert code == 0 and fields(out)["depth_used"] == "1"


def test_phase_csv(capsys, tmp_path):
    outp = tmp_path / "phase.csv"
    code, _, err = run(capsys, "--output", str(outp), "phase", "--d", "5", "--d", "13",
                       "--beta-grid", "0.01:0.99:0.005")
    assert code == 0
    lines = outp.read_text().splitlines()
    assert lines[0] == "d,beta,log_lambda_c" and len(lines) == 1 + 2 * 197
    crossings = [float(l.split("beta=")[1]) for l in err.splitlines() if "zero crossing" in l]
    assert crossings[0] == pytest.approx(2 / 3, abs=1e-6)
    assert crossings[1] == pytest.approx(6 / 7, abs=1e-6)


def test_decay_csv(capsys):
    code, out, _ = run(capsys, "decay", "--d", "2", "--beta", "0.5", "--lambda", "1", "--levels", "40")
    rows = out.splitlines()
    assert code == 0 and rows[0] == "level,q_plus_minus_gap,ratio"
    assert float(rows[-1].split(",")[2]) == pytest.approx(2 / 3, abs=1e-6)


def test_energy_flag(capsys, files):
    code, out, _ = run(capsys, "exact", "--graph", files["k2"], "--energy", "0", "0", "0", "0")
    f = fields(out)
    assert code == 0 and float(f["log_Z_energy"]) == pytest.approx(math.log(4))


def test_random_graph_seeded(capsys):
    _, a, _ = run(capsys, "random-graph", "--n", "9", "--seed", "4")
    _, b, _ = run(capsys, "random-graph", "--n", "9", "--seed", "4")
    _, c, _ = run(capsys, "random-graph", "--n", "9", "--seed", "5")
    assert a == b and a != c


def test_csv_format(capsys, files):
    code, out, _ = run(capsys, "--format", "csv", "exact", "--graph", files["k2"], *PARAMS)
    rows = out.splitlines()
    assert rows[0] == "n,m,log_Z" and rows[2] == "vertex,p"


def test_byte_identical_output(files):
    cmd = [sys.executable, "-m", "corrdecay.cli", "compare", "--graph", files["p3"], *PARAMS, "--eps", "1e-3"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and b"within_epsilon: True" in a


def test_compare_over_corpus(capsys, tmp_path):
    rng = np.random.default_rng(2024)
    done = 0
    while done < 15:
        g = random_connected_graph(rng, int(rng.integers(2, 11)), 4)
        s = random_antiferro_system(rng)
        if not certify(s, g).ok:
            continue
        p = tmp_path / f"g{done}.txt"
        save_graph(g, p)
        code, out, _ = run(capsys, "compare", "--graph", str(p), "--beta", repr(s.beta), "--gamma",
                           repr(s.gamma), "--lambda", repr(s.lam), "--eps", "1e-3")
        assert code == 0, out
        done += 1
