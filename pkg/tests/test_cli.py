import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from localbounds.classical import heavy_tail_distribution
from localbounds.cli import CSV_COLUMNS, GIBBS_COLUMNS, VERIFY_COLUMNS, main
from localbounds.quantum import random_state
from localbounds.reports import BoundReport

LEVELS = '{"levels": [0, 1, 2]}'
P1 = '{"kind": "prob1", "probs": [0.2, 0.3, 0.5]}'
HD = '{"kind": "density", "spectrum": [0.9, 0.05, 0.05]}'


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def reports(text):
    return {r["bound_id"]: r for r in json.loads(text)["reports"]}


def test_energy_bound_example():
    code, out, _ = run("bound", P1, "-f", "energy", "--eps", "0.25", "--energy-spectrum", LEVELS)
    assert code == 0
    reps = reports(out)
    assert list(reps) == ["H-LB+c"]
    assert reps["H-LB+c"]["value"] == pytest.approx(0.55, abs=1e-12)


def test_density_entropy_example():
    code, out, _ = run("bound", HD, "-f", "entropy", "--eps", "0.1")
    assert code == 0
    reps = reports(out)
    assert {"B-lb-1", "B-lb-3+", "B-lb-3++"} <= set(reps)
    assert reps["B-lb-1"]["value"] == pytest.approx(0.0, abs=1e-12)


def test_support_violation_exit_3():
    omega = '{"kind": "density", "spectrum": [1.0, 0.0]}'
    code, _, err = run("bound", '{"kind": "density", "spectrum": [0.5, 0.5]}',
                       "-f", "relative-entropy", "--eps", "0.1", "--reference", omega)
    assert code == 3
    assert "relative entropy is +∞ on a neighborhood" in err


@pytest.mark.parametrize("argv", [
    ("bound", '{"kind": "prob1", "probs": [0.7, 0.7]}', "-f", "entropy", "--eps", "0.1"),
    ("bound", '{"kind": "prob1", "probs": "x"}', "-f", "entropy", "--eps", "0.1"),
    ("bound", '{"kind": "nope"}', "-f", "entropy", "--eps", "0.1"),
    ("bound", P1, "-f", "mi", "--eps", "0.1"),
    ("bound", P1, "-f", "entropy", "--eps", "1.5"),
    ("bound", P1, "-f", "entropy", "--eps", "0.1", "--bound", "XYZ"),
    ("curve", P1, "-f", "entropy", "--eps-grid", ""),
    ("bound", "{not json", "-f", "entropy", "--eps", "0.1"),
    ("bound", P1),
])
def test_schema_errors_exit_2(argv):
    code, _, err = run(*argv)
    assert code == 2


def test_schema_error_names_path():
    code, _, err = run("bound", '{"kind": "qc", "weights": [1], "states": [{"re": "x"}]}',
                       "-f", "qce", "--eps", "0.1")
    assert code == 2 and "$.states[0]" in err


def test_json_round_trip():
    rho = random_state(3, np.random.default_rng(0))
    doc = json.dumps({"kind": "density", "re": rho.matrix.real.tolist(), "im": rho.matrix.imag.tolist()})
    omega = json.dumps({"kind": "density", "spectrum": [0.5, 0.3, 0.2]})
    code, out, _ = run("bound", doc, "-f", "relative-entropy", "--eps", "0.05", "--d", "3",
                       "--reference", omega, "--energy-spectrum", LEVELS, "--energy", "1.5")
    assert code == 0
    for r in json.loads(out)["reports"]:
        rep = BoundReport.from_dict(r)
        assert abs(rep.recompute() - rep.raw_value) <= 1e-10
        assert r["value"] == max(0.0, r["raw_value"])


def test_csv_header_and_byte_stability():
    argv = ("curve", P1, "-f", "kl", "--eps-grid", "0.1,0.01,0.001", "--format", "csv",
            "--reference", '{"kind": "prob1", "probs": [0.3, 0.3, 0.4]}', "--d", "3")
    a, b = run(*argv)[1], run(*argv)[1]
    assert a == b
    rows = list(csv.reader(io.StringIO(a)))
    assert tuple(rows[0]) == CSV_COLUMNS
    eps_col = [float(r[0]) for r in rows[1:]]
    assert eps_col == sorted(eps_col)


def test_curve_faithful_on_finite_rank():
    code, out, _ = run("curve", '{"kind": "density", "spectrum": [0.6, 0.4, 0.0]}', "-f", "entropy",
                       "--eps-grid", "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6", "--bound", "B-lb-3++")
    rows = json.loads(out)["reports"]
    h = -(0.6 * math.log(0.6) + 0.4 * math.log(0.4))
    assert rows[0]["epsilon"] == 1e-6
    assert abs(rows[0]["value"] - h) < 1e-3


def test_curve_heavy_tail_increasing(tmp_path):
    p, _ = heavy_tail_distribution(10 ** 5)
    path = tmp_path / "tail.json"
    path.write_text(json.dumps({"kind": "prob1", "probs": p.entries.tolist(),
                                "tail_mass": p.tail_mass}))
    code, out, _ = run("curve", str(path), "-f", "entropy", "--eps-grid", "1e-2,1e-3,1e-4",
                       "--bound", "B-lb-3+c")
    vals = [r["value"] for r in json.loads(out)["reports"]]
    assert code == 0
    assert vals[2] < vals[1] < vals[0]


def test_verify_equality_input():
    code, out, _ = run("verify", HD, "-f", "entropy", "--eps", "0.1", "--seed", "1")
    rows = {r["bound_id"]: r for r in json.loads(out)["rows"]}
    assert code == 0 and all(r["sound"] for r in rows.values())
    assert rows["B-lb-1"]["slack"] <= 1e-6


def test_verify_energy_equality_csv():
    doc = '{"kind": "density", "spectrum": [0, 0, 0, 1, 0]}'
    code, out, _ = run("verify", doc, "-f", "energy", "--eps", "0.3", "--format", "csv",
                       "--energy-spectrum", '{"levels": [0, 1, 2, 3, 4]}')
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and tuple(rows[0]) == VERIFY_COLUMNS
    assert abs(float(rows[1][VERIFY_COLUMNS.index("slack")])) <= 1e-12


def test_verify_random_state_seed_7():
    rho = random_state(4, np.random.default_rng(7))
    doc = json.dumps({"kind": "density", "re": rho.matrix.real.tolist(), "im": rho.matrix.imag.tolist()})
    code, out, _ = run("verify", doc, "-f", "entropy", "--eps", "0.2", "--seed", "7",
                       "--budget", "5000")
    assert code == 0
    assert all(r["sound"] for r in json.loads(out)["rows"])


def test_verify_desk_scale_limit():
    doc = json.dumps({"kind": "prob1", "probs": [1 / 65] * 65})
    assert run("verify", doc, "-f", "entropy", "--eps", "0.1")[0] == 3


def test_gibbs_table():
    code, out, _ = run("gibbs", '{"family": "oscillator", "cap": 4000}', "--E", "1,0.5,3")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and tuple(rows[0]) == GIBBS_COLUMNS
    assert float(rows[1][2]) == pytest.approx(2 * math.log(2), abs=1e-8)
    code, out, _ = run("gibbs", '{"levels": [0, 1]}', "--E", "0.25", "--format", "json")
    row = json.loads(out)["rows"][0]
    assert row["beta"] == pytest.approx(math.log(3), abs=1e-9)


def test_gibbs_out_of_range():
    code, out, _ = run("gibbs", '{"levels": [0, 1]}', "--E", "0.25,-1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 3
    assert rows[1][4] == "" and rows[2][4] != ""


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "localbounds", "gibbs", '{"levels": [0, 1]}',
                           "--E", "0.25"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("E,beta,F")
