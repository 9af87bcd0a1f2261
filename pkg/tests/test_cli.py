import csv
import io
import json
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from tropiroots.cli import ExperimentSpec, main, rows_to_csv, run_experiment
from tropiroots.errors import InvalidInput
from tropiroots.poly import MatrixPolynomial, Polynomial, random_from_roots

from conftest import GRADED, GRADED_ROOTS


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def as_complex(pairs):
    return np.array([complex(a, b) for a, b in pairs])


def test_roots_quadratic(tmp_path):
    f = write_json(tmp_path / "p.json", Polynomial([-1, 0, 1]).to_json())
    code, text = run(["roots", f])
    assert code == 0
    r = as_complex(json.loads(text)["roots"])
    assert np.allclose(np.sort(r.real), [-1, 1], atol=1e-15)


def test_roots_graded_quartic_backerr(tmp_path):
    f = write_json(tmp_path / "graded.json", {"coeffs": GRADED})
    out_csv = tmp_path / "res.csv"
    code, text = run(["roots", f, "--backerr", "--assumption1", "--csv", str(out_csv)])
    assert code == 0
    obj = json.loads(text)
    assert obj["backward_error"]["eta_minmax"] <= 5e-15
    assert obj["assumption1"]["verdict"] == "pass"
    r = as_complex(obj["roots"])
    assert np.allclose(np.sort(r.real), np.sort(GRADED_ROOTS), rtol=5e-15, atol=0)
    rows = list(csv.reader(out_csv.open()))
    # header plus one row per coefficient p_0..p_4
    assert len(rows) == 1 + 5 and rows[0][0] == "i"


def test_roots_mu_opt(tmp_path):
    f = write_json(tmp_path / "p.json", {"coeffs": [2.0, -3.0, 1.0]})
    code, text = run(["roots", f, "--mu-opt"])
    assert code == 0
    assert json.loads(text)["backward_error"]["eta_minmax_opt"] is not None


@pytest.mark.parametrize("content", ["{not json", '{"coeffs": "abc"}', "[1, 2]", '{"coeffs": [0, 0]}',
                                     '{"coeffs": [1, 2, 0]}'])
def test_malformed_input_exit_1(tmp_path, capsys, content):
    f = tmp_path / "bad.json"
    f.write_text(content)
    code, text = run(["roots", str(f)])
    assert code == 1 and text == ""
    assert "tropiroots:" in capsys.readouterr().err


def test_missing_file_exit_1(tmp_path):
    code, text = run(["roots", str(tmp_path / "nope.json")])
    assert code == 1 and text == ""


def test_no_convergence_exit_2(tmp_path):
    p, _ = random_from_roots(50, (-20, 20), seed=0)
    f = write_json(tmp_path / "p.json", p.to_json())
    env = dict(os.environ, TROPIROOTS_MAXIT_FACTOR="1")
    proc = subprocess.run([sys.executable, "-m", "tropiroots", "roots", f], env=env,
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert proc.stdout == ""
    assert "converge" in proc.stderr


def test_polyeig_quadratic_identity(tmp_path):
    s = 3
    P = MatrixPolynomial(np.array([-np.eye(s), np.zeros((s, s)), np.eye(s)]))
    f = write_json(tmp_path / "P.json", P.to_json())
    code, text = run(["polyeig", f])
    assert code == 0
    obj = json.loads(text)
    e = np.sort(as_complex(obj["eigenvalues"]).real)
    assert np.allclose(e, [-1] * 3 + [1] * 3, atol=1e-14)
    assert obj["eta_pevp_max"] <= 100 * 2 * s * np.finfo(float).eps


def test_polyeig_scalar_matches_roots(tmp_path):
    p, _ = random_from_roots(8, (-3, 3), seed=4)
    f1 = write_json(tmp_path / "p.json", p.to_json())
    f2 = write_json(tmp_path / "P.json", MatrixPolynomial.from_scalar(p).to_json())
    a = np.sort_complex(as_complex(json.loads(run(["roots", f1])[1])["roots"]))
    b = np.sort_complex(as_complex(json.loads(run(["polyeig", f2, "--norm", "fro"])[1])["eigenvalues"]))
    assert np.all(np.abs(a - b) <= 1e-14 * np.abs(a))
    # a scalar file is accepted by polyeig as a 1x1 matrix polynomial
    c = np.sort_complex(as_complex(json.loads(run(["polyeig", f1])[1])["eigenvalues"]))
    assert np.all(np.abs(a - c) <= 1e-14 * np.abs(a))


def test_tropical_command(tmp_path):
    f = write_json(tmp_path / "graded.json", {"coeffs": GRADED})
    out_csv = tmp_path / "np.csv"
    code, text = run(["tropical", f, "--csv", str(out_csv)])
    assert code == 0
    obj = json.loads(text)
    assert obj["hull_indices"] == [0, 1, 3, 4]
    assert [r["multiplicity"] for r in obj["roots"]] == [1, 2, 1]
    assert np.allclose([r["log10_tau"] for r in obj["roots"]], [-30, -15, 0], atol=1e-12)
    assert out_csv.read_text().startswith("i,log10_abs_p,log10_hull,log10_gamma")


def test_backerr_command(tmp_path):
    f = write_json(tmp_path / "graded.json", {"coeffs": GRADED})
    roots = GRADED_ROOTS.copy()
    roots[0] *= 1 + 1.5e-9
    roots[1] *= 1 + 5.1e-2
    roots[2] *= 1 - 1.5e-9
    g = write_json(tmp_path / "r.json", {"roots": [[z, 0.0] for z in roots.tolist()]})
    code, text = run(["backerr", f, g])
    assert code == 0
    obj = json.loads(text)
    assert 1e-2 <= obj["eta_minmax"] <= 1e-1
    assert obj["eta_norm"] <= 1e-23
    # plain-number roots lists are accepted too
    h = write_json(tmp_path / "r2.json", roots.tolist())
    assert run(["backerr", f, h])[0] == 0
    bad = write_json(tmp_path / "r3.json", {"roots": [["x"]]})
    assert run(["backerr", f, bad]) == (1, "")


def test_experiment_zero_samples(tmp_path):
    code, text = run(["experiment", "--id", "1", "--samples", "0"])
    assert code == 0
    assert text == ",".join(ExperimentSpec(id=1, sample_count=0).fields()) + "\n"


def test_experiment_deterministic_and_parallel(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    base = ["experiment", "--id", "2", "--samples", "4", "--seed", "3", "--degree", "10"]
    assert run(base + ["--out", str(a)]) == (0, "")
    assert run(base + ["--out", str(b)])[0] == 0
    assert run(base + ["--out", str(c), "--jobs", "2"])[0] == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_experiment1_twenty_samples():
    spec = ExperimentSpec(id=1, sample_count=20, seed=1)
    rows = run_experiment(spec)
    assert len(rows) == 20
    assert [r["sample"] for r in rows] == list(range(20))
    assert all(r["status"] == "ok" for r in rows)
    assert max(r["eta_minmax"] for r in rows) <= 1e-13
    assert max(r["max_forward_err"] for r in rows) <= 1e-12
    text = rows_to_csv(spec, rows)
    assert len(text.strip().split("\n")) == 21


def test_experiment_optional_columns():
    spec = ExperimentSpec(id=4, sample_count=2, seed=5, assumption1=True, mu_opt=True, timing=True)
    fields = spec.fields()
    assert fields[-1] == "wall_time" and "a1_verdict" in fields and "eta_minmax_opt" in fields
    rows = list(csv.DictReader(io.StringIO(rows_to_csv(spec, run_experiment(spec)))))
    assert len(rows) == 2 and all(r["a1_verdict"] in ("pass", "fail") for r in rows)
    assert all(float(r["wall_time"]) > 0 for r in rows)


def test_experiment_pevp():
    spec = ExperimentSpec(id=6, sample_count=2, seed=0, size=3)
    rows = run_experiment(spec)
    assert all(r["status"] == "ok" and r["size"] == 3 and r["degree"] == 2 for r in rows)


def test_experiment_spec_validation():
    with pytest.raises(InvalidInput):
        ExperimentSpec(id=9, sample_count=1)
    with pytest.raises(InvalidInput):
        ExperimentSpec(id=1, sample_count=-1)
    with pytest.raises(InvalidInput):
        ExperimentSpec(id=1, sample_count=1, exponent_range=(3, -3))
    code, text = run(["experiment", "--samples", "-1"])
    assert code == 1 and text == ""


def test_console_script_and_module(tmp_path):
    f = write_json(tmp_path / "p.json", {"coeffs": [-1, 0, 1]})
    via_module = subprocess.run([sys.executable, "-m", "tropiroots", "roots", f],
                                capture_output=True, text=True)
    assert via_module.returncode == 0
    exe = shutil.which("tropiroots")
    if exe is None:
        pytest.skip("console script not on PATH")
    via_script = subprocess.run([exe, "roots", f], capture_output=True, text=True)
    assert via_script.returncode == 0 and via_script.stdout == via_module.stdout
