import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

import eofb.oracle
from eofb import __version__
from eofb.bounds import cdb_bound, wootters_concurrence
from eofb.cli import main
from eofb.io import MatrixFile, ensemble_header
from eofb.oracle import child_seed
from eofb.states import DensityMatrix, PureState, concurrence_pure, epsilon, random_density

from helpers import bell, projector, werner_matrix


def write(path, matrix, d, label=None):
    path.write_text(MatrixFile(d, np.asarray(matrix, dtype=complex), label).to_json())
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_bell(tmp_path, capsys):
    src = write(tmp_path / "bell.json", projector(bell()), 2, "bell")
    code, out, _ = run(capsys, "analyze", "--input", src)
    assert code == 0
    doc = json.loads(out)
    rep = doc["report"]
    assert rep["mode"] == "exact-two-qubit"
    assert rep["wootters_c"] == pytest.approx(1.0, abs=1e-12)
    assert rep["wootters_eof"] == pytest.approx(1.0, abs=1e-12)
    assert doc["tool_version"] == __version__ and doc["label"] == "bell"


def test_analyze_maximally_mixed_qutrit(tmp_path, capsys):
    src = write(tmp_path / "mixed.json", np.eye(6) / 6, 3)
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "analyze", "--input", src, "--out", out)
    assert code == 0
    rep = json.loads(out.read_text())["report"]
    assert rep["c_db"] == 0.0 and rep["eof_lower"] == 0.0


def test_analyze_is_pure_function_of_input(tmp_path, capsys):
    src = write(tmp_path / "r.json", random_density(3, 4, 2).matrix, 3)
    run(capsys, "analyze", "--input", src, "--out", tmp_path / "a.json")
    run(capsys, "analyze", "--input", src, "--out", tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    import hashlib

    doc = json.loads((tmp_path / "a.json").read_text())
    assert doc["input_sha256"] == hashlib.sha256((tmp_path / "r.json").read_bytes()).hexdigest()


def test_analyze_csv(tmp_path, capsys):
    src = write(tmp_path / "r.json", random_density(3, 2, 2).matrix, 3)
    code, out, _ = run(capsys, "analyze", "--input", src, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["c_db"]) == cdb_bound(random_density(3, 2, 2)).c_db


def test_analyze_non_hermitian(tmp_path, capsys):
    m = np.eye(4, dtype=complex) / 4
    m[0, 1] = 0.1
    src = write(tmp_path / "bad.json", m, 2)
    code, _, err = run(capsys, "analyze", "--input", src)
    assert code == 2 and "Hermiticity" in err


@pytest.mark.parametrize(
    "matrix,word",
    [
        (np.diag([0.7, 0.5, 0.1, -0.3]), "positive semidefiniteness"),
        (np.eye(4) / 2, "unit trace"),
    ],
)
def test_analyze_invalid_density(tmp_path, capsys, matrix, word):
    src = write(tmp_path / "bad.json", matrix, 2)
    code, _, err = run(capsys, "analyze", "--input", src)
    assert code == 2 and word in err


def test_analyze_tolerance_flag(tmp_path, capsys):
    m = np.diag([0.5, 0.5 + 1e-7, 0.0, -1e-7]).astype(complex)
    src = write(tmp_path / "near.json", m, 2)
    assert run(capsys, "analyze", "--input", src)[0] == 2
    assert run(capsys, "analyze", "--input", src, "--tol", "1e-6")[0] == 0


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"d": 2, "matrix": [[1]]}')
    code, _, err = run(capsys, "analyze", "--input", bad)
    assert code == 2 and "file format" in err


def test_io_errors(tmp_path, capsys):
    assert run(capsys, "analyze", "--input", tmp_path / "missing.json")[0] == 3
    src = write(tmp_path / "ok.json", np.eye(4) / 4, 2)
    assert run(capsys, "analyze", "--input", src, "--out", tmp_path / "no" / "dir" / "r.json")[0] == 3
    assert run(capsys, "random", "--d", 2, "--out", tmp_path / "no" / "r.json")[0] == 3


def test_random_rank_one(tmp_path, capsys):
    out = tmp_path / "pure.json"
    assert run(capsys, "random", "--d", 3, "--rank", 1, "--seed", 5, "--out", out)[0] == 0
    code, text, _ = run(capsys, "analyze", "--input", out)
    rep = json.loads(text)["report"]
    assert rep["mode"] == "lower-bound" and rep["rank"] == 1
    m = np.array([[complex(*z) for z in row] for row in json.loads(out.read_text())["matrix"]])
    w, v = np.linalg.eigh(m)
    psi = PureState.from_unnormalized(3, v[:, -1])
    assert rep["c_db"] == pytest.approx(concurrence_pure(psi), abs=1e-10)


def test_random_separable(tmp_path, capsys):
    out = tmp_path / "sep.json"
    assert run(capsys, "random", "--d", 3, "--separable", "--seed", 1, "--out", out)[0] == 0
    rep = json.loads(run(capsys, "analyze", "--input", out)[1])["report"]
    assert rep["c_db"] <= 1e-8


def test_random_deterministic(tmp_path, capsys, monkeypatch):
    for name in ("a", "b"):
        run(capsys, "random", "--d", 3, "--rank", 4, "--seed", 9, "--out", tmp_path / f"{name}.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    monkeypatch.setenv("EOFB_SEED", "9")
    run(capsys, "random", "--d", 3, "--rank", 4, "--out", tmp_path / "env.json")
    assert (tmp_path / "env.json").read_bytes() == (tmp_path / "a.json").read_bytes()
    run(capsys, "random", "--d", 3, "--rank", 4, "--seed", 10, "--out", tmp_path / "c.json")
    assert (tmp_path / "c.json").read_bytes() != (tmp_path / "a.json").read_bytes()


def test_bad_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("EOFB_SEED", "abc")
    assert run(capsys, "random", "--d", 2)[0] == 2


def test_random_bad_rank(capsys):
    code, _, err = run(capsys, "random", "--d", 3, "--rank", 7)
    assert code == 2 and "rank" in err


def test_verify_werner(tmp_path, capsys):
    src = write(tmp_path / "werner.json", werner_matrix(0.8), 2)
    code, out, _ = run(capsys, "verify", "--input", src, "--seed", 1)
    assert code == 0
    values = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(values["c_db"]) == pytest.approx(0.7, abs=1e-12)
    assert abs(float(values["attainment c_12"])) <= 1e-3
    assert abs(float(values["empirical_C"]) - 0.7) <= 1e-3


def test_verify_separable(tmp_path, capsys):
    out = tmp_path / "sep.json"
    run(capsys, "random", "--d", 3, "--separable", "--seed", 3, "--out", out)
    code, text, _ = run(capsys, "verify", "--input", out, "--budget", "quick", "--seed", 2)
    assert code == 0
    values = dict(line.split(" = ") for line in text.strip().splitlines())
    assert float(values["gap"]) >= 0
    assert "VIOLATION" not in text


def test_verify_detects_inflated_bound(tmp_path, capsys, monkeypatch):
    src = write(tmp_path / "r.json", random_density(3, 4, 1).matrix, 3)
    real = eofb.oracle.cdb_bound

    def inflated(rho, tol=1e-9):
        rep = real(rho, tol)
        return type(rep)(**{**rep.__dict__, "c_ij": tuple(c + 0.3 for c in rep.c_ij), "c_db": rep.c_db + 0.3})

    monkeypatch.setattr(eofb.oracle, "cdb_bound", inflated)
    code, out, _ = run(capsys, "verify", "--input", src, "--budget", "quick")
    assert code == 4 and "VIOLATION" in out


def test_verify_invalid_input(tmp_path, capsys):
    src = write(tmp_path / "bad.json", np.diag([0.7, 0.5, 0.1, -0.3]), 2)
    assert run(capsys, "verify", "--input", src)[0] == 2


def _ensemble(capsys, tmp_path, name, *flags):
    out = tmp_path / name
    code, _, _ = run(capsys, "ensemble", *flags, "--out", out)
    assert code == 0
    return out


def test_ensemble_pure_rows(tmp_path, capsys):
    out = _ensemble(capsys, tmp_path, "e.csv", "--d", 3, "--count", 10, "--rank", 1, "--seed", 4)
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 10
    for k, row in enumerate(rows):
        rho = random_density(3, 1, child_seed(4, k)).matrix
        psi = PureState.from_unnormalized(3, np.linalg.eigh(rho)[1][:, -1])
        assert int(row["index"]) == k and int(row["rank"]) == 1
        assert float(row["c_db"]) == pytest.approx(concurrence_pure(psi), abs=1e-10)
        assert float(row["eof_lower"]) == epsilon(float(row["c_db"]))
        assert row["empirical_c"] == "" and row["gap"] == ""


def test_ensemble_two_qubit_matches_wootters(tmp_path, capsys):
    out = _ensemble(capsys, tmp_path, "e.csv", "--d", 2, "--count", 10, "--seed", 6)
    rows = list(csv.DictReader(out.open()))
    for k, row in enumerate(rows):
        rho = random_density(2, 4, child_seed(6, k))
        assert float(row["c_db"]) == wootters_concurrence(rho)


def test_ensemble_byte_stable(tmp_path, capsys):
    flags = ("--d", 3, "--count", 6, "--rank", 3, "--seed", 2)
    a = _ensemble(capsys, tmp_path, "a.csv", *flags)
    b = _ensemble(capsys, tmp_path, "b.csv", *flags)
    c = _ensemble(capsys, tmp_path, "c.csv", *flags, "--workers", 2)
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    assert a.read_text().splitlines()[0] == ",".join(ensemble_header(3))


def test_ensemble_verify(tmp_path, capsys):
    flags = ("--d", 3, "--count", 3, "--rank", 2, "--seed", 1, "--verify")
    a = _ensemble(capsys, tmp_path, "a.csv", *flags)
    b = _ensemble(capsys, tmp_path, "b.csv", *flags, "--workers", 2)
    assert a.read_bytes() == b.read_bytes()
    for row in csv.DictReader(a.open()):
        assert float(row["gap"]) >= -1e-6
        assert float(row["empirical_c"]) == pytest.approx(float(row["c_db"]) + float(row["gap"]), abs=1e-15)


def test_ensemble_bad_count(capsys):
    assert run(capsys, "ensemble", "--d", 3, "--count", 0)[0] == 2
    assert run(capsys, "ensemble", "--d", 3, "--count", 2, "--rank", 9)[0] == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "eofb.cli", "random", "--d", "2", "--rank", "2", "--seed", "3"],
        capture_output=True,
        text=True,
        check=True,
    )
    mf = json.loads(out.stdout)
    m = np.array([[complex(*z) for z in row] for row in mf["matrix"]])
    assert DensityMatrix(2, m).rank() == 2
