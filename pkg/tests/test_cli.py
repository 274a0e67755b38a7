import json

import numpy as np
import pytest

from hardyrank import bidisc
from hardyrank.cli import main
from hardyrank.rank_engine import random_tilted


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_certify_rank_two(capsys):
    code, out, _ = run(capsys, "certify", "--phi-zeros", "0", "--psi-zeros", "0", "--n", "16", "--trials", "10")
    assert code == 0
    assert json.loads(out)["verdict"] == "rank_eq_2"


def test_certify_trivial_phi(capsys):
    code, out, _ = run(capsys, "certify", "--phi-zeros", "", "--psi-zeros", "0", "--n", "16")
    assert code == 0
    assert json.loads(out)["verdict"] == "rank_eq_1"


def test_certify_inconclusive_exit_code(capsys):
    code, out, _ = run(capsys, "certify", "--phi-zeros", "0.5", "--n", "24", "--tol", "1e-30", "--trials", "3")
    assert code == 2
    assert json.loads(out)["verdict"] == "inconclusive"


@pytest.mark.parametrize(
    "argv,needle",
    [
        (["--phi-zeros", "0.95"], "margin"),
        (["--phi-zeros", "0.5;abc"], "malformed"),
        (["--phi-const", "2"], "rejected"),
        (["--n", "9"], "too small"),
        (["--tol", "0"], "--tol"),
        (["--trials", "0"], "--trials"),
    ],
)
def test_input_errors(capsys, argv, needle):
    code, _, err = run(capsys, "certify", *argv)
    assert code == 1
    assert needle in err


def test_certify_writes_out_file(capsys, tmp_path):
    target = tmp_path / "cert.json"
    code, out, _ = run(capsys, "certify", "--n", "12", "--buffer", "4", "--trials", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["n"] == 12


def _write_xi(path, a, b):
    pairs = lambda m: [[[float(c.real), float(c.imag)] for c in row] for row in np.atleast_2d(m)]  # noqa: E731
    path.write_text(json.dumps({"A": pairs(a), "B": pairs(b)}))
    return str(path)


def test_witness_hand_example(capsys, tmp_path):
    xi = _write_xi(tmp_path / "xi.json", np.array([[1.0]]), np.array([[2j]]))
    code, out, _ = run(capsys, "witness", "--xi", xi, "--n", "16")
    assert code == 0
    doc = json.loads(out)
    assert doc["eta"]["A"] == [[[0, -2]]]
    assert doc["eta"]["B"] == [[[-1, 0]]]
    assert doc["pairing_max"] < 1e-12


def test_witness_random_degree_two(capsys, tmp_path):
    x = random_tilted(2, 2, 0, 0)
    xi = _write_xi(tmp_path / "xi.json", x.A, x.B)
    code, out, _ = run(capsys, "witness", "--xi", xi, "--phi-zeros", "0.5;-0.3", "--psi-zeros", "0.2i;0.4")
    assert code == 0
    doc = json.loads(out)
    assert doc["pairing_max"] < 1e-10
    assert abs(doc["eta_norm"] - doc["xi_norm"]) < 1e-10


def test_witness_errors(capsys, tmp_path):
    zero = _write_xi(tmp_path / "zero.json", np.zeros((1, 1)), np.zeros((1, 1)))
    code, _, err = run(capsys, "witness", "--xi", zero, "--n", "16")
    assert code == 1 and "zero-input" in err
    code, _, err = run(capsys, "witness", "--xi", zero, "--n", "16", "--phi-zeros", "0;0.5")
    assert code == 1 and "(2, 1)" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "witness", "--xi", str(bad), "--n", "16")
    assert code == 1


@pytest.mark.parametrize("phi,expected", [("0", 2), ("0;0", 4)])
def test_frames_export(capsys, tmp_path, phi, expected):
    code, out, _ = run(capsys, "frames", "--phi-zeros", phi, "--n", "12", "--buffer", "4", "--out", str(tmp_path))
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["E.frame", "Etilde.frame", "S.frame"]
    et = bidisc.read_frame(tmp_path / "Etilde.frame")
    assert et.dim == expected
    for name in ("S", "E", "Etilde"):
        path = tmp_path / f"{name}.frame"
        text = path.read_text()
        bidisc.write_frame(bidisc.read_frame(path), path)
        assert path.read_text() == text


def test_frames_unwritable(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "frames", "--n", "10", "--buffer", "2", "--out", str(blocker / "sub"))
    assert code == 1 and "unwritable" in err


def test_selftest_empty_roster(capsys):
    code, out, _ = run(capsys, "selftest", "--roster", "empty")
    assert code == 0
    assert "0 checks run" in out


def test_selftest_sign_flip_names_bilinear(capsys):
    code, out, _ = run(capsys, "selftest", "--trials", "3", "--debug-flip-sign")
    assert code == 3
    assert "first failing check bilinear_vanishing" in out


def test_selftest_default_roster_passes(capsys):
    code, out, _ = run(capsys, "selftest", "--trials", "10")
    assert code == 0, out
    lines = [l for l in out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert lines and all(l.startswith("PASS") for l in lines)
