import csv
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from incoq.cartan import exp_cartan, swap_matrix
from incoq.cli import HamiltonianSpec, SpecError, main, parse_time, pi_multiple
from incoq.pauli_algebra import default_tol

CASE1, CASE2, CASE3 = "1 XX", "1 XX; 1 YY; 2 ZZ", "1 XX; 1 YY; 1 ZZ"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_spec_merges_and_is_exact():
    spec = HamiltonianSpec.parse("1/3 XX; 0.25 xx; -2 zi;1e-1 IY")
    assert spec.coeff("XX") == Fraction(7, 12)
    assert spec.coeff("ZI") == -2 and spec.coeff("IY") == Fraction(1, 10)
    assert spec.interaction() == (Fraction(7, 12), 0, 0)
    h = spec.matrix()
    assert np.allclose(h, h.conj().T)


@pytest.mark.parametrize("text, col", [("1 XQ", 3), ("1 XX; foo", 7), ("1 XX; 2/0 YY", 7), ("", 1), ("1 XXX", 3)])
def test_parse_errors_report_column(text, col):
    with pytest.raises(SpecError) as err:
        HamiltonianSpec.parse(text)
    assert err.value.col == col and err.value.line == 1


def test_parse_error_line_number():
    with pytest.raises(SpecError) as err:
        HamiltonianSpec.parse("1 XX\n2 YQ")
    assert (err.value.line, err.value.col) == (2, 3)


def test_times_and_pi_labels():
    assert parse_time("pi/12") == math.pi / 12
    assert parse_time("3pi/4") == 3 * math.pi / 4
    assert parse_time("-3*pi/8") == -3 * math.pi / 8
    assert parse_time("1/2") == 0.5
    with pytest.raises(ValueError):
        parse_time("tau")
    assert pi_multiple(3 * math.pi / 4) == "3pi/4"
    assert pi_multiple(-math.pi / 8) == "-pi/8"
    assert pi_multiple(2 * math.pi) == "2pi"
    assert pi_multiple(0.7) is None
    assert pi_multiple(math.pi / 65) is None


@given(st.integers(-200, 200), st.integers(1, 64))
def test_pi_label_round_trip(p, q):
    label = pi_multiple(p * math.pi / q)
    assert label is not None
    assert math.isclose(parse_time(label) if label != "0" else 0.0, p * math.pi / q, abs_tol=1e-12)


def test_decompose_cases(capsys):
    for text, c in [(CASE1, [1, 0, 0]), (CASE2, [1, 1, 2]), (CASE3, [1, 1, 1])]:
        code, out, _ = run(capsys, "decompose", "--h", text)
        d = json.loads(out)
        assert code == 0 and d["schema"] == 1
        assert [Fraction(x) for x in d["coefficients"]] == c
        assert d["applicable"]


def test_decompose_unitary_file(capsys, tmp_path):
    u = exp_cartan((0.3, 0.2, -0.1), 1.0)
    f = tmp_path / "u.json"
    f.write_text(json.dumps({"re": u.real.tolist(), "im": u.imag.tolist()}))
    code, out, _ = run(capsys, "decompose", "--unitary", str(f))
    d = json.loads(out)["unitary"]
    assert code == 0 and d["reconstruction_residual"] < 1e-8
    assert np.allclose([x["rad"] for x in d["canonical"]], [0.3, 0.2, -0.1])
    np.save(tmp_path / "u.npy", swap_matrix())
    code, out, _ = run(capsys, "decompose", "--unitary", str(tmp_path / "u.npy"))
    assert [x["pi"] for x in json.loads(out)["unitary"]["canonical"]] == ["pi/4"] * 3
    np.save(tmp_path / "bad.npy", 2 * np.eye(4))
    code, _, err = run(capsys, "decompose", "--unitary", str(tmp_path / "bad.npy"))
    assert code == 1 and "not unitary" in err


def test_check_flags_inapplicable(capsys):
    code, out, _ = run(capsys, "check", "--h", "1 XX; 1 YY; 1 ZZ; 0.5 XY")
    d = json.loads(out)
    assert code == 0 and not d["applicable"] and "XY" in d["reason"]
    code, out, _ = run(capsys, "check", "--h", "1 XX; 1 ZI")
    assert not json.loads(out)["applicable"]
    # Z on both sides commutes with the Heisenberg coupling
    code, out, _ = run(capsys, "check", "--h", CASE3 + "; 0.3 ZI; 0.3 IZ")
    assert json.loads(out)["applicable"]


def test_check_verdict_round_trips(capsys):
    _, out, _ = run(capsys, "check", "--h", CASE3)
    d = json.loads(out)
    assert json.loads(json.dumps(d)) == d
    _, out2, _ = run(capsys, "check", "--h", CASE3)
    assert out == out2


def test_usage_errors_exit_one(capsys):
    assert run(capsys, "check", "--h", "1 XQ")[0] == 1
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 1
    assert run(capsys, "reach", "--h", CASE1, "--s0", "1,1,0", "--t", "1", "--out", "x")[0] == 1
    assert run(capsys, "entangle", "--h", CASE3)[0] == 1


def test_reach_case3_and_zero_time(capsys, tmp_path):
    code, _, _ = run(capsys, "reach", "--h", CASE3, "--s0", "0,0,1/2", "--t", "pi/4,0",
                     "--grid", "5x6", "--format", "json", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "ellipsoids.json").read_text())
    first, second = summary["sets"]
    assert np.allclose(first["semi_axes"], 1) and np.allclose(first["center"], 0, atol=1e-12)
    rows = json.loads((tmp_path / second["file"]).read_text())["rows"]
    assert np.allclose(np.array(rows)[:, 1:], [0, 0, 0.5], atol=1e-12)


def test_reach_csv_header(capsys, tmp_path):
    run(capsys, "reach", "--h", CASE2, "--s0", "0.1,0.2,0.3", "--t", "0.4", "--grid", "3x4", "--out", str(tmp_path))
    with open(tmp_path / "reach_000.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "x", "y", "z"] and len(rows) == 13


def test_entangle_cases(capsys):
    _, out, _ = run(capsys, "entangle", "--h", CASE3, "--t", "pi/8")
    d = json.loads(out)
    assert d["is_perfect_entangler_for_all_pure"] and d["is_locally_sqrt_swap"]
    assert set(d["witness_probes"]) == {"+x", "+y", "+z"}
    _, out, _ = run(capsys, "entangle", "--h", CASE3, "--t", "pi/4")
    d = json.loads(out)
    assert d["is_locally_swap"] and not d["is_perfect_entangler"]
    for t in ("0.3", "pi/8", "pi/4", "1.7"):
        _, out, _ = run(capsys, "entangle", "--h", CASE1, "--t", t)
        d = json.loads(out)
        assert not d["is_perfect_entangler_for_all_pure"] and not d["is_locally_sqrt_swap"]


def test_tol_flag_sets_default(capsys, monkeypatch):
    # registering the variable lets monkeypatch undo what main() writes
    monkeypatch.setenv("INCOQ_TOL", "1e-9")
    run(capsys, "--tol", "1e-7", "check", "--h", CASE1)
    assert default_tol() == 1e-7


def test_verify_small(capsys):
    code, out, _ = run(capsys, "verify", "--n-cases", "50", "--seed", "3")
    assert code == 0 and "PASS" in out
    code, out, _ = run(capsys, "verify", "--n-cases", "50", "--seed", "3", "--corrupt")
    assert code == 2 and "--seed 3" in out
