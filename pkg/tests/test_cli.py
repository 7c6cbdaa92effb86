import json

import pytest

from edt0l.cli import main
from edt0l.core import deserialize_system
from edt0l.ops import deserialize_annotated


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.splitlines(), err


def test_pell(capsys):
    code, out, _ = run(capsys, "pell", "--d", "2", "--count", "3")
    assert code == 0
    assert out == ["3 2", "1 0", "3 2", "17 12"]
    assert run(capsys, "pell", "--d", "5", "--count", "1")[1] == ["9 4", "1 0"]


def test_pell_square_d(capsys):
    code, out, err = run(capsys, "pell", "--d", "4")
    assert code == 2
    assert "perfect square" in err


def test_genpell(capsys):
    code, out, _ = run(capsys, "genpell", "--d", "2", "--n", "7", "--box", "6")
    assert code == 0
    assert out[:2] == ["fundamental 3 1", "fundamental 5 3"]
    assert out[2:] == ["-5 -3", "-5 3", "-3 -1", "-3 1", "3 -1", "3 1", "5 -3", "5 3"]


def test_quad_pell(capsys, tmp_path):
    path = tmp_path / "sys.json"
    code, out, err = run(capsys, "quad", "--coeffs", "1,0,-2,0,0,-1", "--box", "20", "--emit-system", str(path))
    assert code == 0
    assert "PellLike" in err
    want = sorted((sx * x, sy * y) for x, y in ((1, 0), (3, 2), (17, 12)) for sx in (1, -1) for sy in (1, -1))
    assert out == [f"{x} {y}" for x, y in sorted(set(want))]
    x = deserialize_annotated(path.read_text())
    assert x.pairs_in_box(20) == set(want)
    deserialize_system(json.dumps({k: v for k, v in json.loads(path.read_text()).items() if k != "components"}))


def test_quad_no_solutions(capsys):
    assert run(capsys, "quad", "--coeffs", "0,0,0,0,0,1")[:2] == (0, ["(no solutions)"])


def test_quad_divisors(capsys):
    code, out, _ = run(capsys, "quad", "--coeffs", "0,1,0,0,0,-6", "--box", "10")
    assert code == 0 and len(out) == 8


@pytest.mark.parametrize("coeffs", ["1,2,3", "1,2,3,4,5,x"])
def test_quad_bad_coeffs(capsys, coeffs):
    code, _, err = run(capsys, "quad", "--coeffs", coeffs)
    assert code == 2 and err.startswith("error:")


def test_heis(capsys, tmp_path):
    path = tmp_path / "h.json"
    code, out, _ = run(capsys, "heis", "--eq", "X a^-1", "--box", "3", "--emit-system", str(path))
    assert code == 0
    assert out[0] == "equation: X a^-1"
    assert out[1] == "case: 2"
    assert out[-1] == "1 0 0"
    assert deserialize_system(path.read_text()).start


def test_heis_case_one(capsys):
    code, out, _ = run(capsys, "heis", "--eq", "X X^-1", "--box", "1")
    assert code == 0
    assert out[2:5] == ["0 = 0", "0 = 0", "0 = 0"]
    assert len(out[5:]) == 27


def test_heis_errors(capsys):
    code, _, err = run(capsys, "heis", "--eq", "a b")
    assert code == 2 and "no occurrence of X" in err
    code, _, err = run(capsys, "heis", "--eq", "X ^")
    assert code == 2 and "position 2" in err


def test_enum(capsys, tmp_path):
    path = tmp_path / "sys.json"
    run(capsys, "quad", "--coeffs", "0,1,0,0,0,-6", "--emit-system", str(path))
    code, out, _ = run(capsys, "enum", "--system", str(path), "--path-len", "10", "--decode", "a,b")
    assert code == 0
    assert out == ["-6 -1", "-3 -2", "-2 -3", "-1 -6", "1 6", "2 3", "3 2", "6 1"]
    code, out, _ = run(capsys, "enum", "--system", str(path), "--path-len", "10", "--max-words", "2")
    assert code == 0 and len(out) == 2


def test_enum_errors(capsys, tmp_path):
    assert run(capsys, "enum", "--system", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"terminal": []}')
    code, _, err = run(capsys, "enum", "--system", str(bad))
    assert code == 2 and "missing field" in err


@pytest.mark.parametrize("mode, n, box, seed", [("quad", "100", "50", "7"), ("heis", "50", "8", "0"), ("quad", "0", "5", "0")])
def test_verify(capsys, mode, n, box, seed):
    code, out, _ = run(capsys, "verify", "--mode", mode, "--random", n, "--box", box, "--seed", seed)
    assert code == 0
    assert out[0].startswith("ok:")


def test_verify_box_guard(capsys):
    assert run(capsys, "verify", "--mode", "heis", "--random", "1", "--box", "51")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "pell")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_deterministic(capsys):
    a = run(capsys, "verify", "--mode", "quad", "--random", "20", "--box", "10", "--seed", "3")
    b = run(capsys, "verify", "--mode", "quad", "--random", "20", "--box", "10", "--seed", "3")
    assert a == b


def test_verify_reports_mismatch(capsys, monkeypatch):
    import edt0l.cli as cli

    monkeypatch.setattr(cli, "quad_bruteforce", lambda eq, B: {(B + 1, 0)})
    code, out, _ = run(capsys, "verify", "--mode", "quad", "--random", "5", "--box", "4")
    assert code == 1
    assert out[0].startswith("mismatch on case 0:")
    assert "  only brute force: (5, 0)" in out
