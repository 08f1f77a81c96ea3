import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rcekit.cli import main

ESCAPE = 0.25 * math.log(5.0)


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _const(tmp_path, **extra):
    prob = {"schema": 1, "form": "riccati", "coefficients": {"s2": -1, "s1": 0, "s0": 4},
            "window": {"t0": 0.0, "t1": 4.0}, "samples": 801}
    prob.update(extra)
    return _write(tmp_path, "p.json", prob)


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_reduce_json(tmp_path, capsys):
    assert main(["reduce", "--problem", _const(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["autonomous"] and out["samples"]["omega02"][0] == 4.0


def test_reduce_bessel_expression(tmp_path, capsys):
    p = _write(tmp_path, "b.json", {"schema": 1, "form": "case", "case": "bessel", "N": 5})
    assert main(["reduce", "--problem", p]) == 0
    out = json.loads(capsys.readouterr().out)
    from rcekit.coeffexpr import evaluate, parse_expression
    e = parse_expression(out["expressions"]["omega02"])
    for t in (0.7, 2.0, 9.0):
        assert evaluate(e, t) == pytest.approx(99 / (4 * t * t) - 1, rel=1e-13)


def test_solve_escape_and_sidecar(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["solve", "--problem", _const(tmp_path, ic=-3.0), "--out", str(out)]) == 0
    rows = _read_csv(out)
    assert list(rows[0]) == ["t", "nu_re", "nu_im", "variable_tag"]
    side = json.loads((tmp_path / "s.csv.json").read_text())
    assert side["escape_events"][0] == pytest.approx(ESCAPE, abs=1e-8)
    assert side["branch"] == "coth"
    assert side["K"] == pytest.approx(math.atanh(2 / 3), abs=1e-10)


def test_golden_roundtrip_solve_to_timedomain(tmp_path):
    s = tmp_path / "s.csv"
    prob = _const(tmp_path, ic=-3.0)
    assert main(["solve", "--problem", prob, "--out", str(s)]) == 0
    td = tmp_path / "td.csv"
    assert main(["timedomain", "--problem", prob, "--trajectory", str(s),
                 "--out", str(td)]) == 0
    side = json.loads((tmp_path / "td.csv.json").read_text())
    assert side["branch"] == "sinh" and side["max_residual"] < 1e-5
    rows = _read_csv(td)
    t = np.array([float(r["t"]) for r in rows])
    y = np.array([float(r["y"]) for r in rows])
    dy = np.array([float(r["dy"]) for r in rows])
    # y'/y reproduces the exported trajectory away from the zero of y
    nu = np.array([float(r["nu_re"]) for r in _read_csv(s)])
    ok = np.abs(t - ESCAPE) > 0.05
    np.testing.assert_allclose(dy[ok] / y[ok], nu[ok], rtol=1e-7)


def test_floquet_and_portrait(tmp_path, capsys):
    p = _write(tmp_path, "m.json", {"schema": 1, "form": "case", "case": "mathieu",
                                    "a0": 1.0, "q": 1.0, "samples": 2401,
                                    "window": {"t0": 0.0, "t1": 4 * math.pi}})
    assert main(["floquet", "--problem", p]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["route"] == "dc"
    assert main(["portrait", "--problem", p]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["kind"] == "attractor_separatrix"


def test_sweep_csv(tmp_path):
    p = _write(tmp_path, "sw.json", {"schema": 1, "form": "case", "case": "mathieu", "q": 1.0,
                                     "sweep": {"axes": {"a0": [1.0, -3.0]}, "n_periods": 4,
                                               "samples_per_period": 300}})
    out = tmp_path / "sw.csv"
    assert main(["sweep", "--problem", p, "--out", str(out)]) == 0
    rows = _read_csv(out)
    assert [r["label"] for r in rows] == ["attractor", "repetitive_escape"]


@pytest.mark.parametrize("problem,code", [
    ({"schema": 1, "form": "riccati", "coefficients": {"s2": 0, "s1": 1, "s0": 1},
      "window": {"t0": 0, "t1": 1}}, 3),
    ({"schema": 1, "form": "riccati", "bogus": 1}, 2),
    ({"schema": 2, "form": "riccati", "coefficients": {"s2": -1}}, 2),
    ({"schema": 1, "form": "riccati", "coefficients": {"s2": "-1+*", "s1": 0, "s0": 1}}, 2),
])
def test_exit_codes(tmp_path, problem, code):
    assert main(["reduce", "--problem", _write(tmp_path, "x.json", problem)]) == code


def test_bad_arguments(tmp_path):
    assert main(["nonsense", "--problem", _const(tmp_path)]) == 2
    assert main(["solve", "--problem", _const(tmp_path)]) == 2   # no ic


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rcekit", "reduce", "--problem",
                           _const(tmp_path), "--samples-only"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("t,omega01")
