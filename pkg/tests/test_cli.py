import csv
import io
import json

import numpy as np
import pytest

from qvar.cli import run, selfcheck_results

UNIFORM = '{"type":"polynomial","coeffs":[1]}'


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_cdf_closed_form(capsys):
    assert run(["cdf", "--density", UNIFORM, "--n", "2", "--grid", "101", "--tol", "1e-6"]) == 0
    out = rows(capsys.readouterr().out)
    assert len(out) == 101 and list(out[0]) == ["x", "F", "err"]
    row = [r for r in out if float(r["x"]) == 0.125][0]
    assert abs(float(row["F"]) - 0.75) <= 1e-6


def test_coeffs_first_frequency(capsys):
    assert run(["coeffs", "--density", UNIFORM, "--n", "3", "--k", "1"]) == 0
    out = rows(capsys.readouterr().out)
    assert len(out) == 1 and abs(float(out[0]["t_k"]) - 4.712389) < 1e-6


def test_pdf_warns_small_n(capsys):
    assert run(["pdf", "--n", "3", "--grid", "0.1,0.3"]) == 0
    cap = capsys.readouterr()
    assert "warning" in cap.err
    assert list(rows(cap.out)[0]) == ["x", "F", "err", "f", "f_err"]


def test_support_scaling(capsys):
    # uniform on [-1, 1]: Q scales by 4
    dens = '{"type":"polynomial","coeffs":[0.5],"support":[-1,1]}'
    assert run(["cdf", "--density", dens, "--n", "2", "--grid", "0.5", "--tol", "1e-6"]) == 0
    out = rows(capsys.readouterr().out)
    assert abs(float(out[0]["F"]) - 0.75) <= 1e-6


def test_output_file_and_plot(tmp_path):
    out = tmp_path / "f.csv"
    assert run(["pdf", "--n", "4", "--grid", "41", "--out", str(out), "--plot"]) == 0
    assert out.exists() and (tmp_path / "f.png").exists()
    assert not list(tmp_path.glob(".qvar-*"))
    first = out.read_text()
    assert run(["pdf", "--n", "4", "--grid", "41", "--out", str(out)]) == 0
    assert out.read_text() == first


def test_quadform_command(tmp_path, capsys):
    spec = {"d": [1, 1], "c": [0.6, 0.6], "sign": "minus",
            "densities": [{"type": "polynomial", "coeffs": [1]},
                          {"type": "polynomial", "coeffs": [0, 2]}]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    assert run(["quadform", "--spec", str(path), "--grid", "5", "--tol", "1e-6"]) == 0
    out = rows(capsys.readouterr().out)
    F = np.array([float(r["F"]) for r in out])
    assert F[0] == 0 and abs(F[-1] - 1) < 1e-5 and np.all(np.diff(F) > 0)


def test_asymptotic_command(capsys):
    assert run(["asymptotic", "--n", "3"]) == 0
    out = {r["law"]: r for r in rows(capsys.readouterr().out)}
    assert abs(float(out["small_x"]["constant"]) - 5.4414) < 1e-4
    assert run(["asymptotic", "--family", "power", "--n", "3", "--p", "0.9"]) == 0
    assert run(["asymptotic", "--family", "power", "--n", "3"]) == 2


def test_mc_command(tmp_path, capsys):
    dump = tmp_path / "q.csv"
    assert run(["mc", "--n", "3", "--N", "1000000", "--seed", "42", "--dump", str(dump)]) == 0
    out = {r["key"]: r["value"] for r in rows(capsys.readouterr().out)}
    assert float(out["ks"]) <= 0.004 and out["pass"] == "true"
    assert dump.exists()


@pytest.mark.parametrize("argv,code", [
    (["cdf", "--n", "3", "--tol", "0.5"], 2),
    (["cdf", "--n", "3", "--grid", "0.1,0.9"], 2),
    (["cdf", "--n", "3", "--grid", "11", "--plot"], 2),
    (["cdf", "--n", "3", "--grid", "abc"], 2),
    (["cdf", "--density", '{"type":"polynomial","coeffs":[1,1]}', "--n", "3"], 4),
    (["cdf", "--density", '{"type":"gamma"}', "--n", "3"], 4),
    (["cdf", "--density", "{not json", "--n", "3"], 4),
    (["quadform", "--spec", '{"d":[1,1],"c":[1,1]}'], 2),
])
def test_exit_codes(argv, code, capsys):
    assert run(argv) == code
    assert capsys.readouterr().err


def test_convergence_exit_code(monkeypatch, capsys):
    import qvar.cli
    from qvar.errors import TruncationError

    def fail(*args, **kwargs):
        raise TruncationError("cap reached")
    monkeypatch.setattr(qvar.cli, "coefficients", fail)
    assert run(["coeffs", "--n", "3"]) == 3
    assert "cap reached" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["cdf"], ["cdf", "--n", "1"], ["nope"]])
def test_argparse_errors(argv):
    with pytest.raises(SystemExit) as exc:
        run(argv)
    assert exc.value.code == 2


def test_selfcheck():
    results = selfcheck_results()
    assert len(results) >= 10
    failed = [r for r in results if not r[1]]
    assert not failed, failed
