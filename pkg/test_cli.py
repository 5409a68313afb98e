import csv
import os

import numpy as np
import pytest
import ujson

from main import EXIT_CONFIG, EXIT_NUMERICS, EXIT_OK, EXIT_VERIFY_FAILED, main

pytestmark = pytest.mark.usefixtures("no_log_file")

CONSTANT = {"potential": {"type": "constant", "c": 0.5}, "m": 1.0, "omega": 0.7}


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else ujson.dumps(data))
    return str(path)


def _run(tmp_path, command, config, *extra, out="out"):
    out_dir = str(tmp_path / out)
    return main([command, config, "--out", out_dir, "--log-level", "WARNING", *extra]), out_dir


def _read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], np.array(rows[1:], dtype=float)


def test_trivial_powers_are_classical(tmp_path):
    cfg = _write(tmp_path, "trivial.json", {
        "model": {"potential": {"type": "zero"}},
        "z0": [0.25, 0.0], "degree": 3,
        "grid": {"nx": 3, "ny": 2},
    })
    code, out = _run(tmp_path, "powers", cfg)
    assert code == EXIT_OK
    header, data = _read_csv(os.path.join(out, "powers.csv"))
    assert header[:6] == ["x", "y", "z0_re_sc", "z0_im_sc", "z0_re_vec", "z0_im_vec"]
    assert data.shape == (6, 2 + 4 * 4)
    dz = (data[:, 0] - 0.25) + 1j * data[:, 1]
    for n in range(4):
        # x + y k behaves like x + i y on the complex sub-plane
        want = dz ** n
        got_sc = data[:, 2 + 4 * n] + 1j * data[:, 3 + 4 * n]
        got_vec = data[:, 4 + 4 * n] + 1j * data[:, 5 + 4 * n]
        assert np.allclose(got_sc, want.real, atol=1e-10)
        assert np.allclose(got_vec, want.imag, atol=1e-10)

    with open(os.path.join(out, "powers.meta.json")) as f:
        meta = ujson.load(f)
    assert meta["command"] == "powers"
    assert meta["columns"] == header
    assert meta["model"]["c"] == 0.0
    assert meta["numerics"]["quadrature"]["rtol"] > 0
    assert meta["quadrature_stats"]["counters"]["cumulative_integrals"] > 0


def test_powers_are_deterministic(tmp_path):
    cfg = _write(tmp_path, "run.json", {"model": CONSTANT, "degree": 2, "grid": {"nx": 4, "ny": 3}})
    code1, out1 = _run(tmp_path, "powers", cfg, "--threads", "1", out="a")
    code2, out2 = _run(tmp_path, "powers", cfg, "--threads", "3", out="b")
    assert code1 == code2 == EXIT_OK
    with open(os.path.join(out1, "powers.csv"), "rb") as f1, open(os.path.join(out2, "powers.csv"), "rb") as f2:
        assert f1.read() == f2.read()


def test_model_file_next_to_the_run(tmp_path):
    _write(tmp_path, "model.json", CONSTANT)
    cfg = _write(tmp_path, "run.json", {"model": "model.json", "degree": 1, "grid": {"nx": 2, "ny": 2}})
    code, out = _run(tmp_path, "powers", cfg)
    assert code == EXIT_OK
    with open(os.path.join(out, "powers.meta.json")) as f:
        assert ujson.load(f)["model"]["c"] == 0.5


@pytest.mark.parametrize("document", [
    "{not json",
    "[1, 2, 3]",
    '{"model": "missing_model.json"}',
    '{"degree": -1}',
    '{"checks": ["no_such_check"]}',
    '{"model": {"potential": {"type": "from_nu", "nu": {"coefficients": [-25.0]}}}}',
])
def test_config_errors(tmp_path, document):
    cfg = _write(tmp_path, "bad.json", document)
    code, out = _run(tmp_path, "powers", cfg)
    assert code == EXIT_CONFIG
    assert not os.path.exists(os.path.join(out, "powers.csv"))


def test_missing_config_file(tmp_path):
    code, _ = _run(tmp_path, "verify", str(tmp_path / "nowhere.json"))
    assert code == EXIT_CONFIG


def test_verify_with_no_checks(tmp_path):
    cfg = _write(tmp_path, "run.json", {"model": CONSTANT, "checks": []})
    code, out = _run(tmp_path, "verify", cfg)
    assert code == EXIT_OK
    with open(os.path.join(out, "verify.json")) as f:
        assert ujson.load(f) == []


def test_verify_and_gamma_flip(tmp_path):
    cfg = _write(tmp_path, "run.json", {"model": CONSTANT, "checks": ["intertwining", "successor"], "samples": 3})
    code, out = _run(tmp_path, "verify", cfg)
    assert code == EXIT_OK
    with open(os.path.join(out, "verify.json")) as f:
        assert [r["pass"] for r in ujson.load(f)] == [True, True]

    code, out = _run(tmp_path, "verify", cfg, "--gamma-flip", out="flipped")
    assert code == EXIT_VERIFY_FAILED
    with open(os.path.join(out, "verify.json")) as f:
        report = {r["check"]: r["pass"] for r in ujson.load(f)}
    assert report == {"intertwining": False, "successor": True}
    with open(os.path.join(out, "gamma.json")) as f:
        assert ujson.load(f)["label"] == "bjorken-drell-flipped"
    with open(os.path.join(out, "verify.meta.json")) as f:
        assert ujson.load(f)["failed"] == ["intertwining"]


def test_gamma_flip_is_not_a_powers_option(tmp_path, capsys):
    cfg = _write(tmp_path, "run.json", {"model": CONSTANT})
    with pytest.raises(SystemExit) as exc:
        _run(tmp_path, "powers", cfg, "--gamma-flip")
    assert exc.value.code == 2
    assert "--gamma-flip" in capsys.readouterr().err
    assert not os.path.exists(tmp_path / "out")


def test_spinor_output(tmp_path):
    cfg = _write(tmp_path, "run.json", {
        "model": CONSTANT, "samples": 3, "grid": {"nx": 3, "ny": 3},
        "terms_W": [[1.0, 0.0, 0.0, 0.0], [0.5, 0.0, 0.5, 0.0]],
        "terms_w": [[0.0, 0.0, 1.0, 0.0]],
    })
    code, out = _run(tmp_path, "spinor", cfg)
    assert code == EXIT_OK
    header, data = _read_csv(os.path.join(out, "spinor.csv"))
    assert header[:4] == ["x1", "x2", "phi0_re", "phi0_im"]
    assert data.shape == (9, 10)
    with open(os.path.join(out, "spinor.residuals.json")) as f:
        report = ujson.load(f)
    assert report["points"] == 3
    assert report["max_dirac"] < 1e-4 * (1 + report["max_spinor"])


def test_quadrature_cap_removes_partial_output(tmp_path):
    cfg = _write(tmp_path, "run.json", {
        "model": CONSTANT, "degree": 2, "grid": {"nx": 2, "ny": 2},
        "quadrature": {"initial_nodes": 9, "max_nodes": 17, "rtol": 1e-15},
    })
    code, out = _run(tmp_path, "powers", cfg)
    assert code == EXIT_NUMERICS
    assert not os.path.exists(os.path.join(out, "powers.csv"))
    assert not os.path.exists(os.path.join(out, "powers.meta.json"))


def test_tol_flag_reaches_the_numerics_snapshot(tmp_path):
    cfg = _write(tmp_path, "run.json", {"model": CONSTANT, "degree": 1, "grid": {"nx": 2, "ny": 2}})
    code, out = _run(tmp_path, "powers", cfg, "--tol", "1e-9")
    assert code == EXIT_OK
    with open(os.path.join(out, "powers.meta.json")) as f:
        quad = ujson.load(f)["numerics"]["quadrature"]
    assert quad["rtol"] == 1e-9 and quad["gauss_rtol"] == 1e-9
