import csv
import io
import json

import numpy as np
import pytest

from halfspace_plasma import cli
from halfspace_plasma import coefficients as coef
from halfspace_plasma import dispersion as disp
from halfspace_plasma import reconstruction as rec
from halfspace_plasma import spectrum as sp
from halfspace_plasma.dispersion import PlasmaParameters


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


# ---------------------------------------------------------------- solve

def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", "--gamma", "1", "--eps", "1", "--alpha-p", "0.5")
    assert code == 0
    body = json.loads(out)
    assert body["command"] == "solve" and body["ok"] is True and body["version"]
    assert body["classification"]["kappa"] == 1 and body["classification"]["region"] == sp.D_PLUS
    assert max(body["residuals"].values()) <= 1e-6
    cs = coef.solve_all(PlasmaParameters(1.0, 1.0, 0.5))
    e_inf = body["coefficients"]["e_infty"]
    assert abs(complex(e_inf["re"], e_inf["im"]) - cs.e_infty) < 1e-10


def test_solve_csv_in_d_minus(capsys):
    code, out, _ = run(capsys, "solve", "--gamma", "3", "--eps", "1", "--format", "csv")
    header, rows = table(out)
    assert code == 0 and header == ["quantity", "re", "im"]
    names = [r[0] for r in rows]
    assert "eta0" not in names and "kappa" in names
    assert float(dict((r[0], r[1]) for r in rows)["e_debye"]) == 0.0


def test_solve_validation_error(capsys):
    code, out, err = run(capsys, "solve", "--eps", "-1")
    assert code == 2 and out == ""
    msg = json.loads(err)
    assert msg["error"] == "ValidationError" and msg["field"] == "eps"


def test_specular_wall_has_zero_a1(capsys):
    code, out, _ = run(capsys, "solve", "--gamma", "0", "--eps", "0.1", "--alpha-p", "0")
    body = json.loads(out)
    assert code == 0 and body["coefficients"]["a1"] == {"re": 0.0, "im": 0.0}


def test_complex_amplitude_flag(capsys):
    _, out, _ = run(capsys, "solve", "--e0", "0,2")
    body = json.loads(out)
    assert body["params"]["e0"] == {"re": 0.0, "im": 2.0}


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.strip() == cli.__version__


# ---------------------------------------------------------------- profile and boundary

def test_profile_csv(capsys):
    code, out, _ = run(capsys, "profile", "--gamma", "-0.5", "--eps", "0.5", "--x-grid", "0:4:9")
    header, rows = table(out)
    assert code == 0 and header == ["x", "re_e", "im_e", "abs_e"] and len(rows) == 9
    assert float(rows[0][0]) == 0.0
    assert abs(complex(float(rows[0][1]), float(rows[0][2])) - 1) < 1e-6


def test_profile_time_factor(capsys):
    _, plain, _ = run(capsys, "profile", "--x-grid", "0:1:3")
    _, timed, _ = run(capsys, "profile", "--x-grid", "0:1:3", "--time", "0.25")
    p = PlasmaParameters(0.0, 0.1)
    phase = np.exp(-1j * (1 + p.gamma) / p.eps * 0.25)
    for a, b in zip(table(plain)[1], table(timed)[1]):
        assert float(a[3]) == pytest.approx(float(b[3]), rel=1e-10)
        za, zb = complex(float(a[1]), float(a[2])), complex(float(b[1]), float(b[2]))
        assert abs(zb - phase * za) < 1e-10


def test_boundary_default_grid_satisfies_nonflow(capsys):
    code, out, _ = run(capsys, "boundary", "--gamma", "1", "--eps", "1", "--alpha-p", "0.5", "--precision", "16")
    _, rows = table(out)
    mu = np.array([float(r[0]) for r in rows])
    h = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    cs = coef.solve_all(PlasmaParameters(1.0, 1.0, 0.5))
    nodes, weights = rec.default_mu_rule(cs)
    w = np.concatenate([weights[::-1], weights])
    assert code == 0 and np.allclose(mu, np.concatenate([-nodes[::-1], nodes]), rtol=1e-14)
    assert abs(np.sum(w * mu * h)) <= 1e-6 * np.max(np.abs(h))


def test_boundary_custom_grid_json(capsys):
    code, out, _ = run(capsys, "boundary", "--mu-grid=-0.5:0.5:4", "--format", "json")
    body = json.loads(out)
    assert code == 0 and body["columns"] == ["mu", "re_h", "im_h", "abs_h"] and len(body["rows"]) == 4


def test_boundary_grid_must_avoid_zero(capsys):
    code, _, err = run(capsys, "boundary", "--mu-grid=-0.5:0.5:5")
    assert code == 2 and json.loads(err)["field"] == "mu_grid"


# ---------------------------------------------------------------- sweeps

def test_mode_map_small(capsys):
    code, out, _ = run(capsys, "mode-map", "--gamma-range=-0.5:3:2", "--eps-range", "0.5:1:2")
    header, rows = table(out)
    assert code == 0 and header == ["gamma", "eps", "kappa", "region"] and len(rows) == 4
    by_cell = {(float(r[0]), float(r[1])): r for r in rows}
    assert by_cell[(-0.5, 0.5)][2:] == ["1", sp.D_PLUS]
    assert by_cell[(3.0, 1.0)][2:] == ["0", sp.D_MINUS]


def test_mode_map_threads_preserve_order(capsys):
    args = ["mode-map", "--gamma-range=-0.9:3:4", "--eps-range", "0.1:2:3"]
    _, one, _ = run(capsys, *args)
    _, many, _ = run(capsys, *args, "--threads", "3")
    assert one == many


def test_mode_map_flags_near_l(capsys):
    pt = sp.l_curve().points[250]
    row = cli._map_cell((pt.gamma, pt.eps))
    assert row[2] is None and row[3] == sp.NEAR_L
    text = cli.render_csv(["gamma", "eps", "kappa", "region"], [row], 6)
    assert text.splitlines()[1].split(",")[2] == ""


def test_l_curve_points_revalidate(capsys):
    code, out, _ = run(capsys, "l-curve", "--precision", "17")
    _, rows = table(out)
    assert code == 0 and len(rows) == 400
    for r in rows[::40]:
        mu, g, e = (float(v) for v in r)
        p = PlasmaParameters(g, e)
        _, g1, g2, _ = sp._g_parts(mu, p)
        scale = abs(3 * p.c) ** 2
        assert abs(g1) <= 1e-8 * scale and abs(g2) <= 1e-8 * scale


def test_l_curve_custom_grid_skips(capsys):
    _, out, _ = run(capsys, "l-curve", "--mu-grid", "0.5:0.95:4", "--format", "json")
    body = json.loads(out)
    assert len(body["rows"]) == 1 and len(body["skipped"]) == 3


def test_bad_range(capsys):
    code, _, err = run(capsys, "mode-map", "--gamma-range", "0:1:1")
    assert code == 2 and json.loads(err)["field"] == "gamma"


# ---------------------------------------------------------------- verify

def test_verify_text(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert out.strip().splitlines()[-1].endswith("checks passed")
    assert "FAIL" not in out


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "--json")
    body = json.loads(out)
    assert code == 0 and body["passed"] is True and all(c["passed"] for c in body["checks"])


def test_verify_catches_broken_function(capsys, monkeypatch):
    real = disp.t0
    monkeypatch.setattr(disp, "t0", lambda z, p: -real(z, p))
    code, out, err = run(capsys, "verify")
    assert code == 1
    assert "FAIL" in out and "lambda_via_t0" in out.splitlines()[-1]
    assert json.loads(err)["error"] == "ResidualFailure"


# ---------------------------------------------------------------- config and output

def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"params": {"gamma": -0.5, "eps": 0.5, "alpha_p": 0.5, "e0": [1, 0]},
                               "output": {"format": "csv", "precision": 8}}))
    code, out, _ = run(capsys, "solve", "--config", str(cfg))
    _, rows = table(out)
    assert code == 0 and rows[0][0] == "e_infty"
    # a flag overrides the file
    _, out2, _ = run(capsys, "solve", "--config", str(cfg), "--gamma", "3", "--eps", "1")
    assert "eta0" not in out2


@pytest.mark.parametrize("raw", [{"param": {}}, {"params": {"beta": 1}}, {"output": 3}])
def test_config_rejects_unknown_keys(tmp_path, capsys, raw):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(raw))
    code, _, err = run(capsys, "solve", "--config", str(cfg))
    assert code == 2 and "error" in json.loads(err)


def test_missing_config(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--config", str(tmp_path / "none.json"))
    assert code == 2 and json.loads(err)["field"] == "config"


def test_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "profile", "--x-grid", "0:2:5", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()


def test_numbers_round_trip(capsys):
    _, out, _ = run(capsys, "solve", "--precision", "17")
    body = json.loads(out)
    cs = coef.solve_all(PlasmaParameters(0.0, 0.1))
    c = body["coefficients"]["z0a1"]
    assert complex(c["re"], c["im"]) == pytest.approx(cs.z0a1, rel=1e-15)


@pytest.mark.parametrize("flag,value", [("--precision", "0"), ("--threads", "0")])
def test_output_option_validation(capsys, flag, value):
    assert run(capsys, "solve", flag, value)[0] == 2


def test_parse_helpers():
    assert cli.parse_complex("1.5,-2") == complex(1.5, -2)
    assert cli.parse_complex("3") == 3
    assert np.array_equal(cli.parse_range("0:1:3", "x"), [0.0, 0.5, 1.0])
    with pytest.raises(cli.ValidationError):
        cli.parse_complex("a,b")
    with pytest.raises(cli.ValidationError):
        cli.parse_range("0:1", "x")
