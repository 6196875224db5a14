import csv
import io
import json

import numpy as np
import pytest

from kolab import __version__
from kolab.cli import main
from kolab.config import parse_config
from kolab.errors import ConfigError
from kolab.exponents import particular_coefficients
from kolab.radial import sample_particular
from kolab.report import dumps_json, report_dict, to_csv

MODEL = {"n_dim": 3, "p": 2, "q": 2, "delta": 2, "mu": 2}


def _run(tmp_path, kind, cfg, fmt="json", name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    code = main([kind, "--config", str(path), "--out", str(out), "--format", fmt])
    return code, out


def _summary(out, kind):
    return json.loads((out / f"{kind.replace('-', '_')}.json").read_text())


def test_exponents_json(tmp_path):
    code, out = _run(tmp_path, "exponents", {"params": MODEL})
    assert code == 0
    s = _summary(out, "exponents")
    assert s["result"]["big_d"] == 3 and s["result"]["gamma_ab"] == 2 and s["result"]["xi_ab"] == 2
    assert s["version"] == __version__ and s["config"]["params"]["kind"] == "absorption"


def test_fixed_points_csv_row(tmp_path):
    code, out = _run(tmp_path, "phase-fixed-points", {"params": MODEL}, fmt="csv")
    assert code == 0
    lines = (out / "phase_fixed_points.csv").read_text().splitlines()
    assert lines[0] == "label,X,Y,Z,W,l1,l2,l3,l4,unstable_dim"
    assert "S0,-2,0,3,7,-2,6,-3,-7,1" in lines


def test_invalid_p_exits_2(tmp_path, capsys):
    code, _ = _run(tmp_path, "exponents", {"params": dict(MODEL, p=1)})
    assert code == 2
    assert "1 < p" in capsys.readouterr().err


@pytest.mark.parametrize("cfg", [
    {"params": MODEL, "colour": "red"},
    {"params": dict(MODEL, n=3)},
    {"params": MODEL, "options": {"u0": 1, "tol": -1e-8}},
    {"params": MODEL, "options": {"u0": 1, "rtol": 1e-8}},
])
def test_bad_configs_exit_2(tmp_path, cfg):
    assert _run(tmp_path, "solve", cfg)[0] == 2


def test_shoot_source_needs_one_selector():
    src = {"type": "shoot", "label": "S0", "eig_index": 1}
    with pytest.raises(ConfigError):
        parse_config("verify-punctual", {"params": MODEL, "options": {"source": src}})


def test_report_json_round_trip(tmp_path):
    cfg = {"params": MODEL, "options": {"source": {"type": "particular"}, "rhos": [0.01, 0.02, 0.04, 0.08],
                                        "center_factor": 4}}
    code, out = _run(tmp_path, "verify-wolff", cfg)
    assert code == 0
    s = _summary(out, "verify-wolff")
    assert s["verdict"] == "Bounded" and s["passed"]
    assert s["config"]["options"]["quad_tol"] == 1e-10
    assert json.loads(dumps_json(s)) == s
    consts = [r["constant"] for r in s["result"]["records"]]
    assert max(consts) / min(consts) - 1 < 1e-8


def test_byte_identical_repeats(tmp_path):
    cfg = {"params": MODEL, "options": {"u0": 1, "v0": 1}}
    _, out1 = _run(tmp_path, "solve", cfg, fmt="csv")
    a = [(out1 / n).read_bytes() for n in ("solve.json", "solve.csv")]
    _, out2 = _run(tmp_path, "solve", cfg, fmt="csv")
    b = [(out2 / n).read_bytes() for n in ("solve.json", "solve.csv")]
    assert a == b


def test_zero_solution_two_line_csv(tmp_path):
    code, out = _run(tmp_path, "solve", {"params": MODEL, "options": {"u0": 0, "v0": 0}}, fmt="csv")
    assert code == 0
    lines = (out / "solve.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[0] == "r,u,v,du,dv"
    assert lines[1].split(",")[1:] == ["0", "0", "0", "0"]


def test_particular_profile_csv():
    from kolab.exponents import SystemParams
    params = SystemParams(**MODEL)
    part = particular_coefficients(params)
    rows = list(csv.DictReader(io.StringIO(to_csv(sample_particular(params, part)))))
    r = np.array([float(x["r"]) for x in rows])
    u = np.array([float(x["u"]) for x in rows])
    np.testing.assert_allclose(u, part.a_star * r ** -2.0, rtol=1e-14)
    # regridding through the text round trip stays on the power law
    grid = np.geomspace(r[0], r[-1], 97)
    back = np.exp(np.interp(np.log(grid), np.log(r), np.log(u)))
    np.testing.assert_allclose(back, 2.0 * grid ** -2.0, rtol=1e-12)


def test_failed_expectation_exits_1(tmp_path):
    cfg = {"params": MODEL, "options": {"source": {"type": "particular"}, "rhos": [0.01, 0.02]},
           "expect": "Unbounded"}
    assert _run(tmp_path, "verify-wolff", cfg)[0] == 1


def test_bootstrap_cli(tmp_path):
    base = {"y": {"exponent": -2}, "phi": {"exponent": -1}, "d": 0.5, "h": 1, "big_k": 1, "big_m": 1,
            "eps0": 0.5}
    code, out = _run(tmp_path, "verify-bootstrap", {"options": base})
    assert code == 0 and _summary(out, "verify-bootstrap")["result"]["c_formula"] == 64
    code, out = _run(tmp_path, "verify-bootstrap", {"options": dict(base, y={"exponent": -3})})
    assert code == 1
    assert _summary(out, "verify-bootstrap")["result"]["inequality"] == "recurrence"


def test_report_csv_columns(model_particular):
    from kolab.estimates import punctual_ratio
    rep = punctual_ratio(model_particular)
    text = to_csv(rep)
    assert text.splitlines()[0] == "scale,lhs,rhs,constant"
    assert report_dict(rep)["verdict"] == "Bounded"
