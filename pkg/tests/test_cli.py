import csv
import hashlib
import json

import pytest

from merid.cli import EXIT_NUMERICAL, EXIT_PRECONDITION, EXIT_USAGE, fmt, main
from merid.protocol import fringe_spacing

STAMP = ["--timestamp", "2000-01-01T00:00:00Z"]


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path), *STAMP])


def rows(path):
    with open(path) as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


def test_fmt():
    assert fmt(None) == "" and fmt(0.1) == "0.10000000000000001" and fmt("x") == "x"
    assert float(fmt(1 / 3)) == 1 / 3


def test_rates_default_has_six_rows(tmp_path):
    assert run(tmp_path, "rates") == 0
    r = rows(tmp_path / "rates.csv")
    assert [x["source"] for x in r] == ["air", "blackbody", "csl", "qg", "dp", "k"]
    assert r[1]["gamma_per_s"] == "" and r[1]["kind"] == "pure-quadratic"


def test_rates_csl_at_a_csl_carries_shape_factor(tmp_path):
    assert run(tmp_path, "rates", "--models", "csl", "--diameter-nm", "200") == 0
    from merid.constants import CONST, DEFAULTS
    s = DEFAULTS.sphere(100e-9)
    g = float(rows(tmp_path / "rates.csv")[0]["gamma_per_s"])
    assert g / ((s.mass / CONST.m_nucleon) ** 2 * 1e-16) == pytest.approx(0.62, abs=0.005)


def test_collapse_beats_blackbody_at_low_temperature(tmp_path):
    for D in ("100", "500", "2000"):
        assert run(tmp_path, "rates", "--diameter-nm", D) == 0
        lam = {x["source"]: float(x["Lambda_per_m2_s"]) for x in rows(tmp_path / "rates.csv")}
        assert all(lam[m] > lam["blackbody"] for m in ("csl", "qg", "dp", "k"))


def test_unknown_model_is_usage_error(tmp_path, capsys):
    assert run(tmp_path, "rates", "--models", "grw") == EXIT_USAGE
    assert "csl:adler=<mult>" in capsys.readouterr().err


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_coherence_summary(tmp_path):
    assert run(tmp_path, "coherence", "--diameter-nm", "100", "--tint-k", "200") == 0
    summ = json.loads((tmp_path / "coherence.json").read_text())
    data = rows(tmp_path / "coherence.csv")
    xi = [float(r["xi_m"]) for r in data]
    i = max(range(len(xi)), key=xi.__getitem__)
    assert 0 < i < len(xi) - 1
    assert float(data[i]["t_s"]) == pytest.approx(summ["t_max_s"], rel=0.05)
    assert xi[i] == pytest.approx(summ["xi_max_m"], rel=5e-3)


def test_coherence_unbounded_without_decoherence(tmp_path):
    assert run(tmp_path, "coherence", "--models", "none") == 0
    summ = json.loads((tmp_path / "coherence.json").read_text())
    assert summ["unbounded"] and summ["t_max_s"] is None
    xi = [float(r["xi_m"]) for r in rows(tmp_path / "coherence.csv")]
    assert xi == sorted(xi)


def test_diagram_and_manifest(tmp_path, capsys):
    assert run(tmp_path, "diagram", "--models", "csl", "--tint-k", "100", "--resolution", "16") == 0
    assert "green region" in capsys.readouterr().out
    man = json.loads((tmp_path / "diagram_manifest.json").read_text())
    assert man["timestamp"] == "2000-01-01T00:00:00Z"
    for o in man["outputs"]:
        assert hashlib.sha256((tmp_path / o["path"]).read_bytes()).hexdigest() == o["sha256"]
    assert {o["path"] for o in man["outputs"]} == {"diagram.csv", "diagram.json"}
    summ = json.loads((tmp_path / "diagram.json").read_text())
    lo, hi = summ["green_extent_m"]
    assert 50e-9 <= lo and hi <= 750e-9


def test_diagram_without_collapse_has_blank_green(tmp_path):
    assert run(tmp_path, "diagram", "--resolution", "8") == 0
    assert all(r["green_lo_m"] == "" for r in rows(tmp_path / "diagram.csv"))


def test_diagram_empty_range(tmp_path):
    assert run(tmp_path, "diagram", "--d-min-nm", "500", "--d-max-nm", "100") == EXIT_USAGE


def test_manifest_rerun_is_bit_exact(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["optomech", "--set", "finesse=2e5", "--out", str(a), *STAMP]) == 0
    assert main(["optomech", "--config", str(a / "optomech_manifest.json"), "--out", str(b), *STAMP]) == 0
    assert (a / "optomech.csv").read_bytes() == (b / "optomech.csv").read_bytes()
    assert (a / "optomech_manifest.json").read_text().replace(str(a), "") == \
        (b / "optomech_manifest.json").read_text().replace(str(b), "")


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"finesse": 1e4, "waist": 2e-6}))
    assert main(["optomech", "--config", str(cfg), "--set", "finesse=3e4", "--out", str(tmp_path), *STAMP]) == 0
    man = json.loads((tmp_path / "optomech_manifest.json").read_text())
    assert man["parameters"]["finesse"] == 3e4 and man["parameters"]["waist"] == 2e-6
    assert main(["optomech", "--set", "bogus=1", "--out", str(tmp_path)]) == EXIT_USAGE


def test_optomech_branch_flip(tmp_path):
    assert run(tmp_path, "optomech", "--d-min-nm", "10", "--d-max-nm", "100", "--points", "50") == 0
    data = rows(tmp_path / "optomech.csv")
    for r in data:
        adi, sca = float(r["t1_adiabatic_s"]), float(r["t1_scattering_s"])
        assert r["branch"] == ("adiabatic" if adi <= sca else "scattering")
        assert float(r["t1_om_s"]) == min(adi, sca)
    assert data[0]["branch"] == "adiabatic" and data[-1]["branch"] == "scattering"
    assert 0.1e-3 <= float(data[0]["t1_om_s"]) <= 100e-3
    assert float(data[0]["chi_max"]) >= 10


def test_interfere_reference_point(tmp_path):
    assert run(tmp_path, "interfere", "--tint-k", "100", "--models", "csl,qg") == 0
    summ = json.loads((tmp_path / "interfere.json").read_text())
    st = summ["stacks"]
    assert st["none"]["visibility"] == pytest.approx(1.0, abs=0.02)
    assert st["standard"]["visibility"] > st["standard+csl"]["visibility"] > st["standard+qg"]["visibility"]
    from merid.constants import DEFAULTS
    m = DEFAULTS.sphere(50e-9).mass
    assert summ["x_f_m"] == pytest.approx(fringe_spacing(m, summ["d_m"], summ["t2_s"]), rel=1e-14)
    head = (tmp_path / "pattern_standard_csl.csv").read_text().splitlines()[:9]
    assert head[0] == "# stack=standard+csl" and head[8] == "x_m,P_per_m"


def test_interfere_precondition_failure(tmp_path, capsys):
    assert run(tmp_path, "interfere", "--d-nm", "1000", "--tint-k", "100") == EXIT_PRECONDITION
    assert "precondition i" in capsys.readouterr().err


def test_interfere_numerical_failure(tmp_path, capsys):
    # a slit far narrower than the grid budget allows
    assert run(tmp_path, "interfere", "--tint-k", "100", "--chi", "1e9", "--d-nm", "100") == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_bad_numbers_are_usage_errors(tmp_path):
    assert run(tmp_path, "rates", "--diameter-nm", "-5") == EXIT_USAGE
    assert run(tmp_path, "rates", "--pressure-torr", "nan") == EXIT_USAGE
