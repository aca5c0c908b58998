import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from mbvdkit import FrequencySweep, ResonatorSpec, admittance, mbvd_from_spec
from mbvdkit.cli import main
from mbvdkit.io import (
    TouchstoneHeader,
    read_admittance_csv,
    read_design_config,
    read_touchstone,
    write_touchstone,
)

DATA = Path(__file__).parent / "data"
TEMPLATE = DATA / "ladder_template.json"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def design_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "design.json"
    assert main(["synthesize", "--config", str(TEMPLATE), "--out", str(path)]) == 0
    return path


@pytest.fixture
def resonator_file(tmp_path):
    path = tmp_path / "res.json"
    path.write_text(
        json.dumps(
            {"spec": {"fs_hz": 33e9, "k2": 0.3, "q": 13.0, "c0_f": 80e-15, "rs_ohm": 1.0,
                      "ls_h": 1.2665147955292224e-10}}
        )
    )
    return path


def write_s2p(path, freqs, s21, s11=None):
    s = np.zeros((len(freqs), 2, 2), dtype=complex)
    s[:, 1, 0] = s[:, 0, 1] = s21
    if s11 is not None:
        s[:, 0, 0] = s[:, 1, 1] = s11
    path.write_text(write_touchstone(TouchstoneHeader(), FrequencySweep(freqs, s)))
    return path


def test_synthesized_config_is_complete(design_file):
    cfg = read_design_config(design_file.read_text())
    c0s = {round(r.c0, 20) for _, r in cfg.design.stages}
    assert len(c0s) == 2
    assert cfg.optimizer["target_band_hz"] == [35e9, 42e9]


def test_synthesize_is_deterministic(design_file, tmp_path):
    again = tmp_path / "again.json"
    assert main(["synthesize", "--config", str(TEMPLATE), "--seed", "7", "--out", str(again)]) == 0
    assert again.read_text() == design_file.read_text()


def test_synthesize_band_outside_grid(capsys, tmp_path):
    out = tmp_path / "x.json"
    code, _, err = run(capsys, "synthesize", "--config", TEMPLATE, "--band", "100e9:110e9", "--out", out)
    assert code == 1
    assert "error" in err
    assert not out.exists()


def test_synthesize_bad_band_is_usage_error(capsys):
    code, _, _ = run(capsys, "synthesize", "--config", TEMPLATE, "--band", "banana")
    assert code == 2


def test_simulate_writes_sweep_and_metrics(capsys, design_file, tmp_path):
    s2p, met = tmp_path / "r.s2p", tmp_path / "m.json"
    code, out, _ = run(capsys, "simulate", "--config", design_file, "--out", s2p, "--metrics", met)
    assert code == 0 and out == ""
    m = json.loads(met.read_text())
    assert 36e9 <= m["f_center_hz"] <= 41e9
    _, sweep = read_touchstone(s2p.read_text())
    assert len(sweep) == 2001


def test_simulate_stdout(capsys, design_file):
    code, out, _ = run(capsys, "simulate", "--config", design_file)
    assert code == 0
    assert out.startswith("# GHz S RI R 50")
    _, sweep = read_touchstone(out)
    assert sweep.nports == 2


def test_simulate_empty_grid(capsys, tmp_path):
    raw = json.loads(TEMPLATE.read_text())
    raw["grid"]["points"] = 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(raw))
    code, _, err = run(capsys, "simulate", "--config", bad)
    assert code == 2
    assert "grid.points" in err


def test_simulate_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "--config", tmp_path / "nope.json")
    assert code == 2


def test_no_partial_outputs_on_domain_error(capsys, tmp_path):
    # A single shunt capacitor-like stage has no passband: metrics fail, and
    # the Touchstone file must not be left behind either.
    raw = json.loads(TEMPLATE.read_text())
    raw["stages"] = raw["stages"][:1]
    cfg = tmp_path / "one.json"
    cfg.write_text(json.dumps(raw))
    s2p, met = tmp_path / "r.s2p", tmp_path / "m.json"
    code, _, _ = run(capsys, "simulate", "--config", cfg, "--out", s2p, "--metrics", met)
    assert code == 1
    assert not s2p.exists() and not met.exists()


def test_synth_data_then_fit(capsys, resonator_file, tmp_path):
    data, fit = tmp_path / "y.csv", tmp_path / "fit.json"
    code, _, _ = run(
        capsys, "synth-data", "--spec", resonator_file, "--noise", "0.01", "--phase-noise", "0.5",
        "--seed", "4", "--out", data,
    )
    assert code == 0
    code, _, _ = run(capsys, "fit", "--data", data, "--out", fit)
    assert code == 0
    res = json.loads(fit.read_text())
    from mbvdkit import resonator_metrics

    p = mbvd_from_spec(ResonatorSpec(33e9, 0.3, 13.0, 80e-15, 1.0, 1.2665147955292224e-10))
    ref = resonator_metrics(p, np.linspace(30e9, 60e9, 601))
    assert res["metrics"]["k2"] == pytest.approx(ref.k2, rel=0.01)
    assert res["seed"] == 0 and res["residual"] > 0


def test_fit_one_port_touchstone(capsys, resonator_file, tmp_path):
    data, fit = tmp_path / "y.s1p", tmp_path / "fit.json"
    assert run(capsys, "synth-data", "--spec", resonator_file, "--format", "s1p", "--out", data)[0] == 0
    code, _, _ = run(capsys, "fit", "--data", data, "--out", fit, "--restarts", "2")
    assert code == 0
    res = json.loads(fit.read_text())
    assert res["params"]["c0_f"] == pytest.approx(80e-15, rel=0.01)


def test_fit_pure_capacitor(capsys, tmp_path):
    f = np.linspace(30e9, 60e9, 51)
    lines = ["freq_hz,y_re,y_im"] + [f"{float(x)!r},0,{float(2 * np.pi * x * 1e-13)!r}" for x in f]
    data = tmp_path / "cap.csv"
    data.write_text("\n".join(lines) + "\n")
    out = tmp_path / "fit.json"
    code, _, err = run(capsys, "fit", "--data", data, "--out", out)
    assert code == 1
    assert "sweep must contain fs and fp" in err
    assert not out.exists()


def test_synth_data_noiseless_is_exact(capsys, resonator_file):
    code, out1, _ = run(capsys, "synth-data", "--spec", resonator_file, "--points", "201")
    code2, out2, _ = run(capsys, "synth-data", "--spec", resonator_file, "--points", "201")
    assert code == code2 == 0 and out1 == out2
    f, y = read_admittance_csv(out1)
    p = mbvd_from_spec(ResonatorSpec(33e9, 0.3, 13.0, 80e-15, 1.0, 1.2665147955292224e-10))
    assert np.array_equal(y, admittance(p, np.linspace(30e9, 60e9, 201)))


def test_synth_data_seeded_noise(capsys, resonator_file):
    a = run(capsys, "synth-data", "--spec", resonator_file, "--noise", "0.01", "--seed", "1")[1]
    b = run(capsys, "synth-data", "--spec", resonator_file, "--noise", "0.01", "--seed", "1")[1]
    c = run(capsys, "synth-data", "--spec", resonator_file, "--noise", "0.01", "--seed", "2")[1]
    assert a == b != c


def test_synth_data_params_form(capsys, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"params": {"c0_f": 8e-14, "rm_ohm": 19.0, "lm_h": 1.2e-9, "cm_f": 1.9e-14}}))
    code, out, _ = run(capsys, "synth-data", "--spec", p, "--points", "5")
    assert code == 0 and len(out.splitlines()) == 6
    p.write_text(json.dumps({"params": {"c0_f": -1}}))
    assert run(capsys, "synth-data", "--spec", p)[0] == 2


def test_match_design(capsys, design_file, tmp_path):
    out = tmp_path / "match.json"
    code, _, _ = run(capsys, "match", "--config", design_file, "--out", out)
    assert code == 0
    res = json.loads(out.read_text())
    assert res["matched"]["il_db"] <= res["reference"]["il_db"]
    assert res["reference_z"] == {"r_ohm": 50.0, "x_ohm": 0.0}


def test_match_identity(capsys, tmp_path):
    s2p = write_s2p(tmp_path / "thru.s2p", np.linspace(1e9, 2e9, 5), 1.0)
    code, out, _ = run(capsys, "match", "--in", s2p)
    assert code == 0
    assert json.loads(out)["gt_peak"] == pytest.approx(1.0, abs=1e-9)


def test_match_malformed(capsys, tmp_path):
    bad = tmp_path / "bad.s2p"
    bad.write_text("# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n2 0 0 1\n")
    code, _, err = run(capsys, "match", "--in", bad)
    assert code == 2
    assert "line 3" in err


def test_match_needs_one_source(capsys, design_file, tmp_path):
    assert run(capsys, "match")[0] == 2
    s2p = write_s2p(tmp_path / "thru.s2p", np.linspace(1e9, 2e9, 5), 1.0)
    assert run(capsys, "match", "--in", s2p, "--config", design_file)[0] == 2


def test_metrics_brickwall(capsys, brickwall, tmp_path):
    s2p = write_s2p(tmp_path / "bw.s2p", brickwall.freqs, brickwall.s21)
    code, out, _ = run(capsys, "metrics", "--in", s2p)
    assert code == 0
    m = json.loads(out)
    assert m["il_db"] == pytest.approx(2.0, abs=1e-8)
    a = json.loads(run(capsys, "metrics", "--in", s2p, "--guard", "0")[1])
    b = json.loads(run(capsys, "metrics", "--in", s2p, "--guard", "0.5")[1])
    for k in ("il_db", "f_center_hz", "fbw_3db_pct", "band_lo_hz", "band_hi_hz"):
        assert a[k] == b[k]


def test_metrics_dump_trace(capsys, design_file, tmp_path):
    s2p, trace = tmp_path / "r.s2p", tmp_path / "t.csv"
    assert run(capsys, "simulate", "--config", design_file, "--out", s2p)[0] == 0
    code, _, _ = run(capsys, "metrics", "--in", s2p, "--dump-trace", trace)
    assert code == 0
    rows = trace.read_text().splitlines()
    assert rows[0] == "freq_hz,s21_db,s11_db"
    assert len(rows) == 2002


def test_metrics_no_passband(capsys, tmp_path):
    s2p = write_s2p(tmp_path / "flat.s2p", np.linspace(1e9, 2e9, 11), 0.5)
    assert run(capsys, "metrics", "--in", s2p)[0] == 1


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])
    assert exc.value.code == 2


def test_console_entry_points():
    r = subprocess.run([sys.executable, "-m", "mbvdkit", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "synth-data" in r.stdout
