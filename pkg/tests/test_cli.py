from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from hairclip import cli, design, simulation
from hairclip.config import validate

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
REF = str(CONFIGS / "reference.json")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(autouse=True)
def _cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def k2_csv(tmp_path):
    d = np.linspace(0, 20, 41)
    p = tmp_path / "k2.csv"
    p.write_text("disp_mm,load_N\n" + "".join(f"{x:.6f},{0.2186 * x:.9f}\n" for x in d))
    return str(p)


@pytest.fixture
def trace_csv(tmp_path):
    t = np.arange(0, 1001) * 1e-3
    y = np.zeros_like(t)
    m = (t > 0.3) & (t < 0.446)
    y[m] = 34.0 * 4 * (t[m] - 0.3) * (0.446 - t[m]) / 0.146**2
    p = tmp_path / "trace.csv"
    p.write_text("t_s,x_mm,y_mm\n" + "".join(f"{a:.3f},{313 * a:.6f},{b:.9f}\n" for a, b in zip(t, y)))
    return str(p)


def test_analyze_json_validates(capsys):
    code, out, _ = run(capsys, "--config", REF, "--json", "analyze")
    assert code == 0
    rep = json.loads(out)
    validate(rep, "output.schema.json")
    assert 140 <= rep["t_star_ms"] <= 160
    assert rep["static_deflection"]["deflection_mm"]["K1"] == pytest.approx(34.45, abs=0.01)


def test_analyze_text_header_names_convention(capsys):
    _, out_pl, _ = run(capsys, "analyze")
    code, out_wa, _ = run(capsys, "analyze", "--convention", "weak-axis")
    assert code == 0
    assert out_wa.splitlines()[0].startswith("# analyze [weak-axis]")
    assert out_pl != out_wa


def test_missing_field_exit_2(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"material": {"E_MPa": 1730}, "geometry": {"l_mm": 129.1, "h_mm": 15, "t_mm": 0.381}}))
    code, out, err = run(capsys, "--config", str(p), "analyze")
    assert code == 2 and "geometry.D_mm" in err and out == ""


def test_sweep_csv_and_reference_row(capsys):
    code, out, _ = run(capsys, "--config", REF, "sweep")
    assert code == 0
    rows = design.read_csv(out)
    assert len(rows) == 650
    _, one, _ = run(capsys, "--config", REF, "sweep", "--l-range", "129.1,129.1,5", "--D-range", "16,16,1")
    (row,) = design.read_csv(one)
    _, rep, _ = run(capsys, "--config", REF, "--json", "analyze")
    rep = json.loads(rep)
    assert row.psi_l == pytest.approx(rep["psi_l_rad"], rel=1e-5)
    assert row.U_barr * 1e3 == pytest.approx(rep["U_barr_mJ"], rel=1e-5)
    assert row.t_star * 1e3 == pytest.approx(rep["t_star_ms"], rel=1e-5)


def test_sweep_json_summary(capsys, tmp_path):
    code, out, _ = run(capsys, "--config", REF, "--json", "--out", str(tmp_path / "o"), "sweep")
    rep = json.loads(out)
    validate(rep, "output.schema.json")
    assert rep["rows"] == 650 and rep["grid_shape"] == [25, 26]
    assert (tmp_path / "o" / "sweep.csv").exists()


def test_optimize_and_infeasible(capsys):
    code, out, _ = run(capsys, "--config", REF, "--json", "optimize")
    rep = json.loads(out)
    validate(rep, "output.schema.json")
    assert code == 0 and "budget" in rep["active_constraints"]
    assert rep["best"]["U_barr_mJ"] <= 50.0
    code, _, err = run(capsys, "--config", REF, "optimize", "--budget-mJ", "1")
    assert code == 4 and "infeasible" in err


def test_simulate_metrics(capsys, tmp_path):
    code, out, _ = run(capsys, "--json", "--out", str(tmp_path), "simulate", "--duration", "3")
    rep = json.loads(out)
    validate(rep, "output.schema.json")
    assert code == 0
    assert rep["metrics"]["speed_mm_s"] > 0 and 0 <= rep["metrics"]["air_frac"] <= 1
    back = simulation.read_trajectory_csv((tmp_path / "trajectory.csv").read_text())
    assert len(back["t_s"]) == 3001


def test_simulate_isotropic_override(capsys):
    code, out, _ = run(capsys, "--config", str(CONFIGS / "isotropic.json"), "--json", "simulate")
    assert code == 0 and abs(json.loads(out)["metrics"]["speed_mm_s"]) < 1


def test_simulate_instability_exit_5(capsys, tmp_path):
    p = tmp_path / "c.json"
    raw = json.loads((CONFIGS / "reference.json").read_text())
    raw["robot"]["contact_stiffness_N_m"] = 1e9
    p.write_text(json.dumps(raw))
    code, _, err = run(capsys, "--config", str(p), "simulate", "--duration", "1.5")
    assert code == 5 and "unstable" in err


def test_suite_prints_r2(capsys, tmp_path):
    p = tmp_path / "suite.json"
    p.write_text(json.dumps({"entries": [
        {"label": f"f{f}", "actuation": {"frequency_Hz": f}, "duration_s": 2.0} for f in (1.5, 2.0, 2.5)]}))
    code, out, _ = run(capsys, "simulate", "--suite", str(p))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ",".join(simulation.SUITE_HEADER)
    assert len(lines) == 5 and "R2 =" in lines[-1]
    code, out, _ = run(capsys, "--json", "simulate", "--suite", str(p))
    rep = json.loads(out)
    validate(rep, "output.schema.json")
    assert rep["speed_vs_frequency_fit"]["r2"] > 0.9


def test_fit_bending(capsys, k2_csv):
    code, out, _ = run(capsys, "--json", "fit-bending", k2_csv)
    rep = json.loads(out)
    validate(rep, "output.schema.json")
    assert rep["K_N_mm"] == pytest.approx(0.2186, rel=1e-12)


@pytest.mark.parametrize("text,line", [("", "line 1"), ("disp_mm,load_N\n0,0\n1,x\n", "line 3")])
def test_fit_bending_malformed(capsys, tmp_path, text, line):
    p = tmp_path / "b.csv"
    p.write_text(text)
    code, _, err = run(capsys, "fit-bending", str(p))
    assert code == 2 and line in err


def test_metrics(capsys, trace_csv):
    code, out, _ = run(capsys, "--json", "metrics", trace_csv, "--body-length-mm", "200.6",
                       "--jump-threshold-mm", "0")
    rep = json.loads(out)
    validate(rep, "output.schema.json")
    assert round(rep["metrics"]["speed_bl_s"], 2) == 1.56
    assert rep["metrics"]["jump_air_time_ms"] == pytest.approx(146.0, abs=1e-6)
    assert rep["metrics"]["jump_apex_mm"] == pytest.approx(34.0, abs=1e-6)
    assert "peak_tip_angular_velocity_deg_s" in rep["missing"]


def test_plot_data_files(capsys, tmp_path, k2_csv):
    out = tmp_path / "p"
    assert run(capsys, "--plot-data", "--out", str(out), "analyze")[0] == 0
    assert run(capsys, "--plot-data", "--out", str(out), "fit-bending", k2_csv)[0] == 0
    for name in ("landscape.dat", "mode_shape.dat", "bending.dat", "analyze.json", "fit_bending.json"):
        assert (out / name).exists()
    data = np.loadtxt(out / "landscape.dat")
    assert data.shape == (101, 2)


def test_flags_after_subcommand(capsys):
    code, out, _ = run(capsys, "analyze", "--json", "--config", REF)
    assert code == 0 and json.loads(out)["command"] == "analyze"


@pytest.mark.parametrize(
    "argv",
    [["analyze"], ["--json", "analyze", "--convention", "weak-axis"], ["sweep", "--l-range", "100,120,10"],
     ["--json", "optimize"], ["--json", "simulate", "--duration", "1.5"]],
)
def test_byte_identical_reruns(capsys, tmp_path, argv):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "--config", REF, "--out", str(tmp_path / "o"), *argv)
        assert code == 0
        files = {p.name: p.read_bytes() for p in sorted((tmp_path / "o").glob("*"))}
        outs.append((out, files))
    assert outs[0] == outs[1]
