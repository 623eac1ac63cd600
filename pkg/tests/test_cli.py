"""End-to-end command-line checks through subprocess, matching real usage."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from thermolight import (
    ReferenceSolarSpectrum,
    SampledSpectrum,
    SpectrumKind,
    atmospheric_correction,
    q1d_psd_per_wavelength,
    read_spectrum_csv,
    slit_transmission,
    write_spectrum_csv,
)
from thermolight.data_pipeline import SlitGeometry
from scipy.integrate import trapezoid


def run_cli(*args, expect_code=0):
    proc = subprocess.run(
        [sys.executable, "-m", "thermolight", *args],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == expect_code, f"exit {proc.returncode}\n{proc.stdout}\n{proc.stderr}"
    return proc


def test_spectrum_q1d_wavelength(tmp_path):
    proc = run_cli(
        "spectrum", "--temperature-k", "5800", "--family", "q1d",
        "--domain", "wavelength", "--band-nm", "500", "1200",
        "--points", "201", "--json", "--out", str(tmp_path),
    )
    out = json.loads(proc.stdout)
    assert out["analytic_peak_nm"] == pytest.approx(879.21, abs=0.01)
    assert abs(out["grid_peak_nm"] - 879.21) < 4.0  # grid is 3.5 nm coarse
    assert out["band_integral"] > 0.0
    spec = read_spectrum_csv(tmp_path / "spectrum_q1d_per_wavelength.csv")
    assert spec.kind == SpectrumKind.PSD_PER_WAVELENGTH
    assert spec.wavelengths_nm.size == 201


def test_spectrum_planck_wavelength_and_svg(tmp_path):
    proc = run_cli(
        "spectrum", "--temperature-k", "5800", "--family", "planck",
        "--domain", "wavelength", "--svg", "--json", "--out", str(tmp_path),
    )
    out = json.loads(proc.stdout)
    assert out["analytic_peak_nm"] == pytest.approx(499.62, abs=0.01)
    svg = (tmp_path / "spectrum_planck_per_wavelength.svg").read_text()
    assert svg.lstrip().startswith("<svg")


def test_global_flags_before_subcommand(tmp_path):
    proc = run_cli(
        "--json", "--out", str(tmp_path),
        "spectrum", "--temperature-k", "5800", "--family", "q1d", "--domain", "omega",
    )
    out = json.loads(proc.stdout)
    assert out["analytic_peak_nm"] is None  # per-omega single-mode curve is monotone


def test_rate_report(tmp_path):
    proc = run_cli(
        "rate", "--ion", "ba138p", "--grayness", "5e-5", "--eta", "0.5",
        "--temperature-k", "5800", "--json", "--out", str(tmp_path),
    )
    out = json.loads(proc.stdout)
    assert out["phonon_rate_per_s"] == pytest.approx(-8.2, abs=0.9)
    assert 0.7 < out["eta_sp"] < 0.8
    on_disk = json.loads((tmp_path / "rate_report.json").read_text())
    assert on_disk["phonon_rate_per_s"] == out["phonon_rate_per_s"]


def test_rate_waist_variant(tmp_path):
    proc = run_cli(
        "rate", "--ion", "ba138p", "--waist-um", "20", "--eta", "0.5",
        "--temperature-k", "5800", "--json", "--out", str(tmp_path),
    )
    out = json.loads(proc.stdout)
    assert -9.0 < out["phonon_rate_per_s"] < -7.0


def test_rate_rejects_conflicting_geometry(tmp_path):
    proc = run_cli(
        "rate", "--ion", "ba138p", "--grayness", "5e-5", "--waist-um", "20",
        "--eta", "0.5", "--temperature-k", "5800", "--out", str(tmp_path),
        expect_code=1,
    )
    assert proc.stderr.startswith("error:")


def test_virtual_temp(tmp_path):
    proc = run_cli(
        "virtual-temp", "--ion", "ba138p", "--t-room-k", "300",
        "--t-sun-k", "5800", "--motion-hz", "1e6", "--json", "--out", str(tmp_path),
    )
    out = json.loads(proc.stdout)
    assert out["t_v_room_limit_k"] == pytest.approx(4.558463e-07, rel=1e-5)
    assert out["log10_n_bar_room_limit"] == pytest.approx(-45.723, abs=0.01)
    assert out["t_v_k"] == pytest.approx(4.74e-07, rel=1e-2)
    assert (tmp_path / "virtual_temp_report.json").exists()


def test_simulate_outputs_and_reproducibility(tmp_path):
    args = [
        "simulate", "--gamma", "11.06", "--eta-sp", "0.74",
        "--step-duration-s", "1e-3", "--n-initial", "5", "--t-max-s", "1.0",
        "--trajectories", "20", "--grid-points", "51",
        "--write-trajectories", "2", "--seed", "42", "--json",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    proc = run_cli(*args, "--out", str(a))
    out = json.loads(proc.stdout)
    stats = out["stats"]
    assert stats["n_trajectories"] == 20
    assert stats["slope_per_s"] < 0.0
    assert "mean_n" not in stats  # curves go to the file, not stdout
    assert out["renewal_slope_per_s"] == pytest.approx(-8.11796, abs=1e-4)
    header = (a / "trajectory_000.csv").read_text().splitlines()[0]
    assert header == "time_s,n,internal_state"
    assert (a / "trajectory_001.csv").exists()
    assert not (a / "trajectory_002.csv").exists()
    summary = json.loads((a / "ensemble_summary.json").read_text())
    assert len(summary["stats"]["mean_n"]) == 51
    ode_lines = (a / "rate_equation.csv").read_text().splitlines()
    assert ode_lines[0] == "time_s,n"
    t0, n0 = ode_lines[1].split(",")
    assert float(t0) == 0.0 and float(n0) == 5.0

    run_cli(*args, "--out", str(b))
    assert (a / "ensemble_summary.json").read_bytes() == (b / "ensemble_summary.json").read_bytes()
    c = tmp_path / "c"
    run_cli(*[arg if arg != "42" else "43" for arg in args], "--out", str(c))
    assert (a / "ensemble_summary.json").read_bytes() != (c / "ensemble_summary.json").read_bytes()


def test_reduce_round_trip(tmp_path):
    t_true, eta_true = 5800.0, 0.72
    corr = atmospheric_correction(ReferenceSolarSpectrum.load_bundled(), t_true)
    geom = SlitGeometry(slit_width_m=50e-6, distance_m=10e-3, mode_field_radius_m=2.25e-6)

    resp_grid = np.linspace(380.0, 1000.0, 63)
    resp_vals = 0.8 + 0.1 * np.sin(resp_grid / 90.0)
    np.savetxt(
        tmp_path / "resp.csv",
        np.column_stack([resp_grid, resp_vals]),
        delimiter=",",
        header="wavelength_nm,value",
        comments="",
    )

    grid = np.arange(390.0, 950.5, 1.0)
    ideal = np.array([q1d_psd_per_wavelength(l, t_true) for l in grid])
    ground = eta_true * ideal * corr.interpolate(grid)
    counts = ground * slit_transmission(geom, grid) * np.interp(grid, resp_grid, resp_vals)
    write_spectrum_csv(
        tmp_path / "raw.csv", SampledSpectrum(grid, counts * 1e9, SpectrumKind.COUNTS)
    )
    in_band = (grid >= 400.0) & (grid <= 900.0)
    power = float(trapezoid(ground[in_band], grid[in_band]))

    proc = run_cli(
        "reduce", "--raw", str(tmp_path / "raw.csv"),
        "--response", str(tmp_path / "resp.csv"),
        "--power-w", repr(power), "--temperature-k", "5800",
        "--json", "--out", str(tmp_path),
    )
    out = json.loads(proc.stdout)
    report = json.loads((tmp_path / "fit_report.json").read_text())
    assert set(report) == {"T_K", "residual", "eta_band_avg", "band_nm"}
    assert report["T_K"] == pytest.approx(t_true, rel=0.02)
    assert report["eta_band_avg"] == pytest.approx(eta_true, rel=0.05)
    assert report["residual"] < 0.05
    assert out["T_K"] == report["T_K"]
    cal = read_spectrum_csv(tmp_path / "calibrated_psd.csv")
    assert cal.kind == SpectrumKind.PSD_PER_WAVELENGTH
    eff = read_spectrum_csv(tmp_path / "efficiency.csv")
    assert float(np.median(eff.values)) == pytest.approx(eta_true, rel=0.05)


def test_config_file_merge_and_rejection(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"temperature_k": 5000, "family": "q1d", "domain": "wavelength"}))
    proc = run_cli("spectrum", "--config", str(cfg), "--json", "--out", str(tmp_path))
    out = json.loads(proc.stdout)
    peak_5000 = 879.21 * 5800.0 / 5000.0
    assert out["analytic_peak_nm"] == pytest.approx(peak_5000, abs=0.02)

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus_knob": 1}))
    proc = run_cli("spectrum", "--config", str(bad), "--out", str(tmp_path), expect_code=1)
    assert proc.stderr.startswith("error:")


def test_missing_required_flag_errors(tmp_path):
    proc = run_cli("rate", "--out", str(tmp_path), expect_code=1)
    assert proc.stderr.startswith("error:")


def test_check_reports_all_criteria(tmp_path):
    proc = run_cli("check", "--out", str(tmp_path))
    lines = [l for l in proc.stdout.splitlines() if l.strip().startswith("PASS")]
    assert len(lines) == 9
    assert "FAIL" not in proc.stdout
