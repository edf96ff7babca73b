import csv
import io
import json
import subprocess

import numpy as np
import pytest

from ionchain import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    return [dict(zip(header, row)) for row in rows[1:]]


# --- stdout paths -------------------------------------------------------

def test_equilibrium_table(capsys):
    code, out, err = run_cli(capsys, "equilibrium", "--n", "2")
    assert code == 0 and err == ""
    assert "ion" in out and "u" in out
    assert "-0.629961" in out and " 0.629961" in out


def test_equilibrium_json_with_units(capsys):
    code, out, _ = run_cli(capsys, "equilibrium", "--n", "3",
                           "--species", "Ca40", "--omega3", "1.0e6",
                           "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["name"] == "equilibrium_n3"
    rows = doc["rows"]
    assert len(rows) == 3
    assert abs(rows[0]["u"] + 1.07722) < 1e-5
    assert rows[1]["z_m"] == 0.0
    # micron-scale spacing for a calcium chain at 1 MHz
    scale = rows[2]["z_m"] / rows[2]["u"]
    assert 1e-6 < scale < 1e-5


def test_equilibrium_precision_flag(capsys):
    code, out, _ = run_cli(capsys, "equilibrium", "--n", "2",
                           "--precision", "12")
    assert code == 0
    assert "-0.629960524947" in out


def test_modes_row_values(capsys):
    code, out, _ = run_cli(capsys, "modes", "--n", "6",
                           "--alpha", "0.09151", "--format", "csv")
    assert code == 0
    rows = parse_csv(out)
    assert len(rows) == 6
    row5 = rows[4]
    assert abs(float(row5["mu"]) - 13.5139) < 1e-3
    assert abs(float(row5["gamma"]) - 4.67083) < 1e-3
    # eigenvector columns are present and normalized (to print precision)
    vec = np.array([float(row5[f"b{i}"]) for i in range(1, 7)])
    assert abs(np.dot(vec, vec) - 1.0) < 1e-5


def test_tables_single_chain(capsys):
    code, out, _ = run_cli(capsys, "tables", "--n", "2", "--format", "csv")
    assert code == 0
    # three artifacts on stdout, separated by banner lines
    assert "== resonances_second_kind ==" in out
    assert "== resonances_first_kind ==" in out
    assert "== anisotropy_bounds ==" in out
    assert "2,2,2,2," in out          # the single degenerate entry
    assert "0.571429" in out          # both its alpha and the lower bound


def test_epsilon_closed_form(capsys):
    code, out, _ = run_cli(capsys, "epsilon", "--species", "Be9",
                           "--omega3", "5.0e6", "--format", "csv")
    assert code == 0
    row = parse_csv(out)[0]
    assert abs(float(row["epsilon"]) - 1.06e-3) / 1.06e-3 < 1e-2
    assert abs(float(row["eps_omega3_over_2pi_hz"]) - 5295.7) < 1.0


def test_epsilon_with_resonance_target(capsys):
    code, out, _ = run_cli(capsys, "epsilon", "--species", "Cd112",
                           "--omega3", "2.8e6", "--n", "6",
                           "--resonance", "6,5,5", "--format", "csv")
    assert code == 0
    row = parse_csv(out)[0]
    assert abs(float(row["alpha_res"]) - 0.0915097) < 1e-6
    assert abs(float(row["rate_over_eps_omega3"]) - 7.3551) < 1e-3
    assert float(row["Gamma_over_2pi_hz"]) > 1e3


# --- failure modes ------------------------------------------------------

def test_bad_count_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["equilibrium", "--n", "0"])
    assert exc.value.code == 2


def test_zigzag_alpha_fails_cleanly(capsys):
    code, out, err = run_cli(capsys, "modes", "--n", "6", "--alpha", "0.5")
    assert code == 1
    assert out == ""
    assert err.startswith("error:") and "zig-zag" in err


def test_unknown_species(capsys):
    code, _, err = run_cli(capsys, "equilibrium", "--n", "2",
                           "--species", "Xx99", "--omega3", "1e6")
    assert code == 1
    assert "unknown species" in err


def test_species_without_frequency(capsys):
    code, _, err = run_cli(capsys, "equilibrium", "--n", "2",
                           "--species", "Ca40")
    assert code == 1
    assert "--omega3" in err


def test_resonance_needs_chain_size(capsys):
    code, _, err = run_cli(capsys, "epsilon", "--species", "Ca40",
                           "--omega3", "2e6", "--resonance", "6,5,5")
    assert code == 1
    assert "--n is required" in err


def test_unknown_resonance(capsys):
    code, _, err = run_cli(capsys, "epsilon", "--species", "Ca40",
                           "--omega3", "2e6", "--n", "6",
                           "--resonance", "9,9,9")
    assert code == 1
    assert "no second-kind resonance" in err


def test_malformed_config_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 6\njust some words\n")
    code, _, err = run_cli(capsys, "simulate", str(cfg))
    assert code == 1
    assert "expected 'key = value'" in err


def test_classical_config_needs_anisotropy(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 2\ndisplacement = z2:1e-3\n")
    code, _, err = run_cli(capsys, "classical", str(cfg))
    assert code == 1
    assert "either 'alpha' or 'resonance'" in err


def test_bad_mode_amplitude(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 2\nalpha = 0.5\ndisplacement = zz:0.1\n")
    code, _, err = run_cli(capsys, "classical", str(cfg))
    assert code == 1
    assert "bad mode amplitude" in err


# --- file output, manifests, determinism --------------------------------

SIM_CONFIG = """\
# three-mode down-conversion check
n = 6
species = Ca40
omega3 = 2.0e6
resonance = 6,5,5
cutoff = 2
duration = 0.5
samples = 11
mode = both
"""


def test_simulate_writes_files_and_manifests(tmp_path, capsys):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(SIM_CONFIG)
    out_dir = tmp_path / "out"
    code, out, _ = run_cli(capsys, "--format", "csv",
                           "--output-dir", str(out_dir),
                           "simulate", str(cfg))
    assert code == 0
    rwa = out_dir / "simulate_rwa.csv"
    full = out_dir / "simulate_full.csv"
    assert rwa.exists() and full.exists()
    assert str(rwa) in out and str(full) in out

    manifest = json.loads((out_dir / "simulate_rwa.csv.manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["parameters"]["n"] == 6
    assert manifest["parameters"]["resonance"] == [6, 5, 5]
    assert manifest["constants_version"]
    assert len(manifest["output_paths"]) == 2
    assert manifest["wall_time_s"] >= 0.0

    rows = parse_csv(rwa.read_text())
    assert len(rows) == 11
    first, last = rows[0], rows[-1]
    assert float(first["pop_axial"]) == 1.0
    assert float(first["entropy_x"]) == 0.0
    assert abs(float(last["norm"]) - 1.0) < 1e-9
    # pump depletion follows the closed form in down-conversion time units
    expected = np.cos(np.sqrt(2.0) * 0.5) ** 2
    assert abs(float(last["pop_axial"]) - expected) < 5e-6
    pops = [float(r["pop_axial"]) for r in rows]
    assert all(a > b for a, b in zip(pops, pops[1:]))


def test_simulate_output_is_deterministic(tmp_path, capsys):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(SIM_CONFIG.replace("mode = both", "mode = rwa"))
    blobs = []
    for tag in ("a", "b"):
        out_dir = tmp_path / tag
        code, *_ = run_cli(capsys, "--format", "csv",
                           "--output-dir", str(out_dir),
                           "simulate", str(cfg))
        assert code == 0
        blobs.append((out_dir / "simulate_rwa.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_output_dir_environment_fallback(tmp_path, capsys, monkeypatch):
    env_dir = tmp_path / "from_env"
    flag_dir = tmp_path / "from_flag"
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(env_dir))
    code, *_ = run_cli(capsys, "equilibrium", "--n", "2")
    assert code == 0
    assert (env_dir / "equilibrium_n2.txt").exists()
    # an explicit flag wins over the environment
    code, *_ = run_cli(capsys, "--output-dir", str(flag_dir),
                       "equilibrium", "--n", "2")
    assert code == 0
    assert (flag_dir / "equilibrium_n2.txt").exists()


def test_tables_json_files(tmp_path, capsys):
    out_dir = tmp_path / "tables"
    code, *_ = run_cli(capsys, "--format", "json",
                       "--output-dir", str(out_dir),
                       "tables", "--n", "2..3")
    assert code == 0
    bounds = json.loads((out_dir / "anisotropy_bounds.json").read_text())
    by_n = {row["n_ions"]: row for row in bounds["rows"]}
    assert abs(by_n[2]["alpha_min"] - 4.0 / 7.0) < 1e-6
    assert by_n[2]["alpha_crit"] == 1.0
    assert abs(by_n[3]["alpha_min"] - 0.309168) < 1e-6
    assert abs(by_n[3]["alpha_crit"] - 0.416667) < 1e-6
    second = json.loads((out_dir / "resonances_second_kind.json").read_text())
    assert len(second["rows"]) == 1 + 2   # one entry for N=2, two for N=3


def test_classical_run_artifacts(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "n = 2\nalpha = 0.5\ndisplacement = z2:1e-3\n"
        "dt = 2e-3\nt_final = 40\nstride = 10\n")
    out_dir = tmp_path / "out"
    code, *_ = run_cli(capsys, "--format", "csv",
                       "--output-dir", str(out_dir),
                       "classical", str(cfg))
    assert code == 0
    energies = parse_csv((out_dir / "classical_energies.csv").read_text())
    assert abs(float(energies[-1]["t"]) - 40.0) < 1e-9
    assert abs(float(energies[-1]["energy_drift"])) < 1e-5
    # only the seeded stretch mode shows up in the spectra
    spectra = parse_csv((out_dir / "classical_spectra.csv").read_text())
    assert len(spectra) == 1
    peak = spectra[0]
    assert peak["direction"] == "z" and peak["p"] == "2"
    assert abs(float(peak["omega_linear"]) - np.sqrt(3.0)) < 1e-5
    assert abs(float(peak["rel_diff"])) < 1e-2
    manifest = json.loads(
        (out_dir / "classical_energies.csv.manifest.json").read_text())
    assert manifest["parameters"]["windowed_energy_drift"] < 1e-6


def test_classical_transfer_wiring(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "n = 6\nresonance = 6,5,5\ndetune = 0.2\n"
        "displacement = z5:0.01,x5:1e-6,x6:1e-6,y5:1e-6,y6:1e-6\n"
        "dt = 2e-3\nt_final = 20\nstride = 20\n")
    out_dir = tmp_path / "out"
    code, *_ = run_cli(capsys, "--format", "csv",
                       "--output-dir", str(out_dir),
                       "classical", str(cfg))
    assert code == 0
    transfer = parse_csv((out_dir / "classical_transfer.csv").read_text())
    labels = [row["label"] for row in transfer]
    assert labels == ["resonant", "detuned_low", "detuned_high"]
    alphas = [float(row["alpha"]) for row in transfer]
    assert alphas[1] < alphas[0] < alphas[2]
    assert all(float(row["pair_energy_gain"]) >= 0.0 for row in transfer)


def test_console_script_entry_point():
    proc = subprocess.run(["ionchain", "equilibrium", "--n", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "-1.07722" in proc.stdout
