"""Command-line frontend for the chain pipeline.

Each subcommand wraps one computation stage and emits tables: to standard
output by default, to files (csv/json/plain text) when an output directory
is selected via --output-dir or the IONCHAIN_OUTPUT_DIR variable.  Every
written file gets a sibling manifest recording the command, parameters,
constants version and wall time.

Exit codes: 0 success, 1 domain error (zig-zag regime, unknown species,
bad config values), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import time

import numpy as np

from . import classical as classical_mod
from . import coupling as coupling_mod
from . import equilibrium as equilibrium_mod
from . import modes as modes_mod
from . import quantum as quantum_mod
from . import resonances as resonances_mod
from .constants import ATOMIC_MASS, CODATA_VERSION
from .errors import IonChainError

OUTPUT_DIR_ENV = "IONCHAIN_OUTPUT_DIR"

_MODE_AMP_RE = re.compile(r"([xyz])([0-9]+):(.+)")


# --- formatting and output plumbing --------------------------------------

def _fmt(value, precision: int) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.{precision}g}"
    return str(value)


class Artifact:
    """One named table destined for stdout or a file."""

    def __init__(self, name: str, headers: list[str], rows: list[tuple],
                 notes: list[str] | None = None):
        self.name = name
        self.headers = headers
        self.rows = rows
        self.notes = notes or []

    def as_text(self, precision: int) -> str:
        cells = [[_fmt(v, precision) for v in row] for row in self.rows]
        widths = [len(h) for h in self.headers]
        for row in cells:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], len(cell))
        lines = [f"# {note}" for note in self.notes]
        lines.append("  ".join(h.ljust(w) for h, w in zip(self.headers, widths)))
        for row in cells:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
        return "\n".join(lines) + "\n"

    def as_csv(self, precision: int) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.headers)
        for row in self.rows:
            writer.writerow([_fmt(v, precision) for v in row])
        return buf.getvalue()

    def as_json(self, precision: int) -> str:
        records = []
        for row in self.rows:
            rec = {}
            for key, value in zip(self.headers, row):
                if isinstance(value, (float, np.floating)):
                    rec[key] = float(_fmt(value, precision))
                elif isinstance(value, (int, np.integer)):
                    rec[key] = int(value)
                else:
                    rec[key] = value
            records.append(rec)
        return json.dumps({"name": self.name, "rows": records}, indent=2) + "\n"


def _emit(artifacts: list[Artifact], command: str, parameters: dict,
          args) -> int:
    """Print or write all artifacts; manifests accompany written files."""
    started = getattr(args, "_t0", None)
    out_dir = args.output_dir or os.environ.get(OUTPUT_DIR_ENV)
    fmt = args.format
    if out_dir is None:
        for art in artifacts:
            if len(artifacts) > 1:
                print(f"== {art.name} ==")
            render = {"table": art.as_text, "csv": art.as_csv,
                      "json": art.as_json}[fmt]
            sys.stdout.write(render(args.precision))
        return 0
    os.makedirs(out_dir, exist_ok=True)
    ext = {"table": ".txt", "csv": ".csv", "json": ".json"}[fmt]
    paths = []
    for art in artifacts:
        path = os.path.join(out_dir, art.name + ext)
        render = {"table": art.as_text, "csv": art.as_csv,
                  "json": art.as_json}[fmt]
        with open(path, "w") as fh:
            fh.write(render(args.precision))
        paths.append(path)
    wall = 0.0 if started is None else time.perf_counter() - started
    manifest = {
        "command": command,
        "parameters": parameters,
        "constants_version": CODATA_VERSION,
        "output_paths": paths,
        "wall_time_s": round(wall, 3),
    }
    for path in paths:
        with open(path + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    for path in paths:
        print(path)
    return 0


# --- shared argument handling --------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _n_range(text: str) -> tuple[int, int]:
    """Parse '6' or '2..10' into an inclusive range."""
    if ".." in text:
        lo_text, hi_text = text.split("..", 1)
    else:
        lo_text = hi_text = text
    try:
        lo, hi = int(lo_text), int(hi_text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range: {text!r}")
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range: {text!r}")
    return lo, hi


def _resolve_ion(name: str | None, mass_u: float | None):
    if mass_u is not None:
        label = name or "custom"
        return equilibrium_mod.IonSpecies(name=label, mass=mass_u * ATOMIC_MASS)
    if name is None:
        raise ValueError("a species name or --mass-u is required")
    return equilibrium_mod.species(name)


def _parse_resonance(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"resonance must be 'm,n,p', got {text!r}")
    try:
        m, n, p = (int(s) for s in parts)
    except ValueError:
        raise ValueError(f"resonance must be three integers, got {text!r}")
    return m, n, p


def _find_entry(n_ions: int, m: int, n: int, p: int):
    """Second-kind catalog entry with transverse pair {m, n} and pump p."""
    for entry in resonances_mod.build_catalog(n_ions):
        if entry.kind != resonances_mod.SECOND_KIND:
            continue
        if {entry.m, entry.n} == {m, n} and entry.p == p:
            return entry
    raise ValueError(
        f"no second-kind resonance {{{m},{n}}} <- {p} in the N = {n_ions} catalog")


def _parse_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _parse_mode_map(text: str, value_type=float) -> dict:
    """'z5:0.01,x6:1e-6' -> {("z",5): 0.01, ("x",6): 1e-6}."""
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        match = _MODE_AMP_RE.fullmatch(part)
        if match is None:
            raise ValueError(f"bad mode amplitude {part!r}, expected like z5:0.01")
        try:
            value = value_type(match.group(3))
        except ValueError:
            raise ValueError(f"bad amplitude value in {part!r}")
        out[(match.group(1), int(match.group(2)))] = value
    return out


# --- subcommands ----------------------------------------------------------

def cmd_equilibrium(args) -> int:
    u = equilibrium_mod.solve_equilibrium(args.n)
    headers = ["ion", "u"]
    notes = []
    params = {"n": args.n}
    rows: list[tuple] = []
    ell = None
    if args.species or args.mass_u:
        if args.omega3 is None:
            raise ValueError("--omega3 is required with a species")
        ion = _resolve_ion(args.species, args.mass_u)
        omega3 = 2.0 * np.pi * args.omega3
        ell = equilibrium_mod.length_scale(ion, omega3)
        headers.append("z_m")
        notes.append(f"length_scale_m = {_fmt(ell, args.precision)}")
        params.update(species=ion.name, omega3_hz=args.omega3,
                      length_scale_m=ell)
    for i, u_i in enumerate(u, start=1):
        row = [i, float(u_i)]
        if ell is not None:
            row.append(float(u_i) * ell)
        rows.append(tuple(row))
    art = Artifact(f"equilibrium_n{args.n}", headers, rows, notes)
    return _emit([art], "equilibrium", params, args)


def cmd_modes(args) -> int:
    u = equilibrium_mod.solve_equilibrium(args.n)
    basis = modes_mod.mode_basis(u, args.alpha)
    headers = ["p", "mu", "gamma", "nu_over_omega3", "Omega_over_omega3"]
    headers += [f"b{i}" for i in range(1, args.n + 1)]
    rows = []
    for p in range(args.n):
        row = [p + 1, float(basis.mu[p]), float(basis.gamma[p]),
               float(np.sqrt(basis.mu[p])), float(np.sqrt(basis.gamma[p]))]
        row += [float(b) for b in basis.vectors[:, p]]
        rows.append(tuple(row))
    art = Artifact(f"modes_n{args.n}", headers, rows)
    return _emit([art], "modes", {"n": args.n, "alpha": args.alpha}, args)


def cmd_tables(args) -> int:
    lo, hi = args.n
    second_rows, first_rows, bound_rows = [], [], []
    for n_ions in range(lo, hi + 1):
        u = equilibrium_mod.solve_equilibrium(n_ions)
        axial = modes_mod.axial_matrix(u)
        mu = np.linalg.eigvalsh(axial)
        bound_rows.append((n_ions,
                           float(resonances_mod.alpha_min(mu)),
                           float(modes_mod.critical_anisotropy(mu))))
        if n_ions < 2:
            continue
        for entry in resonances_mod.build_catalog(n_ions):
            row = (entry.n_ions, entry.m, entry.n, entry.p,
                   float(entry.coupling), float(entry.alpha_res))
            if entry.kind == resonances_mod.FIRST_KIND:
                first_rows.append(row)
            else:
                second_rows.append(row)
    res_headers = ["n_ions", "m", "n", "p", "coupling", "alpha"]
    artifacts = [
        Artifact("resonances_second_kind", res_headers, second_rows),
        Artifact("resonances_first_kind", res_headers, first_rows),
        Artifact("anisotropy_bounds", ["n_ions", "alpha_min", "alpha_crit"],
                 bound_rows),
    ]
    return _emit(artifacts, "tables", {"n_min": lo, "n_max": hi}, args)


def cmd_epsilon(args) -> int:
    ion = _resolve_ion(args.species, args.mass_u)
    omega3 = 2.0 * np.pi * args.omega3
    eps = quantum_mod.nonlinearity_epsilon(ion, omega3)
    headers = ["species", "omega3_hz", "epsilon", "eps_omega3_over_2pi_hz"]
    row = [ion.name, args.omega3, eps, eps * args.omega3]
    params = {"species": ion.name, "omega3_hz": args.omega3}
    if args.resonance is not None:
        if args.n is None:
            raise ValueError("--n is required with --resonance")
        m, n, p = _parse_resonance(args.resonance)
        entry = _find_entry(args.n, m, n, p)
        u = equilibrium_mod.solve_equilibrium(args.n)
        mu = np.linalg.eigvalsh(modes_mod.axial_matrix(u))
        coef = quantum_mod.rwa_coefficient(entry, mu)
        rate = quantum_mod.coupling_rate(eps, omega3, entry, mu)
        headers += ["alpha_res", "rate_over_eps_omega3", "Gamma_over_2pi_hz"]
        row += [float(entry.alpha_res), float(coef),
                float(rate / (2.0 * np.pi))]
        params.update(n=args.n, resonance=[m, n, p])
    art = Artifact("nonlinearity_scale", headers, [tuple(row)])
    return _emit([art], "epsilon", params, args)


def _config_get(cfg: dict, key: str, default, cast):
    if key not in cfg:
        if default is None:
            raise ValueError(f"config key {key!r} is required")
        return default
    try:
        return cast(cfg[key])
    except ValueError as exc:
        raise ValueError(f"config key {key!r}: {exc}")


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def cmd_simulate(args) -> int:
    cfg = _parse_config(args.config)
    n_ions = _config_get(cfg, "n", 6, int)
    species_name = cfg.get("species", "Ca40")
    mass_u = _config_get(cfg, "mass_u", 0.0, float) or None
    omega3_hz = _config_get(cfg, "omega3", 2.0e6, float)
    res_spec = _parse_resonance(cfg.get("resonance", "6,5,5"))
    cutoff = _config_get(cfg, "cutoff", 2, int)
    duration = _config_get(cfg, "duration", float(2.0 * np.pi), float)
    samples = _config_get(cfg, "samples", 201, int)
    if samples < 2:
        raise ValueError("config key 'samples' must be at least 2")
    flavor = args.mode or cfg.get("mode", "rwa")
    if flavor not in ("rwa", "full", "both"):
        raise ValueError(f"mode must be rwa, full or both, got {flavor!r}")

    entry = _find_entry(n_ions, *res_spec)
    alpha = _config_get(cfg, "alpha", float(entry.alpha_res), float)
    ion = _resolve_ion(species_name, mass_u)
    omega3 = 2.0 * np.pi * omega3_hz
    eps = quantum_mod.nonlinearity_epsilon(ion, omega3)

    u = equilibrium_mod.solve_equilibrium(n_ions)
    basis = modes_mod.mode_basis(u, alpha)
    tensors = coupling_mod.coupling_tensors(u, basis)
    fock = quantum_mod.FockBasis.uniform(
        quantum_mod.resonance_mode_set(entry), cutoff)
    rate_tau = abs(eps * quantum_mod.rwa_coefficient(entry, basis.mu))

    psi_occ, phi_occ, chi_occ = quantum_mod.down_conversion_states(fock, entry)
    initial_text = cfg.get("initial", f"z{entry.p}:1")
    occupations = _parse_mode_map(initial_text, value_type=int)
    state0 = quantum_mod.QuantumState(
        basis=fock, amplitudes=fock.number_state(occupations))

    h_free = quantum_mod.build_free_hamiltonian(fock, basis)
    hamiltonians = {}
    if flavor in ("rwa", "both"):
        hamiltonians["rwa"] = quantum_mod.build_rwa_interaction(
            fock, basis, tensors, eps, resonance=entry)
    if flavor in ("full", "both"):
        h_int = quantum_mod.build_full_interaction(fock, basis, tensors, eps)
        # counter-rotating terms only cancel through free evolution, so the
        # full run propagates under the complete generator
        hamiltonians["full"] = quantum_mod.HamiltonianMatrix(
            matrix=h_free.matrix + h_int.matrix, flavor="full_interaction",
            basis=fock)

    x_pair = tuple(mode for mode in fock.modes if mode[0] == "x")
    t_gamma = np.linspace(0.0, duration, samples)
    d_tau = (t_gamma[1] - t_gamma[0]) / rate_tau
    headers = ["t_gamma", "pop_axial", "pop_y_pair", "pop_x_pair",
               "norm", "entropy_x"]
    artifacts = []
    for label, h in sorted(hamiltonians.items()):
        state = state0
        rows = []
        for k in range(samples):
            if k > 0:
                state = quantum_mod.evolve(state, h, d_tau)
            rows.append((float(t_gamma[k]),
                         state.population(psi_occ),
                         state.population(phi_occ),
                         state.population(chi_occ),
                         state.norm(),
                         quantum_mod.entanglement_entropy(state, x_pair)))
        artifacts.append(Artifact(f"simulate_{label}", headers, rows))
    params = {
        "config": os.path.abspath(args.config), "n": n_ions,
        "species": ion.name, "omega3_hz": omega3_hz, "alpha": alpha,
        "resonance": list(res_spec), "cutoff": cutoff, "epsilon": eps,
        "rate_per_omega3_t": rate_tau, "initial": initial_text,
        "duration_gamma_t": duration, "samples": samples, "mode": flavor,
    }
    return _emit(artifacts, "simulate", params, args)


def cmd_classical(args) -> int:
    cfg = _parse_config(args.config)
    n_ions = _config_get(cfg, "n", None, int)
    dt = _config_get(cfg, "dt", 1.0e-3, float)
    t_final = _config_get(cfg, "t_final", 100.0, float)
    stride = _config_get(cfg, "stride", 10, int)
    displacements = _parse_mode_map(cfg.get("displacement", ""))
    velocities = _parse_mode_map(cfg.get("velocity", ""))
    detune = _config_get(cfg, "detune", 0.0, float)
    res_text = cfg.get("resonance")
    entry = None
    if res_text is not None:
        entry = _find_entry(n_ions, *_parse_resonance(res_text))
    if "alpha" in cfg:
        alpha = _config_get(cfg, "alpha", None, float)
    elif entry is not None:
        alpha = float(entry.alpha_res)
    else:
        raise ValueError("config needs either 'alpha' or 'resonance'")

    u = equilibrium_mod.solve_equilibrium(n_ions)

    def run(run_alpha: float):
        basis = modes_mod.mode_basis(u, run_alpha)
        traj = classical_mod.integrate(
            u, basis, displacements=displacements, velocities=velocities,
            dt=dt, t_final=t_final, stride=stride)
        return basis, traj, classical_mod.mode_projection(traj, basis, u)

    basis, traj, proj = run(alpha)

    energy_headers = ["t"]
    for direction in ("z", "x", "y"):
        energy_headers += [f"e_{direction}{p}" for p in range(1, n_ions + 1)]
    energy_headers += ["total", "energy_drift"]
    e0 = traj.total_energy[0]
    drift_scale = max(abs(e0), 1e-300)
    energy_rows = []
    for k in range(traj.n_samples):
        row = [float(traj.times[k])]
        for direction in ("z", "x", "y"):
            row += [float(v) for v in proj.energies[direction][k]]
        row += [float(traj.total_energy[k]),
                float((traj.total_energy[k] - e0) / drift_scale)]
        energy_rows.append(tuple(row))

    spectra_rows = []
    dt_sample = float(traj.times[1] - traj.times[0])
    for direction, eig in (("z", basis.mu), ("x", basis.gamma),
                           ("y", basis.gamma)):
        coords = proj.coordinates[direction]
        for p in range(n_ions):
            if float(np.max(np.abs(coords[:, p]))) <= 1e-10:
                continue
            peak = float(classical_mod.spectrum(coords[:, p], dt_sample)[0])
            linear = float(np.sqrt(eig[p]))
            spectra_rows.append((direction, p + 1, peak, linear,
                                 (peak - linear) / linear))
    artifacts = [
        Artifact("classical_energies", energy_headers, energy_rows),
        Artifact("classical_spectra",
                 ["direction", "p", "omega_peak", "omega_linear", "rel_diff"],
                 spectra_rows),
    ]

    params = {
        "config": os.path.abspath(args.config), "n": n_ions, "alpha": alpha,
        "dt": dt, "t_final": t_final, "stride": stride,
        "displacement": cfg.get("displacement", ""),
        "velocity": cfg.get("velocity", ""),
        "windowed_energy_drift": traj.energy_drift(),
    }

    if detune > 0.0:
        if entry is None:
            raise ValueError("'detune' needs a 'resonance' key to detune from")
        pair = sorted({entry.m, entry.n})

        def pair_gain(run_proj) -> float:
            series = sum(run_proj.energies[d][:, p - 1]
                         for d in ("x", "y") for p in pair)
            return float(np.max(series - series[0]))

        base_alpha = float(entry.alpha_res)
        runs = [("resonant", base_alpha, proj if alpha == base_alpha else None)]
        runs.append(("detuned_low", (1.0 - detune) * base_alpha, None))
        runs.append(("detuned_high", (1.0 + detune) * base_alpha, None))
        gains = {}
        for label, run_alpha, ready in runs:
            run_proj = ready if ready is not None else run(run_alpha)[2]
            gains[label] = pair_gain(run_proj)
        resonant = gains["resonant"]
        transfer_rows = []
        for label, run_alpha, _ in runs:
            gain = gains[label]
            ratio = resonant / gain if gain > 0.0 else float("inf")
            transfer_rows.append((label, run_alpha, gain, ratio))
        artifacts.append(Artifact(
            "classical_transfer",
            ["label", "alpha", "pair_energy_gain", "resonant_over_this"],
            transfer_rows))
        params["detune"] = detune
    return _emit(artifacts, "classical", params, args)


# --- parser wiring --------------------------------------------------------

def _output_options(parser, trailing: bool = False):
    """Rendering flags, accepted before or after the subcommand.

    The trailing copies default to SUPPRESS so they only override the
    top-level values when actually given.
    """
    def default(value):
        return argparse.SUPPRESS if trailing else value

    parser.add_argument("--format", choices=("table", "csv", "json"),
                        default=default("table"), help="output rendering")
    parser.add_argument("--precision", type=_positive_int, default=default(6),
                        help="significant digits for printed numbers")
    parser.add_argument("--output-dir", default=default(None),
                        help=f"write files here instead of stdout "
                             f"(or set {OUTPUT_DIR_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionchain",
        description="Linear ion-chain phonon coupling toolkit.")
    _output_options(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name: str, help_text: str):
        sp = sub.add_parser(name, help=help_text)
        _output_options(sp, trailing=True)
        return sp

    p_eq = add_parser("equilibrium", "equilibrium ion positions")
    p_eq.add_argument("--n", type=_positive_int, required=True)
    p_eq.add_argument("--species", default=None)
    p_eq.add_argument("--mass-u", type=_positive_float, default=None)
    p_eq.add_argument("--omega3", type=_positive_float, default=None,
                      help="axial trap frequency in Hz")
    p_eq.set_defaults(func=cmd_equilibrium)

    p_md = add_parser("modes", "normal-mode table")
    p_md.add_argument("--n", type=_positive_int, required=True)
    p_md.add_argument("--alpha", type=_positive_float, required=True)
    p_md.set_defaults(func=cmd_modes)

    p_tb = add_parser("tables", "resonance catalog and bounds")
    p_tb.add_argument("--n", type=_n_range, required=True,
                      help="ion count or inclusive range like 2..10")
    p_tb.set_defaults(func=cmd_tables)

    p_si = add_parser("simulate", "quantum down-conversion run")
    p_si.add_argument("config", help="flat key = value config file")
    p_si.add_argument("--mode", choices=("rwa", "full", "both"), default=None)
    p_si.set_defaults(func=cmd_simulate)

    p_cl = add_parser("classical", "classical trajectory run")
    p_cl.add_argument("config", help="flat key = value config file")
    p_cl.set_defaults(func=cmd_classical)

    p_ep = add_parser("epsilon", "nonlinearity scale report")
    p_ep.add_argument("--species", default=None)
    p_ep.add_argument("--mass-u", type=_positive_float, default=None)
    p_ep.add_argument("--omega3", type=_positive_float, required=True,
                      help="axial trap frequency in Hz")
    p_ep.add_argument("--n", type=_positive_int, default=None)
    p_ep.add_argument("--resonance", default=None, help="m,n,p")
    p_ep.set_defaults(func=cmd_epsilon)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._t0 = time.perf_counter()
    try:
        return args.func(args)
    except (IonChainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
