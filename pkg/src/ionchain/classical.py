"""Classical point-charge dynamics for the trapped chain.

Everything here is dimensionless: time in units of 1/omega3, length in
units of the chain length scale, energy in units of M * omega3^2 * ell^2.
The equations of motion contain alpha as the only parameter, so one
trajectory serves every ion species and drive frequency at once.

The integrator is plain velocity Verlet with a fixed step.  Symplecticity
keeps the sampled energy bounded instead of drifting, which is what the
mode-energy bookkeeping below relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnstableTrajectoryError
from .modes import ModeBasis

# Any coordinate beyond this is a runaway ion, not a chain oscillation.
POSITION_BOUND = 1.0e3

# Fraction of samples averaged at each end for the energy-drift estimate.
# Instantaneous Verlet energy wobbles at O((w*dt)^2); windowed means cancel
# the wobble and expose genuine secular drift.
DRIFT_WINDOW = 0.1


@dataclass(frozen=True)
class Trajectory:
    """Sampled phase-space history of one integration run.

    positions carry the equilibrium offsets; total_energy is measured
    relative to the static chain so a quiet run sits near zero.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    total_energy: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        vel = np.asarray(self.velocities, dtype=float)
        en = np.asarray(self.total_energy, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("trajectory needs at least two samples")
        if pos.shape != (t.size,) + pos.shape[1:] or pos.ndim != 3 or pos.shape[2] != 3:
            raise ValueError("positions must have shape (samples, ions, 3)")
        if vel.shape != pos.shape:
            raise ValueError("velocities must match positions in shape")
        if en.shape != t.shape:
            raise ValueError("total_energy must have one value per sample")
        for name, arr in (("times", t), ("positions", pos),
                          ("velocities", vel), ("total_energy", en)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def n_ions(self) -> int:
        return self.positions.shape[1]

    def energy_drift(self) -> float:
        """Relative secular energy change between the first and last windows."""
        k = max(2, int(self.n_samples * DRIFT_WINDOW))
        head = float(np.mean(self.total_energy[:k]))
        tail = float(np.mean(self.total_energy[-k:]))
        scale = max(abs(head), abs(tail), 1e-300)
        return abs(tail - head) / scale


def _pair_geometry(positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise separation vectors and distances, with the diagonal masked."""
    diff = positions[..., :, None, :] - positions[..., None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    n = positions.shape[-2]
    eye = np.eye(n, dtype=bool)
    off = ~eye
    if np.any(dist[..., off] == 0.0):
        raise ValueError("coincident ion positions")
    # park the diagonal at 1 so inverse powers stay finite
    dist = dist + eye
    return diff, dist


def accelerations(positions: np.ndarray, alpha: float) -> np.ndarray:
    """Dimensionless force per unit mass on each ion.

    positions has shape (..., n, 3) with axes (x, y, z); the trap pulls
    with stiffness 1/alpha transversely and 1 axially, and every pair
    repels with the inverse-square Coulomb term.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim < 2 or pos.shape[-1] != 3:
        raise ValueError("positions must have shape (..., n, 3)")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    diff, dist = _pair_geometry(pos)
    inv3 = dist ** -3
    n = pos.shape[-2]
    inv3 = inv3 * ~np.eye(n, dtype=bool)
    coulomb = np.sum(diff * inv3[..., None], axis=-2)
    stiff = np.array([1.0 / alpha, 1.0 / alpha, 1.0])
    return coulomb - pos * stiff


def potential_energy(positions: np.ndarray, alpha: float) -> np.ndarray:
    """Trap plus Coulomb potential, shape (...,) over leading axes."""
    pos = np.asarray(positions, dtype=float)
    stiff = np.array([1.0 / alpha, 1.0 / alpha, 1.0])
    trap = 0.5 * np.sum(pos * pos * stiff, axis=(-2, -1))
    _, dist = _pair_geometry(pos)
    n = pos.shape[-2]
    pair = np.triu(np.ones((n, n), dtype=bool), k=1)
    coulomb = np.sum((1.0 / dist) * pair, axis=(-2, -1))
    return trap + coulomb


def _potential_offset(pos: np.ndarray, ref: np.ndarray, alpha: float) -> float:
    """V(pos) - V(ref) evaluated without subtracting two large potentials.

    A naive difference loses every digit below V(ref) * eps, which swamps
    the tiny energies of small-amplitude runs.  Difference-of-squares
    forms keep the roundoff scaled to the offset itself.
    """
    stiff = np.array([1.0 / alpha, 1.0 / alpha, 1.0])
    dp = pos - ref
    trap = 0.5 * float(np.sum(dp * (pos + ref) * stiff))
    # pair separations built from per-ion displacements, so the change in
    # r^2 never touches the O(1) separation roundoff
    n = pos.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    d0 = (ref[:, None, :] - ref[None, :, :])[iu, ju]
    dz = (dp[:, None, :] - dp[None, :, :])[iu, ju]
    r02 = np.einsum("pk,pk->p", d0, d0)
    # r^2 - r0^2 = 2 d0.dz + |dz|^2
    cross = 2.0 * np.einsum("pk,pk->p", d0, dz) + np.einsum("pk,pk->p", dz, dz)
    r0 = np.sqrt(r02)
    r = np.sqrt(r02 + cross)
    # 1/r - 1/r0 = (r0^2 - r^2) / (r * r0 * (r + r0))
    coulomb = float(np.sum(-cross / (r * r0 * (r + r0))))
    return trap + coulomb


def _assemble_initial(u: np.ndarray, basis: ModeBasis,
                      displacements: dict[tuple[str, int], float] | None,
                      velocities: dict[tuple[str, int], float] | None,
                      ) -> tuple[np.ndarray, np.ndarray]:
    n = u.size
    pos = np.zeros((n, 3))
    pos[:, 2] = u
    vel = np.zeros((n, 3))
    axis_of = {"x": 0, "y": 1, "z": 2}
    for target, spec in ((pos, displacements), (vel, velocities)):
        for (direction, p), amp in (spec or {}).items():
            if direction not in axis_of:
                raise ValueError(f"unknown direction {direction!r}")
            if not 1 <= p <= n:
                raise ValueError(f"mode index {p} out of range for {n} ions")
            target[:, axis_of[direction]] += amp * basis.vectors[:, p - 1]
    return pos, vel


def integrate(u: np.ndarray, basis: ModeBasis,
              displacements: dict[tuple[str, int], float] | None = None,
              velocities: dict[tuple[str, int], float] | None = None,
              dt: float = 1.0e-3, t_final: float = 100.0,
              stride: int = 1) -> Trajectory:
    """Integrate the chain from mode-coordinate initial conditions.

    displacements and velocities map ("x"|"y"|"z", mode index 1..n) to
    dimensionless amplitudes; omitted modes start at rest on the axis.
    Samples are kept every `stride` steps, including step zero.
    """
    u = np.asarray(u, dtype=float)
    alpha = basis.alpha
    if u.size != basis.mu.size:
        raise ValueError("equilibrium and mode basis sizes disagree")
    if dt <= 0.0 or t_final <= 0.0:
        raise ValueError("dt and t_final must be positive")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    pos, vel = _assemble_initial(u, basis, displacements, velocities)
    n_steps = int(round(t_final / dt))
    if n_steps < 1:
        raise ValueError("t_final shorter than one step")

    eq_pos = np.zeros((u.size, 3))
    eq_pos[:, 2] = u

    # local force evaluation without the checks of accelerations(); the
    # sampling hook below catches blowups (including the NaNs a collision
    # would produce) before anything is stored
    n = u.size
    diag = np.arange(n)
    stiff = np.array([1.0 / alpha, 1.0 / alpha, 1.0])

    def force(p: np.ndarray) -> np.ndarray:
        diff = p[:, None, :] - p[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        d2[diag, diag] = 1.0
        inv3 = d2 ** -1.5
        inv3[diag, diag] = 0.0
        return np.einsum("ijk,ij->ik", diff, inv3) - p * stiff

    samples = n_steps // stride + 1
    times = np.empty(samples)
    traj_pos = np.empty((samples, n, 3))
    traj_vel = np.empty_like(traj_pos)
    energy = np.empty(samples)

    def record(k: int, step: int) -> None:
        if not np.isfinite(pos).all() or np.max(np.abs(pos)) > POSITION_BOUND:
            raise UnstableTrajectoryError(
                f"ion coordinate exceeded {POSITION_BOUND:g} at t = {step * dt:g}")
        times[k] = step * dt
        traj_pos[k] = pos
        traj_vel[k] = vel
        kinetic = 0.5 * float(np.sum(vel * vel))
        energy[k] = kinetic + _potential_offset(pos, eq_pos, alpha)

    record(0, 0)
    acc = force(pos)
    k = 1
    for step in range(1, n_steps + 1):
        vel += 0.5 * dt * acc
        pos += dt * vel
        acc = force(pos)
        vel += 0.5 * dt * acc
        if step % stride == 0:
            record(k, step)
            k += 1
    return Trajectory(times=times, positions=traj_pos[:k],
                      velocities=traj_vel[:k], total_energy=energy[:k])


@dataclass(frozen=True)
class ModeProjection:
    """Normal-mode coordinates and quadratic energies along a trajectory.

    coordinates and energies are keyed by direction ("x", "y", "z") with
    arrays of shape (samples, modes); total sums every mode and direction.
    """

    coordinates: dict[str, np.ndarray]
    velocities: dict[str, np.ndarray]
    energies: dict[str, np.ndarray]
    total: np.ndarray


def mode_projection(trajectory: Trajectory, basis: ModeBasis,
                    u: np.ndarray) -> ModeProjection:
    """Project a trajectory onto the linear normal modes.

    Axial mode energies use the axial eigenvalues, transverse ones use the
    transverse eigenvalues; in the linear regime the grand total matches
    the trajectory energy.
    """
    u = np.asarray(u, dtype=float)
    if trajectory.n_ions != u.size or u.size != basis.mu.size:
        raise ValueError("trajectory, equilibrium and basis sizes disagree")
    v = basis.vectors
    coords: dict[str, np.ndarray] = {}
    vels: dict[str, np.ndarray] = {}
    energies: dict[str, np.ndarray] = {}
    for direction, axis, eig in (("x", 0, basis.gamma),
                                 ("y", 1, basis.gamma),
                                 ("z", 2, basis.mu)):
        disp = trajectory.positions[:, :, axis]
        if direction == "z":
            disp = disp - u
        q = disp @ v
        qdot = trajectory.velocities[:, :, axis] @ v
        coords[direction] = q
        vels[direction] = qdot
        energies[direction] = 0.5 * (qdot * qdot + eig * q * q)
    total = sum(e.sum(axis=1) for e in energies.values())
    return ModeProjection(coordinates=coords, velocities=vels,
                          energies=energies, total=total)


def spectrum(series: np.ndarray, dt: float, n_peaks: int = 1) -> np.ndarray:
    """Dominant angular frequencies of a real sampled series.

    Hann-windowed DFT with parabolic interpolation of the log magnitude
    around each local maximum; peaks come back strongest first.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if y.size < 16:
        raise ValueError("series too short for a spectrum (need >= 16 samples)")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if n_peaks < 1:
        raise ValueError("n_peaks must be at least 1")
    window = np.hanning(y.size)
    mag = np.abs(np.fft.rfft((y - y.mean()) * window))
    # interior local maxima only; the DC bin is removed by the mean shift
    interior = mag[1:-1]
    is_peak = (interior > mag[:-2]) & (interior >= mag[2:])
    peak_bins = np.nonzero(is_peak)[0] + 1
    if peak_bins.size == 0:
        raise ValueError("no spectral peak found")
    order = np.argsort(mag[peak_bins])[::-1][:n_peaks]
    freqs = []
    for bin_idx in peak_bins[order]:
        left, center, right = mag[bin_idx - 1:bin_idx + 2]
        floor = 1e-300
        la, ca, ra = (np.log(max(x, floor)) for x in (left, center, right))
        denom = la - 2.0 * ca + ra
        shift = 0.0 if denom == 0.0 else 0.5 * (la - ra) / denom
        freqs.append(2.0 * np.pi * (bin_idx + shift) / (y.size * dt))
    return np.array(freqs)
