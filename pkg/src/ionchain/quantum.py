"""Quantized phonon dynamics in a truncated number-state basis.

The mode oscillators are quantized with one ladder-operator family per
direction (z axial, x and y transverse). The cubic potential becomes,
in units of hbar*omega3 with dimensionless time tau = omega3*t,

    H_I = eps * sum_{mnp} D_mnp / mu_p^(1/4) * (a_p + a_p+)
          * [ 2/(mu_m mu_n)^(1/4) (a_m + a_m+)(a_n + a_n+)
            - 3/(gamma_m gamma_n)^(1/4) ((b_m + b_m+)(b_n + b_n+)
                                        + (c_m + c_m+)(c_n + c_n+)) ],

    eps = (1/(4 sqrt 2)) [hbar omega3 / (alpha_fsc^2 M c^2)]^(1/6),

where eps is the ion wavepacket width over four Coulomb lengths. Builders
sum the ordered triple sum literally (no hand-inserted symmetry factors);
the rotating-wave builder keeps only monomials whose interaction-picture
phase nearly vanishes, which at a catalog resonance reproduces the
down-conversion coupling with the expected collapsed coefficient
6 D_mnp / (mu_p gamma_m gamma_n)^(1/4).
"""

import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product as iter_product

import numpy as np

from . import constants
from .equilibrium import IonSpecies, length_scale
from .errors import NoResonantCouplingError
from .modes import ModeBasis
from .coupling import CouplingTensors
from .resonances import ResonanceEntry, SECOND_KIND

__all__ = [
    "NonlinearityScale",
    "FockBasis",
    "QuantumState",
    "HamiltonianMatrix",
    "nonlinearity_epsilon",
    "wavepacket_epsilon",
    "rwa_coefficient",
    "coupling_rate",
    "nonlinearity_scale",
    "resonance_mode_set",
    "down_conversion_states",
    "build_free_hamiltonian",
    "build_full_interaction",
    "build_rwa_interaction",
    "evolve",
    "three_state_solution",
    "entanglement_entropy",
]

DIRECTIONS = ("x", "y", "z")


# --- nonlinearity scale -------------------------------------------------

def nonlinearity_epsilon(ion: IonSpecies, omega3: float) -> float:
    """Dimensionless cubic-coupling strength for a species and trap.

    Uses the generalized fine-structure factor Q^2/(4 pi eps0 hbar c) so
    that this closed form and `wavepacket_epsilon` agree identically for
    any charge state.
    """
    if not omega3 > 0.0:
        raise ValueError(f"omega3 must be positive, got {omega3}")
    alpha_q = (
        ion.charge**2
        * constants.COULOMB_CONSTANT
        / (constants.HBAR * constants.SPEED_OF_LIGHT)
    )
    ratio = constants.HBAR * omega3 / (
        alpha_q**2 * ion.mass * constants.SPEED_OF_LIGHT**2
    )
    return ratio ** (1.0 / 6.0) / (4.0 * np.sqrt(2.0))


def wavepacket_epsilon(ion: IonSpecies, omega3: float) -> float:
    """Same quantity as the ground-state width over 4 Coulomb lengths."""
    sigma = np.sqrt(constants.HBAR / (2.0 * ion.mass * omega3))
    return sigma / (4.0 * length_scale(ion, omega3))


def rwa_coefficient(entry: ResonanceEntry, mu) -> float:
    """Collapsed coupling coefficient 6 D_mnp/(mu_p gamma_m gamma_n)^(1/4).

    Evaluated from the axial eigenvalues at the entry's own resonant
    anisotropy; signed like the coupling. Defined for nondegenerate
    second-kind entries, the setting of the three-state model.
    """
    if entry.kind != SECOND_KIND or entry.m == entry.n:
        raise ValueError(
            "collapsed coefficient applies to second-kind resonances with "
            "two distinct transverse modes"
        )
    mu = np.asarray(mu, dtype=float)
    base = 1.0 / entry.alpha_res + 0.5
    gm = base - 0.5 * mu[entry.m - 1]
    gn = base - 0.5 * mu[entry.n - 1]
    mp = mu[entry.p - 1]
    return 6.0 * entry.coupling / (mp * gm * gn) ** 0.25


def coupling_rate(eps: float, omega3: float, entry: ResonanceEntry, mu) -> float:
    """Down-conversion rate Gamma = eps*omega3*6D/(mu_p g_m g_n)^(1/4), rad/s."""
    return eps * omega3 * rwa_coefficient(entry, mu)


@dataclass(frozen=True)
class NonlinearityScale:
    """eps and, when a resonance is targeted, the rate Gamma in rad/s."""

    epsilon: float
    Gamma: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.epsilon > 0.1:
            warnings.warn(
                f"epsilon = {self.epsilon:.3g} is not small; the cubic "
                "term is not a perturbation",
                stacklevel=2,
            )


def nonlinearity_scale(
    ion: IonSpecies,
    omega3: float,
    entry: ResonanceEntry | None = None,
    mu=None,
) -> NonlinearityScale:
    eps = nonlinearity_epsilon(ion, omega3)
    gamma_rate = None
    if entry is not None:
        if mu is None:
            raise ValueError("axial eigenvalues needed to evaluate Gamma")
        gamma_rate = coupling_rate(eps, omega3, entry, mu)
    return NonlinearityScale(epsilon=eps, Gamma=gamma_rate)


# --- basis and states ---------------------------------------------------

def _as_mode(mode) -> tuple:
    direction, index = mode
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    index = int(index)
    if index < 1:
        raise ValueError(f"mode index must be >= 1, got {index}")
    return (direction, index)


@dataclass(frozen=True)
class FockBasis:
    """Truncated occupation-number basis over a chosen set of modes.

    modes are (direction, 1-based index) pairs; cutoffs are per-mode
    maximum occupations. Basis states enumerate occupations in mixed
    radix with the first listed mode as the slowest-varying digit.
    """

    modes: tuple
    cutoffs: tuple

    def __post_init__(self):
        modes = tuple(_as_mode(m) for m in self.modes)
        cutoffs = tuple(int(c) for c in self.cutoffs)
        if len(modes) != len(set(modes)):
            raise ValueError("every active mode may appear only once")
        if len(cutoffs) != len(modes):
            raise ValueError("need one cutoff per active mode")
        if any(c < 1 for c in cutoffs):
            raise ValueError("cutoffs must be >= 1")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "cutoffs", cutoffs)

    @classmethod
    def uniform(cls, modes, cutoff: int = 2) -> "FockBasis":
        modes = tuple(modes)
        return cls(modes=modes, cutoffs=(cutoff,) * len(modes))

    @property
    def dimension(self) -> int:
        dim = 1
        for c in self.cutoffs:
            dim *= c + 1
        return dim

    @property
    def shape(self) -> tuple:
        return tuple(c + 1 for c in self.cutoffs)

    def axis_of(self, mode) -> int:
        try:
            return self.modes.index(_as_mode(mode))
        except ValueError:
            raise ValueError(f"mode {mode} is not active in this basis") from None

    def index_of(self, occupations: dict) -> int:
        """Flat basis index of an occupation dictionary {mode: count}."""
        occ = [0] * len(self.modes)
        for mode, count in occupations.items():
            k = self.axis_of(mode)
            count = int(count)
            if not 0 <= count <= self.cutoffs[k]:
                raise ValueError(
                    f"occupation {count} of mode {mode} outside 0..{self.cutoffs[k]}"
                )
            occ[k] = count
        return int(np.ravel_multi_index(occ, self.shape))

    def occupations(self, index: int) -> dict:
        occ = np.unravel_index(int(index), self.shape)
        return {mode: int(n) for mode, n in zip(self.modes, occ)}

    def number_state(self, occupations: dict) -> np.ndarray:
        amps = np.zeros(self.dimension, dtype=complex)
        amps[self.index_of(occupations)] = 1.0
        return amps

    def lowering(self, mode) -> np.ndarray:
        return _lowering(self, _as_mode(mode))

    def raising(self, mode) -> np.ndarray:
        return _lowering(self, _as_mode(mode)).conj().T


@lru_cache(maxsize=256)
def _lowering(basis: FockBasis, mode: tuple) -> np.ndarray:
    k = basis.axis_of(mode)
    single = np.diag(np.sqrt(np.arange(1, basis.cutoffs[k] + 1)), k=1)
    op = np.eye(1)
    for j, c in enumerate(basis.cutoffs):
        op = np.kron(op, single if j == k else np.eye(c + 1))
    out = op.astype(complex)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class QuantumState:
    """Complex amplitudes over a FockBasis at dimensionless time tau."""

    basis: FockBasis
    amplitudes: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dimension,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, "
                f"basis dimension is {self.basis.dimension}"
            )
        if abs(np.linalg.norm(amps) - 1.0) > 1e-9:
            raise ValueError(
                f"state norm {np.linalg.norm(amps):.12f} deviates from 1 "
                "beyond 1e-9"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def population(self, occupations: dict) -> float:
        """Probability of one occupation pattern (unlisted modes = 0)."""
        return float(np.abs(self.amplitudes[self.basis.index_of(occupations)]) ** 2)

    def overlap(self, amplitudes: np.ndarray) -> complex:
        return complex(np.vdot(np.asarray(amplitudes, dtype=complex), self.amplitudes))


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hermitian matrix in units of hbar*omega3 over a FockBasis."""

    matrix: np.ndarray
    flavor: str
    basis: FockBasis

    def __post_init__(self):
        if self.flavor not in ("free", "full_interaction", "rwa_interaction"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        mat = np.asarray(self.matrix, dtype=complex)
        dim = self.basis.dimension
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match basis {dim}")
        scale = max(1.0, float(np.max(np.abs(mat))))
        if np.max(np.abs(mat - mat.conj().T)) > 1e-12 * scale:
            raise ValueError("matrix is not Hermitian to 1e-12 relative")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @cached_property
    def _eigensystem(self):
        return np.linalg.eigh(self.matrix)

    def expectation(self, state: QuantumState) -> float:
        return float(np.real(np.vdot(state.amplitudes, self.matrix @ state.amplitudes)))


# --- Hamiltonian builders -----------------------------------------------

def _mode_frequency(mode: tuple, mode_basis: ModeBasis) -> float:
    direction, index = mode
    if index > mode_basis.n_ions:
        raise ValueError(
            f"mode index {index} exceeds chain length {mode_basis.n_ions}"
        )
    if direction == "z":
        return float(np.sqrt(mode_basis.mu[index - 1]))
    return float(np.sqrt(mode_basis.gamma[index - 1]))


def _check_transverse_mirror(basis: FockBasis):
    x_set = {i for d, i in basis.modes if d == "x"}
    y_set = {i for d, i in basis.modes if d == "y"}
    if x_set != y_set:
        missing = sorted(
            [("y", i) for i in x_set - y_set] + [("x", i) for i in y_set - x_set]
        )
        raise ValueError(
            "incomplete active-mode set: the two transverse directions are "
            f"equivalent and must be activated in pairs; missing {missing}"
        )


def build_free_hamiltonian(basis: FockBasis, mode_basis: ModeBasis) -> HamiltonianMatrix:
    """Diagonal oscillator energies (zero-point offsets dropped)."""
    freqs = np.array([_mode_frequency(m, mode_basis) for m in basis.modes])
    occ = np.stack(
        np.unravel_index(np.arange(basis.dimension), basis.shape), axis=1
    )
    diag = occ @ freqs
    return HamiltonianMatrix(
        matrix=np.diag(diag.astype(complex)), flavor="free", basis=basis
    )


def _cubic_triples(basis: FockBasis, mode_basis: ModeBasis, tensors: CouplingTensors, eps: float):
    """Ordered cubic terms restricted to the active modes.

    Yields (coefficient, factors) where factors are three (mode, freq)
    position operators in the literal order axial-p, then m, then n.
    Terms touching inactive modes are dropped (documented truncation).
    """
    d = tensors.mode
    mu = mode_basis.mu
    gamma = mode_basis.gamma
    z_active = sorted(i for dd, i in basis.modes if dd == "z")
    per_direction = {
        "z": z_active,
        "x": sorted(i for dd, i in basis.modes if dd == "x"),
        "y": sorted(i for dd, i in basis.modes if dd == "y"),
    }
    for p in z_active:
        root_p = mu[p - 1] ** 0.25
        for direction, sign_weight in (("z", 2.0), ("x", -3.0), ("y", -3.0)):
            active = per_direction[direction]
            for m in active:
                for n in active:
                    if direction == "z":
                        weight = sign_weight / (mu[m - 1] * mu[n - 1]) ** 0.25
                    else:
                        weight = sign_weight / (gamma[m - 1] * gamma[n - 1]) ** 0.25
                    coef = eps * d[m - 1, n - 1, p - 1] / root_p * weight
                    factors = (
                        (("z", p), _mode_frequency(("z", p), mode_basis)),
                        ((direction, m), _mode_frequency((direction, m), mode_basis)),
                        ((direction, n), _mode_frequency((direction, n), mode_basis)),
                    )
                    yield coef, factors


def build_full_interaction(
    basis: FockBasis,
    mode_basis: ModeBasis,
    tensors: CouplingTensors,
    eps: float,
) -> HamiltonianMatrix:
    """Full cubic operator, counter-rotating terms and all, on the basis.

    The x and y transverse directions enter the potential identically,
    so the active set must contain them in mirrored pairs.
    """
    _check_transverse_mirror(basis)
    dim = basis.dimension
    h = np.zeros((dim, dim), dtype=complex)
    for coef, factors in _cubic_triples(basis, mode_basis, tensors, eps):
        if coef == 0.0:
            continue
        term = np.eye(dim, dtype=complex)
        for mode, _freq in factors:
            low = basis.lowering(mode)
            term = term @ (low + low.conj().T)
        h += coef * term
    return HamiltonianMatrix(matrix=h, flavor="full_interaction", basis=basis)


def build_rwa_interaction(
    basis: FockBasis,
    mode_basis: ModeBasis,
    tensors: CouplingTensors,
    eps: float,
    resonance: ResonanceEntry | None = None,
    cutoff: float = 1e-9,
) -> HamiltonianMatrix:
    """Rotating-wave reduction: keep only phase-matched cubic monomials.

    Each position factor splits into lowering (interaction-picture phase
    -freq) and raising (+freq) parts; a monomial survives if its summed
    phase has magnitude <= cutoff. At a catalog resonance this keeps
    exactly the down-conversion terms (plus adjoints); everywhere else
    nothing survives and NoResonantCouplingError is raised.

    If a target resonance entry is passed, its axial and both transverse
    mode pairs must be active, and the mode basis must actually be at the
    resonant anisotropy for the phases to close.
    """
    _check_transverse_mirror(basis)
    if resonance is not None:
        required = resonance_mode_set(resonance)
        missing = [m for m in required if m not in basis.modes]
        if missing:
            raise ValueError(
                f"resonance ({resonance.m},{resonance.n},{resonance.p}) needs "
                f"active modes {missing}"
            )
    dim = basis.dimension
    h = np.zeros((dim, dim), dtype=complex)
    kept = 0
    for coef, factors in _cubic_triples(basis, mode_basis, tensors, eps):
        if coef == 0.0:
            continue
        for signs in iter_product((0, 1), repeat=3):
            phase = sum(
                (freq if s else -freq) for s, (_m, freq) in zip(signs, factors)
            )
            if abs(phase) > cutoff:
                continue
            term = np.eye(dim, dtype=complex)
            for s, (mode, _freq) in zip(signs, factors):
                low = basis.lowering(mode)
                term = term @ (low.conj().T if s else low)
            h += coef * term
            kept += 1
    if kept == 0:
        raise NoResonantCouplingError(
            f"no resonant coupling: no cubic monomial is phase-matched to "
            f"{cutoff:.1e} at alpha = {mode_basis.alpha:.6g}"
        )
    return HamiltonianMatrix(matrix=h, flavor="rwa_interaction", basis=basis)


def resonance_mode_set(entry: ResonanceEntry) -> tuple:
    """Minimal active-mode set for simulating a second-kind resonance."""
    modes = [("z", entry.p)]
    for i in sorted({entry.m, entry.n}):
        modes.append(("x", i))
    for i in sorted({entry.m, entry.n}):
        modes.append(("y", i))
    return tuple(modes)


def down_conversion_states(basis: FockBasis, entry: ResonanceEntry) -> tuple:
    """Occupation patterns (axial one-phonon, y-pair, x-pair) for entry.

    These are the three states coupled by a nondegenerate second-kind
    resonance: one axial phonon in p; one phonon in each of the y modes
    m, n; one phonon in each of the x modes m, n.
    """
    if entry.m == entry.n:
        raise ValueError("three-state structure needs two distinct modes")
    psi = {("z", entry.p): 1}
    phi = {("y", entry.m): 1, ("y", entry.n): 1}
    chi = {("x", entry.m): 1, ("x", entry.n): 1}
    for occ in (psi, phi, chi):
        basis.index_of(occ)  # validates the modes are active
    return psi, phi, chi


# --- propagation and analysis -------------------------------------------

def evolve(state: QuantumState, h: HamiltonianMatrix, duration: float) -> QuantumState:
    """Exact unitary step exp(-i H duration) via eigendecomposition.

    duration is dimensionless (omega3 * elapsed seconds), matching the
    H/(hbar omega3) scaling of the matrices.
    """
    if state.basis != h.basis:
        raise ValueError("state and Hamiltonian live on different bases")
    w, v = h._eigensystem
    amps = v @ (np.exp(-1j * w * duration) * (v.conj().T @ state.amplitudes))
    return QuantumState(basis=state.basis, amplitudes=amps, tau=state.tau + duration)


def three_state_solution(psi0, phi0, chi0, rate: float, t):
    """Closed-form amplitudes of the resonant three-state problem.

    rate*t must be dimensionless; t may be an array. Initial amplitudes
    must be normalized. Returns (psi, phi, chi) evaluated at t for

        i psi' = -rate (phi + chi),  i phi' = i chi' = -rate psi.
    """
    total = abs(psi0) ** 2 + abs(phi0) ** 2 + abs(chi0) ** 2
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"initial amplitudes have norm {total:.12f}, expected 1")
    t = np.asarray(t, dtype=float)
    angle = np.sqrt(2.0) * rate * t
    s = np.sin(angle)
    c = np.cos(angle)
    half_s2 = np.sin(angle / 2.0) ** 2
    half_c2 = np.cos(angle / 2.0) ** 2
    psi = psi0 * c + 1j * (phi0 + chi0) / np.sqrt(2.0) * s
    phi = 1j * psi0 / np.sqrt(2.0) * s + phi0 * half_c2 - chi0 * half_s2
    chi = 1j * psi0 / np.sqrt(2.0) * s - phi0 * half_s2 + chi0 * half_c2
    return psi, phi, chi


def entanglement_entropy(state: QuantumState, partition) -> float:
    """Von Neumann entropy (nats) of the reduced state over `partition`.

    partition is a nonempty proper subset of the active modes; computed
    from the Schmidt spectrum of the amplitude tensor split between the
    partition and its complement.
    """
    part = []
    for mode in partition:
        mode = _as_mode(mode)
        if mode in part:
            raise ValueError(f"mode {mode} listed twice in partition")
        part.append(mode)
    if not part:
        raise ValueError("partition must be nonempty")
    axes = [state.basis.axis_of(m) for m in part]
    rest = [k for k in range(len(state.basis.modes)) if k not in axes]
    if not rest:
        raise ValueError("partition must be a proper subset of the active modes")

    tensor = state.amplitudes.reshape(state.basis.shape)
    moved = np.transpose(tensor, axes + rest)
    dim_a = int(np.prod([state.basis.shape[k] for k in axes]))
    schmidt = np.linalg.svd(moved.reshape(dim_a, -1), compute_uv=False)
    weights = schmidt**2
    weights = weights[weights > 1e-300]
    # + 0.0 turns the -0.0 of a pure product state into a plain zero
    return float(-np.sum(weights * np.log(weights)) + 0.0)
