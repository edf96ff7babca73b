"""Normal modes of the linear chain about its equilibrium.

The axial quadratic form A (second derivative of the dimensionless
potential along the trap axis) and the transverse form
B = (1/alpha + 1/2) I - A/2 share eigenvectors; eigenvalues are mu_p
(axial, ascending, mu_1 = 1 centre of mass, mu_2 = 3 stretch) and
gamma_p = 1/alpha + 1/2 - mu_p/2 (transverse, descending in p). The
chain stays linear only while gamma_N > 0, i.e. alpha below
alpha_crit = 2/(mu_N - 1).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModesError, IonChainError, ZigZagError

__all__ = [
    "ModeBasis",
    "axial_matrix",
    "transverse_matrix",
    "critical_anisotropy",
    "diagonalize",
    "mode_basis",
]

# Eigenvalues closer than this are treated as degenerate: eigenvector
# directions inside the subspace would be solver arbitrariness, not physics.
DEGENERACY_GAP = 1e-9


def axial_matrix(u: np.ndarray) -> np.ndarray:
    """Axial coupling matrix at dimensionless positions u.

    A_nn = 1 + 2 sum_{q != n} |u_n - u_q|^-3, A_nm = -2 |u_n - u_m|^-3.
    Symmetric positive definite on a proper equilibrium.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    diff = u[:, None] - u[None, :]
    off = ~np.eye(n, dtype=bool)
    inv3 = np.zeros((n, n))
    inv3[off] = np.abs(diff[off]) ** -3
    a = -2.0 * inv3
    np.fill_diagonal(a, 1.0 + 2.0 * inv3.sum(axis=1))
    return a


def transverse_matrix(axial: np.ndarray, alpha: float) -> np.ndarray:
    """Transverse coupling matrix B = (1/alpha + 1/2) I - A/2."""
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    axial = np.asarray(axial, dtype=float)
    return (1.0 / alpha + 0.5) * np.eye(axial.shape[0]) - 0.5 * axial


def critical_anisotropy(mu: np.ndarray) -> float:
    """Zig-zag threshold alpha_crit = 2/(mu_N - 1) from axial eigenvalues."""
    mu = np.asarray(mu, dtype=float)
    if mu.size < 2:
        raise ValueError("critical anisotropy needs at least two ions")
    return 2.0 / (mu[-1] - 1.0)


@dataclass(frozen=True)
class ModeBasis:
    """Shared eigenbasis of the axial and transverse quadratic forms.

    vectors[:, p] is the ion-amplitude pattern of mode p (0-based column
    index; mode numbering in formulas is 1-based). Sign convention: the
    last ion's amplitude is positive in every mode. axial_freqs and
    transverse_freqs are angular frequencies omega3*sqrt(mu) and
    omega3*sqrt(gamma) in rad/s.
    """

    mu: np.ndarray
    gamma: np.ndarray
    vectors: np.ndarray
    axial_freqs: np.ndarray
    transverse_freqs: np.ndarray
    alpha: float
    omega3: float

    def __post_init__(self):
        for name in ("mu", "gamma", "vectors", "axial_freqs", "transverse_freqs"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_ions(self) -> int:
        return self.mu.size


def diagonalize(axial: np.ndarray, alpha: float, omega3: float = 1.0) -> ModeBasis:
    """Diagonalize the chain's quadratic forms into a ModeBasis.

    Parameters
    ----------
    axial : (N, N) array
        Axial coupling matrix from `axial_matrix`.
    alpha : float
        Trap anisotropy (omega3/omega_transverse)^2; must lie strictly
        below the zig-zag threshold for N >= 2.
    omega3 : float
        Axial centre-of-mass angular frequency used to scale the mode
        frequencies; 1.0 keeps everything dimensionless.

    Raises
    ------
    ZigZagError
        If alpha >= 2/(mu_N - 1): the lowest transverse mode is soft and
        the linear chain is not the ground configuration.
    DegenerateModesError
        If two axial eigenvalues are closer than 1e-9.
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not omega3 > 0.0:
        raise ValueError(f"omega3 must be positive, got {omega3}")
    axial = np.asarray(axial, dtype=float)
    if axial.ndim != 2 or axial.shape[0] != axial.shape[1]:
        raise ValueError("axial matrix must be square")
    if np.max(np.abs(axial - axial.T)) > 1e-12:
        raise ValueError("axial matrix must be symmetric")

    mu, vectors = np.linalg.eigh(axial)  # ascending eigenvalues
    n = mu.size
    if n >= 2:
        gaps = np.diff(mu)
        if np.min(gaps) < DEGENERACY_GAP:
            p = int(np.argmin(gaps))
            raise DegenerateModesError(
                f"axial eigenvalues {p + 1} and {p + 2} are degenerate to "
                f"{gaps[p]:.3e}; eigenvectors are not well defined"
            )
        alpha_crit = critical_anisotropy(mu)
        if alpha >= alpha_crit:
            raise ZigZagError(alpha, alpha_crit)

    for p in range(n):
        last = vectors[-1, p]
        if abs(last) < 1e-12:
            raise IonChainError(
                f"mode {p + 1} has vanishing amplitude on the last ion; "
                "sign convention cannot be applied"
            )
        if last < 0.0:
            vectors[:, p] = -vectors[:, p]

    gamma = 1.0 / alpha + 0.5 - 0.5 * mu
    return ModeBasis(
        mu=mu,
        gamma=gamma,
        vectors=vectors,
        axial_freqs=omega3 * np.sqrt(mu),
        transverse_freqs=omega3 * np.sqrt(gamma),
        alpha=alpha,
        omega3=omega3,
    )


def mode_basis(u: np.ndarray, alpha: float, omega3: float = 1.0) -> ModeBasis:
    """Convenience wrapper: build the axial matrix at u and diagonalize."""
    return diagonalize(axial_matrix(u), alpha, omega3)
