"""Catalog of three-mode phonon resonances of the linear chain.

A cubic term couples two transverse modes (m, n) to one axial mode (p).
The process conserves energy when one of

    delta(-) = sqrt(gamma_m) - sqrt(gamma_n) - sqrt(mu_p)   (first kind:
               transverse phonon m converts to axial p + transverse n)
    delta(+) = sqrt(gamma_m) + sqrt(gamma_n) - sqrt(mu_p)   (second kind:
               axial phonon p down-converts to transverse m + n)

vanishes. Since gamma depends on the anisotropy alpha, each triple picks
out at most one resonant alpha in the stable window; squaring either
condition twice gives the closed form implemented in candidate_alpha.
Entries are keyed the way the resonance acts: (m, n) = (larger, smaller)
index for the second kind, (destroyed, created) for the first kind.
"""

from dataclasses import dataclass

import numpy as np

from . import coupling as coupling_mod
from . import equilibrium as equilibrium_mod
from . import modes as modes_mod

__all__ = [
    "FIRST_KIND",
    "SECOND_KIND",
    "ResonanceEntry",
    "delta",
    "candidate_alpha",
    "classify",
    "alpha_min",
    "build_catalog",
]

FIRST_KIND = "first"
SECOND_KIND = "second"

# |delta| below this at the candidate alpha counts as an exact resonance.
MATCH_TOL = 1e-9
# Couplings at or below this are treated as zero (symmetry-forbidden).
COUPLING_FLOOR = 1e-12


def _transverse_eigenvalue(mu_p: float, alpha: float) -> float:
    return 1.0 / alpha + 0.5 - 0.5 * mu_p


def delta(mu_m: float, mu_n: float, mu_p: float, alpha: float, sign: int) -> float:
    """Resonance mismatch sqrt(gamma_m) +/- sqrt(gamma_n) - sqrt(mu_p).

    sign +1 selects the second-kind combination, -1 the first-kind one.
    Raises if either transverse eigenvalue is non-positive at this alpha
    (the chain would be outside the linear regime).
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    gm = _transverse_eigenvalue(mu_m, alpha)
    gn = _transverse_eigenvalue(mu_n, alpha)
    if gm <= 0.0 or gn <= 0.0:
        raise ValueError(
            f"transverse eigenvalue not positive at alpha={alpha:.6g}; "
            "outside the linear regime"
        )
    return gm**0.5 + sign * gn**0.5 - mu_p**0.5


def candidate_alpha(mu_m: float, mu_n: float, mu_p: float) -> float:
    """The unique alpha at which the triple can satisfy either condition.

    Obtained by eliminating the square roots from delta = 0:

        alpha = 16 mu_p / (4 mu_p^2 + mu_m^2 + mu_n^2 - 8 mu_p
                           + 4 mu_p mu_m + 4 mu_p mu_n - 2 mu_m mu_n).

    The denominator is positive for every physical eigenvalue triple, so
    the candidate always exists; whether it is an actual resonance (and
    of which kind) is decided by `classify`.
    """
    den = (
        4.0 * mu_p**2
        + mu_m**2
        + mu_n**2
        - 8.0 * mu_p
        + 4.0 * mu_p * mu_m
        + 4.0 * mu_p * mu_n
        - 2.0 * mu_m * mu_n
    )
    if not den > 0.0:
        raise ValueError(
            f"non-positive denominator for eigenvalues "
            f"({mu_m:.6g}, {mu_n:.6g}, {mu_p:.6g}); inputs are unphysical"
        )
    return 16.0 * mu_p / den


def classify(
    mu_m: float,
    mu_n: float,
    mu_p: float,
    alpha_candidate: float,
    tol: float = MATCH_TOL,
):
    """Which condition the candidate alpha actually satisfies, if any.

    Returns FIRST_KIND, SECOND_KIND, or None. Both matching within tol
    would mean a degenerate transverse mode at the stability edge and is
    reported as an error rather than silently resolved.
    """
    d_plus = delta(mu_m, mu_n, mu_p, alpha_candidate, +1)
    d_minus = delta(mu_m, mu_n, mu_p, alpha_candidate, -1)
    plus_ok = abs(d_plus) < tol
    minus_ok = abs(d_minus) < tol
    if plus_ok and minus_ok:
        raise ValueError(
            f"ambiguous resonance: both conditions vanish at "
            f"alpha={alpha_candidate:.9g}"
        )
    if plus_ok:
        return SECOND_KIND
    if minus_ok:
        return FIRST_KIND
    return None


def alpha_min(mu) -> float:
    """Lower edge of the resonance window from the axial spectrum.

    No triple resonates below this alpha: the softest candidate pairs the
    weakest transverse modes with the stiffest axial one, giving
    4/(3 mu_N - 2) for even N and, for odd N (where that diagonal triple
    has symmetry-forbidden coupling), the (N, N-1, N) candidate
    16 mu_N / (mu_N (9 mu_N + 2 mu_{N-1} - 8) + mu_{N-1}^2).
    """
    mu = list(mu)
    n = len(mu)
    if n < 2:
        raise ValueError("alpha_min needs at least two modes")
    mu_top = mu[-1]
    if n % 2 == 0:
        return 4.0 / (3.0 * mu_top - 2.0)
    mu_sub = mu[-2]
    return 16.0 * mu_top / (mu_top * (9.0 * mu_top + 2.0 * mu_sub - 8.0) + mu_sub**2)


@dataclass(frozen=True)
class ResonanceEntry:
    """One resonant triple: transverse modes m, n and axial mode p (1-based).

    alpha_res is where the matched condition vanishes, coupling is the
    mode-space cubic coefficient D_mnp, delta_residual the matched delta
    re-evaluated at alpha_res (machine-zero by construction).
    """

    n_ions: int
    m: int
    n: int
    p: int
    kind: str
    alpha_res: float
    coupling: float
    delta_residual: float

    def __post_init__(self):
        if self.kind not in (FIRST_KIND, SECOND_KIND):
            raise ValueError(f"unknown resonance kind {self.kind!r}")
        for idx in (self.m, self.n, self.p):
            if not 2 <= idx <= self.n_ions:
                raise ValueError(
                    f"mode index {idx} outside 2..{self.n_ions}; "
                    "mode 1 never couples"
                )
        if self.kind == FIRST_KIND and self.m == self.n:
            raise ValueError("first-kind resonance needs two distinct modes")
        if not self.alpha_res > 0.0:
            raise ValueError(f"alpha_res must be positive, got {self.alpha_res}")
        if abs(self.coupling) <= COUPLING_FLOOR:
            raise ValueError("entries with zero coupling are excluded")
        if abs(self.delta_residual) >= MATCH_TOL:
            raise ValueError(
                f"delta residual {self.delta_residual:.3e} too large "
                "for a resonance entry"
            )


def build_catalog(n_ions: int, n_cap: int = 10):
    """All resonant triples of an n_ions chain, with couplings.

    For every axial mode p and unordered transverse pair {i <= j} (all in
    2..N) the candidate alpha is computed, kept if it falls below the
    zig-zag threshold, classified, and recorded unless the coupling is
    symmetry-forbidden. Keys follow the role convention described in the
    module docstring, so each (pair, p) combination appears exactly once.
    Entries are sorted by (p, m, n).

    n_cap guards against accidentally huge enumerations; raise it
    explicitly for chains longer than 10 ions.
    """
    if not 2 <= n_ions <= n_cap:
        raise ValueError(f"n_ions must be in 2..{n_cap}, got {n_ions}")

    u = equilibrium_mod.solve_equilibrium(n_ions)
    axial = modes_mod.axial_matrix(u)
    # Eigenvectors and mu do not depend on alpha; any stable alpha works
    # for extracting the coupling tensor, so probe at half the threshold.
    alpha_crit = modes_mod.critical_anisotropy(np.linalg.eigvalsh(axial))
    probe = modes_mod.diagonalize(axial, alpha=0.5 * alpha_crit)
    tensors = coupling_mod.coupling_tensors(u, probe)
    mu = probe.mu

    entries = []
    for p in range(2, n_ions + 1):
        for i in range(2, n_ions + 1):
            for j in range(i, n_ions + 1):
                a_cand = candidate_alpha(mu[i - 1], mu[j - 1], mu[p - 1])
                if not a_cand < alpha_crit:
                    continue
                kind = classify(mu[i - 1], mu[j - 1], mu[p - 1], a_cand)
                if kind is None:
                    continue
                if kind == SECOND_KIND:
                    m, n = j, i
                    sign = +1
                else:
                    if i == j:
                        continue
                    m, n = i, j
                    sign = -1
                coupling = tensors.mode[m - 1, n - 1, p - 1]
                if abs(coupling) <= COUPLING_FLOOR:
                    continue
                residual = delta(mu[m - 1], mu[n - 1], mu[p - 1], a_cand, sign)
                entries.append(
                    ResonanceEntry(
                        n_ions=n_ions,
                        m=m,
                        n=n,
                        p=p,
                        kind=kind,
                        alpha_res=a_cand,
                        coupling=float(coupling),
                        delta_residual=float(residual),
                    )
                )

    entries.sort(key=lambda e: (e.p, e.m, e.n))
    return entries
