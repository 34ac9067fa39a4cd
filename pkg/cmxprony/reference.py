"""
Reference values: closed forms for the harmonic oscillator, a dense
number-basis diagonalization oracle, and Rayleigh-Ritz in the Krylov space
spanned by H^i phi.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian, hermite_state, inner_product
from cmxprony.errors import DegenerateProblem, DimensionMismatch, Unconverged
from cmxprony.moments import MomentSequence
from cmxprony.prony import Precision

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
TRACKED_LEVELS = 8
CLUSTER_TOL = 1e-7
DEFAULT_SIZES = {1: (32, 256), 2: (24, 48)}


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def exact_E_ho(t):
    """
    E(t) = -Z'(t)/Z(t) for H = -d^2/dx^2 + x^2 and trial (x^2 - 1/2) exp(-2x^2/5).

    Written in u = exp(-4t); tends to the ground energy 1 as t grows.
    """
    u = np.exp(-4.0 * np.asarray(t, dtype=float))
    num = 121 * u ** 3 + 189199 * u ** 2 + 8180919 * u + 6561
    den = (81 - u) * (121 * u ** 2 + 20198 * u + 81)
    value = num / den
    return float(value) if np.ndim(value) == 0 else value


def exact_E_ho_poles() -> tuple[float, ...]:
    """Real poles of exact_E_ho in the u-plane, nearest the origin first."""
    quadratic = np.roots([121, 20198, 81]).real
    return tuple(sorted([81.0, *quadratic], key=abs))


def exact_C2_ho(tau):
    """|<phi|exp(-i tau H)|phi>|^2 for the harmonic oscillator and phi = (2/pi)^(1/4) exp(-x^2)."""
    value = 4 * math.sqrt(2) / np.sqrt(41 - 9 * np.cos(4 * np.asarray(tau, dtype=float)))
    return float(value) if np.ndim(value) == 0 else value


# ---------------------------------------------------------------------------
# Number-basis oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralReference:
    M: int
    dims: int
    energies: np.ndarray
    overlaps: np.ndarray
    convergence_gap: float
    converged: bool = True

    @property
    def captured_mass(self) -> float:
        return float(self.overlaps.sum())

    def levels(self, count: int) -> list[tuple[float, float]]:
        return list(zip(self.energies[:count].tolist(), self.overlaps[:count].tolist()))


def _position_powers(size: int, max_power: int) -> list[np.ndarray]:
    """x^k in the first ``size`` oscillator states, from a padded x so the block is exact."""
    big = size + max_power
    n = np.arange(big - 1)
    X = np.zeros((big, big))
    X[n, n + 1] = X[n + 1, n] = np.sqrt((n + 1) / 2)
    powers = [np.eye(big)]
    for _ in range(max_power):
        powers.append(powers[-1] @ X)
    return [P[:size, :size] for P in powers]


def _kinetic(size: int) -> np.ndarray:
    """-d^2/dx^2 = (2 a^dag a + 1 - a^2 - a^dag^2) / 2."""
    n = np.arange(size)
    T = np.diag((2 * n + 1) / 2.0)
    m = np.arange(size - 2)
    T[m, m + 2] = T[m + 2, m] = -np.sqrt((m + 1) * (m + 2)) / 2
    return T


def hamiltonian_matrix(H: PolynomialHamiltonian, size: int) -> np.ndarray:
    """Dense H in the number basis (tensor basis with index n1 * size + n2 in 2D)."""
    X = _position_powers(size, max(H.degree, 2))
    T = _kinetic(size)
    if H.dims == 1:
        matrix = T.copy()
        for (k,), coeff in H.potential.items():
            matrix += float(coeff) * X[k]
        return matrix
    eye = np.eye(size)
    matrix = np.kron(T, eye) + np.kron(eye, T)
    for (k, l), coeff in H.potential.items():
        matrix += float(coeff) * np.kron(X[k], X[l])
    return matrix


def _overlap_table(phi: GaussianPolyState, d: int, size: int) -> dict[int, np.ndarray]:
    """<psi_n | x^k exp(-a_d x^2 + b_d x)> for n < size and every power k phi uses along d."""
    table = {}
    for k in sorted({m[d] for m in phi.poly}):
        mono = GaussianPolyState(dims=1, poly={(k,): 1}, quad=(phi.quad[d],), lin=(phi.lin[d],))
        table[k] = np.array([float(inner_product(hermite_state(n), mono)) for n in range(size)])
    return table


def basis_coefficients(phi: GaussianPolyState, size: int) -> np.ndarray:
    """Coordinates of phi in the number basis, exact integrals rounded once."""
    tables = [_overlap_table(phi, d, size) for d in range(phi.dims)]
    norm = float(phi.scale)
    if phi.dims == 1:
        v = sum(float(c) * tables[0][m[0]] for m, c in phi.poly.items())
    else:
        v = sum(float(c) * np.outer(tables[0][m[0]], tables[1][m[1]]).ravel() for m, c in phi.poly.items())
    return norm * np.asarray(v)


def _spectrum(H: PolynomialHamiltonian, v_full: np.ndarray, size: int, full: int):
    if H.dims == 1:
        v = v_full[:size]
    else:
        v = v_full.reshape(full, full)[:size, :size].ravel()
    energies, vectors = np.linalg.eigh(hamiltonian_matrix(H, size))
    overlaps = (vectors.T @ v) ** 2
    return energies, overlaps


def _clusters(energies: np.ndarray, overlaps: np.ndarray, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Group degenerate levels; return the first ``count`` cluster energies and summed overlaps."""
    E, W = [], []
    for e, w in zip(energies, overlaps):
        if E and abs(e - E[-1]) <= CLUSTER_TOL * max(1.0, abs(e)):
            W[-1] += w
        else:
            if len(E) == count:
                break
            E.append(e)
            W.append(w)
    return np.array(E), np.array(W)


def diagonalize(
    H: PolynomialHamiltonian,
    phi: GaussianPolyState,
    M: int | None = None,
    tol: float = DEFAULT_TOL,
    cap: int | None = None,
    strict: bool = True,
) -> SpectralReference:
    """
    Spectral decomposition of phi under H in a truncated oscillator basis.

    The truncation doubles from M until the lowest clusters of energies and
    overlaps change by less than ``tol`` between M/2 and M.
    """
    if H.dims != phi.dims:
        raise DimensionMismatch(f"Hamiltonian has {H.dims} dims, state has {phi.dims}")
    start, default_cap = DEFAULT_SIZES[H.dims]
    M = M or start
    cap = max(cap or default_cap, M)
    if M < 8:
        raise ValueError(f"basis size must be at least 8, got {M}")

    # overlaps are weights of the normalized trial state
    v_full = basis_coefficients(phi, cap) / math.sqrt(float(inner_product(phi, phi)))
    previous = _spectrum(H, v_full, M // 2, cap)
    while True:
        current = _spectrum(H, v_full, M, cap)
        E0, W0 = _clusters(*previous, TRACKED_LEVELS)
        E1, W1 = _clusters(*current, TRACKED_LEVELS)
        n = min(len(E0), len(E1))
        gap = float(max(np.abs(E1[:n] - E0[:n]).max(), np.abs(W1[:n] - W0[:n]).max()))
        logger.info("oracle M=%d gap=%.3g", M, gap)
        if gap < tol:
            return SpectralReference(M, H.dims, current[0], current[1], gap, True)
        if 2 * M > cap:
            if strict:
                raise Unconverged(M, gap, tol)
            logger.warning("oracle not converged at M=%d (gap %.3g)", M, gap)
            return SpectralReference(M, H.dims, current[0], current[1], gap, False)
        previous, M = current, 2 * M


def reference_moments(ref: SpectralReference, J: int) -> np.ndarray:
    """sum_j w_j E_j^k for k = 0..J."""
    return np.array([np.sum(ref.overlaps * ref.energies ** k) for k in range(J + 1)])


def reference_Z_E_C(ref: SpectralReference, t):
    """(Z(t), E(t), |Z(i t)|^2) from the spectral decomposition."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    E, w = ref.energies, ref.overlaps
    Z = np.exp(-np.outer(t_arr, E)) @ w
    shifted = np.exp(-np.outer(t_arr, E - E[0])) * w
    energy = (shifted @ E) / shifted.sum(axis=1)
    C2 = np.abs(np.exp(-1j * np.outer(t_arr, E)) @ w) ** 2
    if np.ndim(t) == 0:
        return float(Z[0]), float(energy[0]), float(C2[0])
    return Z, energy, C2


# ---------------------------------------------------------------------------
# Krylov Rayleigh-Ritz
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RitzResult:
    values: np.ndarray
    overlaps: np.ndarray


def rrk_oracle(m: MomentSequence, N: int, precision: Precision = Precision.extended(50)) -> RitzResult:
    """
    Ritz values and |<phi|Ritz vector>|^2 in span{phi, H phi, ..., H^(N-1) phi}.

    Gram matrix S = [mu_(i+j)] and K = [mu_(i+j+1)], i, j < N, diagonally
    rescaled to unit Gram diagonal before the pencil (K, S) is solved.
    """
    if m.J < 2 * N - 1:
        raise ValueError(f"N={N} Ritz needs mu_0..mu_{2 * N - 1}, only {m.J} available")
    mu = m.mu
    D = [1 / math.sqrt(float(mu[2 * i])) if mu[2 * i] > 0 else 1.0 for i in range(N)]

    if precision.is_extended:
        ctx = precision.context()

        def mp(q: Fraction):
            return ctx.mpf(q.numerator) / q.denominator

        Dm = [1 / ctx.sqrt(mp(mu[2 * i])) if mu[2 * i] > 0 else ctx.mpf(1) for i in range(N)]
        S = ctx.matrix([[mp(mu[i + j]) * Dm[i] * Dm[j] for j in range(N)] for i in range(N)])
        K = ctx.matrix([[mp(mu[i + j + 1]) * Dm[i] * Dm[j] for j in range(N)] for i in range(N)])
        try:
            L = ctx.cholesky(S)
            Linv = ctx.inverse(L)
        except (ValueError, ZeroDivisionError):
            raise DegenerateProblem(N, math.inf) from None
        cond = float(ctx.mnorm(S, 1) * ctx.mnorm(Linv.T * Linv, 1))
        if cond > precision.cond_limit:
            raise DegenerateProblem(N, cond)
        E, Q = ctx.eigsy(Linv * K * Linv.T)
        C = Linv.T * Q
        values = np.array([float(E[i]) for i in range(N)])
        proj = [sum(mp(mu[i]) * Dm[i] * C[i, j] for i in range(N)) for j in range(N)]
        overlaps = np.array([float(p * p) for p in proj])
    else:
        S = np.array([[float(mu[i + j]) * D[i] * D[j] for j in range(N)] for i in range(N)])
        K = np.array([[float(mu[i + j + 1]) * D[i] * D[j] for j in range(N)] for i in range(N)])
        cond = float(np.linalg.cond(S))
        if not math.isfinite(cond) or cond > precision.cond_limit:
            raise DegenerateProblem(N, cond)
        try:
            values, C = scipy.linalg.eigh(K, S)
        except np.linalg.LinAlgError:
            raise DegenerateProblem(N, cond) from None
        mu_vec = np.array([float(mu[i]) * D[i] for i in range(N)])
        overlaps = (mu_vec @ C) ** 2

    order = np.argsort(values)
    return RitzResult(values=values[order], overlaps=overlaps[order])
