"""
Hamiltonian moments and connected moments.

mu_j = <phi|H^j|phi> / <phi|phi> is computed exactly from the Gaussian
algebra; the connected moments I_k follow from the standard recurrence.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian, apply_to_poly, overlap_rational
from cmxprony.errors import DimensionMismatch

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 13


@dataclass(frozen=True)
class MomentSequence:
    """mu_0..mu_J for one (H, phi) pair; mu_0 is always 1."""

    mu: tuple[Fraction, ...]
    model_id: str = ""
    state_id: str = ""

    def __post_init__(self):
        mu = tuple(Fraction(v) for v in self.mu)
        if not mu:
            raise ValueError("a moment sequence needs at least mu_0")
        if mu[0] != 1:
            raise ValueError(f"mu_0 must be 1, got {mu[0]}")
        object.__setattr__(self, "mu", mu)

    @property
    def J(self) -> int:
        return len(self.mu) - 1

    def __len__(self) -> int:
        return len(self.mu)

    def __getitem__(self, j: int) -> Fraction:
        return self.mu[j]

    def truncated(self, J: int) -> "MomentSequence":
        if J > self.J:
            raise ValueError(f"only {self.J} moments available, asked for {J}")
        return MomentSequence(self.mu[: J + 1], self.model_id, self.state_id)

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.mu])

    def hankel(self, size: int | None = None) -> list[list[Fraction]]:
        size = size or self.J // 2 + 1
        return [[self.mu[i + j] for j in range(size)] for i in range(size)]

    def is_positive_semidefinite(self, digits: int = 50) -> bool:
        """Check that the moment Hankel matrix [mu_{i+j}] has no negative eigenvalue."""
        ctx = mpmath.MPContext()
        ctx.dps = digits
        H = ctx.matrix([[ctx.mpf(v.numerator) / v.denominator for v in row] for row in self.hankel()])
        values = ctx.eigsy(H, eigvals_only=True)
        floor = ctx.mnorm(H, 1) * ctx.mpf(10) ** (8 - digits)
        return all(values[i] >= -floor for i in range(values.rows))


@dataclass(frozen=True)
class ConnectedMoments:
    """I_1..I_J, indexed from 1 through ``at``."""

    values: tuple[Fraction, ...]
    model_id: str = ""
    state_id: str = ""

    def __post_init__(self):
        values = tuple(Fraction(v) for v in self.values)
        if not values:
            raise ValueError("connected moments need at least I_1")
        object.__setattr__(self, "values", values)

    @property
    def J(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def at(self, k: int) -> Fraction:
        if not 1 <= k <= self.J:
            raise IndexError(f"I_{k} outside 1..{self.J}")
        return self.values[k - 1]

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


def moments(
    H: PolynomialHamiltonian,
    phi: GaussianPolyState,
    J: int = DEFAULT_MAX_ORDER,
    model_id: str = "",
    state_id: str = "",
) -> MomentSequence:
    """
    Exact mu_0..mu_J.

    Uses mu_j = <H^k phi|H^(j-k) phi> with k = j // 2, so only H^0..H^ceil(J/2)
    of phi are ever built. The state's scale cancels in the ratio.
    """
    if J < 1:
        raise ValueError(f"J must be at least 1, got {J}")
    if H.dims != phi.dims:
        raise DimensionMismatch(f"Hamiltonian has {H.dims} dims, state has {phi.dims}")

    beta = tuple(2 * a for a in phi.quad)
    gamma = tuple(2 * b for b in phi.lin)
    powers = [dict(phi.poly)]
    for _ in range((J + 1) // 2):
        powers.append(apply_to_poly(H, powers[-1], phi.quad, phi.lin))
    logger.debug("built H^k phi up to k=%d, max degree %d", len(powers) - 1, max(map(len, powers)))

    norm = overlap_rational(powers[0], powers[0], beta, gamma)
    mu = []
    for j in range(J + 1):
        k = j // 2
        mu.append(overlap_rational(powers[k], powers[j - k], beta, gamma) / norm)
    return MomentSequence(tuple(mu), model_id, state_id)


def connected_moments(m: MomentSequence) -> ConnectedMoments:
    """I_1..I_J from I_{j+1} = mu_{j+1} - sum_{i<j} C(j, i) I_{i+1} mu_{j-i}."""
    mu = m.mu
    if m.J < 1:
        raise ValueError("connected moments need at least mu_1")
    values = [mu[1]]
    for j in range(1, m.J):
        correction = sum((math.comb(j, i) * values[i] * mu[j - i] for i in range(j)), Fraction(0))
        values.append(mu[j + 1] - correction)
    return ConnectedMoments(tuple(values), m.model_id, m.state_id)


def moments_from_connected(I: ConnectedMoments) -> MomentSequence:
    """Inverse of connected_moments."""
    mu = [Fraction(1), I.at(1)]
    for j in range(1, I.J):
        correction = sum((math.comb(j, i) * I.values[i] * mu[j - i] for i in range(j)), Fraction(0))
        mu.append(I.values[j] + correction)
    return MomentSequence(tuple(mu), I.model_id, I.state_id)


def energy_series_coefficients(m: MomentSequence) -> tuple[Fraction, ...]:
    """
    Taylor coefficients of -Z'(t)/Z(t) at t = 0, by power-series division.

    Z(t) = sum_j (-1)^j mu_j t^j / j!, and the j-th coefficient of the result
    equals (-1)^j I_{j+1} / j!.
    """
    z = [(-1) ** j * mu / math.factorial(j) for j, mu in enumerate(m.mu)]
    num = [-(j + 1) * z[j + 1] for j in range(m.J)]
    out: list[Fraction] = []
    for n in range(m.J):
        acc = num[n] - sum((z[k] * out[n - k] for k in range(1, n + 1)), Fraction(0))
        out.append(acc / z[0])
    return tuple(out)


def connected_moments_from_series(m: MomentSequence) -> ConnectedMoments:
    """Connected moments read off the Taylor series of E(t) = -Z'(t)/Z(t)."""
    coeffs = energy_series_coefficients(m)
    values = tuple((-1) ** j * math.factorial(j) * c for j, c in enumerate(coeffs))
    return ConnectedMoments(values, m.model_id, m.state_id)
