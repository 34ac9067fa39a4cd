"""
Exact operator algebra on polynomial x Gaussian wavefunctions.

A state is ``scale * q(x) * exp(-sum_d a_d x_d^2 + sum_d b_d x_d)`` where q is a
sparse polynomial with rational coefficients. The class is closed under
H = -sum_d d^2/dx_d^2 + V for polynomial V, and every overlap is a closed-form
Gaussian integral, so moments come out as exact rationals.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import mpmath
import numpy as np

from cmxprony.errors import DimensionMismatch, NonNormalizable

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]
Poly = dict[Monomial, Fraction]

# Shared read-only context for converting exact scalars to floats
_MP = mpmath.MPContext()
_MP.dps = 30


def as_fraction(value) -> Fraction:
    """Convert ints, decimal strings, 'p/q' strings and floats to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


# ---------------------------------------------------------------------------
# Sparse polynomials
# ---------------------------------------------------------------------------

def poly_clean(p: Mapping[Monomial, Fraction]) -> Poly:
    return {m: c for m, c in p.items() if c != 0}


def poly_add(*polys: Mapping[Monomial, Fraction]) -> Poly:
    out: Poly = {}
    for p in polys:
        for m, c in p.items():
            out[m] = out.get(m, Fraction(0)) + c
    return poly_clean(out)


def poly_scale(p: Mapping[Monomial, Fraction], factor: Fraction) -> Poly:
    if factor == 0:
        return {}
    return {m: c * factor for m, c in p.items()}


def poly_mul(p: Mapping[Monomial, Fraction], q: Mapping[Monomial, Fraction]) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            out[m] = out.get(m, Fraction(0)) + c1 * c2
    return poly_clean(out)


def poly_shift(p: Mapping[Monomial, Fraction], dim: int, power: int) -> Poly:
    """Multiply by x_dim**power."""
    out: Poly = {}
    for m, c in p.items():
        shifted = list(m)
        shifted[dim] += power
        out[tuple(shifted)] = c
    return out


def poly_diff(p: Mapping[Monomial, Fraction], dim: int) -> Poly:
    """Partial derivative with respect to x_dim."""
    out: Poly = {}
    for m, c in p.items():
        if m[dim] == 0:
            continue
        lowered = list(m)
        lowered[dim] -= 1
        out[tuple(lowered)] = c * m[dim]
    return out


def poly_degree(p: Mapping[Monomial, Fraction]) -> int:
    return max((sum(m) for m in p), default=0)


def _normalize_poly(poly: Mapping, dims: int) -> Poly:
    out: Poly = {}
    for key, coeff in poly.items():
        mono = (key,) if isinstance(key, int) else tuple(int(e) for e in key)
        if len(mono) != dims:
            raise ValueError(f"exponent tuple {mono} does not have {dims} entries")
        if any(e < 0 for e in mono):
            raise ValueError(f"negative exponent in {mono}")
        out[mono] = out.get(mono, Fraction(0)) + as_fraction(coeff)
    return poly_clean(out)


# ---------------------------------------------------------------------------
# Exact scalars
# ---------------------------------------------------------------------------

def _reduce_root(radicand: Fraction, root: int) -> tuple[Fraction, int]:
    while root > 1:
        num, den = radicand.numerator, radicand.denominator
        rn, rd = math.isqrt(num), math.isqrt(den)
        if rn * rn != num or rd * rd != den:
            break
        radicand = Fraction(rn, rd)
        root //= 2
    if radicand == 1:
        root = 1
    return radicand, root


@dataclass(frozen=True)
class GaussianScalar:
    """
    Exact value ``coeff * radicand**(1/root) * pi**pi_power * exp(exp_arg)``.

    ``root`` is a power of two. Instances are kept in canonical form, so two
    equal values compare equal field by field.
    """

    coeff: Fraction = Fraction(1)
    radicand: Fraction = Fraction(1)
    root: int = 1
    pi_power: Fraction = Fraction(0)
    exp_arg: Fraction = Fraction(0)

    def __post_init__(self):
        coeff = as_fraction(self.coeff)
        radicand = as_fraction(self.radicand)
        pi_power = as_fraction(self.pi_power)
        exp_arg = as_fraction(self.exp_arg)
        root = int(self.root)
        if root < 1 or root & (root - 1):
            raise ValueError(f"root must be a power of two, got {root}")
        if radicand < 0:
            raise ValueError("radicand must be non-negative")
        if coeff == 0 or radicand == 0:
            coeff, radicand, root, pi_power, exp_arg = Fraction(0), Fraction(1), 1, Fraction(0), Fraction(0)
        radicand, root = _reduce_root(radicand, root)
        if root == 1:
            coeff *= radicand
            radicand = Fraction(1)
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "radicand", radicand)
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "pi_power", pi_power)
        object.__setattr__(self, "exp_arg", exp_arg)

    def __mul__(self, other: "GaussianScalar") -> "GaussianScalar":
        if not isinstance(other, GaussianScalar):
            other = GaussianScalar(coeff=as_fraction(other))
        root = max(self.root, other.root)
        radicand = self.radicand ** (root // self.root) * other.radicand ** (root // other.root)
        return GaussianScalar(
            coeff=self.coeff * other.coeff,
            radicand=radicand,
            root=root,
            pi_power=self.pi_power + other.pi_power,
            exp_arg=self.exp_arg + other.exp_arg,
        )

    __rmul__ = __mul__

    def inverse(self) -> "GaussianScalar":
        if self.coeff == 0:
            raise ZeroDivisionError("inverse of zero")
        return GaussianScalar(
            coeff=1 / self.coeff,
            radicand=1 / self.radicand,
            root=self.root,
            pi_power=-self.pi_power,
            exp_arg=-self.exp_arg,
        )

    def __truediv__(self, other: "GaussianScalar") -> "GaussianScalar":
        if not isinstance(other, GaussianScalar):
            other = GaussianScalar(coeff=as_fraction(other))
        return self * other.inverse()

    def sqrt(self) -> "GaussianScalar":
        if self.coeff < 0:
            raise ValueError("square root of a negative value")
        return GaussianScalar(
            coeff=1,
            radicand=self.coeff ** self.root * self.radicand,
            root=2 * self.root,
            pi_power=self.pi_power / 2,
            exp_arg=self.exp_arg / 2,
        )

    @property
    def is_rational(self) -> bool:
        return self.radicand == 1 and self.pi_power == 0 and self.exp_arg == 0

    def as_fraction(self) -> Fraction:
        """Exact rational value; raises ValueError when a radical part survives."""
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.coeff

    def to_mpf(self, ctx=None):
        ctx = ctx or _MP

        def mpq(q: Fraction):
            return ctx.mpf(q.numerator) / q.denominator

        value = mpq(self.coeff)
        if self.radicand != 1:
            value *= mpq(self.radicand) ** (ctx.mpf(1) / self.root)
        if self.pi_power:
            value *= ctx.pi ** mpq(self.pi_power)
        if self.exp_arg:
            value *= ctx.exp(mpq(self.exp_arg))
        return value

    def __float__(self) -> float:
        return float(self.to_mpf())

    def __str__(self) -> str:
        parts = [str(self.coeff)]
        if self.radicand != 1:
            parts.append(f"({self.radicand})^(1/{self.root})")
        if self.pi_power:
            parts.append(f"pi^({self.pi_power})")
        if self.exp_arg:
            parts.append(f"exp({self.exp_arg})")
        return " * ".join(parts)


ONE = GaussianScalar()


# ---------------------------------------------------------------------------
# States and Hamiltonians
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianPolyState:
    """scale * poly(x) * exp(-sum a_d x_d^2 + sum lin_d x_d)."""

    dims: int
    poly: Mapping[Monomial, Fraction]
    quad: tuple[Fraction, ...]
    lin: tuple[Fraction, ...] | None = None
    scale: GaussianScalar = field(default=ONE)

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError(f"dims must be 1 or 2, got {self.dims}")
        poly = _normalize_poly(self.poly, self.dims)
        if not poly:
            raise ValueError("poly is identically zero")
        quad = tuple(as_fraction(a) for a in self.quad)
        lin = tuple(as_fraction(b) for b in self.lin) if self.lin is not None else (Fraction(0),) * self.dims
        if len(quad) != self.dims or len(lin) != self.dims:
            raise ValueError("quad and lin need one entry per dimension")
        if any(a <= 0 for a in quad):
            raise NonNormalizable(f"Gaussian exponents must be positive, got {quad}")
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "lin", lin)

    @property
    def degree(self) -> int:
        return poly_degree(self.poly)

    def same_exponents(self, other: "GaussianPolyState") -> bool:
        return self.dims == other.dims and self.quad == other.quad and self.lin == other.lin

    def __add__(self, other: "GaussianPolyState") -> "GaussianPolyState":
        if not self.same_exponents(other) or self.scale != other.scale:
            raise ValueError("only states with identical exponents and scale can be added")
        return replace(self, poly=poly_add(self.poly, other.poly))

    def __mul__(self, factor) -> "GaussianPolyState":
        return replace(self, poly=poly_scale(self.poly, as_fraction(factor)))

    __rmul__ = __mul__

    def describe(self) -> str:
        terms = " + ".join(f"{c}*x^{m}" for m, c in sorted(self.poly.items(), reverse=True))
        return f"({terms}) exp(-{list(map(str, self.quad))}.x^2 + {list(map(str, self.lin))}.x)"


@dataclass(frozen=True)
class PolynomialHamiltonian:
    """H = -sum_d d^2/dx_d^2 + V(x) with polynomial V."""

    dims: int
    potential: Mapping[Monomial, Fraction]

    CHECK_HALF_WIDTH = 10.0
    CHECK_POINTS = 81

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError(f"dims must be 1 or 2, got {self.dims}")
        object.__setattr__(self, "potential", _normalize_poly(self.potential, self.dims))
        if not self.looks_bounded_below():
            logger.warning("potential %s does not look bounded below on the check grid", dict(self.potential))

    @property
    def degree(self) -> int:
        return poly_degree(self.potential)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """V at points of shape (..., dims)."""
        points = np.asarray(points, dtype=float)
        values = np.zeros(points.shape[:-1])
        for mono, coeff in self.potential.items():
            term = np.full(points.shape[:-1], float(coeff))
            for d, power in enumerate(mono):
                term = term * points[..., d] ** power
            values += term
        return values

    def looks_bounded_below(self) -> bool:
        axis = np.linspace(-self.CHECK_HALF_WIDTH, self.CHECK_HALF_WIDTH, self.CHECK_POINTS)
        grid = np.stack(np.meshgrid(*([axis] * self.dims), indexing="ij"), axis=-1)
        values = self.evaluate(grid)
        edge = np.abs(grid).max(axis=-1) >= self.CHECK_HALF_WIDTH
        interior_min = values[np.abs(grid).max(axis=-1) <= self.CHECK_HALF_WIDTH / 2].min()
        return bool(values[edge].min() >= interior_min - 1e-9)


def apply_to_poly(H: PolynomialHamiltonian, poly: Poly, quad, lin) -> Poly:
    """Polynomial part of H acting on poly * exp(-a x^2 + b x)."""
    terms = [poly_mul(H.potential, poly)]
    for d in range(H.dims):
        a, beta = quad[d], lin[d]
        dq = poly_diff(poly, d)
        d2q = poly_diff(dq, d)
        terms.extend([
            poly_scale(d2q, Fraction(-1)),
            poly_scale(dq, -2 * beta),
            poly_scale(poly_shift(dq, d, 1), 4 * a),
            poly_scale(poly_shift(poly, d, 2), -4 * a * a),
            poly_scale(poly_shift(poly, d, 1), 4 * a * beta),
            poly_scale(poly, 2 * a - beta * beta),
        ])
    return poly_add(*terms)


def apply_hamiltonian(H: PolynomialHamiltonian, psi: GaussianPolyState) -> GaussianPolyState:
    """
    Apply H to a state of the Gaussian-polynomial class.

    The Gaussian exponents are unchanged; only the polynomial part moves.
    Raises ValueError if H annihilates psi (a zero-energy eigenstate).
    """
    if H.dims != psi.dims:
        raise DimensionMismatch(f"Hamiltonian has {H.dims} dims, state has {psi.dims}")
    return replace(psi, poly=apply_to_poly(H, psi.poly, psi.quad, psi.lin))


# ---------------------------------------------------------------------------
# Gaussian integrals
# ---------------------------------------------------------------------------

def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2))


@lru_cache(maxsize=None)
def gaussian_moment(n: int, beta: Fraction, gamma: Fraction) -> Fraction:
    """
    Rational part of the integral of x^n exp(-beta x^2 + gamma x) over the line.

    The full integral is this value times sqrt(pi/beta) * exp(gamma^2 / (4 beta)).
    """
    if beta <= 0:
        raise NonNormalizable(f"Gaussian integral needs beta > 0, got {beta}")
    if gamma == 0:
        if n % 2:
            return Fraction(0)
        return Fraction(_double_factorial(n - 1), (2 * beta) ** (n // 2)) if n else Fraction(1)
    center = gamma / (2 * beta)
    total = Fraction(0)
    for k in range(0, n + 1, 2):
        total += math.comb(n, k) * center ** (n - k) * Fraction(_double_factorial(k - 1)) / (2 * beta) ** (k // 2)
    return total


def overlap_rational(p1: Poly, p2: Poly, beta: tuple[Fraction, ...], gamma: tuple[Fraction, ...]) -> Fraction:
    """Sum of c1 c2 * prod_d gaussian_moment over both polynomials."""
    combined: dict[Monomial, Fraction] = {}
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            combined[m] = combined.get(m, Fraction(0)) + c1 * c2
    total = Fraction(0)
    for mono, coeff in combined.items():
        if coeff == 0:
            continue
        term = coeff
        for d, power in enumerate(mono):
            term *= gaussian_moment(power, beta[d], gamma[d])
            if term == 0:
                break
        total += term
    return total


def inner_product(psi1: GaussianPolyState, psi2: GaussianPolyState) -> GaussianScalar:
    """Exact integral of psi1 * psi2 over all space (real states)."""
    if psi1.dims != psi2.dims:
        raise DimensionMismatch(f"states have {psi1.dims} and {psi2.dims} dims")
    beta = tuple(a1 + a2 for a1, a2 in zip(psi1.quad, psi2.quad))
    gamma = tuple(b1 + b2 for b1, b2 in zip(psi1.lin, psi2.lin))
    if any(b <= 0 for b in beta):
        raise NonNormalizable(f"combined Gaussian exponent {beta} is not positive")
    rational = overlap_rational(psi1.poly, psi2.poly, beta, gamma)
    base = GaussianScalar(
        coeff=rational,
        radicand=1 / math.prod(beta),
        root=2,
        pi_power=Fraction(psi1.dims, 2),
        exp_arg=sum((g * g / (4 * b) for g, b in zip(gamma, beta)), Fraction(0)),
    )
    return base * psi1.scale * psi2.scale


def normalize(phi: GaussianPolyState) -> GaussianPolyState:
    """
    Scale phi to unit norm.

    The polynomial is first divided by the absolute value of its leading
    coefficient, so c*phi and phi normalize to the same state for c > 0.
    """
    lead = phi.poly[max(phi.poly, key=lambda m: (sum(m), m))]
    raw = replace(phi, poly=poly_scale(phi.poly, 1 / abs(lead)), scale=ONE)
    norm = inner_product(raw, raw)
    return replace(raw, scale=norm.sqrt().inverse())


# ---------------------------------------------------------------------------
# Harmonic-oscillator eigenfunctions
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def hermite_coefficients(n: int) -> tuple[int, ...]:
    """Physicists' Hermite polynomial H_n, coefficients by ascending power."""
    prev, cur = (1,), (0, 2)
    if n == 0:
        return prev
    for k in range(1, n):
        nxt = [0] * (k + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(prev):
            nxt[i] -= 2 * k * c
        prev, cur = cur, tuple(nxt)
    return cur


@lru_cache(maxsize=None)
def hermite_state(n: int) -> GaussianPolyState:
    """Normalized eigenfunction psi_n of -d^2/dx^2 + x^2 (energy 2n + 1)."""
    poly = {(i,): Fraction(c) for i, c in enumerate(hermite_coefficients(n)) if c}
    scale = GaussianScalar(radicand=Fraction(1, 2 ** n * math.factorial(n)), root=2, pi_power=Fraction(-1, 4))
    return GaussianPolyState(dims=1, poly=poly, quad=(Fraction(1, 2),), scale=scale)
