"""
Prony's method for F_k = sum_n A_n b_n^(k+s), k = 1..2N.

Two routes to the exponents share one amplitude solve:

- the linear route solves the Hankel system F0 p = -F_(N+1..2N) for the
  coefficients of p(b) and takes the companion-matrix roots;
- the secular route takes the eigenvalues of the Hankel pencil F1 - b F0.

Data are rescaled by the growth rate c = (|F_2N| / |F_1|)^(1/(2N-1)) before
either route (b -> b/c, A unchanged), and condition numbers are measured on
the rescaled matrices.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
import scipy.linalg

from cmxprony.errors import DegenerateProblem, IllConditionedVandermonde, RepeatedRoots

logger = logging.getLogger(__name__)

DOUBLE_DIGITS = 16
MIN_EXTENDED_DIGITS = 50
RESIDUAL_FLAG = 1e-6
REPEATED_ROOT_TOL = 1e-8
REAL_ROOT_TOL = 1e-8


@dataclass(frozen=True)
class Precision:
    """Working precision: IEEE double (digits=None) or mpmath with ``digits`` decimal digits."""

    digits: int | None = None

    def __post_init__(self):
        if self.digits is not None and self.digits < MIN_EXTENDED_DIGITS:
            raise ValueError(f"extended precision needs at least {MIN_EXTENDED_DIGITS} digits, got {self.digits}")

    @classmethod
    def double(cls) -> "Precision":
        return cls()

    @classmethod
    def extended(cls, digits: int = MIN_EXTENDED_DIGITS) -> "Precision":
        return cls(digits)

    @classmethod
    def parse(cls, text: str) -> "Precision":
        """Parse 'double', 'ext' or 'ext:DIGITS'."""
        text = text.strip().lower()
        if text == "double":
            return cls()
        head, _, digits = text.partition(":")
        if head == "ext":
            try:
                return cls(int(digits) if digits else MIN_EXTENDED_DIGITS)
            except ValueError as e:
                raise ValueError(f"bad precision {text!r}: {e}") from None
        raise ValueError(f"unknown precision {text!r} (use 'double' or 'ext:DIGITS')")

    @property
    def is_extended(self) -> bool:
        return self.digits is not None

    @property
    def cond_limit(self) -> float:
        return 10.0 ** ((self.digits or DOUBLE_DIGITS) - 4)

    def context(self):
        """A private mpmath context, so concurrent solves never share precision state."""
        ctx = mpmath.MPContext()
        ctx.dps = self.digits or DOUBLE_DIGITS
        return ctx

    def __str__(self) -> str:
        return f"ext:{self.digits}" if self.digits else "double"


@dataclass(frozen=True)
class PronyProblem:
    """Data F_1..F_2N with exponent shift s."""

    F: tuple
    N: int
    s: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be at least 1, got {self.N}")
        values = tuple(v if isinstance(v, float) else Fraction(v) for v in self.F)
        if len(values) != 2 * self.N:
            raise ValueError(f"need 2N = {2 * self.N} data points, got {len(values)}")
        object.__setattr__(self, "F", values)

    def value(self, k: int):
        """F_k, 1-based."""
        return self.F[k - 1]

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(1, 2 * self.N + 1) + self.s


@dataclass(frozen=True)
class Conditioning:
    hankel: float
    vandermonde: float


class LimitBehavior(str, enum.Enum):
    CONVERGES = "converges"
    OSCILLATES = "oscillates"
    DIVERGES_PLUS = "diverges_plus"
    DIVERGES_MINUS = "diverges_minus"


@dataclass(frozen=True)
class RootDiagnostics:
    all_real: bool
    all_positive: bool
    negative_real_roots: tuple[float, ...]
    oscillatory: bool
    limit_behavior: LimitBehavior

    @property
    def converges(self) -> bool:
        return self.limit_behavior is LimitBehavior.CONVERGES

    def as_dict(self) -> dict:
        return {
            "all_real": self.all_real,
            "all_positive": self.all_positive,
            "negative_real_roots": list(self.negative_real_roots),
            "oscillatory": self.oscillatory,
            "limit_behavior": self.limit_behavior.value,
        }


@dataclass(frozen=True, eq=False)
class PronySolution:
    b: np.ndarray
    A: np.ndarray
    residual: float
    cond: Conditioning
    method: str
    problem: PronyProblem = field(repr=False)
    precision: Precision = field(default_factory=Precision)

    @property
    def flagged(self) -> bool:
        return self.residual > RESIDUAL_FLAG

    def evaluate(self, k: int) -> complex:
        return complex(np.sum(self.A * self.b ** (k + self.problem.s)))


@dataclass(frozen=True, eq=False)
class AmplitudeFit:
    A: np.ndarray
    residual: float
    cond: float


def build_hankel(p: PronyProblem) -> tuple[list[list], list[list], list]:
    """
    (F1, F0, rhs) with F0[i][j] = F_(i+j), F1[i][j] = F_(i+j+1), rhs[i] = -F_(i+N).

    Rows i = 1..N, columns j = 0..N-1. Pure indexing of the data.
    """
    N = p.N
    F0 = [[p.value(i + j) for j in range(N)] for i in range(1, N + 1)]
    F1 = [[p.value(i + j + 1) for j in range(N)] for i in range(1, N + 1)]
    rhs = [-p.value(i + N) for i in range(1, N + 1)]
    return F1, F0, rhs


# ---------------------------------------------------------------------------
# Balancing and conversions
# ---------------------------------------------------------------------------

def _log_abs(value) -> float:
    if isinstance(value, Fraction):
        return math.log(abs(value.numerator)) - math.log(value.denominator)
    return math.log(abs(value))


def growth_rate(p: PronyProblem) -> float:
    """c = (|F_2N| / |F_1|)^(1/(2N-1)), or 1 if either end is zero."""
    first, last = p.value(1), p.value(2 * p.N)
    if first == 0 or last == 0:
        return 1.0
    return math.exp((_log_abs(last) - _log_abs(first)) / (2 * p.N - 1))


def _to_mp(ctx, value):
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    return ctx.mpmathify(value)


def _to_float(value) -> float:
    if isinstance(value, Fraction):
        return value.numerator / value.denominator
    return float(value)


def _balanced(p: PronyProblem, c: float, precision: Precision, ctx=None):
    """F~_k = F_k / c^(k+s), as a float array or a list of mpf."""
    if precision.is_extended:
        cm = ctx.mpf(c)
        return [_to_mp(ctx, p.value(k)) / cm ** (k + p.s) for k in range(1, 2 * p.N + 1)]
    return np.array([_to_float(p.value(k)) / c ** (k + p.s) for k in range(1, 2 * p.N + 1)])


def _mp_cond(ctx, M) -> float:
    try:
        inv = ctx.inverse(M)
    except ZeroDivisionError:
        return math.inf
    return float(ctx.mnorm(M, 1) * ctx.mnorm(inv, 1))


def _check_hankel(cond: float, precision: Precision, N: int):
    if not math.isfinite(cond) or cond > precision.cond_limit:
        raise DegenerateProblem(N, cond)


# ---------------------------------------------------------------------------
# Exponent routes
# ---------------------------------------------------------------------------

def _roots_double(Ft: np.ndarray, N: int, route: str, precision: Precision):
    F0 = np.array([[Ft[i + j - 1] for j in range(N)] for i in range(1, N + 1)])
    F1 = np.array([[Ft[i + j] for j in range(N)] for i in range(1, N + 1)])
    rhs = -Ft[N: 2 * N]
    cond = float(np.linalg.cond(F0))
    _check_hankel(cond, precision, N)
    if route == "linear":
        coeffs = np.linalg.solve(F0, rhs)
        roots = np.linalg.eigvals(scipy.linalg.companion(np.concatenate(([1.0], coeffs[::-1]))))
    else:
        roots = np.linalg.eigvals(np.linalg.solve(F0, F1))
    return [complex(r) for r in roots], cond


def _roots_extended(ctx, Ft: list, N: int, route: str, precision: Precision):
    F0 = ctx.matrix([[Ft[i + j - 1] for j in range(N)] for i in range(1, N + 1)])
    F1 = ctx.matrix([[Ft[i + j] for j in range(N)] for i in range(1, N + 1)])
    rhs = ctx.matrix([-Ft[i + N - 1] for i in range(1, N + 1)])
    cond = _mp_cond(ctx, F0)
    _check_hankel(cond, precision, N)
    if route == "linear":
        coeffs = ctx.lu_solve(F0, rhs)
        C = ctx.zeros(N, N)
        for i in range(N):
            if i:
                C[i, i - 1] = 1
            C[i, N - 1] = -coeffs[i]
        roots = ctx.eig(C, left=False, right=False)
    else:
        roots = ctx.eig(ctx.inverse(F0) * F1, left=False, right=False)
    if isinstance(roots, tuple):
        # 1x1 input: mpmath returns (E, ER, EL) whatever the flags
        roots = roots[0]
    return list(roots), cond


def _snap_real(z: complex) -> complex:
    if abs(z.imag) <= REAL_ROOT_TOL * (1 + abs(z.real)):
        return complex(z.real, 0.0)
    return z


def _order(values: list[complex]) -> list[int]:
    """Ascending real part; conjugate pairs end up adjacent."""
    return sorted(range(len(values)), key=lambda i: (float(f"{values[i].real:.10g}"), values[i].imag))


def _check_distinct(values: list[complex], N: int):
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            scale = max(abs(values[i]), abs(values[j]))
            if abs(values[i] - values[j]) <= REPEATED_ROOT_TOL * scale:
                raise RepeatedRoots(
                    f"exponents {values[i]:.6g} and {values[j]:.6g} coincide at N={N}; "
                    "confluent Prony is not supported, reduce N"
                )


def _solve(p: PronyProblem, route: str, precision: Precision) -> PronySolution:
    if not any(p.F):
        raise DegenerateProblem(p.N, math.inf)
    c = growth_rate(p)
    ctx = precision.context() if precision.is_extended else None
    Ft = _balanced(p, c, precision, ctx)
    if precision.is_extended:
        raw, cond_h = _roots_extended(ctx, Ft, p.N, route, precision)
        approx = [complex(r) for r in raw]
    else:
        raw, cond_h = _roots_double(Ft, p.N, route, precision)
        approx = raw

    snapped = [_snap_real(z) for z in approx]
    _check_distinct(snapped, p.N)
    order = _order(snapped)
    if precision.is_extended:
        raw = [ctx.mpf(ctx.re(raw[i])) if snapped[i].imag == 0 else raw[i] for i in order]
    else:
        raw = [snapped[i] for i in order]

    fit = _amplitudes(p, raw, c, precision, ctx, Ft)
    b = np.array([snapped[i] * c for i in order])
    if not np.any(b.imag):
        b = b.real.copy()
    solution = PronySolution(
        b=b,
        A=fit.A,
        residual=fit.residual,
        cond=Conditioning(hankel=cond_h, vandermonde=fit.cond),
        method=route,
        problem=p,
        precision=precision,
    )
    logger.debug("prony N=%d s=%d route=%s c=%.4g b=%s", p.N, p.s, route, c, b)
    if solution.flagged:
        logger.warning("Prony residual %.3g at N=%d exceeds %.0e", solution.residual, p.N, RESIDUAL_FLAG)
    return solution


# ---------------------------------------------------------------------------
# Amplitudes
# ---------------------------------------------------------------------------

def _amplitudes(p: PronyProblem, bt: list, c: float, precision: Precision, ctx, Ft) -> AmplitudeFit:
    """Least squares for A over all 2N equations, in balanced variables."""
    ks = [k + p.s for k in range(1, 2 * p.N + 1)]
    if precision.is_extended:
        return _amplitudes_extended(p, bt, c, precision, ctx, Ft, ks)

    bt = np.array(bt)
    V = bt[None, :] ** np.array(ks)[:, None]
    cond = float(np.linalg.cond(V))
    if not math.isfinite(cond) or cond > precision.cond_limit:
        raise IllConditionedVandermonde(f"amplitude system at N={p.N} has cond ~ {cond:.3g}")
    A, *_ = np.linalg.lstsq(V, Ft.astype(V.dtype), rcond=None)
    A = A.astype(complex)
    if not np.any(np.iscomplex(bt)):
        A = A.real.copy()
    model = (A[None, :] * bt.astype(complex)[None, :] ** np.array(ks)[:, None]).sum(axis=1)
    F = np.array([_to_float(v) for v in p.F])
    scales = np.array([c ** k for k in ks])
    errors = np.abs(F - model * scales) / np.maximum(1.0, np.abs(F))
    return AmplitudeFit(A=A, residual=float(errors.max()), cond=cond)


def _amplitudes_extended(p: PronyProblem, bt: list, c: float, precision: Precision, ctx, Ft, ks) -> AmplitudeFit:
    """Normal equations in mpmath; the residual is measured at working precision too."""
    V = ctx.matrix([[b ** k for b in bt] for k in ks])
    G = V.H * V
    cond = math.sqrt(_mp_cond(ctx, G))
    if not math.isfinite(cond) or cond > precision.cond_limit:
        raise IllConditionedVandermonde(f"amplitude system at N={p.N} has cond ~ {cond:.3g}")
    A = ctx.lu_solve(G, V.H * ctx.matrix(Ft))

    cm = ctx.mpf(c)
    errors = []
    for row, k in enumerate(ks):
        F = _to_mp(ctx, p.value(row + 1))
        model = ctx.fsum(A[i] * V[row, i] for i in range(len(bt))) * cm ** k
        errors.append(float(abs(F - model) / max(1, abs(F))))

    A = np.array([complex(A[i]) for i in range(len(bt))])
    if all(ctx.im(b) == 0 for b in bt):
        A = A.real.copy()
    return AmplitudeFit(A=A, residual=max(errors), cond=cond)


def solve_amplitudes(p: PronyProblem, b, precision: Precision = Precision()) -> AmplitudeFit:
    """A from known exponents b, by least squares over all 2N equations."""
    c = growth_rate(p)
    ctx = precision.context() if precision.is_extended else None
    Ft = _balanced(p, c, precision, ctx)
    b = [complex(v) for v in np.atleast_1d(b)]
    if precision.is_extended:
        bt = [ctx.mpf(v.real) / c if v.imag == 0 else ctx.mpc(v.real, v.imag) / c for v in b]
    else:
        bt = [v / c for v in b]
        if all(v.imag == 0 for v in bt):
            bt = [v.real for v in bt]
    return _amplitudes(p, bt, c, precision, ctx, Ft)


def solve_linear_prony(p: PronyProblem, precision: Precision = Precision()) -> PronySolution:
    """Classic route: Hankel solve for p(b), companion roots, then amplitudes."""
    return _solve(p, "linear", precision)


def solve_secular(p: PronyProblem, precision: Precision = Precision()) -> PronySolution:
    """Pencil route: b from det(F1 - b F0) = 0, then amplitudes."""
    return _solve(p, "secular", precision)


def _limit_behavior(b: np.ndarray, A: np.ndarray, is_real: np.ndarray) -> LimitBehavior:
    candidates = np.flatnonzero(b.real < 0)
    while candidates.size:
        lowest = b.real[candidates].min()
        dominant = candidates[np.isclose(b.real[candidates], lowest, rtol=1e-10, atol=0.0)]
        if not is_real[dominant].all():
            return LimitBehavior.OSCILLATES
        weight = A[dominant].real.sum()
        if weight > 0:
            return LimitBehavior.DIVERGES_PLUS
        if weight < 0:
            return LimitBehavior.DIVERGES_MINUS
        # a term with zero weight never shows; the next root down decides
        candidates = np.setdiff1d(candidates, dominant)
    if np.any((b.real == 0) & ~is_real):
        return LimitBehavior.OSCILLATES
    return LimitBehavior.CONVERGES


def classify_roots(sol, A=None) -> RootDiagnostics:
    """
    Large-t behavior of A0 + sum A_n exp(-b_n t), from a PronySolution or (b, A).

    Converges when no Re b is negative; b = 0 only adds a constant. Otherwise
    the root with the most negative real part dominates: a complex one
    oscillates, a real one diverges with the sign of its amplitude. Purely
    imaginary exponents with nothing growing oscillate forever.
    """
    if isinstance(sol, PronySolution):
        b, A = sol.b, sol.A
    elif A is None:
        raise TypeError("classify_roots needs a PronySolution or both b and A")
    else:
        b = sol
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    A = np.atleast_1d(np.asarray(A, dtype=complex))
    if b.shape != A.shape:
        raise ValueError(f"{b.size} exponents but {A.size} amplitudes")
    is_real = np.abs(b.imag) <= REAL_ROOT_TOL * (1 + np.abs(b.real))
    all_real = bool(is_real.all())
    negative = tuple(sorted(float(z.real) for z, r in zip(b, is_real) if r and z.real < 0))

    return RootDiagnostics(
        all_real=all_real,
        all_positive=all_real and bool((b.real > 0).all()),
        negative_real_roots=negative,
        oscillatory=not all_real,
        limit_behavior=_limit_behavior(b, A, is_real),
    )
