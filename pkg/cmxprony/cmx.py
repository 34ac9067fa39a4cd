"""
The two exponential ansatze built on Prony's method.

- Z_N(t) = sum_j A_j exp(-t W_j), matched to the moments mu_0..mu_(2N-1).
- E^(N)(t) = A0 + sum_n A_n exp(-b_n t), matched to the connected moments
  I_1..I_(2N+1); A0 estimates the ground-state energy (CMX).

Both consume the same 2N+1 moments when Z is taken one order higher, which
is what ``order_scan`` lines up.
"""

import logging
from dataclasses import dataclass, field

import mpmath
import numpy as np

from cmxprony.errors import DegenerateProblem, PoleEncountered, PronyError
from cmxprony.moments import ConnectedMoments, MomentSequence, connected_moments
from cmxprony.prony import (
    Precision,
    PronyProblem,
    PronySolution,
    RootDiagnostics,
    classify_roots,
    solve_linear_prony,
    solve_secular,
)

logger = logging.getLogger(__name__)

DEFAULT_PRECISION = Precision.extended(50)
IMAG_TOL = 1e-9
POLE_TOL = 1e-14

ROUTES = {
    "secular": solve_secular,
    "linear": solve_linear_prony,
}


def _solver(route: str):
    try:
        return ROUTES[route]
    except KeyError:
        raise ValueError(f"unknown Prony route {route!r}, expected one of {sorted(ROUTES)}") from None


def _realify(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values)
    if not np.iscomplexobj(values):
        return values
    if np.all(np.abs(values.imag) <= IMAG_TOL * (1 + np.abs(values.real))):
        return values.real.copy()
    logger.warning("%s have imaginary parts up to %.3g", what, np.abs(values.imag).max())
    return values


@dataclass(frozen=True)
class HadamardMinors:
    """Signed leading principal minors of [I_(i+j)] (lower) and [I_(i+j+1)] (upper), i, j = 1..N."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @property
    def all_positive(self) -> bool:
        return all(v > 0 for v in self.lower + self.upper)

    def as_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}


def hadamard_minors(I: ConnectedMoments, N: int, digits: int = 50) -> HadamardMinors:
    ctx = mpmath.MPContext()
    ctx.dps = digits

    def value(k):
        v = I.at(k)
        return ctx.mpf(v.numerator) / v.denominator

    def minors(offset: int) -> tuple[float, ...]:
        out = []
        for size in range(1, N + 1):
            block = ctx.matrix([[value(i + j + offset) for j in range(1, size + 1)] for i in range(1, size + 1)])
            out.append(float(ctx.det(block)))
        return tuple(out)

    return HadamardMinors(lower=minors(0), upper=minors(1))


@dataclass(frozen=True, eq=False)
class ZnApproximant:
    N: int
    A: np.ndarray
    W: np.ndarray
    provenance: str = ""
    solution: PronySolution | None = field(default=None, repr=False)

    @property
    def highest_moment(self) -> int:
        return 2 * self.N - 1

    def matching_moments(self, count: int | None = None) -> np.ndarray:
        """Reconstructed mu_0..mu_(count-1), i.e. (-1)^j j! times the Maclaurin coefficients."""
        count = 2 * self.N if count is None else count
        return np.array([np.sum(self.A * self.W ** j) for j in range(count)])


@dataclass(frozen=True, eq=False)
class CmxApproximant:
    N: int
    A0: float
    A: np.ndarray
    b: np.ndarray
    diagnostics: RootDiagnostics
    hadamard: HadamardMinors
    provenance: str = ""
    solution: PronySolution | None = field(default=None, repr=False)

    @property
    def highest_moment(self) -> int:
        return 2 * self.N + 1

    def matching_moments(self, count: int | None = None) -> np.ndarray:
        """Reconstructed I_1..I_count from the Maclaurin coefficients of E^(N)(t)."""
        count = 2 * self.N + 1 if count is None else count
        out = [self.A0 + np.sum(self.A)]
        out.extend(np.sum(self.A * self.b ** j) for j in range(1, count))
        return np.array(out)


def zn_from_moments(
    m: MomentSequence,
    N: int,
    precision: Precision = DEFAULT_PRECISION,
    route: str = "secular",
) -> ZnApproximant:
    """Fit Z_N from mu_0..mu_(2N-1): F_k = mu_(k-1), s = -1, W = b."""
    if m.J < 2 * N - 1:
        raise ValueError(f"Z_{N} needs mu_0..mu_{2 * N - 1}, only {m.J} available")
    problem = PronyProblem(F=m.mu[: 2 * N], N=N, s=-1)
    solution = _solver(route)(problem, precision)
    A = _realify(solution.A, f"Z_{N} amplitudes")
    W = _realify(solution.b, f"Z_{N} exponents")
    if not np.iscomplexobj(A) and np.any(A < -IMAG_TOL):
        logger.warning("Z_%d has negative amplitudes %s", N, A[A < -IMAG_TOL])
    return ZnApproximant(N=N, A=A, W=W, provenance=_provenance(m), solution=solution)


def cmx_from_connected(
    I: ConnectedMoments,
    N: int,
    precision: Precision = DEFAULT_PRECISION,
    route: str = "secular",
) -> CmxApproximant:
    """
    Fit E^(N)(t) from I_1..I_(2N+1): F_k = I_(k+1), s = 0, and A0 = I_1 - sum A_n.

    N = 0 gives the constant approximant A0 = I_1.
    """
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    if I.J < 2 * N + 1:
        raise ValueError(f"E^({N}) needs I_1..I_{2 * N + 1}, only {I.J} available")
    I1 = float(I.at(1))
    if N == 0:
        return CmxApproximant(
            N=0,
            A0=I1,
            A=np.zeros(0),
            b=np.zeros(0),
            diagnostics=classify_roots([], []),
            hadamard=HadamardMinors((), ()),
            provenance=_provenance(I),
        )

    problem = PronyProblem(F=I.values[1: 2 * N + 1], N=N, s=0)
    solution = _solver(route)(problem, precision)
    A, b = solution.A, solution.b
    A0 = I1 - float(np.sum(A).real)
    return CmxApproximant(
        N=N,
        A0=A0,
        A=A,
        b=b,
        diagnostics=classify_roots(solution),
        hadamard=hadamard_minors(I, N, precision.digits or 50),
        provenance=_provenance(I),
        solution=solution,
    )


def _provenance(seq) -> str:
    return ":".join(filter(None, (seq.model_id, seq.state_id)))


def eval_EN(c: CmxApproximant, t):
    """A0 + sum A_n exp(-b_n t), real part."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    value = c.A0 + np.exp(-np.outer(t_arr, c.b)) @ c.A if c.N else np.full(t_arr.shape, c.A0, dtype=float)
    residue = np.abs(np.imag(value))
    if np.any(residue > IMAG_TOL * np.maximum(1.0, np.abs(np.real(value)))):
        logger.warning("E^(%d)(t) has imaginary residue up to %.3g", c.N, residue.max())
    value = np.real(value)
    return float(value[0]) if np.ndim(t) == 0 else value


def eval_ZN(z: ZnApproximant, t):
    """sum A_j exp(-t W_j) at real or complex t."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=complex))
    value = np.exp(-np.outer(t_arr, z.W)) @ z.A
    return complex(value[0]) if np.ndim(t) == 0 else value


def eval_UN(z: ZnApproximant, t):
    """
    U^(N)(t) = -Z_N'(t) / Z_N(t), evaluated with the smallest W factored out.

    A pole is reported where |Z_N(t)| falls below POLE_TOL times the sum of
    the magnitudes of its terms; plain exponential decay never trips it.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    W = np.asarray(z.W)
    shift = np.min(W.real)
    weights = np.exp(-np.outer(t_arr, W - shift)) * z.A
    den = weights.sum(axis=1)
    scale = np.abs(weights).sum(axis=1)
    bad = np.abs(den) < POLE_TOL * scale
    if np.any(bad):
        raise PoleEncountered(f"Z_{z.N}(t) vanishes at t = {t_arr[bad][0]:.6g}")
    value = np.real((weights * W).sum(axis=1) / den)
    return float(value[0]) if np.ndim(t) == 0 else value


def correlation_squared(z: ZnApproximant, tau):
    """|Z_N(i tau)|^2."""
    tau_arr = np.asarray(tau, dtype=float)
    return np.abs(eval_ZN(z, 1j * tau_arr)) ** 2 if np.ndim(tau) else abs(eval_ZN(z, 1j * float(tau))) ** 2


# ---------------------------------------------------------------------------
# Order scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScanRow:
    """
    Row N: E^(N) next to Z_(N+1); both are asked for mu_0..mu_(2N+1).

    Degenerate orders are retried lower, so the moments actually consumed
    come from the approximants that were built.
    """

    N: int
    cmx: CmxApproximant | None
    zn: ZnApproximant | None
    cmx_error: str | None = None
    zn_error: str | None = None

    @property
    def budget(self) -> int:
        return 2 * self.N + 1

    @property
    def highest_moment(self) -> int | None:
        used = [a.highest_moment for a in (self.cmx, self.zn) if a is not None]
        return max(used) if used else None

    @property
    def budget_consistent(self) -> bool:
        if self.cmx is None or self.zn is None:
            return False
        return self.cmx.highest_moment == self.zn.highest_moment


@dataclass(frozen=True, eq=False)
class OrderScan:
    rows: tuple[ScanRow, ...]
    provenance: str = ""

    def A0_column(self) -> list[float | None]:
        return [row.cmx.A0 if row.cmx else None for row in self.rows]


def build_with_retry(build, N: int, floor: int):
    """Call build(N), stepping down one order at a time while the Hankel matrix is singular."""
    order = N
    while True:
        try:
            return build(order)
        except DegenerateProblem as e:
            if e.retry_order < floor:
                raise
            logger.info("order %d degenerate (cond %.3g), retrying at %d", order, e.cond, e.retry_order)
            order = e.retry_order


def order_scan(
    m: MomentSequence,
    N_max: int,
    precision: Precision = DEFAULT_PRECISION,
    route: str = "secular",
) -> OrderScan:
    """E^(N) and Z_(N+1) for N = 1..N_max from the same moment budget."""
    if N_max < 1:
        raise ValueError(f"N_max must be at least 1, got {N_max}")
    if m.J < 2 * N_max + 1:
        raise ValueError(f"a scan to N={N_max} needs mu_0..mu_{2 * N_max + 1}, only {m.J} available")
    I = connected_moments(m)
    rows = []
    for N in range(1, N_max + 1):
        cmx = zn = None
        cmx_error = zn_error = None
        try:
            cmx = build_with_retry(lambda n: cmx_from_connected(I, n, precision, route), N, floor=0)
        except PronyError as e:
            cmx_error = f"{type(e).__name__}: {e}"
        try:
            zn = build_with_retry(lambda n: zn_from_moments(m, n, precision, route), N + 1, floor=1)
        except PronyError as e:
            zn_error = f"{type(e).__name__}: {e}"
        row = ScanRow(N=N, cmx=cmx, zn=zn, cmx_error=cmx_error, zn_error=zn_error)
        logger.info("scan row N=%d: A0=%s, mu up to %s", N, cmx.A0 if cmx else cmx_error, row.highest_moment)
        if cmx and zn and not row.budget_consistent:
            logger.warning("scan row N=%d: E^(%d) and Z_%d use different moments", N, cmx.N, zn.N)
        rows.append(row)
    return OrderScan(rows=tuple(rows), provenance=_provenance(m))
