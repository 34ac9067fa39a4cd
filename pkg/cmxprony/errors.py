"""
Exception hierarchy for cmxprony.
"""


class CmxError(Exception):
    """Root of every error raised by cmxprony."""


class DimensionMismatch(CmxError, ValueError):
    """States or Hamiltonians with different numbers of dimensions."""


class NonNormalizable(CmxError, ValueError):
    """A Gaussian integral whose quadratic exponent is not positive."""


class PronyError(CmxError, ArithmeticError):
    """Base class for failures of the Prony solvers."""


class DegenerateProblem(PronyError):
    """The Hankel matrix is numerically singular at the requested order."""

    def __init__(self, order: int, cond: float):
        self.order = order
        self.cond = cond
        self.retry_order = order - 1
        super().__init__(
            f"Hankel matrix at N={order} is numerically singular (cond ~ {cond:.3g}); "
            f"reduce N (retry at N={self.retry_order}) or increase precision"
        )


class RepeatedRoots(PronyError):
    """Two exponents coincide; the confluent case is not supported."""


class IllConditionedVandermonde(PronyError):
    """The amplitude system cannot be solved reliably."""


class PoleEncountered(CmxError, ArithmeticError):
    """Z_N(t) vanishes, so U^(N)(t) has a pole."""


class Unconverged(CmxError, RuntimeError):
    """The diagonalization oracle hit its basis cap before converging."""

    def __init__(self, size: int, gap: float, tol: float):
        self.size = size
        self.gap = gap
        self.tol = tol
        super().__init__(f"oracle not converged at M={size}: gap {gap:.3g} > tol {tol:.3g}")


class ConfigError(CmxError, ValueError):
    """Invalid run configuration."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = ""
        if key:
            where = f"[{key}] "
        if line is not None:
            where += f"(line {line}) "
        super().__init__(f"{where}{message}")
