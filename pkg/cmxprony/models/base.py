"""
Base class for catalog models: a Hamiltonian paired with a trial state.
"""

from abc import ABC, abstractmethod

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian
from cmxprony.moments import DEFAULT_MAX_ORDER, MomentSequence, moments
from cmxprony.reference import DEFAULT_TOL, SpectralReference, diagonalize


class BaseModel(ABC):
    """
    Abstract base class for every (Hamiltonian, trial state) pair.

    Each model must implement:
    - name: Identifier used on the command line
    - hamiltonian(): The polynomial Hamiltonian
    - trial(): The trial state phi
    """

    name: str = "base"
    description: str = ""
    state_id: str = ""
    oracle_size: int | None = None
    oracle_cap: int | None = None
    oracle_tol: float = DEFAULT_TOL

    @abstractmethod
    def hamiltonian(self) -> PolynomialHamiltonian:
        """Return H = -Laplacian + V."""
        pass

    @abstractmethod
    def trial(self) -> GaussianPolyState:
        """Return the trial state."""
        pass

    @property
    def dims(self) -> int:
        return self.hamiltonian().dims

    def exact_energy_curve(self, t):
        """Closed-form E(t), or None when the model has none."""
        return None

    def exact_correlation(self, tau):
        """Closed-form |C(tau)|^2, or None when the model has none."""
        return None

    @property
    def has_exact_energy(self) -> bool:
        return self.exact_energy_curve(0.0) is not None

    @property
    def has_exact_correlation(self) -> bool:
        return self.exact_correlation(0.0) is not None

    def moments(self, J: int = DEFAULT_MAX_ORDER) -> MomentSequence:
        return moments(self.hamiltonian(), self.trial(), J, model_id=self.name, state_id=self.state_id)

    def reference(self, strict: bool = True) -> SpectralReference:
        return diagonalize(
            self.hamiltonian(),
            self.trial(),
            M=self.oracle_size,
            tol=self.oracle_tol,
            cap=self.oracle_cap,
            strict=strict,
        )

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} ({self.name})>"


class InlineModel(BaseModel):
    """A model defined in a config file rather than the catalog."""

    name = "inline"
    description = "Hamiltonian and trial state from the config file"
    state_id = "inline"

    def __init__(self, hamiltonian: PolynomialHamiltonian, trial: GaussianPolyState):
        self._hamiltonian = hamiltonian
        self._trial = trial

    def hamiltonian(self) -> PolynomialHamiltonian:
        return self._hamiltonian

    def trial(self) -> GaussianPolyState:
        return self._trial
