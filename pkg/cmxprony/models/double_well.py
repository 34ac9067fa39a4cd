"""
Symmetric double well H = -d^2/dx^2 + (x^2 - 1)^2.

Correlation approximants do not settle for a trial localized in one well,
so the oracle curve is the only one to trust there.
"""

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian, normalize
from cmxprony.models.base import BaseModel


def double_well() -> PolynomialHamiltonian:
    return PolynomialHamiltonian(dims=1, potential={(4,): 1, (2,): -2, (0,): 1})


class DoubleWellModel(BaseModel):
    """Trial (2/pi)^(1/4) exp(-(x - 1)^2), centered in the right-hand well."""

    name = "double-well"
    description = "double well (x^2 - 1)^2, trial (2/pi)^(1/4) exp(-(x - 1)^2)"
    state_id = "gauss-1-at-1"

    def hamiltonian(self) -> PolynomialHamiltonian:
        return double_well()

    def trial(self) -> GaussianPolyState:
        return normalize(GaussianPolyState(dims=1, poly={(0,): 1}, quad=(1,), lin=(2,)))


class DoubleWellBarrierModel(BaseModel):
    """Trial (2/pi)^(1/4) exp(-x^2), sitting on top of the barrier."""

    name = "double-well-barrier"
    description = "double well (x^2 - 1)^2, trial (2/pi)^(1/4) exp(-x^2)"
    state_id = "gauss-1"

    def hamiltonian(self) -> PolynomialHamiltonian:
        return double_well()

    def trial(self) -> GaussianPolyState:
        return normalize(GaussianPolyState(dims=1, poly={(0,): 1}, quad=(1,)))
