"""
Anharmonic oscillator H = -d^2/dx^2 + x^4.
"""

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian, normalize
from cmxprony.models.base import BaseModel


class QuarticModel(BaseModel):
    name = "quartic"
    description = "anharmonic oscillator x^4, trial (2/pi)^(1/4) exp(-x^2)"
    state_id = "gauss-1"

    def hamiltonian(self) -> PolynomialHamiltonian:
        return PolynomialHamiltonian(dims=1, potential={(4,): 1})

    def trial(self) -> GaussianPolyState:
        return normalize(GaussianPolyState(dims=1, poly={(0,): 1}, quad=(1,)))
