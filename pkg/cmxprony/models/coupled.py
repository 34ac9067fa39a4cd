"""
Two coupled oscillators H = -d^2/dx^2 - d^2/dy^2 + x^2 + y^2 + lam x^2 y^2.
"""

from fractions import Fraction

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian, normalize
from cmxprony.models.base import BaseModel


class CoupledModel(BaseModel):
    name = "coupled"
    description = "2D oscillators coupled by x^2 y^2 (lambda = 1/2), trial (2/pi)^(1/2) exp(-x^2 - y^2)"
    state_id = "gauss-1-1"
    oracle_size = 24
    oracle_cap = 48
    oracle_tol = 1e-6

    def __init__(self, coupling: Fraction = Fraction(1, 2)):
        self.coupling = Fraction(coupling)

    def hamiltonian(self) -> PolynomialHamiltonian:
        return PolynomialHamiltonian(dims=2, potential={(2, 0): 1, (0, 2): 1, (2, 2): self.coupling})

    def trial(self) -> GaussianPolyState:
        return normalize(GaussianPolyState(dims=2, poly={(0, 0): 1}, quad=(1, 1)))
