"""
Harmonic oscillator H = -d^2/dx^2 + x^2 (energies 2n + 1) with three trial states.
"""

from fractions import Fraction

import numpy as np

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian, normalize
from cmxprony.models.base import BaseModel
from cmxprony.reference import exact_C2_ho, exact_E_ho


def harmonic_oscillator() -> PolynomialHamiltonian:
    return PolynomialHamiltonian(dims=1, potential={(2,): 1})


class HarmonicKnowlesModel(BaseModel):
    """Trial (x^2 - 1/2) exp(-2x^2/5): every I_k is positive, yet CMX roots go negative."""

    name = "ho-knowles"
    description = "harmonic oscillator, trial (x^2 - 1/2) exp(-2x^2/5)"
    state_id = "x2-half-gauss-2/5"

    def hamiltonian(self) -> PolynomialHamiltonian:
        return harmonic_oscillator()

    def trial(self) -> GaussianPolyState:
        return GaussianPolyState(dims=1, poly={(2,): 1, (0,): Fraction(-1, 2)}, quad=(Fraction(2, 5),))

    def exact_energy_curve(self, t):
        return exact_E_ho(t)


class HarmonicGaussianModel(BaseModel):
    """Trial (2/pi)^(1/4) exp(-x^2); ground-state overlap 2 sqrt(2) / 3."""

    name = "ho-gaussian"
    description = "harmonic oscillator, trial (2/pi)^(1/4) exp(-x^2)"
    state_id = "gauss-1"

    def hamiltonian(self) -> PolynomialHamiltonian:
        return harmonic_oscillator()

    def trial(self) -> GaussianPolyState:
        return normalize(GaussianPolyState(dims=1, poly={(0,): 1}, quad=(1,)))

    def exact_correlation(self, tau):
        return exact_C2_ho(tau)


class HarmonicGroundModel(BaseModel):
    """Trial equal to the ground eigenstate: mu_j = 1 and E(t) = 1."""

    name = "ho-ground"
    description = "harmonic oscillator, trial = ground state exp(-x^2/2)"
    state_id = "gauss-1/2"

    def hamiltonian(self) -> PolynomialHamiltonian:
        return harmonic_oscillator()

    def trial(self) -> GaussianPolyState:
        return normalize(GaussianPolyState(dims=1, poly={(0,): 1}, quad=(Fraction(1, 2),)))

    def exact_energy_curve(self, t):
        return _ones_like(t)

    def exact_correlation(self, tau):
        return _ones_like(tau)


def _ones_like(t):
    return 1.0 if np.ndim(t) == 0 else np.ones(np.shape(t))
