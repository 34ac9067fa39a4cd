"""
Pytest configuration and shared fixtures.
"""

import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian, normalize
from cmxprony.models import get_model
from cmxprony.moments import connected_moments

settings.register_profile("default", max_examples=100, deadline=None)
settings.register_profile(
    "fast", max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def harmonic():
    """H = -d^2/dx^2 + x^2."""
    return PolynomialHamiltonian(dims=1, potential={(2,): 1})


@pytest.fixture
def quartic():
    """H = -d^2/dx^2 + x^4."""
    return PolynomialHamiltonian(dims=1, potential={(4,): 1})


@pytest.fixture
def knowles_trial():
    """(x^2 - 1/2) exp(-2x^2/5), unnormalized."""
    return GaussianPolyState(dims=1, poly={(2,): 1, (0,): Fraction(-1, 2)}, quad=(Fraction(2, 5),))


@pytest.fixture
def gaussian_trial():
    """(2/pi)^(1/4) exp(-x^2)."""
    return normalize(GaussianPolyState(dims=1, poly={(0,): 1}, quad=(1,)))


@pytest.fixture
def ground_trial():
    """Harmonic-oscillator ground state."""
    return normalize(GaussianPolyState(dims=1, poly={(0,): 1}, quad=(Fraction(1, 2),)))


@pytest.fixture(scope="session")
def knowles_moments():
    """mu_0..mu_13 for the harmonic oscillator with the (x^2 - 1/2) trial."""
    return get_model("ho-knowles").moments(13)


@pytest.fixture(scope="session")
def knowles_connected(knowles_moments):
    """I_1..I_13 for the same pair."""
    return connected_moments(knowles_moments)


@pytest.fixture(scope="session")
def gaussian_moments():
    """mu_0..mu_11 for the harmonic oscillator with the Gaussian trial."""
    return get_model("ho-gaussian").moments(11)


@pytest.fixture(scope="session")
def quartic_moments():
    """mu_0..mu_11 for the quartic oscillator with the Gaussian trial."""
    return get_model("quartic").moments(11)
