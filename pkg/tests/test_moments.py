"""
Tests for moments and connected moments.
"""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian
from cmxprony.errors import DimensionMismatch
from cmxprony.models import get_model
from cmxprony.moments import (
    ConnectedMoments,
    MomentSequence,
    connected_moments,
    connected_moments_from_series,
    energy_series_coefficients,
    moments,
    moments_from_connected,
)
from cmxprony.reference import exact_E_ho

# Connected moments of the (x^2 - 1/2) trial, three significant figures.
# I_3 is 2.197 from the closed-form E(t); it is also the value that gives A0 = 4.932 at N = 1.
KNOWLES_I = (5.13, 0.665, 2.20, 11.2, 40.0, 216, 979)


class TestMomentSequence:
    """Tests for the MomentSequence type."""

    def test_mu0_must_be_one(self):
        """Moments are normalized."""
        with pytest.raises(ValueError):
            MomentSequence((Fraction(2), Fraction(1)))

    def test_truncated(self, knowles_moments):
        """Truncation keeps provenance."""
        short = knowles_moments.truncated(3)
        assert short.J == 3
        assert short.model_id == "ho-knowles"
        with pytest.raises(ValueError):
            short.truncated(5)

    def test_hankel_positive(self, knowles_moments, quartic_moments):
        """Moment Hankel matrices are positive semidefinite."""
        assert knowles_moments.is_positive_semidefinite()
        assert quartic_moments.is_positive_semidefinite()


class TestMoments:
    """Tests for exact moment computation."""

    def test_ground_state_moments(self, harmonic, ground_trial):
        """An eigenstate with E = 1 has mu_j = 1."""
        m = moments(harmonic, ground_trial, J=8)
        assert m.mu == tuple(Fraction(1) for _ in range(9))

    def test_gaussian_energy(self, harmonic, gaussian_trial):
        """<H> for exp(-x^2) is <p^2> + <x^2> = 1 + 1/4."""
        m = moments(harmonic, gaussian_trial, J=2)
        assert m.mu[1] == Fraction(5, 4)

    def test_normalization_irrelevant(self, harmonic, knowles_trial):
        """Scaling phi does not change the moments."""
        assert moments(harmonic, knowles_trial, J=6) == moments(harmonic, 7 * knowles_trial, J=6)

    def test_coupled_energy(self):
        """<H> = 2 + 1/2 + lambda/16 for the 2D Gaussian trial."""
        m = get_model("coupled").moments(1)
        assert m.mu[1] == Fraction(81, 32)

    def test_dimension_mismatch(self, harmonic):
        """H and phi must share their dimension."""
        phi = GaussianPolyState(dims=2, poly={(0, 0): 1}, quad=(1, 1))
        with pytest.raises(DimensionMismatch):
            moments(harmonic, phi, J=2)

    def test_order_must_be_positive(self, harmonic, ground_trial):
        """J >= 1."""
        with pytest.raises(ValueError):
            moments(harmonic, ground_trial, J=0)

    def test_displaced_trial(self):
        """Moments of a displaced Gaussian stay exact rationals."""
        m = get_model("double-well").moments(4)
        assert all(isinstance(v, Fraction) for v in m.mu)
        assert m.mu[2] >= m.mu[1] ** 2


class TestConnectedMoments:
    """Tests for connected moments."""

    def test_knowles_values(self, knowles_connected):
        """I_1..I_7 for the (x^2 - 1/2) trial."""
        for k, expected in enumerate(KNOWLES_I, 1):
            assert float(knowles_connected.at(k)) == pytest.approx(expected, rel=1e-2)
        assert all(knowles_connected.at(k) > 0 for k in range(1, 8))

    def test_first_connected_moment_matches_closed_form(self, knowles_connected):
        """I_1 = E(0) from the closed form."""
        assert float(knowles_connected.at(1)) == pytest.approx(exact_E_ho(0.0), rel=1e-9)
        assert exact_E_ho(0.0) == pytest.approx(8376800 / 1632000, rel=1e-12)

    def test_low_orders_match_closed_form(self, knowles_connected):
        """I_2 and I_3 from derivatives of the closed-form E(t) at t = 0."""
        assert float(knowles_connected.at(2)) == pytest.approx(0.664619, rel=1e-4)
        assert float(knowles_connected.at(3)) == pytest.approx(2.19740, rel=1e-3)

    def test_eigenstate(self, harmonic, ground_trial):
        """An eigenstate has I_1 = E and no higher cumulants."""
        I = connected_moments(moments(harmonic, ground_trial, J=7))
        assert I.at(1) == 1
        assert all(v == 0 for v in I.values[1:])

    def test_variance(self, knowles_moments, knowles_connected):
        """I_2 is the energy variance."""
        mu = knowles_moments.mu
        assert knowles_connected.at(2) == mu[2] - mu[1] ** 2

    def test_one_based_access(self, knowles_connected):
        """I_0 does not exist."""
        with pytest.raises(IndexError):
            knowles_connected.at(0)

    def test_recurrence_inversion(self, knowles_moments, knowles_connected):
        """moments_from_connected undoes connected_moments."""
        assert moments_from_connected(knowles_connected).mu == knowles_moments.mu

    def test_series_route(self, knowles_moments, knowles_connected):
        """-Z'/Z by series division gives the same cumulants."""
        assert connected_moments_from_series(knowles_moments).values == knowles_connected.values

    def test_series_coefficients(self, knowles_moments, knowles_connected):
        """The j-th coefficient of -Z'/Z is (-1)^j I_(j+1) / j!."""
        coeffs = energy_series_coefficients(knowles_moments)
        assert coeffs[0] == knowles_connected.at(1)
        assert coeffs[1] == -knowles_connected.at(2)
        assert coeffs[2] == knowles_connected.at(3) / 2

    @given(tail=st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=6), min_size=1, max_size=10))
    def test_inversion_property(self, tail):
        """Round trip through connected moments for any sequence with mu_0 = 1."""
        m = MomentSequence((Fraction(1), *tail))
        I = connected_moments(m)
        assert moments_from_connected(I).mu == m.mu
        assert connected_moments_from_series(m).values == I.values

    def test_empty_connected_moments(self):
        """At least I_1 is required."""
        with pytest.raises(ValueError):
            ConnectedMoments(())


class TestPolynomialCatalogMoments:
    """Moments for every catalog entry."""

    @pytest.mark.parametrize("name", ["ho-knowles", "ho-gaussian", "quartic", "double-well-barrier"])
    def test_moments_positive_definite(self, name):
        """Each catalog moment Hankel matrix is positive semidefinite."""
        assert get_model(name).moments(9).is_positive_semidefinite()

    def test_inline_potential(self):
        """A general polynomial potential works the same way."""
        H = PolynomialHamiltonian(dims=1, potential={(4,): Fraction(1, 10), (2,): 1, (1,): Fraction(1, 3)})
        phi = GaussianPolyState(dims=1, poly={(1,): 1, (0,): 2}, quad=(Fraction(3, 4),), lin=(Fraction(1, 2),))
        m = moments(H, phi, J=5)
        assert m.mu[0] == 1
        assert m.mu[2] > m.mu[1] ** 2
