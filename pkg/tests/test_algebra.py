"""
Tests for the exact Gaussian-polynomial algebra.
"""

import logging
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from cmxprony.algebra import (
    GaussianPolyState,
    GaussianScalar,
    PolynomialHamiltonian,
    apply_hamiltonian,
    gaussian_moment,
    hermite_state,
    inner_product,
    normalize,
    poly_add,
    poly_scale,
)
from cmxprony.errors import DimensionMismatch, NonNormalizable

small_fractions = st.fractions(min_value=-3, max_value=3, max_denominator=4)
polys_1d = st.dictionaries(st.tuples(st.integers(0, 4)), small_fractions, min_size=1, max_size=4).filter(
    lambda p: any(c != 0 for c in p.values())
)
quads = st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(2, 5), Fraction(3, 2)])
lins = st.sampled_from([Fraction(0), Fraction(1), Fraction(-1, 2)])


class TestGaussianScalar:
    """Tests for exact scalars."""

    def test_canonical_square_root(self):
        """sqrt(9) reduces to the rational 3."""
        assert GaussianScalar(9).sqrt() == GaussianScalar(3)
        assert GaussianScalar(9).sqrt().as_fraction() == 3

    def test_radical_survives(self):
        """sqrt(2) is not rational."""
        root2 = GaussianScalar(2).sqrt()
        assert root2 == GaussianScalar(radicand=2, root=2)
        assert float(root2) == pytest.approx(math.sqrt(2), rel=1e-15)
        with pytest.raises(ValueError):
            root2.as_fraction()

    def test_multiplication_combines_roots(self):
        """2^(1/2) * 2^(1/4) = 8^(1/4)."""
        product = GaussianScalar(radicand=2, root=2) * GaussianScalar(radicand=2, root=4)
        assert product == GaussianScalar(radicand=8, root=4)

    def test_inverse(self):
        """x * x^-1 is exactly one."""
        x = GaussianScalar(coeff=Fraction(3, 7), radicand=5, root=4, pi_power=Fraction(1, 2), exp_arg=2)
        assert (x * x.inverse()).as_fraction() == 1
        assert (x / x) == GaussianScalar()

    def test_zero_is_canonical(self):
        """Every zero collapses to the same value."""
        assert GaussianScalar(coeff=0, radicand=3, root=2, pi_power=1) == GaussianScalar(0)
        with pytest.raises(ZeroDivisionError):
            GaussianScalar(0).inverse()

    def test_invalid_root(self):
        """Roots must be powers of two."""
        with pytest.raises(ValueError):
            GaussianScalar(radicand=2, root=3)

    def test_float_with_pi_and_exp(self):
        """Float conversion covers every factor."""
        x = GaussianScalar(coeff=2, pi_power=Fraction(1, 2), exp_arg=1)
        assert float(x) == pytest.approx(2 * math.sqrt(math.pi) * math.e, rel=1e-14)


class TestGaussianPolyState:
    """Tests for state construction."""

    def test_zero_poly_rejected(self):
        """The polynomial part may not vanish."""
        with pytest.raises(ValueError):
            GaussianPolyState(dims=1, poly={(1,): 0}, quad=(1,))

    def test_non_positive_exponent(self):
        """A non-positive quadratic exponent is not normalizable."""
        with pytest.raises(NonNormalizable):
            GaussianPolyState(dims=1, poly={(0,): 1}, quad=(0,))

    def test_exponent_tuple_length(self):
        """Monomials carry one exponent per dimension."""
        with pytest.raises(ValueError):
            GaussianPolyState(dims=2, poly={(1,): 1}, quad=(1, 1))

    def test_default_linear_terms(self):
        """Linear exponents default to zero."""
        state = GaussianPolyState(dims=2, poly={(0, 0): 1}, quad=(1, 1))
        assert state.lin == (0, 0)

    def test_linear_combination(self):
        """States with equal exponents add and scale."""
        a = GaussianPolyState(dims=1, poly={(1,): 1}, quad=(1,))
        b = GaussianPolyState(dims=1, poly={(1,): 2, (0,): 1}, quad=(1,))
        assert (2 * a + b).poly == {(1,): 4, (0,): 1}


class TestApplyHamiltonian:
    """Tests for H acting on Gaussian-polynomial states."""

    def test_ground_state(self, harmonic):
        """(-d^2 + x^2) exp(-x^2/2) = exp(-x^2/2)."""
        state = GaussianPolyState(dims=1, poly={(0,): 1}, quad=(Fraction(1, 2),))
        assert apply_hamiltonian(harmonic, state).poly == {(0,): 1}

    def test_narrow_gaussian(self, harmonic):
        """(-d^2 + x^2) exp(-x^2) = (2 - 3x^2) exp(-x^2)."""
        state = GaussianPolyState(dims=1, poly={(0,): 1}, quad=(1,))
        assert apply_hamiltonian(harmonic, state).poly == {(0,): 2, (2,): -3}

    def test_kinetic_only(self):
        """-d^2 (x exp(-x^2/2)) = (3x - x^3) exp(-x^2/2)."""
        free = PolynomialHamiltonian(dims=1, potential={})
        state = GaussianPolyState(dims=1, poly={(1,): 1}, quad=(Fraction(1, 2),))
        assert apply_hamiltonian(free, state).poly == {(1,): 3, (3,): -1}

    def test_hermite_eigenstates(self, harmonic):
        """psi_n has energy 2n + 1."""
        for n in range(6):
            psi = hermite_state(n)
            result = apply_hamiltonian(harmonic, psi)
            assert result.poly == {m: (2 * n + 1) * c for m, c in psi.poly.items()}

    def test_dimension_mismatch(self, harmonic):
        """A 1D Hamiltonian cannot act on a 2D state."""
        state = GaussianPolyState(dims=2, poly={(0, 0): 1}, quad=(1, 1))
        with pytest.raises(DimensionMismatch):
            apply_hamiltonian(harmonic, state)

    def test_two_dimensional(self):
        """Each dimension contributes its own kinetic term."""
        H = PolynomialHamiltonian(dims=2, potential={(2, 0): 1, (0, 2): 1})
        state = GaussianPolyState(dims=2, poly={(0, 0): 1}, quad=(Fraction(1, 2), Fraction(1, 2)))
        assert apply_hamiltonian(H, state).poly == {(0, 0): 2}

    @given(p=polys_1d, q=polys_1d, a=small_fractions, b=small_fractions, quad=quads, lin=lins)
    def test_linearity(self, p, q, a, b, quad, lin):
        """H(a psi1 + b psi2) = a H psi1 + b H psi2."""
        H = PolynomialHamiltonian(dims=1, potential={(2,): 1, (4,): Fraction(1, 3)})
        psi1 = GaussianPolyState(dims=1, poly=p, quad=(quad,), lin=(lin,))
        psi2 = GaussianPolyState(dims=1, poly=q, quad=(quad,), lin=(lin,))
        expected = poly_add(
            poly_scale(apply_hamiltonian(H, psi1).poly, a),
            poly_scale(apply_hamiltonian(H, psi2).poly, b),
        )
        combined = poly_add(poly_scale(psi1.poly, a), poly_scale(psi2.poly, b))
        assume(combined)
        left = GaussianPolyState(dims=1, poly=combined, quad=(quad,), lin=(lin,))
        assert apply_hamiltonian(H, left).poly == expected


class TestInnerProduct:
    """Tests for exact overlaps."""

    def test_gaussian_norm(self):
        """Integral of exp(-x^2) is sqrt(pi)."""
        state = GaussianPolyState(dims=1, poly={(0,): 1}, quad=(Fraction(1, 2),))
        assert inner_product(state, state) == GaussianScalar(pi_power=Fraction(1, 2))

    def test_displaced_gaussian(self):
        """Integral of exp(-x^2 + 2x) is sqrt(pi) e."""
        state = GaussianPolyState(dims=1, poly={(0,): 1}, quad=(Fraction(1, 2),), lin=(1,))
        value = inner_product(state, state)
        assert value == GaussianScalar(pi_power=Fraction(1, 2), exp_arg=1)
        assert float(value) == pytest.approx(math.sqrt(math.pi) * math.e, rel=1e-14)

    def test_second_moment(self):
        """Integral of x^2 exp(-x^2) is sqrt(pi)/2."""
        assert gaussian_moment(2, Fraction(1), Fraction(0)) == Fraction(1, 2)
        assert gaussian_moment(3, Fraction(1), Fraction(0)) == 0

    def test_displaced_first_moment(self):
        """The mean of exp(-(x - 1)^2) is 1."""
        assert gaussian_moment(1, Fraction(1), Fraction(2)) == 1

    def test_normalize_scale(self):
        """exp(-x^2) normalizes with (2/pi)^(1/4)."""
        phi = normalize(GaussianPolyState(dims=1, poly={(0,): 1}, quad=(1,)))
        assert phi.scale == GaussianScalar(radicand=2, root=4, pi_power=Fraction(-1, 4))
        assert inner_product(phi, phi).as_fraction() == 1

    def test_normalize_general_state(self, knowles_trial):
        """Normalization is exact for polynomial prefactors too."""
        phi = normalize(knowles_trial)
        assert inner_product(phi, phi).as_fraction() == 1

    def test_normalize_ignores_positive_factor(self, knowles_trial):
        """c phi and phi normalize to the same state."""
        scaled = 3 * knowles_trial
        assert normalize(scaled).poly == normalize(knowles_trial).poly
        assert normalize(scaled).scale == normalize(knowles_trial).scale

    def test_hermite_orthonormal(self):
        """<psi_m|psi_n> = delta_mn exactly."""
        for m in range(5):
            for n in range(5):
                value = inner_product(hermite_state(m), hermite_state(n)).as_fraction()
                assert value == (1 if m == n else 0)

    def test_overlap_with_ground_state(self, gaussian_trial):
        """|<psi_0|phi>|^2 = 2 sqrt(2) / 3 for phi = (2/pi)^(1/4) exp(-x^2)."""
        overlap = float(inner_product(hermite_state(0), gaussian_trial))
        assert overlap ** 2 == pytest.approx(2 * math.sqrt(2) / 3, rel=1e-14)

    def test_dimension_mismatch(self):
        """States must share their dimension."""
        a = GaussianPolyState(dims=1, poly={(0,): 1}, quad=(1,))
        b = GaussianPolyState(dims=2, poly={(0, 0): 1}, quad=(1, 1))
        with pytest.raises(DimensionMismatch):
            inner_product(a, b)

    @given(p=polys_1d, q=polys_1d, quad=quads, lin=lins)
    def test_hamiltonian_is_symmetric(self, p, q, quad, lin):
        """<psi1|H psi2> = <H psi1|psi2> exactly."""
        H = PolynomialHamiltonian(dims=1, potential={(2,): 1, (4,): 1, (1,): Fraction(1, 2)})
        psi1 = GaussianPolyState(dims=1, poly=p, quad=(quad,), lin=(lin,))
        psi2 = GaussianPolyState(dims=1, poly=q, quad=(quad,), lin=(lin,))
        left = inner_product(psi1, apply_hamiltonian(H, psi2))
        right = inner_product(apply_hamiltonian(H, psi1), psi2)
        assert left == right

    @given(p=polys_1d, q=polys_1d, quad=quads)
    def test_symmetric(self, p, q, quad):
        """<psi1|psi2> = <psi2|psi1>."""
        psi1 = GaussianPolyState(dims=1, poly=p, quad=(quad,))
        psi2 = GaussianPolyState(dims=1, poly=q, quad=(Fraction(1, 2),))
        assert inner_product(psi1, psi2) == inner_product(psi2, psi1)


class TestPolynomialHamiltonian:
    """Tests for Hamiltonian construction."""

    def test_unbounded_potential_warns(self, caplog):
        """An inverted oscillator is flagged."""
        with caplog.at_level(logging.WARNING, logger="cmxprony.algebra"):
            PolynomialHamiltonian(dims=1, potential={(2,): -1})
        assert "bounded below" in caplog.text

    def test_double_well_is_bounded(self, caplog):
        """(x^2 - 1)^2 is fine."""
        with caplog.at_level(logging.WARNING, logger="cmxprony.algebra"):
            H = PolynomialHamiltonian(dims=1, potential={(4,): 1, (2,): -2, (0,): 1})
        assert H.looks_bounded_below()
        assert "bounded below" not in caplog.text

    def test_evaluate(self):
        """V evaluated on a grid."""
        H = PolynomialHamiltonian(dims=2, potential={(2, 0): 1, (0, 2): 1, (2, 2): Fraction(1, 2)})
        assert H.evaluate([[1.0, 2.0]]).tolist() == [1 + 4 + 0.5 * 4]
