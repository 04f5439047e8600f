import numpy as np
import pytest
from scipy import integrate

from spiked_rmt.errors import DomainError, ValidationError
from spiked_rmt.finite import (
    brute_force_expectation,
    build_basis,
    expectation_null,
    expectation_rank_m_direct,
    expectation_rank_m_identity,
    expectation_rank_one,
    gamma_j,
    gap_prob,
    gram_restriction,
    spiked_kernel_data,
)
from spiked_rmt.phase import Potential, solve_equilibrium


@pytest.fixture(scope="module")
def g3():
    return build_basis(Potential.gaussian(), 3, 6)


@pytest.fixture(scope="module")
def q3():
    return build_basis(Potential.quartic(), 3, 6)


class TestBasis:
    def test_scaled_hermite(self):
        closed = build_basis(Potential.gaussian(), 4, 8)
        numeric = build_basis(Potential.gaussian(), 4, 8, closed_form=False)
        np.testing.assert_allclose(closed.b, np.sqrt((np.arange(9) + 1) / 4))
        assert closed.b[0] == pytest.approx(0.5)
        np.testing.assert_allclose(numeric.b, closed.b, atol=1e-11)
        np.testing.assert_allclose(numeric.a, 0.0, atol=1e-11)
        assert numeric.mu0 == pytest.approx(closed.mu0, rel=1e-12)

    def test_orthonormal(self):
        basis = build_basis(Potential.gaussian(), 4, 10)
        x, w = basis.rule()
        psi = basis.psi(x, 11)
        np.testing.assert_allclose((psi * w) @ psi.T, np.eye(11), atol=1e-9)

    def test_quartic_symmetry(self):
        basis = build_basis(Potential.quartic(), 4, 8)
        np.testing.assert_allclose(basis.a, 0.0, atol=1e-12)
        assert np.all(basis.b > 0)

    def test_limits(self):
        with pytest.raises(DomainError):
            build_basis(Potential.gaussian(), 60, 3)
        with pytest.raises(DomainError):
            build_basis(Potential.gaussian(), 3, 41)


class TestGamma:
    def test_gaussian_closed_form(self):
        basis = build_basis(Potential.gaussian(), 4, 4)
        assert gamma_j(basis, 0, 0.5) == pytest.approx((np.pi / 2) ** 0.25 * np.exp(0.5), rel=1e-10)

    def test_quadrature_oracle(self, q3):
        a, j = 0.7, 2
        f = lambda x: np.exp(3 * (a * x - q3.potential.V(x) / 2)) * q3.psi(np.array([x]), j + 1)[j, 0]  # noqa: E731
        ref, _ = integrate.quad(f, -10, 10, epsabs=1e-14, limit=200)
        assert gamma_j(q3, j, a) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("j", [1, 3, 5])
    def test_odd_vanish(self, g3, j):
        assert abs(gamma_j(g3, j, 0.0)) < 1e-12

    def test_refinement(self, q3):
        coarse = gamma_j(q3, 3, 0.6)
        fine = gamma_j(q3, 3, 0.6, panels_per_unit=20.0)
        assert abs(coarse - fine) < 1e-10 * abs(fine)


class TestGram:
    def test_full_line_identity(self, g3):
        np.testing.assert_allclose(gram_restriction(g3, 3, None), np.eye(3), atol=1e-12)

    def test_projection_spectrum(self, q3):
        G = gram_restriction(q3, 4, 0.3)
        np.testing.assert_allclose(G, G.T, atol=1e-15)
        ev = np.linalg.eigvalsh(G)
        assert ev.min() > -1e-9 and ev.max() < 1 + 1e-9

    def test_monotone_in_set(self, q3):
        small = gram_restriction(q3, 4, 1.0)
        large = gram_restriction(q3, 4, 0.2)
        assert np.trace(large) > np.trace(small)
        assert np.linalg.eigvalsh(large - small).min() > -1e-12


class TestNull:
    def test_trivial_values(self, g3):
        assert expectation_null(g3, 3, 1.0, 0.0) == 1
        assert abs(expectation_null(g3, 3, None, 1.0)) < 1e-12
        assert expectation_null(g3, 3, None, 0.5).real == pytest.approx(2.0**-3, abs=1e-12)

    def test_brute_force(self, g3):
        ref = brute_force_expectation(Potential.gaussian(), 3, (), 1.5, 1.0, 3)
        assert abs(expectation_null(g3, 3, 1.5, 1.0) - ref) < 1e-7

    def test_far_right(self, g3):
        e = solve_equilibrium(Potential.gaussian()).right
        assert expectation_null(g3, 3, e + 5, 1.0).real > 1 - 1e-8


class TestRankOne:
    def test_s_zero(self, g3):
        assert expectation_rank_one(g3, 3, 0.7, 1.5, 0.0) == pytest.approx(1.0)

    def test_small_spike_continuity(self, g3):
        assert abs(expectation_rank_one(g3, 3, 1e-6, 1.5, 1.0) - expectation_null(g3, 3, 1.5, 1.0)) < 1e-4

    def test_matches_direct(self, g3):
        a = expectation_rank_one(g3, 3, 0.7, 1.5, 1.0)
        b = expectation_rank_m_direct(g3, 3, (0.7,), 1.5, 1.0)
        assert abs(a - b) < 1e-9


class TestRankM:
    def test_no_spikes_is_null(self, q3):
        assert abs(expectation_rank_m_direct(q3, 3, (), 0.5, 0.8) - expectation_null(q3, 3, 0.5, 0.8)) < 1e-13

    def test_two_dim_brute_force(self):
        basis = build_basis(Potential.gaussian(), 2, 4)
        ref = brute_force_expectation(Potential.gaussian(), 2, (0.8,), 1.0, 1.0, 2)
        assert abs(expectation_rank_m_direct(basis, 2, (0.8,), 1.0, 1.0) - ref) < 1e-7

    def test_three_dim_brute_force(self, g3):
        ref = brute_force_expectation(Potential.gaussian(), 3, (0.5, 0.9), 1.5, 1.0, 3)
        assert abs(expectation_rank_m_direct(g3, 3, (0.5, 0.9), 1.5, 1.0) - ref) < 1e-6

    def test_identity_single_spike(self, g3):
        a = expectation_rank_m_identity(g3, 3, (0.7,), 1.5, 1.0)
        assert abs(a - expectation_rank_one(g3, 3, 0.7, 1.5, 1.0)) < 1e-13

    def test_identity_gaussian(self, g3):
        a = expectation_rank_m_identity(g3, 3, (0.5, 0.9), 1.5, 1.0)
        b = expectation_rank_m_direct(g3, 3, (0.5, 0.9), 1.5, 1.0)
        assert abs(a - b) < 1e-6 * (1 + abs(b))

    def test_identity_quartic(self, q3):
        E = solve_equilibrium(Potential.quartic()).right + 0.2
        a = expectation_rank_m_identity(q3, 3, (0.4, 0.8), E, 0.7)
        b = expectation_rank_m_direct(q3, 3, (0.4, 0.8), E, 0.7)
        assert abs(a - b) < 1e-6 * (1 + abs(b))

    @pytest.mark.parametrize("pot", ["gaussian", "quartic"])
    @pytest.mark.parametrize("d,spikes", [(2, (0.6,)), (3, (0.3, 0.9)), (4, (-0.4, 0.7)), (4, (0.5, 1.1))])
    @pytest.mark.parametrize("s", [1.0, 0.6, 1 + 0.2j])
    def test_route_equivalence(self, pot, d, spikes, s):
        potential = Potential.gaussian() if pot == "gaussian" else Potential.quartic()
        basis = build_basis(potential, d, d)
        E = solve_equilibrium(potential).right - 0.3
        a = expectation_rank_m_identity(basis, d, spikes, E, s)
        b = expectation_rank_m_direct(basis, d, spikes, E, s)
        assert abs(a - b) < 1e-6 * (1 + abs(b))

    def test_confluent_rejected(self, g3):
        with pytest.raises(ValidationError):
            expectation_rank_m_direct(g3, 3, (0.5, 0.5), 1.5, 1.0)
        with pytest.raises(ValidationError):
            expectation_rank_m_identity(g3, 3, (0.5, 0.5 + 1e-10), 1.5, 1.0)

    def test_b_matrix_two_ways(self, q3):
        spikes = (0.4, 0.8)
        data = spiked_kernel_data(q3, 3, spikes)
        expected = np.array([[gamma_j(q3, 3 - 2 + j, a) for a in spikes] for j in range(2)])
        np.testing.assert_allclose(data.B, expected, rtol=1e-9)


class TestGapProb:
    def test_cdf_monotone(self, g3):
        xs = np.linspace(-1.0, 3.0, 9)
        vals = [gap_prob(g3, 3, (0.5, 0.9), x, 1) for x in xs]
        assert np.all(np.diff(vals) > 0)

    def test_whole_line(self, g3):
        assert abs(gap_prob(g3, 3, (0.5, 0.9), None, 1)) < 1e-10

    def test_increasing_in_j(self, g3):
        vals = [gap_prob(g3, 3, (0.5,), 0.0, j) for j in (1, 2, 3, 4)]
        assert np.all(np.diff(vals) >= -1e-12)
        assert vals[-1] == pytest.approx(1.0, abs=1e-10)

    def test_routes_agree(self, g3):
        a = gap_prob(g3, 3, (0.5, 0.9), 0.5, 2)
        b = gap_prob(g3, 3, (0.5, 0.9), 0.5, 2, method="identity")
        assert a == pytest.approx(b, abs=1e-8)
