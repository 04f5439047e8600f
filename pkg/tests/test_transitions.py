import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spiked_rmt.errors import CaseOutOfRange, ConfluentAlphas, DomainError, HypothesisViolated, ZeroExponent
from spiked_rmt.laws import gk_jth, normal_cdf
from spiked_rmt.transitions import (
    OneCutFrame,
    TransitionResult,
    frakP,
    frakP_tilde,
    frakQ,
    jump_scaling,
    jump_scaling_critical,
    m_derivative,
    m_func,
    m_tilde_func,
    mixture_prediction,
    p_m,
    p_tilde_m,
)

FRAME = OneCutFrame(-2.0, 2.0)


def sign_factor(mm):
    return (-1.0) ** (mm * (mm - 1) // 2)


def random_secondary(rng):
    left = rng.uniform(-4, -0.5)
    right = left + rng.uniform(0.5, 5)
    frame = OneCutFrame(left, right)
    x1 = right + rng.uniform(0.05, 3)
    x2 = x1 + rng.uniform(0.1, 4)
    mm = int(rng.integers(1, 5))
    m = int(rng.integers(1, mm + 1))
    alphas = np.sort(rng.normal(0, 1.5, mm))[::-1]
    return frame, x1, x2, -rng.uniform(0.1, 3), -rng.uniform(0.1, 3), mm, m, alphas


def random_critical(rng):
    left = rng.uniform(-4, -0.5)
    right = left + rng.uniform(0.5, 5)
    frame = OneCutFrame(left, right)
    c = right + rng.uniform(0.05, 3)
    x0 = c + rng.uniform(0.2, 5)
    mm = int(rng.integers(1, 5))
    m = int(rng.integers(1, mm + 1))
    alphas = np.sort(rng.normal(0, 1.5, mm))[::-1]
    return frame, c, x0, rng.uniform(0.1, 3), -rng.uniform(0.1, 3), mm, m, alphas


class TestMFunctions:
    def test_value(self):
        g = 5 ** 0.25
        expected = np.sqrt(1 / (2 * np.pi)) * (g + 1 / g) / 2 * (g - 1 / g) / (g + 1 / g)
        assert m_func(FRAME, 1, 3.0) == pytest.approx(expected, rel=1e-14)
        assert m_func(FRAME, 1, 3.0) == pytest.approx(0.1648845352561267, rel=1e-14)

    def test_ratio_is_golden(self):
        # with g^2 = sqrt 5 the ratio (g - 1/g)/(g + 1/g) = (sqrt 5 - 1)/(sqrt 5 + 1)
        g = 5 ** 0.25
        r = (g - 1 / g) / (g + 1 / g)
        assert r == pytest.approx((3 - np.sqrt(5)) / 2, rel=1e-14)
        for j in range(0, 5):
            assert m_func(FRAME, j + 1, 3.0) / m_func(FRAME, j, 3.0) == pytest.approx(r, abs=1e-13)

    def test_decay(self):
        assert m_func(FRAME, 1, 1e6) < 1e-5 * m_func(FRAME, 1, 3.0)

    def test_positive(self):
        x = 2 + np.linspace(0.01, 20, 200)
        for j in range(1, 7):
            assert np.all(m_func(FRAME, j, x) > 0)
            assert np.all(m_tilde_func(FRAME, j, x) > 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            m_func(FRAME, 1, 2.0)
        with pytest.raises(DomainError):
            m_tilde_func(FRAME, 1, 1.0)
        with pytest.raises(DomainError):
            OneCutFrame(1.0, 1.0)

    @pytest.mark.parametrize("x,order,j", [(3.0, 1, 1), (2.6, 2, 3), (5.0, 3, 2), (2.2, 4, 1)])
    def test_derivatives_against_mpmath(self, x, order, j):
        mpmath.mp.dps = 40

        def closed(t):
            g = ((t + 2) / (t - 2)) ** mpmath.mpf(0.25)
            return mpmath.sqrt(1 / (2 * mpmath.pi)) * (g + 1 / g) / 2 * ((g - 1 / g) / (g + 1 / g)) ** j
        ref = float(mpmath.diff(closed, x, order))
        mpmath.mp.dps = 15
        assert m_derivative(FRAME, j, x, order) == pytest.approx(ref, rel=1e-11)
        assert m_derivative(FRAME, j, x, order, method="richardson") == pytest.approx(ref, rel=1e-6)

    @pytest.mark.parametrize("x,order,j,h", [(3.0, 1, 1, 0.04), (2.6, 2, 3, 0.02), (4.5, 3, 1, 0.4), (3.5, 2, 2, 0.1)])
    def test_richardson_order(self, x, order, j, h):
        ref = m_derivative(FRAME, j, x, order)
        err = [abs(m_derivative(FRAME, j, x, order, method="richardson", step=h / 2**k) - ref) for k in range(2)]
        assert np.log2(err[0] / err[1]) > 3.9

    def test_tilde_derivative(self):
        h = 1e-4
        fd = (m_tilde_func(FRAME, 2, 3.0 + h) - m_tilde_func(FRAME, 2, 3.0 - h)) / (2 * h)
        assert m_derivative(FRAME, 2, 3.0, 1, tilde=True) == pytest.approx(fd, rel=1e-7)


class TestMatrices:
    def test_p_boundary(self):
        P0 = frakP(FRAME, 3.0, 4.0, 3, 0)
        np.testing.assert_allclose(P0[:, 0], [m_func(FRAME, i, 3.0) for i in (1, 2, 3)])
        assert frakP(FRAME, 3.0, 4.0, 1, 1)[0, 0] == pytest.approx(m_func(FRAME, 1, 4.0))

    def test_p_sign(self, rng):
        for _ in range(100):
            mm = int(rng.integers(1, 5))
            j = int(rng.integers(0, mm + 1))
            a, b = np.sort(rng.uniform(2.05, 7, 2))
            det = np.linalg.det(frakP(FRAME, a, b, mm, j))
            assert det != 0
            assert sign_factor(mm) * det > 0

    def test_q_vandermonde(self):
        alphas = np.array([1.0, 0.2, -0.7])
        det = np.linalg.det(frakQ(0.8, 3, 0, alphas))
        vander = np.prod([alphas[k] - alphas[i] for i in range(3) for k in range(i + 1, 3)])
        assert det == pytest.approx(vander, rel=1e-13)

    def test_q_sign(self, rng):
        for _ in range(100):
            mm = int(rng.integers(1, 6))
            j = int(rng.integers(0, mm + 1))
            alphas = np.sort(rng.normal(0, 2, mm))[::-1]
            assert sign_factor(mm) * np.linalg.det(frakQ(rng.uniform(0.1, 3), mm, j, alphas)) > 0

    @settings(max_examples=40, deadline=None)
    @given(t=st.floats(-2, 2), c=st.floats(0.1, 3), j=st.integers(0, 3))
    def test_q_shift_covariance(self, t, c, j):
        alphas = np.array([0.9, 0.1, -0.6])
        base = np.linalg.det(frakQ(c, 3, j, alphas))
        moved = np.linalg.det(frakQ(c, 3, j, alphas + t))
        assert moved == pytest.approx(np.exp(c * t * j) * base, rel=1e-10)

    def test_q_errors(self):
        with pytest.raises(ConfluentAlphas):
            frakQ(1.0, 2, 1, [0.5, 0.5])
        with pytest.raises(DomainError):
            frakQ(0.0, 2, 1, [0.5, 0.1])


class TestScaling:
    def test_q_value(self):
        assert jump_scaling(1.0, 2.0, -1.0, -1.0, 2, 1).q == pytest.approx(1.0)

    def test_k_value(self):
        assert jump_scaling(1.0, 2.0, -1.0, -2.0, 3, 1).K == pytest.approx(2**0.25, rel=1e-14)

    def test_zero_exponent(self):
        with pytest.raises(ZeroExponent):
            jump_scaling(1.0, 2.0, -1.0, -2.0, 3, 2)

    @settings(max_examples=30, deadline=None)
    @given(gap=st.floats(0.1, 5), mm=st.integers(1, 5), data=st.data())
    def test_q_identity(self, gap, mm, data):
        m = data.draw(st.integers(1, mm))
        if mm == 2 * m - 1:
            return
        sc = jump_scaling(1.0, 1.0 + gap, -0.5, -1.5, mm, m)
        assert sc.q * gap == pytest.approx(mm - 2 * m + 1, abs=1e-12)
        assert sc.K > 0

    def test_spike_sequence(self):
        sc = jump_scaling(1.0, 2.0, -1.0, -2.0, 3, 1, a=1.5)
        n = 100
        spikes = sc.spikes(n, [1.0, 0.0])
        expected = 1.5 - sc.q * np.log(sc.K * n) / n + np.array([1.0, 0.0]) / n
        np.testing.assert_allclose(spikes, expected)

    def test_critical_signs(self):
        with pytest.raises(DomainError):
            jump_scaling_critical(3.0, 5.0, -1.0, -1.0, 2, 1)


class TestPm:
    def test_one_by_one(self):
        x1, x2, alpha = 2.5, 4.0, 0.3
        res = p_m(FRAME, x1, x2, -1.0, -1.0, 1, 1, [alpha])
        m1, m2 = m_func(FRAME, 1, x1), m_func(FRAME, 1, x2)
        assert res.p == pytest.approx(m1 / (m1 + m2 * np.exp((x2 - x1) * alpha)), rel=1e-13)

    def test_in_unit_interval(self, rng):
        for _ in range(50):
            frame, x1, x2, g1, g2, mm, m, alphas = random_secondary(rng)
            res = p_m(frame, x1, x2, g1, g2, mm, m, alphas)
            assert 0 < res.p < 1
            assert res.p == pytest.approx(1 / (1 + res.odds), abs=1e-12)
            odds = res.det_P * res.det_Q / (res.det_P_prev * res.det_Q_prev)
            assert odds == pytest.approx(res.odds, rel=1e-12)

    def test_odds_covariance(self, rng):
        for _ in range(20):
            frame, x1, x2, g1, g2, mm, m, alphas = random_secondary(rng)
            t = rng.uniform(-1, 1)
            a = p_m(frame, x1, x2, g1, g2, mm, m, alphas)
            b = p_m(frame, x1, x2, g1, g2, mm, m, alphas + t)
            assert b.odds / a.odds == pytest.approx(np.exp((x2 - x1) * t), rel=1e-9)

    def test_requires_descending(self):
        with pytest.raises(ConfluentAlphas):
            p_m(FRAME, 2.5, 4.0, -1.0, -1.0, 2, 1, [0.1, 0.5])

    def test_json_round_trip(self):
        res = p_m(FRAME, 2.5, 4.0, -1.0, -1.0, 3, 2, [0.5, 0.0, -0.5])
        back = TransitionResult.from_json(res.to_json())
        assert back == res


class TestPTilde:
    def test_one_by_one(self):
        c, x0, alpha = 2.5, 4.0, -0.2
        res = p_tilde_m(FRAME, c, x0, 1.0, -1.0, 1, 1, [alpha])
        mt, m1 = m_tilde_func(FRAME, 1, c), m_func(FRAME, 1, x0)
        assert res.p == pytest.approx(mt / (mt + m1 * np.exp((x0 - c) * alpha)), rel=1e-13)

    def test_products_positive(self, rng):
        for _ in range(100):
            frame, c, x0, h2, g2, mm, m, alphas = random_critical(rng)
            res = p_tilde_m(frame, c, x0, h2, g2, mm, m, alphas)
            assert res.det_P_prev * res.det_Q_prev > 0
            assert res.det_P * res.det_Q > 0
            assert 0 < res.p < 1

    def test_literal_columns_violate(self, rng):
        failures = 0
        for _ in range(100):
            frame, c, x0, h2, g2, mm, m, alphas = random_critical(rng)
            try:
                p_tilde_m(frame, c, x0, h2, g2, mm, m, alphas, reflect=False)
            except HypothesisViolated:
                failures += 1
        assert failures > 0

    def test_domain(self):
        with pytest.raises(DomainError):
            p_tilde_m(FRAME, 4.0, 3.0, 1.0, -1.0, 1, 1, [0.0])


class TestMixture:
    def setup_method(self):
        self.res = p_m(FRAME, 2.5, 4.0, -1.0, -1.0, 3, 2, [0.5, 0.0, -0.5])

    def test_far_point_limit(self):
        assert mixture_prediction(self.res, 2, "x2")(50.0) == pytest.approx(1.0)

    def test_near_point_limit(self):
        assert mixture_prediction(self.res, 2, "x1")(50.0) == pytest.approx(self.res.p)
        assert mixture_prediction(self.res, 2, "x1")(-50.0) == pytest.approx(0.0, abs=1e-12)

    def test_smallest_case(self):
        res = p_m(FRAME, 2.5, 4.0, -1.0, -1.0, 1, 1, [0.2])
        pred = mixture_prediction(res, 1, "x2")
        for t in (-1.0, 0.0, 0.7):
            assert pred(t) == pytest.approx(res.p + (1 - res.p) * normal_cdf(t), abs=1e-12)

    def test_mixture_formula(self):
        pred = mixture_prediction(self.res, 1, "x2")
        p = self.res.p
        t = 0.3
        assert pred(t) == pytest.approx(p * gk_jth(t, 1, 1) + (1 - p) * gk_jth(t, 1, 2), abs=1e-12)

    def test_beyond_cluster(self):
        pred = mixture_prediction(self.res, 3, "x1")
        p = self.res.p
        t = -0.4
        assert pred(t) == pytest.approx(p * gk_jth(t, 2, 2) + (1 - p) * gk_jth(t, 1, 1), abs=1e-12)

    def test_critical_edge(self):
        res = p_tilde_m(FRAME, 2.5, 4.0, 1.0, -1.0, 2, 1, [0.3, -0.3])
        assert mixture_prediction(res, 1, "edge", "critical")(20.0) == pytest.approx(res.p)

    def test_out_of_range(self):
        with pytest.raises(CaseOutOfRange):
            mixture_prediction(self.res, 1, "x1")
        with pytest.raises(CaseOutOfRange):
            mixture_prediction(self.res, 1, "nowhere")
