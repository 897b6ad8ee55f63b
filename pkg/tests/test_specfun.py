import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclab.specfun import (
    ball_volume,
    bessel_j_zero,
    frac_constants,
    gauss_jacobi,
    hyp2f1,
    hyp2f1_complement,
    jacobi_moment,
    ln_gamma,
    sphere_area,
)

# mpmath (30 digits), frozen
HYP_075_125_1_09 = 9.20589251382092969219583315202
J0_ZEROS = (2.40482555769577276862163187933, 5.52007811028631064959660411281)
J1_THIRD_ZERO = 10.1734681350627220771857117768


class TestLnGamma:
    def test_closed_values(self):
        assert ln_gamma(1.0) == 0.0
        assert ln_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-13)
        assert ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-13)

    def test_recurrence(self):
        x = np.arange(1, 101) / 10
        assert np.max(np.abs(ln_gamma(x + 1) - ln_gamma(x) - np.log(x))) <= 1e-12

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan")])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            ln_gamma(x)


class TestHyp2f1:
    def test_zero_argument(self):
        assert hyp2f1(0.3, 1.7, 2.2, 0.0) == 1.0

    def test_log_closed_form(self):
        x = 0.5
        assert hyp2f1(1, 1, 2, x) == pytest.approx(-math.log(1 - x) / x, rel=1e-12)

    def test_near_one_against_series_oracle(self):
        assert hyp2f1(0.75, 1.25, 1.0, 0.9) == pytest.approx(HYP_075_125_1_09, rel=1e-10)

    def test_logarithmic_case_near_one(self):
        # c - a - b = 0: 2F1(1/2, 1/2; 1; x) = 2 K(x) / pi
        from scipy.special import ellipk

        for x in (0.8, 0.95, 0.999):
            assert hyp2f1(0.5, 0.5, 1.0, x) == pytest.approx(2 * ellipk(x) / math.pi, rel=1e-10)

    def test_complement_matches(self):
        x = np.array([0.1, 0.5, 0.8, 0.99])
        np.testing.assert_allclose(hyp2f1_complement(1.3, 0.7, 1.5, 1 - x), hyp2f1(1.3, 0.7, 1.5, x), rtol=1e-12)

    @pytest.mark.parametrize("x", [1.0, 1.5, -0.1])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            hyp2f1(0.5, 0.5, 1.0, x)

    def test_nonpositive_integer_c(self):
        with pytest.raises(ValueError):
            hyp2f1(0.5, 0.5, -2.0, 0.3)

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.floats(0.1, 3.0),
        b=st.floats(0.1, 3.0),
        c=st.floats(0.6, 4.0),
        x=st.floats(0.0, 0.97),
    )
    def test_contiguity(self, a, b, c, x):
        # F(a+1, b; c) - F(a, b; c) = (b x / c) F(a+1, b+1; c+1)
        lhs = hyp2f1(a + 1, b, c, x) - hyp2f1(a, b, c, x)
        rhs = b * x / c * hyp2f1(a + 1, b + 1, c + 1, x)
        scale = 1 + abs(hyp2f1(a + 1, b, c, x))
        assert abs(lhs - rhs) <= 1e-8 * scale


class TestGaussJacobi:
    def test_one_point_legendre(self):
        g = gauss_jacobi(1, 0, 0)
        np.testing.assert_allclose(g.nodes, [0.0], atol=1e-15)
        np.testing.assert_allclose(g.weights, [2.0])

    @pytest.mark.parametrize("n", [1, 2, 7, 40])
    def test_total_weight(self, n):
        assert gauss_jacobi(n, 0, 0).weights.sum() == pytest.approx(2.0, rel=1e-14)

    def test_zeroth_moment_beta(self):
        g = gauss_jacobi(8, 0.5, 0.0)
        # 2^{alpha+beta+1} B(alpha+1, beta+1) with alpha = 1/2, beta = 0
        assert g.weights.sum() == pytest.approx(2**1.5 * math.gamma(1.5) * math.gamma(1) / math.gamma(2.5), rel=1e-13)

    def test_rule_invariants(self):
        g = gauss_jacobi(25, -0.5, 1.5)
        assert np.all(g.weights > 0)
        assert np.all(np.diff(g.nodes) > 0)
        assert g.nodes[0] > -1 and g.nodes[-1] < 1
        assert g.jacobi_exponents == (-0.5, 1.5)

    @pytest.mark.parametrize("bad", [(0, 0, 0), (3, -1, 0), (3, 0, -1.5)])
    def test_bad_input(self, bad):
        with pytest.raises(ValueError):
            gauss_jacobi(*bad)

    @settings(max_examples=25, deadline=None)
    @given(alpha=st.floats(-0.9, 3.0), beta=st.floats(-0.9, 3.0), order=st.integers(1, 12))
    def test_exact_moments(self, alpha, beta, order):
        g = gauss_jacobi(order, alpha, beta)
        m0 = jacobi_moment(0, alpha, beta)
        for k in range(2 * order):
            assert abs(g.integrate(g.nodes**k) - jacobi_moment(k, alpha, beta)) <= 1e-11 * m0


def test_jacobi_moment_against_direct_integral():
    from scipy.integrate import quad

    a, b = 1.3, 0.4
    for k in range(6):
        ref, _ = quad(lambda z: (1 - z) ** a * (1 + z) ** b * z**k, -1, 1, epsabs=1e-14, epsrel=1e-13)
        assert jacobi_moment(k, a, b) == pytest.approx(ref, rel=1e-10, abs=1e-14)


class TestBesselZeros:
    def test_j0(self):
        assert bessel_j_zero(0, 1) == pytest.approx(J0_ZEROS[0], abs=1e-10)
        assert bessel_j_zero(0, 2) == pytest.approx(J0_ZEROS[1], abs=1e-10)

    def test_half_order_is_pi(self):
        for k in (1, 2, 5):
            assert bessel_j_zero(0.5, k) == pytest.approx(k * math.pi, abs=1e-10)

    def test_negative_half_order(self):
        # J_{-1/2} is proportional to cos(x)/sqrt(x)
        assert bessel_j_zero(-0.5, 2) == pytest.approx(1.5 * math.pi, abs=1e-10)

    def test_higher_order(self):
        assert bessel_j_zero(1, 3) == pytest.approx(J1_THIRD_ZERO, abs=1e-10)

    def test_bad_index(self):
        with pytest.raises(ValueError):
            bessel_j_zero(0, 0)


class TestConstants:
    def test_one_dimensional_half(self):
        c = frac_constants(1, 0.5)
        assert c.c_Ns == pytest.approx(1 / math.pi, rel=1e-14)
        assert c.p_Ns == pytest.approx(1 / math.pi, rel=1e-14)
        assert c.a_s == pytest.approx(1.0, rel=1e-14)
        assert c.gamma_1ps_sq == pytest.approx(math.pi / 4, rel=1e-14)

    @pytest.mark.parametrize("N,s", [(1, 0.25), (2, 0.5), (3, 0.75)])
    def test_p_normalises_poisson_kernel(self, N, s):
        from scipy.integrate import quad

        # int_{R^N} (1 + |y|^2)^{-(N+2s)/2} dy in polar coordinates
        val, _ = quad(lambda r: sphere_area(N) * r ** (N - 1) * (1 + r * r) ** (-(N + 2 * s) / 2), 0, np.inf,
                      epsrel=1e-12)
        assert frac_constants(N, s).p_Ns * val == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.parametrize("s", [0.0, 1.0, -0.2])
    def test_s_range(self, s):
        with pytest.raises(ValueError):
            frac_constants(2, s)

    def test_sphere_and_ball(self):
        assert sphere_area(1) == pytest.approx(2.0)
        assert sphere_area(2) == pytest.approx(2 * math.pi)
        assert sphere_area(3) == pytest.approx(4 * math.pi)
        assert ball_volume(3) == pytest.approx(4 * math.pi / 3)
