import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate

from bellbound.analysis import (COEFFICIENT_CAP, DISTANCE_BOUND, AliasingError, AngleRangeError, FourierSpectrum,
                                bell_inequality_check, check_fourier_bounds, chsh_value, continuity_modulus_check,
                                cosine_function, distance_bound_from_c1, fourier_coefficients, half_period_distance,
                                l2_distance, l2_inner, l2_norm, parseval_residual, bound_margin,
                                reconstruct_from_spectrum)
from bellbound.correlation import CorrelationFunction, GridError, uniform_grid
from bellbound.models import BellHemisphereModel, bell_correlation_exact, simulate_correlation

BELL_DISTANCE = math.sqrt(5 / 6 - 8 / math.pi**2)


def triangle_coefficient_by_quad(k):
    """Independent oracle: (1/pi) int_0^pi cos(kt)(1 - 2t/pi) dt by adaptive quadrature."""
    val, _ = integrate.quad(lambda t: math.cos(k * t) * (1 - 2 * t / math.pi), 0, math.pi, limit=200)
    return val / math.pi


class TestFourierCoefficients:
    def test_triangle_first_coefficient(self, triangle):
        s = fourier_coefficients(triangle, 8)
        assert s[1] == pytest.approx(4 / math.pi**2, abs=1e-5)
        assert s[2] == pytest.approx(0.0, abs=1e-5)
        assert s.imag_residue <= 1e-10

    def test_triangle_against_quadrature_oracle(self, triangle):
        s = fourier_coefficients(triangle, 7)
        for k in range(1, 8):
            oracle = triangle_coefficient_by_quad(k)
            closed_form = 4 / (k * math.pi) ** 2 if k % 2 else 0.0
            assert oracle == pytest.approx(closed_form, abs=1e-12)
            assert s[k] == pytest.approx(oracle, abs=1e-6)

    def test_cos_is_grid_exact(self, cosine):
        s = fourier_coefficients(cosine, 10)
        assert s[1] == pytest.approx(0.5, abs=1e-15)
        assert np.max(np.abs(np.delete(s.coefficients, 1))) <= 1e-15

    def test_aliasing_rejected(self, triangle):
        with pytest.raises(AliasingError):
            fourier_coefficients(triangle, 2048)
        fourier_coefficients(triangle, 2047)

    def test_non_power_of_two_grid_rejected(self):
        with pytest.raises(GridError):
            fourier_coefficients(CorrelationFunction.from_function(np.cos, 100), 3)

    def test_quadrature_converges_quadratically(self):
        errs = []
        for n in (256, 1024, 4096):
            C = CorrelationFunction.from_function(bell_correlation_exact, n)
            errs.append(abs(fourier_coefficients(C, 1)[1] - 4 / math.pi**2))
        for ratio in (errs[0] / errs[1], errs[1] / errs[2]):
            assert 8 <= ratio <= 32


class TestReconstruction:
    @pytest.mark.parametrize("terms", [5, 50])
    def test_truncated_triangle_series_within_tail_bound(self, terms):
        k_max = 2 * terms - 1
        c = np.zeros(k_max + 1)
        odd = np.arange(1, k_max + 1, 2)
        c[odd] = 4 / (odd * math.pi) ** 2
        C = reconstruct_from_spectrum(FourierSpectrum(c), 4096)
        # sum over odd k of 1/k^2 is pi^2/8
        tail = (8 / math.pi**2) * (math.pi**2 / 8 - np.sum(1.0 / odd**2))
        err = np.max(np.abs(C.values - bell_correlation_exact(C.t)))
        assert err <= tail + 1e-12
        # the bound is attained at t = 0
        assert err == pytest.approx(tail, rel=1e-9)

    def test_cos_spectrum(self):
        C = reconstruct_from_spectrum(FourierSpectrum([0.0, 0.5]), 64)
        np.testing.assert_allclose(C.values, np.cos(uniform_grid(64)), atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(arrays(float, 9, elements=st.floats(-1, 1)))
    def test_round_trip_band_limited(self, coeffs):
        s = FourierSpectrum(coeffs)
        back = fourier_coefficients(reconstruct_from_spectrum(s, 64), 8)
        np.testing.assert_allclose(back.coefficients, coeffs, atol=1e-10)


class TestBoundCheck:
    def test_triangle_passes_with_saturation(self, triangle):
        s = fourier_coefficients(triangle, 20)
        report = check_fourier_bounds(s, 1e-6)
        assert report.verdict
        assert report.upper_slack[1] == pytest.approx(0.0, abs=1e-6)

    def test_cos_fails_at_k1(self, cosine):
        report = check_fourier_bounds(fourier_coefficients(cosine, 4), 0.0)
        assert not report.verdict
        assert report.failures == [1]

    def test_negative_coefficient_fails(self):
        report = check_fourier_bounds(FourierSpectrum([0.1, 0.3, 0.0, -0.1]), 0.0)
        assert report.failures == [3]

    def test_cap_constant(self):
        assert COEFFICIENT_CAP == pytest.approx(0.4052847346, abs=1e-10)


class TestL2:
    def test_cos_norm(self, cosine):
        assert l2_norm(cosine) ** 2 == pytest.approx(0.5, abs=1e-15)

    def test_triangle_norm(self, triangle):
        assert l2_norm(triangle) ** 2 == pytest.approx(1 / 3, abs=1e-6)

    def test_triangle_distance(self, triangle, cosine):
        assert l2_distance(triangle, cosine) == pytest.approx(BELL_DISTANCE, abs=1e-5)
        assert BELL_DISTANCE == pytest.approx(0.15088, abs=5e-6)

    def test_half_period_form_agrees(self, triangle, cosine):
        th = np.linspace(0, math.pi, 2049)
        half = half_period_distance(th, bell_correlation_exact(th))
        assert half == pytest.approx(l2_distance(triangle, cosine), abs=1e-6)

    def test_grid_mismatch(self, triangle):
        with pytest.raises(GridError):
            l2_inner(triangle, cosine_function(64))


class TestDistanceBound:
    def test_values(self):
        assert distance_bound_from_c1(4 / math.pi**2) == DISTANCE_BOUND
        assert distance_bound_from_c1(0.5) == 0.0
        assert distance_bound_from_c1(0.0) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert DISTANCE_BOUND == pytest.approx(0.13395, abs=5e-6)

    @given(st.floats(0, 0.5), st.floats(0, 0.5))
    def test_decreasing_on_unit_half(self, x, y):
        lo, hi = min(x, y), max(x, y)
        assert distance_bound_from_c1(lo) >= distance_bound_from_c1(hi)


class TestBoundMargin:
    def test_triangle(self, triangle):
        r = bound_margin(triangle)
        assert r.distance == pytest.approx(0.15088, abs=1e-5)
        assert r.bound == pytest.approx(0.13395, abs=5e-6)
        assert r.margin == pytest.approx(BELL_DISTANCE - DISTANCE_BOUND, abs=1e-5)
        assert r.margin == pytest.approx(0.01693, abs=1e-5)
        assert r.c1_within_cap and r.decomposition_holds
        assert abs(r.decomposition_residual) <= 1e-10

    def test_cos(self, cosine):
        r = bound_margin(cosine)
        assert r.distance == pytest.approx(0.0, abs=1e-15)
        assert r.margin == pytest.approx(-DISTANCE_BOUND, abs=1e-15)
        assert not r.c1_within_cap

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, 12, elements=st.floats(0, 1)))
    def test_feasible_spectra_respect_bound(self, u):
        w = np.full(12, 2.0)
        w[0] = 1.0
        total = w @ u
        if total <= 0:
            return
        c = u / total
        if np.any(c > COEFFICIENT_CAP):
            return
        s = FourierSpectrum(c)
        assert check_fourier_bounds(s, 0.0).verdict
        r = bound_margin(reconstruct_from_spectrum(s, 64))
        assert r.margin >= -1e-9


class TestContinuity:
    def brute_force(self, f, n, steps):
        eps = steps * 2 * math.pi / n
        worst = -math.inf
        for j in range(n):
            t = 2 * math.pi * j / n
            worst = max(worst, (f(t + eps) - f(t)) ** 2 - 2 * (f(0.0) - f(eps)))
        return worst

    @pytest.mark.parametrize("steps", [1, 3, 17, 100])
    def test_triangle_and_cos(self, steps):
        for f in (bell_correlation_exact, math.cos):
            C = CorrelationFunction.from_function(np.vectorize(f), 512)
            slack = continuity_modulus_check(C, steps)
            assert slack <= 1e-10
            assert slack == pytest.approx(self.brute_force(f, 512, steps), abs=1e-12)

    def test_square_wave_flagged(self):
        C = CorrelationFunction.from_samples(np.sign(np.cos(uniform_grid(512))) + (np.cos(uniform_grid(512)) == 0))
        slack = continuity_modulus_check(C, 1)
        assert slack > 3.9
        worst_t = max(range(512), key=lambda j: (C.values[(j + 1) % 512] - C.values[j]) ** 2)
        assert abs(uniform_grid(512)[worst_t] - math.pi / 2) < 0.05


class TestBellInequality:
    def test_cos_counterexample(self, cosine):
        r = bell_inequality_check(cosine, math.pi / 4, math.pi / 4)
        assert r.lhs == pytest.approx(1 / math.sqrt(2), abs=1e-6)
        assert r.rhs == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-6)
        assert not r.satisfied

    def test_triangle_equality(self, triangle):
        r = bell_inequality_check(triangle, math.pi / 4, math.pi / 4)
        assert r.lhs == pytest.approx(0.5, abs=1e-12)
        assert r.rhs == pytest.approx(0.5, abs=1e-12)
        assert r.satisfied

    def test_zero_separation(self, triangle):
        r = bell_inequality_check(triangle, 1.0, 0.0)
        assert r.lhs == 0.0 and r.rhs == 0.0 and r.satisfied

    def test_angle_range(self, triangle):
        with pytest.raises(AngleRangeError):
            bell_inequality_check(triangle, 2.0, 2.0)
        with pytest.raises(AngleRangeError):
            bell_inequality_check(triangle, -0.1, 0.5)

    def test_interpolated_samples(self):
        C = CorrelationFunction.from_samples(np.cos(uniform_grid(1024)))
        r = bell_inequality_check(C, 0.7, 0.9)
        assert r.lhs == pytest.approx(abs(math.cos(0.7) - math.cos(1.6)), abs=1e-5)


class TestCHSH:
    ANGLES = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)

    def test_quantum(self):
        s = chsh_value(lambda t: -math.cos(t), *self.ANGLES)
        assert s == pytest.approx(-2 * math.sqrt(2), abs=1e-12)

    def test_triangle(self):
        s = chsh_value(lambda t: -(1 - 2 * t / math.pi), *self.ANGLES)
        assert s == pytest.approx(-2.0, abs=1e-12)

    def test_zero(self):
        assert chsh_value(lambda t: 0.0, *self.ANGLES) == 0.0


@settings(max_examples=40, deadline=None)
@given(arrays(float, 64, elements=st.floats(-1, 1)))
def test_parseval_and_decomposition(values):
    C = CorrelationFunction.from_samples(values)
    assert parseval_residual(C) <= 1e-8
    cos_f = cosine_function(64)
    lhs = l2_distance(C, cos_f) ** 2
    rhs = l2_norm(C) ** 2 + 0.5 - 2 * l2_inner(cos_f, C)
    assert abs(lhs - rhs) <= 1e-10


def test_parseval_closed_forms(triangle, cosine):
    assert parseval_residual(triangle) <= 1e-8
    assert parseval_residual(cosine) <= 1e-8
    # for even data the sine part vanishes and c_0^2 + 2 sum c_k^2 carries the norm
    s = fourier_coefficients(triangle, 2047)
    assert abs(s.norm_squared - l2_norm(triangle) ** 2) <= 1e-8


@pytest.fixture(scope="module")
def bell_mc():
    return simulate_correlation(BellHemisphereModel(), uniform_grid(64), 1_000_000, seed=99)


class TestMonteCarloInput:
    def test_bound_check_with_statistical_tolerance(self, bell_mc):
        s = fourier_coefficients(bell_mc, 31)
        assert check_fourier_bounds(s, 5 * s.std_err).verdict
        assert check_fourier_bounds(s, n_sigma=5).verdict

    def test_bell_inequality_panel(self, bell_mc):
        step = 2 * math.pi / 64
        triples = [(i * step, j * step) for i in range(1, 6) for j in range(1, 5)]
        assert len(triples) == 20
        for t1, t2 in triples:
            assert bell_inequality_check(bell_mc, t1, t2, n_sigma=5).satisfied

    def test_properties_hold(self, bell_mc):
        assert parseval_residual(bell_mc) <= 1e-8
        r = bound_margin(bell_mc)
        assert abs(r.decomposition_residual) <= 1e-10
        for steps in (1, 2, 5, 16):
            assert continuity_modulus_check(bell_mc, steps) <= 0.0
        assert bell_mc.invariant_violations() == []

    def test_noisy_imaginary_residue_is_reported(self, bell_mc):
        s = fourier_coefficients(bell_mc, 5)
        assert s.imag_residue <= 5 * np.max(s.std_err)
