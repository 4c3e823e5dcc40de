"""Quadrature engine against closed-form integrals."""

import math

import mpmath
import numpy as np
import pytest

from thinshell._quad import (
    QuadratureError,
    integrate_finite,
    log_integral_finite,
    log_power_moment,
)
from thinshell.specfun import log_beta, log_gamma

mpmath.mp.dps = 30


# ----------------------------------------------------------- finite integrals

def test_integrate_finite_polynomial():
    res = integrate_finite(lambda t: 3.0 * t * t, 0.0, 2.0)
    assert res.value == pytest.approx(8.0, rel=1e-12)


def test_integrate_finite_exponential():
    res = integrate_finite(np.exp, -1.0, 1.0)
    assert res.value == pytest.approx(math.e - 1.0 / math.e, rel=1e-12)


def test_integrate_finite_sharp_peak_with_bracketing_seeds():
    # narrow Gaussian bump inside a wide interval; bracketing seed points
    # keep the core interior to a panel so the error estimates see it
    center, width = 0.3, 1e-4

    def bump(t):
        return np.exp(-0.5 * ((t - center) / width) ** 2)

    res = integrate_finite(
        bump, 0.0, 1.0, seeds=[center - 8 * width, center + 8 * width])
    exact = width * math.sqrt(2 * math.pi)
    assert res.value == pytest.approx(exact, rel=1e-9)


def test_log_integral_finite_narrow_interior_peak():
    # regression: a cut placed exactly at a narrow maximum used to leave
    # both neighbouring panels blind to it, halving the integral
    center, width = 0.3, 1e-4

    def log_bump(t):
        return -0.5 * ((np.asarray(t, dtype=float) - center) / width) ** 2

    got = log_integral_finite(log_bump, 0.0, 1.0)
    exact = math.log(width * math.sqrt(2 * math.pi))
    assert got == pytest.approx(exact, rel=1e-9, abs=1e-9)


def test_log_integral_finite_matches_linear_route():
    res = integrate_finite(lambda t: np.exp(-t) * t, 0.0, 5.0)
    log_res = log_integral_finite(lambda t: -t + np.log(t + 1e-300), 0.0, 5.0)
    assert log_res == pytest.approx(math.log(res.value), rel=1e-10)


# --------------------------------------------------------- log power moments

def test_power_moment_gaussian_closed_form():
    # int_0^inf t^(p-1) exp(-t^2/2) dt = 2^(p/2-1) Gamma(p/2)
    def log_g(t):
        t = np.asarray(t, dtype=float)
        return -0.5 * t * t

    for p in (0.5, 1.0, 2.0, 3.7, 10.0):
        expected = (p / 2 - 1) * math.log(2.0) + log_gamma(p / 2)
        got = log_power_moment(log_g, p, tail_index=p + 60.0)
        assert got == pytest.approx(expected, rel=1e-10, abs=1e-10), f"p={p}"


def test_power_moment_power_law_closed_form():
    # int_0^inf t^(p-1) (1+t)^(-alpha) dt = B(p, alpha - p)
    alpha = 9.5

    def log_w(t):
        return -alpha * np.log1p(np.asarray(t, dtype=float))

    for p in (0.25, 1.0, 2.0, 6.0, 9.0):
        expected = log_beta(p, alpha - p)
        got = log_power_moment(log_w, p, tail_index=alpha)
        assert got == pytest.approx(expected, rel=1e-9, abs=1e-9), f"p={p}"


def test_power_moment_compact_support():
    # int_0^1 t^(q-1) (1-t)^m dt = B(q, m+1)
    m = 3.0

    def log_f(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = m * np.log(np.clip(1.0 - t, 0.0, None))
        return np.where(t >= 1.0, -np.inf, out)

    for q in (0.5, 1.0, 2.5, 7.0):
        expected = log_beta(q, m + 1.0)
        got = log_power_moment(log_f, q, upper=1.0)
        assert got == pytest.approx(expected, rel=1e-9, abs=1e-9), f"q={q}"


def test_power_moment_scale_shift_invariance():
    # rescaling the profile shifts the moment by p * log(scale)
    alpha = 12.0
    c = 713.0

    def log_w(t):
        return -alpha * np.log1p(c * np.asarray(t, dtype=float))

    def log_w_unit(t):
        return -alpha * np.log1p(np.asarray(t, dtype=float))

    p = 3.0
    scaled = log_power_moment(log_w, p, tail_index=alpha, scale=1.0 / c)
    unit = log_power_moment(log_w_unit, p, tail_index=alpha)
    assert scaled == pytest.approx(unit - p * math.log(c), rel=1e-9)


def test_power_moment_mpmath_oracle():
    # an awkward non-power integrand cross-checked at high precision
    def log_f(t):
        t = np.asarray(t, dtype=float)
        return -np.sqrt(1.0 + t * t)

    p = 2.3
    expected = float(mpmath.log(mpmath.quad(
        lambda t: t ** (p - 1) * mpmath.exp(-mpmath.sqrt(1 + t * t)),
        [0, 1, 10, 200])))
    got = log_power_moment(log_f, p, tail_index=p + 40.0)
    assert got == pytest.approx(expected, rel=1e-8)


# ------------------------------------------------------------------- errors

def test_power_moment_requires_positive_order():
    with pytest.raises(ValueError):
        log_power_moment(lambda t: -np.asarray(t), 0.0, tail_index=10.0)
    with pytest.raises(ValueError):
        log_power_moment(lambda t: -np.asarray(t), -1.0, tail_index=10.0)


def test_power_moment_divergent_tail_rejected():
    # tail decay must beat the polynomial growth for an infinite range
    def log_w(t):
        return -2.0 * np.log1p(np.asarray(t, dtype=float))

    with pytest.raises((ValueError, QuadratureError)):
        log_power_moment(log_w, 3.0, tail_index=2.0)


def test_power_moment_infinite_range_needs_tail_index():
    with pytest.raises((ValueError, QuadratureError)):
        log_power_moment(lambda t: -np.asarray(t, dtype=float), 2.0)
