"""Special functions against mpmath oracles and closed-form anchors."""

import math

import mpmath
import numpy as np
import pytest

from thinshell import (
    LogScalar,
    beta_ratio_log,
    beta_root,
    beta_slope,
    digamma,
    gaussian_cdf,
    load_calibration,
    log_beta,
    log_gamma,
    log_half_direction_moment,
    log_sphere_area,
    sphere_area,
    tetragamma,
    trigamma,
)

mpmath.mp.dps = 40


# ---------------------------------------------------------------- log_gamma

def test_log_gamma_trivial_values():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(2.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
    # Gamma(10) = 9!, the factorial computed independently
    assert log_gamma(10.0) == pytest.approx(math.log(math.factorial(9)), rel=1e-14)


def test_log_gamma_against_mpmath():
    xs = np.concatenate([
        np.geomspace(1e-3, 0.99, 25),
        np.geomspace(1.0, 1e6, 60),
        [0.5, 1.5, 2.5, 171.6, 1e8],
    ])
    for x in xs:
        expected = float(mpmath.loggamma(mpmath.mpf(float(x))))
        got = log_gamma(float(x))
        assert got == pytest.approx(expected, rel=1e-12, abs=1e-13), f"x={x}"


def test_log_gamma_domain():
    for bad in (0.0, -1.0, -0.5):
        with pytest.raises(ValueError):
            log_gamma(bad)


def test_stirling_envelope_spot():
    # two-sided Stirling envelope with the e^(1/12) upper factor, x >= 1
    for x in np.geomspace(1.0, 1e4, 41):
        lo = 0.5 * math.log(2 * math.pi) + (x - 0.5) * math.log(x) - x
        val = log_gamma(float(x))
        assert lo <= val + 1e-12, f"lower envelope broken at x={x}"
        assert val <= lo + 1.0 / 12.0 + 1e-12, f"upper envelope broken at x={x}"


# ------------------------------------------------------- polygamma functions

@pytest.mark.parametrize("fn,order", [(digamma, 0), (trigamma, 1), (tetragamma, 2)])
def test_polygamma_against_mpmath(fn, order):
    for x in [0.1, 0.5, 1.0, 2.5, 10.0, 123.4, 1e4]:
        expected = float(mpmath.psi(order, mpmath.mpf(x)))
        assert fn(x) == pytest.approx(expected, rel=1e-10, abs=1e-12), f"x={x}"


# -------------------------------------------------------------------- beta

def test_log_beta_symmetry_and_recurrence():
    assert log_beta(1.0, 1.0) == pytest.approx(0.0, abs=1e-14)
    for x, y in [(2.0, 3.0), (0.5, 7.0), (10.0, 10.0), (123.0, 4.5)]:
        assert log_beta(x, y) == log_beta(y, x)
        # B(x+1, y) = B(x, y) * x / (x + y)
        assert log_beta(x + 1.0, y) == pytest.approx(
            log_beta(x, y) + math.log(x / (x + y)), rel=1e-12)


def test_log_beta_against_mpmath():
    for x, y in [(1.0, 1.0), (3.0, 17.0), (0.25, 0.75), (250.0, 1.5), (1e3, 1e3)]:
        expected = float(mpmath.log(mpmath.beta(x, y)))
        assert log_beta(x, y) == pytest.approx(expected, rel=1e-11, abs=1e-12)


def test_beta_ratio_log_matches_direct_beta():
    # the function carries the 1/p normalization
    for k, r, p in [(3.0, 10.0, 2.0), (5.0, 20.0, -1.5), (50.0, 100.0, 4.0)]:
        expected = (log_beta(k + p, r - p) - log_beta(k, r)) / p
        assert beta_ratio_log(k, r, p) == pytest.approx(expected, rel=1e-12, abs=1e-13)


def test_beta_ratio_log_continuous_at_zero():
    k, r = 6.0, 14.0
    limit = digamma(k) - digamma(r)
    assert beta_ratio_log(k, r, 0.0) == pytest.approx(limit, rel=1e-12)
    # just above the series threshold the direct Gamma route must agree
    # with the polygamma expansion evaluated at the same p
    p = 2e-5
    series = (limit + 0.5 * p * (trigamma(k) + trigamma(r))
              + p * p / 6.0 * (tetragamma(k) - tetragamma(r)))
    assert beta_ratio_log(k, r, p) == pytest.approx(series, rel=1e-9)


def test_beta_root_anchors():
    assert beta_root(1.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    # B(2,2) = 1/6 by direct integration of t(1-t)
    assert beta_root(2.0, 2.0) == pytest.approx(math.sqrt(2.0 / 6.0), rel=1e-13)


def test_beta_root_band_at_symmetric_point():
    constants = load_calibration()
    value = beta_root(100.0, 100.0)
    assert constants.beta_root_lo / 2 <= value <= constants.beta_root_hi / 2


def test_beta_root_domain():
    # the moment-body sandwich needs arguments below 1, so the domain is the
    # whole positive quadrant; only nonpositive arguments are rejected
    assert beta_root(0.5, 2.0) > 0.0
    with pytest.raises(ValueError):
        beta_root(2.0, 0.0)
    with pytest.raises(ValueError):
        beta_root(-1.0, 2.0)


# -------------------------------------------------------------- beta_slope

def test_beta_slope_limit_at_zero():
    # the p -> 0 limit is half the symmetric second derivative,
    # (psi'(k) + psi'(r)) / 2
    for k, r in [(10.0, 10.0), (5.0, 20.0), (30.0, 7.0)]:
        expected = 0.5 * (trigamma(k) + trigamma(r))
        assert beta_slope(k, r, 1e-6) == pytest.approx(expected, rel=1e-6)
        assert beta_slope(k, r, 1e-6) >= 0.0


def test_beta_slope_continuous_across_series_threshold():
    for k, r in [(10.0, 10.0), (8.0, 12.0)]:
        below = beta_slope(k, r, 9e-5)
        above = beta_slope(k, r, 1.1e-4)
        assert below == pytest.approx(above, rel=1e-4)


def test_beta_slope_finite_difference_oracle():
    k, r, p = 8.0, 12.0, 2.0

    def objective(q):
        return (log_beta(k + q, r - q) - log_beta(k, r)) / q

    h = 1e-5
    central = (objective(p + h) - objective(p - h)) / (2 * h)
    assert beta_slope(k, r, p) == pytest.approx(central, abs=1e-6)


def test_beta_slope_band_spot():
    val = beta_slope(5.0, 20.0, 1.0)
    assert -1e-10 <= val <= 1.0 / 19.0 + 1.0 / 4.0 + 1e-10


def test_beta_slope_domain():
    with pytest.raises(ValueError):
        beta_slope(5.0, 20.0, 3.0)   # |p| > (min-1)/2 = 2
    with pytest.raises(ValueError):
        beta_slope(1.0, 20.0, 0.5)   # k must exceed 1


# ------------------------------------------------------------------ spheres

def test_sphere_area_known_values():
    # area of the unit sphere S^(k-1) in R^k
    expected = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi, 4: 2 * math.pi ** 2}
    for k, area in expected.items():
        assert sphere_area(k).to_float() == pytest.approx(area, rel=1e-13)
        assert log_sphere_area(k) == pytest.approx(math.log(area), rel=1e-13)


def test_half_direction_moment_closed_forms():
    # E <theta, u>_+^s over the unit sphere; s=0 gives mass 1/2,
    # s=2 gives 1/(2n), and n=3, s=1 gives 1/4
    for n in (2, 3, 10, 50):
        assert math.exp(log_half_direction_moment(n, 0.0)) == pytest.approx(0.5, rel=1e-12)
        assert math.exp(log_half_direction_moment(n, 2.0)) == pytest.approx(
            0.5 / n, rel=1e-12)
    assert math.exp(log_half_direction_moment(3, 1.0)) == pytest.approx(0.25, rel=1e-12)


def test_half_direction_moment_mpmath_oracle():
    # E |u_1|^s / 2 = Gamma((s+1)/2) Gamma(n/2) / (2 sqrt(pi) Gamma((n+s)/2))
    for n, s in [(4, 1.3), (7, 0.4), (12, 3.6)]:
        expected = float(
            mpmath.gamma((s + 1) / 2) * mpmath.gamma(n / 2)
            / (2 * mpmath.sqrt(mpmath.pi) * mpmath.gamma((n + s) / 2)))
        assert math.exp(log_half_direction_moment(n, s)) == pytest.approx(
            expected, rel=1e-11)


# ---------------------------------------------------------------- LogScalar

def test_logscalar_arithmetic():
    x = LogScalar.from_float(3.0)
    y = LogScalar.from_float(-2.0)
    assert (x * y).to_float() == pytest.approx(-6.0, rel=1e-14)
    assert (x / y).to_float() == pytest.approx(-1.5, rel=1e-14)
    assert (-x).to_float() == pytest.approx(-3.0, rel=1e-14)
    assert x.pow(2.5).to_float() == pytest.approx(3.0 ** 2.5, rel=1e-13)
    assert float(x) == x.to_float()


def test_logscalar_no_overflow():
    big = LogScalar.from_log(800.0)
    ratio = big / LogScalar.from_log(799.0)
    assert ratio.to_float() == pytest.approx(math.e, rel=1e-12)


def test_logscalar_zero():
    z = LogScalar.from_float(0.0)
    assert z.sign == 0
    assert z.to_float() == 0.0
    assert (z * LogScalar.from_float(5.0)).to_float() == 0.0


# -------------------------------------------------------------- gaussian cdf

def test_gaussian_cdf_against_scipy():
    from scipy.stats import norm

    xs = np.array([-8.0, -2.0, -0.5, 0.0, 0.5, 2.0, 8.0])
    np.testing.assert_allclose(gaussian_cdf(xs), norm.cdf(xs), rtol=1e-12)
