"""Moment transforms, log-concavity checks, one-sided moment comparisons."""

import math

import numpy as np
import pytest

from thinshell import (
    RngStream,
    g_transform,
    h_transform,
    khinchine_check,
    khinchine_extremal_gap,
    khinchine_logconcavity,
    khinchine_rhs,
    log_half_direction_moment,
    logconcavity_test,
    make_affine,
    make_fnr,
    make_random_convex_density,
    positive_moment,
    second_difference_max,
    two_scale_profile,
)


# ------------------------------------------------------------- h transform

def test_h_transform_pure_power_is_geometric():
    # for f(t) = (1 + c t)^-alpha the normalized transform is exactly
    # c^-p, so its log is linear in p
    alpha, c = 9.0, 2.5

    def log_f(t):
        return -alpha * np.log1p(c * np.asarray(t, dtype=float))

    ps = np.linspace(0.0, 6.0, 13)
    prof = h_transform(log_f, ps, alpha=alpha, scale=1.0 / c)
    expected = -ps * math.log(c)
    np.testing.assert_allclose(prof.log_values, expected, rtol=1e-8, atol=1e-8)
    rep = logconcavity_test(prof.ps, prof.log_values, tol=1e-6)
    assert rep.passed and abs(rep.max_violation) < 1e-7


def test_h_transform_zero_order_is_density_at_zero():
    alpha = 7.0

    def log_f(t):
        return -alpha * np.log1p(np.asarray(t, dtype=float)) + 0.25

    prof = h_transform(log_f, np.array([0.0, 1.0]), alpha=alpha)
    assert prof.log_values[0] == pytest.approx(0.25, abs=1e-9)


def test_h_transform_profile_route_matches_callable(fnr_3_8):
    prof_model = fnr_3_8.profile
    ps = np.linspace(0.0, 5.0, 9)
    via_profile = h_transform(prof_model, ps)
    via_callable = h_transform(prof_model.log_value, ps,
                               alpha=prof_model.tail_index,
                               scale=prof_model.scale)
    np.testing.assert_allclose(via_profile.log_values, via_callable.log_values,
                               rtol=1e-9, atol=1e-9)


def test_h_transform_random_convex_profiles_logconcave():
    # smoke version of the main property: random convex-power profiles give
    # log-concave transforms (the full battery runs in the acceptance suite)
    for i in range(10):
        gen = RngStream(41, i)
        alpha = 3.0 + 44.0 * gen.generator().random()
        model = make_random_convex_density(1, alpha - 1.0, RngStream(41, 100 + i))
        fn, tail, scale = _ray(model)
        ps = np.linspace(0.0, 0.8 * alpha, 15)
        prof = h_transform(fn, ps, alpha=tail, scale=scale)
        rep = logconcavity_test(prof.ps, prof.log_values, tol=1e-6)
        assert rep.passed, f"case {i}: violation {rep.max_violation}"


def _ray(model):
    from thinshell import ray_log_density

    return ray_log_density(model, np.ones(model.n))


def test_h_transform_negative_control_fails():
    bad = two_scale_profile(8.0)
    ps = np.linspace(0.0, 6.0, 17)
    prof = h_transform(bad, ps, alpha=8.0)
    rep = logconcavity_test(prof.ps, prof.log_values, tol=1e-6)
    assert not rep.passed
    assert rep.max_violation > 1e-4


def test_h_transform_domain():
    alpha = 6.0

    def log_f(t):
        return -alpha * np.log1p(np.asarray(t, dtype=float))

    with pytest.raises(ValueError):
        h_transform(log_f, np.array([0.0, 6.5]), alpha=alpha)  # p >= alpha
    with pytest.raises(ValueError):
        h_transform(log_f, np.array([-0.5, 1.0]), alpha=alpha)  # p < 0


# ------------------------------------------------------------- g transform

def test_g_transform_m_affine_is_geometric():
    # for f(t) = (1 - t/T)^m on [0, T] the normalized transform is T^q
    m, upper = 3.0, 2.0

    def log_f(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            vals = m * np.log(np.clip(1.0 - t / upper, 0.0, None))
        return np.where(t >= upper, -np.inf, vals)

    qs = np.linspace(0.5, 6.0, 12)
    prof = g_transform(log_f, qs, m=m, upper=upper)
    # the support scale is divided out, so the witness profile is constant
    np.testing.assert_allclose(prof.log_values, 0.0, atol=1e-10)
    rep = logconcavity_test(prof.ps, prof.log_values, tol=1e-6)
    assert rep.passed


def test_g_transform_concave_root_profile_logconcave():
    # f^(1/m) concave on compact support implies a log-concave transform
    m, upper = 2.0, 1.0

    def log_f(t):
        t = np.asarray(t, dtype=float)
        root = np.clip(1.0 - t * t, 0.0, None)   # concave, nonnegative
        with np.errstate(divide="ignore"):
            vals = m * np.log(root)
        return np.where(t >= 1.0, -np.inf, vals)

    qs = np.linspace(0.5, 8.0, 14)
    prof = g_transform(log_f, qs, m=m, upper=upper)
    rep = logconcavity_test(prof.ps, prof.log_values, tol=1e-6)
    assert rep.passed, rep.max_violation


# -------------------------------------------------------- logconcavity test

def test_logconcavity_synthetic_control():
    ps = np.linspace(0.0, 8.0, 21)
    concave = -0.25 * (ps - 3.0) ** 2
    assert logconcavity_test(ps, concave).passed
    # a mid-grid bump of +0.05 on a gently curved base flips the sign of
    # one second difference
    gentle = -0.01 * (ps - 4.0) ** 2
    bumped = gentle.copy()
    bumped[10] += 0.05
    rep = logconcavity_test(ps, bumped)
    assert not rep.passed
    # the neighbours of the bump see +0.05 minus the base curvature -0.0032
    assert rep.max_violation == pytest.approx(0.0468, rel=1e-6)


def test_second_difference_max_nonuniform_grid():
    ps = np.array([0.0, 1.0, 3.0, 4.0, 7.0])
    vals = 2.0 - 0.5 * ps          # affine: all second differences vanish
    assert abs(second_difference_max(ps, vals)) < 1e-14
    vals2 = ps ** 2                # convex: positive second differences
    assert second_difference_max(ps, vals2) == pytest.approx(2.0, rel=1e-12)


# ----------------------------------------------------------- one-sided bits

def test_positive_moment_radial_closed_form(fnr_3_8):
    # E <X, theta>_+^s factorizes through the radial moment and the
    # half-direction moment of the sphere
    from thinshell import exact_moment_fnr

    s = 1.5
    raw = (exact_moment_fnr(3, 8.0, s) ** s
           * math.exp(log_half_direction_moment(3, s)))
    got = positive_moment(fnr_3_8, s, theta=np.array([0.0, 0.0, 1.0]))
    assert got == pytest.approx(raw ** (1.0 / s), rel=1e-9)


def test_positive_moment_mc_route_agrees(fnr_3_8):
    s = 1.5
    closed = positive_moment(fnr_3_8, s, theta=np.array([1.0, 0.0, 0.0]))
    mc = positive_moment(fnr_3_8, s, theta=np.array([1.0, 0.0, 0.0]),
                         mc_size=200_000, rng=RngStream(42, 0))
    assert mc == pytest.approx(closed, rel=0.03)


# ----------------------------------------------------------- khinchine side

def test_khinchine_rhs_monotone_and_domain():
    # higher q moves the ratio bound up
    assert khinchine_rhs(10.0, 1.0, 3.0) > khinchine_rhs(10.0, 1.0, 2.0) > 1.0
    with pytest.raises(ValueError):
        khinchine_rhs(10.0, 3.0, 2.0)
    with pytest.raises(ValueError):
        khinchine_rhs(10.0, 1.0, 10.0)


def test_khinchine_extremal_gap_small():
    # the half-line extremal law attains the bound; quadrature confirms it
    for r, p, q in [(10.0, 1.0, 2.0), (50.0, 1.5, 3.0), (6.0, 0.5, 5.0)]:
        assert khinchine_extremal_gap(r, p, q) < 1e-10


def test_khinchine_symmetric_1d_attains_bound():
    # the symmetric one-dimensional power law sits exactly on the scaled
    # bound (support mass one half)
    rep = khinchine_check(make_fnr(1, 6.0), 1.0, 2.0)
    assert rep.support_mass == pytest.approx(0.5, rel=1e-12)
    assert rep.ratio == pytest.approx(1.0, rel=1e-10)
    assert rep.holds


def test_khinchine_radial_closed_form(fnr_3_8):
    rep = khinchine_check(fnr_3_8, 1.0, 2.0)
    assert rep.method == "closed_form"
    assert rep.holds
    assert rep.lhs <= rep.rhs * (1 + 1e-12)
    # direction independence for a radial model
    rep2 = khinchine_check(fnr_3_8, 1.0, 2.0,
                           theta=np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0))
    assert rep2.lhs == pytest.approx(rep.lhs, rel=1e-12)


def test_khinchine_affine_mc(fnr_3_8):
    model = make_affine(fnr_3_8, np.array([[2.0, 0.4, 0.0],
                                           [0.0, 1.0, 0.0],
                                           [0.0, 0.0, 0.7]]))
    rep = khinchine_check(model, 1.0, 2.0, theta=np.array([0.8, 0.6, 0.0]),
                          mc_size=150_000, rng=RngStream(43, 0))
    assert rep.method == "mc"
    assert rep.se > 0.0
    assert rep.holds


def test_khinchine_transform_route(fnr_3_8):
    rep = khinchine_check(fnr_3_8, 1.0, 2.0, transform_route=True)
    assert rep.transform_gap is not None
    assert abs(rep.transform_gap) < 1e-5


def test_khinchine_logconcavity_radial(fnr_3_8):
    rep = khinchine_logconcavity(fnr_3_8)
    assert rep.passed, rep.max_violation


def test_khinchine_check_domain(fnr_3_8):
    with pytest.raises(ValueError):
        khinchine_check(fnr_3_8, 2.0, 1.0)     # needs p <= q
    with pytest.raises(ValueError):
        khinchine_check(fnr_3_8, 1.0, 8.0)     # needs q < r
