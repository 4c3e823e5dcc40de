"""Measure models: densities, marginals, isotropization, concavity."""

import math

import numpy as np
import pytest
from scipy import integrate

from thinshell import (
    RngStream,
    check_concavity,
    density,
    isotropize,
    log_density,
    log_sphere_area,
    make_affine,
    make_explicit,
    make_fnr,
    make_random_convex_density,
    marginal_density,
    marginal_model,
    marginal_profile,
    model_from_json,
    model_to_json,
    ray_log_density,
    sample_model,
)
from thinshell._quad import log_power_moment


# ----------------------------------------------------------------- radial

def test_fnr_density_normalization_against_scipy():
    # c1 is fixed by unit mass; re-derive it with scipy's independent
    # quadrature for the one-dimensional case
    model = make_fnr(1, 5.0)
    c2 = model.profile.c2
    half, _ = integrate.quad(lambda t: (1.0 + c2 * t) ** -6.0, 0.0, np.inf)
    c1 = 1.0 / (2.0 * half)
    assert density(model, np.zeros(1)).to_float() == pytest.approx(c1, rel=1e-9)


def test_fnr_mass_is_one_by_quadrature():
    for n, r in [(1, 5.0), (3, 8.0), (10, 20.0)]:
        model = make_fnr(n, r)
        log_mass = log_sphere_area(n) + log_power_moment(
            model.profile.log_value, float(n),
            tail_index=model.profile.tail_index,
            scale=model.profile.scale)
        assert log_mass == pytest.approx(0.0, abs=1e-9), f"(n,r)=({n},{r})"


def test_fnr_unit_second_moment_by_quadrature():
    # E |X|^2 = n pins the scale; verified by direct radial integration
    n, r = 3, 8.0
    model = make_fnr(n, r)
    log_m2 = log_sphere_area(n) + log_power_moment(
        model.profile.log_value, float(n) + 2.0,
        tail_index=model.profile.tail_index, scale=model.profile.scale)
    assert math.exp(log_m2) == pytest.approx(float(n), rel=1e-9)


def test_fnr_requires_finite_covariance():
    with pytest.raises(ValueError):
        make_fnr(3, 2.0)
    with pytest.raises(ValueError):
        make_fnr(0, 5.0)


# ---------------------------------------------------------------- densities

def test_log_density_affine_change_of_variables():
    base = make_fnr(2, 7.0)
    lin = np.array([[2.0, 1.0], [0.0, 0.5]])
    shift = np.array([0.3, -0.7])
    model = make_affine(base, lin, shift)
    inv = np.linalg.inv(lin)
    logdet = math.log(abs(np.linalg.det(lin)))
    pts = np.array([[0.0, 0.0], [1.0, 2.0], [-3.0, 0.5], [10.0, -4.0]])
    expected = [float(log_density(base, inv @ (x - shift))) - logdet for x in pts]
    got = [float(log_density(model, x)) for x in pts]
    np.testing.assert_allclose(got, expected, rtol=1e-12)


def test_log_density_vectorized_matches_scalar():
    model = make_fnr(3, 9.0)
    pts = RngStream(21, 0).generator().normal(size=(40, 3))
    batch = np.asarray(log_density(model, pts), dtype=float)
    single = [float(log_density(model, x)) for x in pts]
    np.testing.assert_allclose(batch, single, rtol=1e-13)


def test_ray_log_density_matches_log_density():
    # returns (callable, tail_index, scale); theta is normalized internally
    # and t runs along the unit ray
    base = make_fnr(2, 7.0)
    model = make_affine(base, np.array([[1.5, 0.3], [0.0, 1.0]]),
                        np.array([0.2, 0.1]))
    theta = np.array([0.6, 0.8])
    origin = np.array([0.1, -0.2])
    fn, tail_index, scale = ray_log_density(model, 5.0 * theta, origin=origin)
    assert tail_index > 0 and scale > 0
    for t in (0.0, 0.5, 2.0, 7.0):
        expected = float(log_density(model, origin + t * theta))
        assert float(fn(np.array([t]))[0]) == pytest.approx(expected, rel=1e-12)


def test_ray_log_density_radial_is_profile(fnr_3_8):
    fn, tail_index, scale = ray_log_density(fnr_3_8, np.array([0.0, 1.0, 0.0]))
    prof = fnr_3_8.profile
    assert tail_index == prof.tail_index and scale == prof.scale
    ts = np.array([0.0, 0.3, 2.5])
    np.testing.assert_allclose(fn(ts), prof.log_value(ts), rtol=1e-14)


# ---------------------------------------------------------------- marginals

def test_marginal_full_dimension_is_profile():
    model = make_fnr(3, 8.0)
    y = np.array([0.3, -0.4, 1.2])
    got = marginal_density(model, 3, y)
    expected = density(model, y)
    assert got.to_float() == pytest.approx(expected.to_float(), rel=1e-12)


def test_marginal_at_origin_against_fiber_formula():
    # the 1-D marginal at 0 integrates the density over a hyperplane:
    # g(0) = area(S^(n-2)) * int s^(n-2) w(s) ds
    n, r = 3, 8.0
    model = make_fnr(n, r)
    expected = math.exp(
        log_sphere_area(n - 1) + log_power_moment(
            model.profile.log_value, float(n - 1),
            tail_index=model.profile.tail_index, scale=model.profile.scale))
    got = marginal_density(model, 1, np.zeros(1)).to_float()
    assert got == pytest.approx(expected, rel=1e-7)


def test_marginal_mass_is_one(fnr_3_8):
    # the k-dimensional marginal is again a probability density
    prof = marginal_profile(fnr_3_8, 1)
    log_mass = log_sphere_area(1) + log_power_moment(
        prof.log_value, 1.0, tail_index=prof.tail_index, scale=prof.scale)
    assert log_mass == pytest.approx(0.0, abs=1e-9)


def test_marginal_symmetry(fnr_3_8):
    for t in (0.25, 1.0, 3.0):
        plus = marginal_density(fnr_3_8, 1, np.array([t])).to_float()
        minus = marginal_density(fnr_3_8, 1, np.array([-t])).to_float()
        assert plus == pytest.approx(minus, rel=1e-12)


def test_marginal_model_agrees_with_marginal_density(fnr_3_8):
    reduced = marginal_model(fnr_3_8, 2)
    assert reduced.n == 2
    # the concavity rank r is marginal-invariant; the k-dim marginal decays
    # like t^-(k+r)
    assert reduced.r == pytest.approx(fnr_3_8.r)
    for point in (np.array([0.5, 0.0]), np.array([1.0, -2.0])):
        got = float(log_density(reduced, point))
        expected = float(marginal_density(fnr_3_8, 2, point).log_abs)
        assert got == pytest.approx(expected, rel=1e-6, abs=1e-8)


def test_marginal_model_far_scale_regression():
    # regression: fiber quadrature must track the offset of the fiber, not
    # only the profile scale, or distant knots lose all mass
    model = make_fnr(4, 8.0)
    reduced = marginal_model(model, 2)
    prof = reduced.profile
    log_mass = log_sphere_area(2) + log_power_moment(
        prof.log_value, 2.0, tail_index=prof.tail_index, scale=prof.scale)
    assert log_mass == pytest.approx(0.0, abs=1e-6)


# ------------------------------------------------------------ serialization

def test_model_json_round_trip_radial():
    model = make_fnr(5, 11.5)
    clone = model_from_json(model_to_json(model))
    assert clone.n == model.n and clone.r == model.r
    pts = np.array([[0.1, 0.2, 0.3, 0.4, 0.5], [1.0, -1.0, 2.0, 0.0, 0.25]])
    np.testing.assert_allclose(np.asarray(log_density(clone, pts), dtype=float),
                               np.asarray(log_density(model, pts), dtype=float),
                               rtol=1e-12)


def test_model_json_round_trip_affine():
    base = make_fnr(2, 6.0)
    model = make_affine(base, np.array([[2.0, 0.3], [0.0, 1.0]]),
                        np.array([0.5, -0.25]))
    clone = model_from_json(model_to_json(model))
    pts = np.array([[0.0, 0.0], [1.5, -0.5]])
    np.testing.assert_allclose(np.asarray(log_density(clone, pts), dtype=float),
                               np.asarray(log_density(model, pts), dtype=float),
                               rtol=1e-12)


# ------------------------------------------------------------ isotropization

def test_isotropize_radial_is_identity():
    model = make_fnr(3, 9.0)
    iso = isotropize(model)
    np.testing.assert_allclose(iso.linear, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(iso.shift, np.zeros(3), atol=1e-12)
    assert iso.condition == pytest.approx(1.0, rel=1e-12)


def test_isotropize_affine_closed_form():
    base = make_fnr(3, 9.0)
    lin = np.diag([3.0, 1.0, 0.5])
    shift = np.array([1.0, 2.0, -1.0])
    model = make_affine(base, lin, shift)
    iso = isotropize(model)
    assert iso.condition == pytest.approx(6.0, rel=1e-10)
    # applying the map to samples must whiten them
    pts = sample_model(model, 100_000, RngStream(22, 0)).points
    mapped = (pts - iso.shift) @ iso.linear.T
    cov = mapped.T @ mapped / len(mapped)
    np.testing.assert_allclose(cov, np.eye(3), atol=0.06)


# ------------------------------------------------------------- concavity

def test_check_concavity_power_law_passes():
    # the power-law density raised to -1/(n+r) is affine, hence convex
    model = make_fnr(2, 7.0)
    rep = check_concavity(model, alpha=9.0, trials=400, rng=RngStream(23, 0))
    assert rep.passed, rep


def test_check_concavity_detects_violation():
    # a W-shaped log-density is not (-1/alpha)-concave for any alpha > 0
    def log_w(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        t = np.linalg.norm(pts, axis=1)
        return -((t - 3.0) ** 2)

    model = make_explicit(1, 6.0, log_w, scale_hint=3.0, name="ring")
    rep = check_concavity(model, alpha=7.0, trials=400, rng=RngStream(24, 0))
    assert not rep.passed


# ------------------------------------------------- random convex densities

def test_random_convex_density_dim1_mass_and_center():
    model = make_random_convex_density(1, 6.0, RngStream(25, 0))
    logs = model.log_density_fn

    def w(t):
        pts = np.asarray(t, dtype=float).reshape(-1, 1)
        return np.exp(np.asarray(model.log_density_fn(pts), dtype=float))

    mass, _ = integrate.quad(lambda t: float(w(t)[0]), -60.0, 60.0, limit=200)
    bary, _ = integrate.quad(lambda t: t * float(w(t)[0]), -60.0, 60.0, limit=200)
    assert mass == pytest.approx(1.0, abs=2e-6)
    assert bary == pytest.approx(0.0, abs=2e-5)


def test_random_convex_density_is_concave_measure():
    model = make_random_convex_density(2, 8.0, RngStream(26, 0))
    rep = check_concavity(model, alpha=10.0, trials=300, rng=RngStream(26, 1))
    assert rep.passed, rep


def test_random_convex_density_deterministic():
    a = make_random_convex_density(2, 8.0, RngStream(27, 0))
    b = make_random_convex_density(2, 8.0, RngStream(27, 0))
    pts = np.array([[0.0, 0.0], [0.5, -1.0], [2.0, 1.0]])
    np.testing.assert_array_equal(np.asarray(a.log_density_fn(pts)),
                                  np.asarray(b.log_density_fn(pts)))
