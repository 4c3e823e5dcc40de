"""Samplers: determinism, distributional oracles, geometry."""

import math

import numpy as np
import pytest
from scipy import special, stats

from thinshell import (
    RngStream,
    exact_moment_fnr,
    haar_rotation,
    make_affine,
    make_fnr,
    sample_beta,
    sample_fnr,
    sample_fnr_radii,
    sample_model,
    sample_projection,
    sample_sphere,
)


# ------------------------------------------------------------------- streams

def test_rng_stream_deterministic():
    a = RngStream(42, 0).generator().standard_normal(8)
    b = RngStream(42, 0).generator().standard_normal(8)
    np.testing.assert_array_equal(a, b)


def test_rng_substreams_differ():
    a = RngStream(42, 0).generator().standard_normal(8)
    b = RngStream(42, 1).generator().standard_normal(8)
    assert not np.allclose(a, b)


def test_rng_seed_changes_output():
    a = RngStream(42, 0).generator().standard_normal(8)
    b = RngStream(43, 0).generator().standard_normal(8)
    assert not np.allclose(a, b)


# ------------------------------------------------------------------- sphere

def test_sample_sphere_unit_norms():
    pts = sample_sphere(7, 500, RngStream(1, 0))
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, rtol=1e-12)


def test_sample_sphere_isotropy():
    n, size = 5, 200_000
    pts = sample_sphere(n, size, RngStream(2, 0))
    # E u = 0 and E u u^T = I/n
    se_mean = 1.0 / math.sqrt(n * size)
    assert np.abs(pts.mean(axis=0)).max() < 4 * se_mean
    cov = pts.T @ pts / size
    assert np.abs(np.diag(cov) - 1.0 / n).max() < 4 * math.sqrt(2.0) / (n * math.sqrt(size))
    off = cov - np.diag(np.diag(cov))
    assert np.abs(off).max() < 4.0 / (n * math.sqrt(size))


# --------------------------------------------------------------------- beta

def test_sample_beta_moments():
    a, b, size = 3.0, 5.0, 200_000
    draws = sample_beta(a, b, size, RngStream(3, 0))
    assert draws.min() >= 0.0 and draws.max() <= 1.0
    mean = a / (a + b)
    var = a * b / ((a + b) ** 2 * (a + b + 1.0))
    assert draws.mean() == pytest.approx(mean, abs=4 * math.sqrt(var / size))
    assert draws.var() == pytest.approx(var, rel=0.05)


def test_sample_beta_kolmogorov_against_scipy_cdf():
    a, b, size = 2.5, 7.0, 100_000
    draws = np.sort(sample_beta(a, b, size, RngStream(4, 0)))
    grid = (np.arange(size) + 0.5) / size
    ks = np.abs(special.betainc(a, b, draws) - grid).max()
    # 0.1% critical value of the Kolmogorov statistic
    assert ks < 1.95 / math.sqrt(size)


# ------------------------------------------------------------------- radii

def test_sample_fnr_radii_distribution():
    # |X| for the isotropic power-law model: c2*t/(1+c2*t) is Beta(n, r),
    # checked against scipy's independent incomplete-beta implementation
    n, r, size = 4, 9.0, 100_000
    model = make_fnr(n, r)
    c2 = model.profile.c2
    radii = np.sort(sample_fnr_radii(n, r, size, RngStream(5, 0)))
    u = c2 * radii / (1.0 + c2 * radii)
    grid = (np.arange(size) + 0.5) / size
    ks = np.abs(special.betainc(n, r, u) - grid).max()
    assert ks < 1.95 / math.sqrt(size)


def test_sample_fnr_radii_second_moment():
    # exact_moment_fnr reports the p-th root (E |X|^p)^(1/p)
    n, r, size = 10, 20.0, 200_000
    radii = sample_fnr_radii(n, r, size, RngStream(6, 0))
    raw2 = exact_moment_fnr(n, r, 2.0) ** 2
    raw4 = exact_moment_fnr(n, r, 4.0) ** 4
    se = math.sqrt((raw4 - raw2 * raw2) / size)
    assert (radii ** 2).mean() == pytest.approx(raw2, abs=4 * se)
    assert raw2 == pytest.approx(n, rel=1e-12)


# ------------------------------------------------------------------ vectors

def test_sample_fnr_isotropic():
    n, size = 6, 100_000
    batch = sample_fnr(n, 15.0, size, RngStream(7, 0))
    pts = batch.points
    assert pts.shape == (size, n)
    cov = pts.T @ pts / size
    assert np.abs(np.diag(cov) - 1.0).max() < 0.05
    off = cov - np.diag(np.diag(cov))
    assert np.abs(off).max() < 0.05
    np.testing.assert_allclose(batch.radii, np.linalg.norm(pts, axis=1),
                               rtol=1e-12)


def test_sample_model_affine_covariance():
    base = make_fnr(3, 10.0)
    lin = np.array([[2.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]])
    shift = np.array([1.0, -2.0, 0.25])
    model = make_affine(base, lin, shift)
    batch = sample_model(model, 200_000, RngStream(8, 0))
    pts = batch.points
    assert np.abs(pts.mean(axis=0) - shift).max() < 0.05
    centered = pts - shift
    cov = centered.T @ centered / len(pts)
    np.testing.assert_allclose(cov, lin @ lin.T, atol=0.08)


def test_sample_model_deterministic():
    model = make_fnr(4, 8.0)
    a = sample_model(model, 1000, RngStream(9, 3)).points
    b = sample_model(model, 1000, RngStream(9, 3)).points
    np.testing.assert_array_equal(a, b)


# ---------------------------------------------------------------- rotations

def test_haar_rotation_orthogonal():
    for n in (1, 2, 5, 12):
        u = haar_rotation(n, RngStream(10, n).generator())
        np.testing.assert_allclose(u @ u.T, np.eye(n), atol=1e-12)
        assert np.linalg.det(u) == pytest.approx(1.0, abs=1e-10)


def test_haar_rotation_column_isotropy():
    # the first column of a Haar rotation is uniform on the sphere
    n, reps = 6, 4000
    gen = RngStream(11, 0).generator()
    cols = np.array([haar_rotation(n, gen)[:, 0] for _ in range(reps)])
    assert np.abs(cols.mean(axis=0)).max() < 4.0 / math.sqrt(n * reps) * math.sqrt(n)
    second = (cols ** 2).mean(axis=0)
    assert np.abs(second - 1.0 / n).max() < 6.0 / math.sqrt(reps)


# -------------------------------------------------------------- projections

def test_sample_projection_matches_inner_product_law():
    # the projection sampler draws <X, theta> directly (radius times a
    # sphere coordinate), so compare in distribution to explicit inner
    # products, not path by path
    model = make_fnr(5, 12.0)
    theta = np.array([3.0, 0.0, 4.0, 0.0, 0.0]) / 5.0
    size = 100_000
    a = sample_projection(model, theta, size, RngStream(12, 0))
    pts = sample_model(model, size, RngStream(12, 1)).points
    ks = stats.ks_2samp(a, pts @ theta).statistic
    assert ks < 1.95 * math.sqrt(2.0 / size)


def test_sample_projection_isotropic_variance():
    model = make_fnr(5, 12.0)
    theta = np.ones(5) / math.sqrt(5.0)
    proj = sample_projection(model, theta, 200_000, RngStream(13, 0))
    assert proj.mean() == pytest.approx(0.0, abs=0.02)
    assert (proj ** 2).mean() == pytest.approx(1.0, rel=0.03)


# ------------------------------------------------------------------- errors

def test_sampler_input_validation():
    with pytest.raises(ValueError):
        sample_beta(-1.0, 2.0, 10, RngStream(14, 0))
    with pytest.raises(ValueError):
        sample_projection(make_fnr(3, 8.0), np.zeros(3), 10, RngStream(14, 0))
    # empty sizes are legal and give empty arrays
    assert sample_fnr_radii(3, 8.0, 0, RngStream(14, 0)).shape == (0,)
