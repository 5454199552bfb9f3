import math

import numpy as np
import pytest
from scipy import stats

from isoqec import numerics
from isoqec.distributions import (
    InvalidDensity, build_sampler, check_normalization, custom_density, ebar, marginal_moment,
    normal_density, sample_state, sample_states, uniform_density,
)


def half_supported(d):
    """Constant density on the hemisphere ``theta0 <= pi/2``, zero beyond."""
    c = 1.0 / (float(numerics.sphere_surface(2 * d - 2)) * 0.5 * numerics.wallis_integral(2 * d - 2))
    return custom_density(lambda t: np.where(np.asarray(t) <= math.pi / 2, c, 0.0), d, breakpoints=[math.pi / 2])


def test_normal_density_peak_value():
    assert normal_density(0.5, 2).density_fn(np.array(0.0)) == pytest.approx(6 / math.pi**2, rel=1e-14)


def test_zero_sigma_is_uniform():
    for d in (2, 8):
        t = np.linspace(0, math.pi, 7)
        np.testing.assert_allclose(normal_density(0.0, d).density_fn(t), uniform_density(d).density_fn(t), rtol=1e-13)


@pytest.mark.parametrize("d", [2, 4, 8, 16])
@pytest.mark.parametrize("sigma", [0.0, 0.25, 0.5, 0.75, 0.9, 0.99])
def test_normal_density_normalised(sigma, d):
    assert check_normalization(normal_density(sigma, d)) <= 1e-10


def test_extreme_normal_densities_normalised():
    assert check_normalization(normal_density(0.9999, 256)) <= 1e-10
    assert check_normalization(normal_density(0.5, 1024)) <= 1e-10


def test_uniform_and_half_supported_normalised():
    for d in (2, 4, 8):
        assert check_normalization(uniform_density(d)) <= 1e-12
        assert check_normalization(half_supported(d)) <= 1e-12


def test_bad_sigma_rejected():
    for s in (-0.1, 1.0, 1.5):
        with pytest.raises(ValueError):
            normal_density(s, 4)


def test_ebar_matches_marginal_moment_for_small_d():
    dens = normal_density(0.6, 4)
    raw = ebar(dens, lambda t: np.cos(t) * np.sin(t) ** 6)
    stabilised = marginal_moment(dens, np.cos) / float(numerics.sphere_surface(6))
    assert raw == pytest.approx(stabilised, rel=1e-12)


def test_marginal_first_moment_of_normal_is_sigma():
    for d in (2, 16, 256):
        assert marginal_moment(normal_density(0.3, d), np.cos) == pytest.approx(0.3, abs=1e-12)


def test_sampler_cdf_is_monotone_and_complete():
    for dens in (normal_density(0.9, 8), uniform_density(4), half_supported(4)):
        s = build_sampler(dens)
        assert np.all(np.diff(s.cdf_theta) >= 0)
        assert s.cdf_theta[0] == 0.0 and s.cdf_theta[-1] == 1.0
        grid = s.cdf_grid
        assert np.all(np.diff(grid[:, 0]) >= 0) and np.all(np.diff(grid[:, 1]) >= 0)


def test_inverse_cdf_residual(rng):
    s = build_sampler(normal_density(0.95, 8))
    u = rng.random(20_000)
    assert np.max(np.abs(s.cdf(s.invert(u)) - u)) <= 1e-9


def test_sampled_polar_angle_follows_marginal(rng):
    s = build_sampler(normal_density(0.5, 4))
    theta = s.sample_theta(20_000, rng)
    res = stats.kstest(theta, lambda t: s.cdf(t))
    assert res.pvalue > 1e-3


def test_sampled_mean_cosine_is_sigma():
    # stratified uniforms isolate the inversion error from sampling noise
    for sigma, d in ((0.5, 2), (0.9, 8), (0.99, 64)):
        s = build_sampler(normal_density(sigma, d))
        u = (np.arange(200_000) + 0.5) / 200_000
        assert np.mean(np.cos(s.invert(u))) == pytest.approx(sigma, abs=1e-6)


def test_tangent_directions_are_isotropic(rng):
    d = 4
    x = sample_states(build_sampler(normal_density(0.5, d)), 200_000, rng)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-13)
    cov = x[:, 1:].T @ x[:, 1:] / x.shape[0]
    target = marginal_moment(normal_density(0.5, d), lambda t: np.sin(t) ** 2) / (2 * d - 1)
    assert np.max(np.abs(cov - target * np.eye(2 * d - 1))) < 5e-3


def test_half_supported_samples_stay_on_hemisphere(rng):
    x = sample_states(build_sampler(half_supported(4)), 10_000, rng)
    assert np.all(x[:, 0] >= 0)


def test_unnormalised_density_rejected():
    with pytest.raises(InvalidDensity):
        build_sampler(custom_density(lambda t: np.ones_like(t), 2))


def test_sample_state_is_a_state(rng):
    psi = sample_state(build_sampler(uniform_density(2)), rng)
    assert psi.d == 2
