"""Langevin sampling and Monte Carlo error estimation."""

import math

import numpy as np
import pytest

from gibbslab import Diverged, InvalidInput, SgldConfig, mc_gen_error, sgld_run


def quadratic_gradient(target):
    def gradient(w, dataset):
        return 2.0 * (w - target)
    return gradient


def test_sgld_shapes_and_burn_in_default():
    config = SgldConfig(step=1e-3, gamma=2.0, iterations=1000, seed=1)
    assert config.burn_in == 200
    out = sgld_run(quadratic_gradient(0.0), 0.0, config)
    assert out.shape == (800, 1)
    wide = sgld_run(quadratic_gradient(np.zeros(3)), np.zeros(3), config)
    assert wide.shape == (800, 3)


def test_sgld_bit_reproducible():
    config = SgldConfig(step=1e-3, gamma=2.0, iterations=2000, seed=5)
    a = sgld_run(quadratic_gradient(1.0), 0.5, config)
    b = sgld_run(quadratic_gradient(1.0), 0.5, config)
    assert np.array_equal(a, b)
    other = SgldConfig(step=1e-3, gamma=2.0, iterations=2000, seed=6)
    c = sgld_run(quadratic_gradient(1.0), 0.5, other)
    assert not np.array_equal(a, c)


def test_sgld_quadratic_stationary_moments():
    # f = (w - m)^2 discretizes to an AR(1) chain whose exact stationary
    # variance is 1 / (2 gamma (1 - step)); the windows leave an order of
    # magnitude of room over the autocorrelation-limited Monte Carlo error
    step, gamma = 1e-2, 4.0
    config = SgldConfig(step=step, gamma=gamma, iterations=60_000, seed=1)
    out = sgld_run(quadratic_gradient(1.25), 1.25, config)[:, 0]
    target_var = 1.0 / (2.0 * gamma * (1.0 - step))
    assert abs(out.mean() - 1.25) < 0.05
    assert abs(out.var() - target_var) / target_var < 0.10


def test_sgld_divergence_detection():
    config = SgldConfig(step=2.0, gamma=1.0, iterations=5000, seed=3)
    def exploding(w, dataset):
        return -10.0 * w
    with pytest.raises(Diverged) as info:
        sgld_run(exploding, 1.0, config)
    assert info.value.iteration >= 0
    assert info.value.norm > 1e10 or not math.isfinite(info.value.norm)


def test_sgld_dataset_passthrough():
    seen = []
    def gradient(w, dataset):
        seen.append(dataset)
        return 2.0 * (w - dataset)
    config = SgldConfig(step=1e-2, gamma=1.0, iterations=10, seed=0)
    sgld_run(gradient, 0.0, config, dataset=0.75)
    assert seen and all(d == 0.75 for d in seen)


def test_sgld_config_validation():
    with pytest.raises(InvalidInput):
        SgldConfig(step=0.0, gamma=1.0, iterations=100)
    with pytest.raises(InvalidInput):
        SgldConfig(step=1e-3, gamma=-1.0, iterations=100)
    with pytest.raises(InvalidInput):
        SgldConfig(step=1e-3, gamma=1.0, iterations=0)
    with pytest.raises(InvalidInput):
        SgldConfig(step=1e-3, gamma=1.0, iterations=100, burn_in=100)
    with pytest.raises(InvalidInput):
        sgld_run(quadratic_gradient(0.0), np.zeros((2, 2)),
                 SgldConfig(step=1e-3, gamma=1.0, iterations=10))


def erm_mean_ingredients():
    # z ~ N(0, 1), w = training mean, loss (w - z)^2: gen is exactly 2 / n
    def source(rng, count):
        return rng.standard_normal(count)
    def posterior(rng, training):
        return float(np.mean(training))
    def loss(w, z):
        return (w - z) ** 2
    return source, posterior, loss


def test_mc_gen_error_matches_erm_oracle():
    source, posterior, loss = erm_mean_ingredients()
    n = 5
    est, se = mc_gen_error(source, n, posterior, loss, 4000, 13)
    assert se > 0.0
    assert abs(est - 2.0 / n) <= 4.0 * se


def test_mc_gen_error_deterministic():
    source, posterior, loss = erm_mean_ingredients()
    a = mc_gen_error(source, 4, posterior, loss, 1000, 2)
    b = mc_gen_error(source, 4, posterior, loss, 1000, 2)
    assert a == b
    c = mc_gen_error(source, 4, posterior, loss, 1000, 3)
    assert a != c


def test_mc_gen_error_validation():
    source, posterior, loss = erm_mean_ingredients()
    with pytest.raises(InvalidInput):
        mc_gen_error(source, 0, posterior, loss, 1000, 0)
    with pytest.raises(InvalidInput):
        mc_gen_error(source, 4, posterior, loss, 999, 0)
    with pytest.raises(InvalidInput):
        mc_gen_error(source, 4, posterior, loss, 1000, 0, held_out=0)
