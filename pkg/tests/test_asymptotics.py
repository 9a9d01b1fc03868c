"""Zero-temperature and large-n closed forms."""

import itertools
import math

import numpy as np
import pytest

from gibbslab import (
    InvalidInput,
    MleSpec,
    NotPositiveDefinite,
    SingularHessian,
    WellSample,
    bayes_location_regime_exact,
    bayes_location_regime_gen,
    mle_asymptotic_gen,
    multi_well_bound,
    single_well_gen,
)


def grid_wells(n, hessian_fn):
    """All sign datasets of length n with the averaged-square loss wells."""
    wells = []
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        zbar = float(np.mean(signs))
        wells.append(
            WellSample(
                minimizer=np.array([zbar]),
                hessian=hessian_fn(signs),
                weight=0.5**n,
            )
        )
    return wells


def test_two_point_wells_match_variance_formula():
    # loss (w - z)^2: the minimizer is the sample mean, the Hessian is 2,
    # and the zero-temperature error is exactly twice the variance of the mean
    for n in (1, 2, 3, 5):
        wells = grid_wells(n, lambda signs: np.array([[2.0]]))
        value = single_well_gen(wells)
        assert abs(value - 2.0 / n) < 1e-12


def test_constant_hessian_single_well_matches_multi_well():
    rng = np.random.default_rng(50)
    d = 3
    root = rng.normal(size=(d, d))
    hessian = root @ root.T + 0.5 * np.eye(d)
    samples = [
        WellSample(minimizer=rng.normal(size=d), hessian=hessian, weight=0.25)
        for _ in range(4)
    ]
    exact = single_well_gen(samples)
    bound = multi_well_bound([samples])
    assert abs(exact - bound) < 1e-12 * max(1.0, abs(exact))


def test_varying_hessian_bound_dominates():
    rng = np.random.default_rng(51)
    d = 2
    samples = []
    for _ in range(5):
        root = rng.normal(size=(d, d))
        samples.append(
            WellSample(
                minimizer=rng.normal(size=d),
                hessian=root @ root.T + 0.4 * np.eye(d),
                weight=0.2,
            )
        )
    exact = single_well_gen(samples)
    bound = multi_well_bound([samples])
    assert bound >= exact - 1e-12
    assert abs(bound - exact) > 1e-10


def test_multi_well_average_over_wells():
    rng = np.random.default_rng(52)
    wells = []
    for _ in range(3):
        samples = [
            WellSample(
                minimizer=rng.normal(size=2),
                hessian=np.diag(rng.uniform(0.5, 2.0, size=2)),
                weight=0.5,
            )
            for _ in range(2)
        ]
        wells.append(samples)
    combined = multi_well_bound(wells)
    singles = [multi_well_bound([w]) for w in wells]
    assert abs(combined - float(np.mean(singles))) < 1e-14


def test_well_validation():
    good = WellSample(minimizer=np.array([0.5]), hessian=np.array([[1.0]]), weight=0.5)
    with pytest.raises(InvalidInput):
        single_well_gen([])
    with pytest.raises(InvalidInput):
        single_well_gen([good, good, good])  # weights sum to 1.5
    with pytest.raises(InvalidInput):
        WellSample(minimizer=np.array([1.0]), hessian=np.array([[1.0]]), weight=-0.1)
    with pytest.raises(InvalidInput):
        WellSample(minimizer=np.array([1.0, 2.0]), hessian=np.array([[1.0]]), weight=0.5)
    with pytest.raises(InvalidInput):
        multi_well_bound([])


def test_singular_hessian_reports_sample_index():
    good = WellSample(minimizer=np.array([0.0]), hessian=np.array([[1.0]]), weight=0.5)
    bad = WellSample(minimizer=np.array([0.0]), hessian=np.array([[0.0]]), weight=0.5)
    with pytest.raises(SingularHessian) as info:
        single_well_gen([good, bad])
    assert info.value.sample_index == 1


def test_mle_well_specified_is_exact_dimension_ratio():
    rng = np.random.default_rng(53)
    d = 4
    root = rng.normal(size=(d, d))
    J = root @ root.T + 0.3 * np.eye(d)
    spec = MleSpec(J=J, fisher=J.copy(), n=17)
    assert mle_asymptotic_gen(spec) == d / 17


def test_mle_matches_eigendecomposition_oracle():
    rng = np.random.default_rng(54)
    for _ in range(15):
        d = int(rng.integers(2, 6))
        n = int(rng.integers(5, 500))
        root = rng.normal(size=(d, d))
        J = root @ root.T + (0.1 + rng.random()) * np.eye(d)
        rootf = rng.normal(size=(d, d))
        fisher = rootf @ rootf.T
        value = mle_asymptotic_gen(MleSpec(J=J, fisher=fisher, n=n))
        vals, vecs = np.linalg.eigh(J)
        inv = vecs @ np.diag(1.0 / vals) @ vecs.T
        oracle = float(np.trace(inv @ fisher)) / n
        assert abs(value - oracle) <= 1e-10 * max(1.0, abs(oracle))


def test_mle_spec_validation():
    with pytest.raises(SingularHessian):
        MleSpec(J=np.array([[1.0, 0.0], [0.0, 0.0]]), fisher=np.eye(2), n=10)
    with pytest.raises(NotPositiveDefinite):
        MleSpec(J=np.eye(2), fisher=np.array([[1.0, 0.0], [0.0, -0.5]]), n=10)
    with pytest.raises(InvalidInput):
        MleSpec(J=np.eye(2), fisher=np.eye(3), n=10)
    with pytest.raises(InvalidInput):
        MleSpec(J=np.eye(2), fisher=np.eye(2), n=0)


def test_bayes_exact_unit_prior_closed_form():
    # with unit prior variance the exact value collapses to 1 / (n + 1)
    for n in (1, 2, 10, 100, 1000):
        value = bayes_location_regime_exact(n)
        assert abs(value - 1.0 / (n + 1)) < 1e-15
    assert 1000 * bayes_location_regime_exact(1000) == pytest.approx(1.0, abs=2e-3)


def test_bayes_exact_general_prior_formula():
    for n, prior_var in ((3, 0.5), (20, 2.0), (7, 10.0)):
        v = 1.0 / (1.0 / prior_var + n)
        oracle = 0.5 * (1.0 / n + v * v * n - v * v / (prior_var * prior_var * n))
        assert abs(bayes_location_regime_exact(n, prior_var) - oracle) < 1e-15


def test_bayes_exact_validation():
    with pytest.raises(InvalidInput):
        bayes_location_regime_exact(0)
    with pytest.raises(InvalidInput):
        bayes_location_regime_exact(10, prior_var=0.0)


def test_bayes_monte_carlo_matches_exact():
    exact = bayes_location_regime_exact(50)
    est, se = bayes_location_regime_gen(50, 4000, 9)
    assert se > 0.0
    assert abs(est - exact) <= 4.0 * se
    # a shifted prior mean biases the estimator upward on average
    shifted, _ = bayes_location_regime_gen(50, 4000, 9, prior_mean=5.0)
    assert shifted > est


def test_bayes_monte_carlo_deterministic():
    a = bayes_location_regime_gen(20, 1000, 4)
    b = bayes_location_regime_gen(20, 1000, 4)
    assert a == b
    c = bayes_location_regime_gen(20, 1000, 5)
    assert a != c


def test_bayes_monte_carlo_validation():
    with pytest.raises(InvalidInput):
        bayes_location_regime_gen(20, 999, 0)
    with pytest.raises(InvalidInput):
        bayes_location_regime_gen(0, 1000, 0)
