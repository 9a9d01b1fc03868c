"""Exact posterior enumeration and the error characterizations."""

import dataclasses
import itertools

import numpy as np
import pytest

from gibbslab import (
    EnumerationTooLarge,
    EpsilonOutOfRange,
    GammaNonPositive,
    IIDData,
    IdentityMismatch,
    InvalidInput,
    JointData,
    LearningProblem,
    NotIID,
    ProbVec,
    chain_rule_example,
    concavity_probe,
    empirical_risk_curve,
    gen_characterizations,
    gen_error_direct,
    gen_via_cmi,
    gen_via_replace_one,
    gibbs_posterior,
    instance_rng,
    log_ratio_means,
    population_gibbs,
    info_divergence_compare,
    random_problem,
    regularized_gen,
    replace_one_divergences,
)


def small_problem(seed=0, iid=True, n=2):
    rng = np.random.default_rng(seed)
    loss = rng.random((3, 4))
    prior = rng.random(3) + 0.1
    marginal = rng.random(4) + 0.1
    if iid:
        model = IIDData(ProbVec(marginal / marginal.sum()))
    else:
        weights = rng.random(4**n) + 0.05
        model = JointData(weights / weights.sum())
    return LearningProblem(
        sample_alphabet=tuple(range(4)),
        hypothesis_set=tuple(range(3)),
        loss=loss,
        prior=ProbVec(prior / prior.sum()),
        data_model=model,
        n=n,
    )


def test_posterior_rows_are_distributions():
    problem = small_problem(1)
    posterior = gibbs_posterior(problem, 2.0)
    rows = posterior.row_array
    assert rows.shape == (problem.dataset_count, problem.num_hypotheses)
    assert np.all(rows > 0.0)
    assert np.allclose(rows.sum(axis=1), 1.0, atol=1e-12)


def test_gamma_scaling_invariance():
    # multiplying the loss by c and dividing gamma by c leaves the posterior alone
    rng = np.random.default_rng(2)
    for _ in range(10):
        problem = random_problem(rng)
        c = float(rng.uniform(0.2, 5.0))
        scaled = dataclasses.replace(problem, loss=problem.loss * c)
        a = gibbs_posterior(problem, 3.0).row_array
        b = gibbs_posterior(scaled, 3.0 / c).row_array
        assert np.max(np.abs(a - b)) < 1e-12


def test_large_gamma_concentrates_on_minimizers():
    problem = small_problem(3)
    rows = gibbs_posterior(problem, 1e6).row_array
    for s in range(problem.dataset_count):
        best = int(np.argmin(problem._empirical_risk[:, s]))
        assert rows[s, best] > 0.999


def test_tiny_gamma_approaches_prior():
    problem = small_problem(4)
    rows = gibbs_posterior(problem, 1e-9).row_array
    assert np.max(np.abs(rows - problem.prior.weights[None, :])) < 1e-8
    # zero inverse temperature is allowed and gives the prior exactly
    flat = gibbs_posterior(problem, 0.0).row_array
    assert np.max(np.abs(flat - problem.prior.weights[None, :])) < 1e-15


def test_population_gibbs_is_a_distribution():
    problem = small_problem(5)
    candidate = population_gibbs(problem, 2.5)
    assert abs(candidate.weights.sum() - 1.0) < 1e-12
    assert np.all(candidate.weights > 0.0)


def test_gamma_validation():
    problem = small_problem(6)
    for bad in (-1.0, float("nan")):
        with pytest.raises(GammaNonPositive):
            gibbs_posterior(problem, bad)
    # the characterization ratio needs strictly positive gamma
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(GammaNonPositive):
            gen_characterizations(problem, bad)


def test_direct_gen_matches_hand_rolled_sum():
    # independent slow oracle: explicit loops over datasets and hypotheses
    problem = small_problem(7, iid=True, n=2)
    gamma = 1.7
    posterior = gibbs_posterior(problem, gamma)
    rows = posterior.row_array
    marg = problem.data_model.marginal.weights
    gen = 0.0
    labels = list(itertools.product(range(4), repeat=2))
    for s, tup in enumerate(labels):
        p_s = marg[tup[0]] * marg[tup[1]]
        for w in range(3):
            pop = float(problem.loss[w] @ marg)
            emp = float(np.mean([problem.loss[w, z] for z in tup]))
            gen += p_s * rows[s, w] * (pop - emp)
    assert abs(gen_error_direct(problem, posterior) - gen) < 1e-14


def test_characterizations_on_random_instances():
    # report construction itself asserts the four-way identity
    rng = np.random.default_rng(8)
    for _ in range(25):
        problem = random_problem(rng, iid=bool(rng.integers(0, 2)))
        gamma = float(rng.uniform(0.1, 20.0))
        report = gen_characterizations(problem, gamma)
        assert report.direct >= -1e-12
        assert report.via_iskl == pytest.approx(report.direct, abs=1e-12, rel=1e-9)
        assert report.via_skl_div == pytest.approx(report.direct, abs=1e-12, rel=1e-9)
        if problem.is_iid():
            assert report.via_cmi is not None
            assert report.via_replace_one is not None
        else:
            assert report.via_cmi is None
            assert report.via_replace_one is None


def test_iid_only_routes_reject_joint_models():
    problem = small_problem(9, iid=False)
    with pytest.raises(NotIID):
        gen_via_cmi(problem, 1.0)
    with pytest.raises(NotIID):
        gen_via_replace_one(problem, 1.0)


def test_iid_routes_match_direct():
    rng = np.random.default_rng(10)
    for _ in range(10):
        problem = random_problem(rng, iid=True)
        gamma = float(rng.uniform(0.2, 8.0))
        posterior = gibbs_posterior(problem, gamma)
        direct = gen_error_direct(problem, posterior)
        limit = max(1e-9 * abs(direct), 1e-12)
        assert abs(gen_via_cmi(problem, gamma) - direct) <= limit
        assert abs(gen_via_replace_one(problem, gamma) - direct) <= limit


def test_replace_one_divergences_shape_and_sign():
    problem = small_problem(11, iid=True, n=3)
    forward, reverse = replace_one_divergences(problem, 2.0)
    assert forward.shape == (3,) and reverse.shape == (3,)
    assert np.all(forward >= 0.0) and np.all(reverse >= 0.0)


def test_log_ratio_means_balance_at_population_gibbs():
    # the two averages of the log ratio coincide exactly at the
    # population-risk Gibbs law; that balance singles the law out
    rng = np.random.default_rng(12)
    for _ in range(10):
        problem = random_problem(rng)
        gamma = float(rng.uniform(0.3, 5.0))
        fixed = population_gibbs(problem, gamma)
        under_marginal, under_candidate = log_ratio_means(problem, gamma, fixed)
        scale = max(1.0, abs(under_marginal))
        assert abs(under_marginal - under_candidate) < 1e-10 * scale


def test_log_ratio_means_generic_candidate_differs():
    problem = small_problem(13)
    generic = ProbVec(np.array([0.6, 0.3, 0.1]))
    under_marginal, under_candidate = log_ratio_means(problem, 2.0, generic)
    assert abs(under_marginal - under_candidate) > 1e-6


def test_log_ratio_means_candidate_validation():
    problem = small_problem(13)
    with pytest.raises(InvalidInput):
        log_ratio_means(problem, 2.0, ProbVec(np.array([0.5, 0.5])))


def test_info_divergence_compare_order():
    rng = np.random.default_rng(14)
    for _ in range(15):
        problem = random_problem(rng, iid=bool(rng.integers(0, 2)))
        gamma = float(rng.uniform(0.2, 10.0))
        report = info_divergence_compare(problem, gamma)
        tol = 1e-12 * max(1.0, abs(report.mutual) + abs(report.lautum))
        assert report.mutual <= report.d_fwd + tol
        assert report.lautum >= report.d_rev - tol


def test_risk_curve_monotone_and_prior_start():
    problem = small_problem(15)
    gammas = [0.0, 0.5, 1.0, 4.0, 16.0]
    curve = empirical_risk_curve(problem, gammas)
    assert all(b <= a + 1e-12 for a, b in zip(curve, curve[1:]))
    prior_risk = float(
        problem.prior.weights @ problem._empirical_risk @ problem._dataset_probs
    )
    assert abs(curve[0] - prior_risk) < 1e-12


def test_risk_curve_constant_loss_is_flat():
    problem = small_problem(16)
    flat = dataclasses.replace(problem, loss=np.full_like(problem.loss, 0.7))
    curve = empirical_risk_curve(flat, [0.0, 1.0, 10.0])
    assert np.allclose(curve, 0.7, atol=1e-12)


def test_risk_curve_rejects_bad_gammas():
    problem = small_problem(17)
    with pytest.raises(InvalidInput):
        empirical_risk_curve(problem, [1.0, 0.5])
    with pytest.raises(InvalidInput):
        empirical_risk_curve(problem, [-1.0, 2.0])
    with pytest.raises(InvalidInput):
        empirical_risk_curve(problem, [])


def test_concavity_probe_identical_components_tie():
    problem = small_problem(18, iid=True)
    marginal = problem.data_model.marginal
    components = [(0.5, IIDData(marginal)), (0.5, IIDData(marginal))]
    mixture_gen, avg_gen = concavity_probe(components, problem, 2.0)
    assert abs(mixture_gen - avg_gen) < 1e-14


def test_concavity_probe_generic_iid_components():
    problem = small_problem(19, iid=True)
    rng = instance_rng(20260814, 30_000)
    q0 = rng.random(4) + 0.1
    q1 = rng.random(4) + 0.1
    components = [
        (0.35, IIDData(ProbVec(q0 / q0.sum()))),
        (0.65, IIDData(ProbVec(q1 / q1.sum()))),
    ]
    mixture_gen, avg_gen = concavity_probe(components, problem, 2.0)
    assert mixture_gen >= avg_gen - 1e-12


def test_concavity_probe_known_violation_raises():
    # pinned two-hypothesis, four-symbol, n = 1 instance where the mixture
    # error genuinely falls below the component average (the inequality the
    # probe asserts is not a theorem); confirmed with 50-digit arithmetic
    loss = np.array(
        [
            [0.021832, 0.6447991, 0.01146781, 0.4713247],
            [0.65210826, 0.11358708, 0.74790699, 0.98617988],
        ]
    )
    prior = ProbVec(np.array([0.91180575, 0.08819425]))
    q0_raw = np.array([0.5557914, 0.27458616, 0.06281863, 0.10680381])
    q1_raw = np.array([0.07491521, 0.3057225, 0.56089463, 0.05846767])
    q0 = ProbVec(q0_raw / q0_raw.sum())
    q1 = ProbVec(q1_raw / q1_raw.sum())
    w = 0.4327560868721121
    mixture = w * q0.weights + (1.0 - w) * q1.weights
    problem = LearningProblem(
        sample_alphabet=tuple(range(4)),
        hypothesis_set=(0, 1),
        loss=loss,
        prior=prior,
        data_model=IIDData(ProbVec(mixture)),
        n=1,
    )
    components = [(w, IIDData(q0)), (1.0 - w, IIDData(q1))]
    with pytest.raises(IdentityMismatch):
        concavity_probe(components, problem, 1.0)


def test_concavity_probe_weight_validation():
    problem = small_problem(21, iid=True)
    marginal = problem.data_model.marginal
    with pytest.raises(Exception):
        concavity_probe([(0.7, IIDData(marginal)), (0.7, IIDData(marginal))], problem, 1.0)


def test_chain_rule_example_direction_flip():
    small = chain_rule_example(0.0001)
    large = chain_rule_example(0.01)
    assert small.sum_exceeds_joint is True
    assert large.sum_exceeds_joint is False
    # the two coordinates play symmetric roles in the construction
    assert abs(small.info_first.symmetrized - small.info_second.symmetrized) < 1e-14


def test_chain_rule_example_epsilon_validation():
    for bad in (0.0, 0.125, -0.01, 0.5):
        with pytest.raises(EpsilonOutOfRange):
            chain_rule_example(bad)


def test_enumeration_cap():
    problem = small_problem(22, iid=True, n=3)
    with pytest.raises(EnumerationTooLarge):
        gibbs_posterior(problem, 1.0, cap=10)
    with pytest.raises(EnumerationTooLarge):
        gen_characterizations(problem, 1.0, cap=10)


def test_regularized_gen_zero_lambda_matches_plain():
    rng = np.random.default_rng(23)
    for _ in range(8):
        problem = random_problem(rng, iid=bool(rng.integers(0, 2)))
        gamma = float(rng.uniform(0.3, 6.0))
        table = rng.random((problem.num_hypotheses, problem.dataset_count))
        report = regularized_gen(problem, gamma, 0.0, table)
        plain = gen_characterizations(problem, gamma)
        assert abs(report.gen - plain.direct) < 1e-12


def test_regularized_gen_identity_holds_with_penalty():
    rng = np.random.default_rng(24)
    for _ in range(8):
        problem = random_problem(rng)
        gamma = float(rng.uniform(0.3, 6.0))
        table = rng.random((problem.num_hypotheses, problem.dataset_count))
        report = regularized_gen(problem, gamma, 0.8, table)
        assert report.gen == pytest.approx(
            report.iskl_over_gamma - 0.8 * report.reg_gap, abs=1e-12, rel=1e-9
        )
        assert report.trace_cov is None


def test_regularized_gen_embedding_route():
    rng = np.random.default_rng(25)
    problem = random_problem(rng)
    k = 3
    embedding = rng.normal(size=(problem.num_hypotheses, k))
    target = rng.normal(size=(problem.dataset_count, k))
    report = regularized_gen(problem, 1.5, 0.4, embedding=embedding, target=target)
    # squared-distance penalties report the covariance trace form of the gap
    assert report.trace_cov is not None
    assert abs(report.reg_gap - 2.0 * report.trace_cov) < max(
        1e-12, 1e-9 * abs(report.reg_gap)
    )


def test_regularized_gen_input_validation():
    problem = small_problem(26)
    with pytest.raises(InvalidInput):
        regularized_gen(problem, 1.0, 0.5)
    with pytest.raises(InvalidInput):
        regularized_gen(problem, 1.0, -0.5, np.zeros((3, problem.dataset_count)))
    with pytest.raises(InvalidInput):
        regularized_gen(problem, 1.0, 0.5, np.zeros((2, 2)))
