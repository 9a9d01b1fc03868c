"""Exact Gibbs learning on enumerable problems.

A learning problem here is fully tabulated: finite sample alphabet, finite
hypothesis set, a loss table, a prior, and a data law for n-sample training
tuples (IID product or an arbitrary joint law).  Because every dataset can
be enumerated, the Gibbs posterior and all of its information functionals
are computed exactly, which turns the theory's identities into machine
checkable statements:

  * gen_error_direct evaluates the definition, the expected gap between
    population and empirical risk under the joint law of (W, S);
  * gen_characterizations re-derives the same number four more ways: from
    the symmetrized KL information of (W, S), from the expected symmetrized
    KL divergence to the population-risk Gibbs law, from the conditional
    information between W and supersample selectors (IID only), and from
    the replace-one-sample divergence sum (IID only).

All five agree to 1e-9 relative on any valid instance; GenReport enforces
this at construction.  Datasets are ordered tuples enumerated in
lexicographic order, never collapsed to multisets.  Partition functions are
evaluated with max-subtracted log-sum-exp so large inverse temperatures do
not overflow.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.special import logsumexp, rel_entr

from .errors import (
    AbsoluteContinuityViolation,
    EnumerationTooLarge,
    EpsilonOutOfRange,
    GammaNonPositive,
    IdentityMismatch,
    InvalidInput,
    NotIID,
)
from .probability import (
    InfoReport,
    JointTable,
    CondTable,
    ProbVec,
    ZERO_CUTOFF,
    info_triple,
)

ENUMERATION_CAP = 10**6
SUPERSAMPLE_CAP = 10**7
REL_TOL = 1e-9
ABS_TOL = 1e-12
COMPARE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class IIDData:
    """Training samples drawn independently from a single marginal law."""

    marginal: ProbVec


@dataclass(frozen=True, eq=False)
class JointData:
    """An arbitrary joint law over ordered n-sample tuples.

    weights[k] is the probability of the k-th dataset in lexicographic
    order over the sample alphabet; length must equal |Z|**n.
    """

    weights: np.ndarray

    def __post_init__(self) -> None:
        vec = ProbVec(self.weights)
        object.__setattr__(self, "weights", vec.weights)


DataModel = IIDData | JointData


@dataclass(frozen=True, eq=False)
class LearningProblem:
    """A finite supervised learning problem with an explicit data law.

    loss[w, z] is the nonnegative loss of hypothesis w on sample z; the
    prior must be strictly positive so every Gibbs posterior shares the
    prior's support.
    """

    sample_alphabet: tuple
    hypothesis_set: tuple
    loss: np.ndarray
    prior: ProbVec
    data_model: DataModel
    n: int

    def __post_init__(self) -> None:
        samples = tuple(self.sample_alphabet)
        hypotheses = tuple(self.hypothesis_set)
        loss = np.asarray(self.loss, dtype=np.float64)
        if loss.shape != (len(hypotheses), len(samples)):
            raise InvalidInput(
                f"loss table shape {loss.shape} does not match "
                f"({len(hypotheses)} hypotheses, {len(samples)} samples)"
            )
        if not np.all(np.isfinite(loss)) or np.any(loss < 0.0):
            raise InvalidInput("loss entries must be finite and nonnegative")
        if len(self.prior) != len(hypotheses):
            raise InvalidInput("prior length does not match hypothesis set")
        if float(self.prior.weights.min()) < ZERO_CUTOFF:
            raise InvalidInput("prior must be strictly positive on every hypothesis")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise InvalidInput(f"n must be a positive integer, got {self.n!r}")
        if isinstance(self.data_model, IIDData):
            if len(self.data_model.marginal) != len(samples):
                raise InvalidInput("IID marginal length does not match sample alphabet")
        elif isinstance(self.data_model, JointData):
            if self.data_model.weights.size != len(samples) ** self.n:
                raise InvalidInput(
                    f"joint law has {self.data_model.weights.size} entries, "
                    f"expected |Z|**n = {len(samples) ** self.n}"
                )
        else:
            raise InvalidInput(f"unknown data model {type(self.data_model).__name__}")
        loss = loss.copy()
        loss.flags.writeable = False
        object.__setattr__(self, "sample_alphabet", samples)
        object.__setattr__(self, "hypothesis_set", hypotheses)
        object.__setattr__(self, "loss", loss)

    @property
    def num_samples_symbols(self) -> int:
        return len(self.sample_alphabet)

    @property
    def num_hypotheses(self) -> int:
        return len(self.hypothesis_set)

    @property
    def dataset_count(self) -> int:
        return len(self.sample_alphabet) ** self.n

    def is_iid(self) -> bool:
        return isinstance(self.data_model, IIDData)

    @cached_property
    def _dataset_indices(self) -> np.ndarray:
        """(m, n) sample indices of every dataset, lexicographic order."""
        return _index_matrix(self.num_samples_symbols, self.n)

    @cached_property
    def _dataset_probs(self) -> np.ndarray:
        return _tuple_probs(self.data_model, self._dataset_indices)

    @cached_property
    def _empirical_risk(self) -> np.ndarray:
        """(num_hypotheses, m) empirical risk of every (w, dataset) pair."""
        risk = self.loss[:, self._dataset_indices].mean(axis=2)
        risk.flags.writeable = False
        return risk

    @cached_property
    def _population_risk(self) -> np.ndarray:
        risk = self._empirical_risk @ self._dataset_probs
        risk.flags.writeable = False
        return risk

    def dataset_labels(self) -> tuple:
        samples = self.sample_alphabet
        return tuple(tuple(samples[j] for j in row) for row in self._dataset_indices)


def _index_matrix(base: int, length: int) -> np.ndarray:
    """All base**length tuples of indices, lexicographic, one per row."""
    count = base**length
    idx = np.arange(count)
    powers = base ** np.arange(length - 1, -1, -1)
    cols = (idx[:, None] // powers[None, :]) % base
    cols.flags.writeable = False
    return cols


def _tuple_probs(model: DataModel, indices: np.ndarray) -> np.ndarray:
    if isinstance(model, IIDData):
        probs = np.prod(model.marginal.weights[indices], axis=1)
    else:
        probs = model.weights.copy()
    probs.flags.writeable = False
    return probs


def _check_enumeration(required: int, cap: int, what: str) -> None:
    if required > cap:
        raise EnumerationTooLarge(
            f"{what} needs {required} states, above the cap of {cap}",
            required=required,
            cap=cap,
        )


def enumerate_datasets(
    problem: LearningProblem, cap: int = ENUMERATION_CAP
) -> list[tuple[tuple, float]]:
    """Every ordered dataset with its probability, lexicographically.

    Probabilities come from the IID product or the joint table and sum to
    one within 1e-12.
    """
    _check_enumeration(problem.dataset_count, cap, "dataset enumeration")
    labels = problem.dataset_labels()
    probs = problem._dataset_probs
    return [(labels[k], float(probs[k])) for k in range(len(labels))]


@dataclass(frozen=True, eq=False)
class GibbsPosterior:
    """The Gibbs conditional law prior(w) * exp(-gamma * risk(w, s)) / V(s),
    tabulated per enumerated dataset and held in the log domain."""

    problem: LearningProblem
    gamma: float
    log_rows: np.ndarray
    log_partition: np.ndarray

    @cached_property
    def row_array(self) -> np.ndarray:
        """(m, num_hypotheses) posterior rows, renormalized in the linear
        domain so each row sums to 1 at machine precision."""
        rows = np.exp(self.log_rows)
        rows /= rows.sum(axis=1, keepdims=True)
        rows.flags.writeable = False
        return rows

    @cached_property
    def rows(self) -> CondTable:
        """The posterior as a CondTable (materializes every row)."""
        hypos = self.problem.hypothesis_set
        return CondTable(
            tuple(ProbVec(row, hypos) for row in self.row_array),
            conditioning_alphabet=self.problem.dataset_labels(),
        )

    @cached_property
    def hypothesis_marginal(self) -> np.ndarray:
        """The induced marginal over hypotheses under the data law."""
        marg = self.problem._dataset_probs @ self.row_array
        marg.flags.writeable = False
        return marg


def gibbs_posterior(
    problem: LearningProblem, gamma: float, cap: int = ENUMERATION_CAP
) -> GibbsPosterior:
    """Tabulate the Gibbs posterior for every dataset, in the log domain."""
    if not (math.isfinite(gamma) and gamma >= 0.0):
        raise GammaNonPositive(f"gamma must be a finite real >= 0, got {gamma!r}")
    _check_enumeration(problem.dataset_count, cap, "dataset enumeration")
    logits = problem.prior.log_weights[:, None] - gamma * problem._empirical_risk
    log_partition = logsumexp(logits, axis=0)
    log_rows = (logits - log_partition[None, :]).T
    log_rows.flags.writeable = False
    log_partition.flags.writeable = False
    return GibbsPosterior(
        problem=problem, gamma=float(gamma), log_rows=log_rows, log_partition=log_partition
    )


def _require_matching(problem: LearningProblem, posterior: GibbsPosterior) -> None:
    if posterior.problem is not problem:
        raise InvalidInput("posterior was built for a different problem instance")


def joint_distribution(problem: LearningProblem, posterior: GibbsPosterior) -> JointTable:
    """The joint law of (W, S): rows are hypotheses, columns datasets."""
    _require_matching(problem, posterior)
    table = posterior.row_array.T * problem._dataset_probs[None, :]
    return JointTable(table, problem.hypothesis_set, problem.dataset_labels())


def population_gibbs(problem: LearningProblem, gamma: float) -> ProbVec:
    """The Gibbs law built on the population risk instead of the empirical
    risk; the hypothesis-space reference measure of the divergence form."""
    if not (math.isfinite(gamma) and gamma >= 0.0):
        raise GammaNonPositive(f"gamma must be a finite real >= 0, got {gamma!r}")
    logits = problem.prior.log_weights - gamma * problem._population_risk
    logits -= logsumexp(logits)
    weights = np.exp(logits)
    weights /= weights.sum()
    return ProbVec(weights, problem.hypothesis_set)


def gen_error_direct(problem: LearningProblem, posterior: GibbsPosterior) -> float:
    """Expected generalization error straight from the definition:
    E[population risk - empirical risk] under the joint law of (W, S)."""
    _require_matching(problem, posterior)
    probs = problem._dataset_probs
    rows = posterior.row_array
    pop = problem._population_risk
    marginal = probs @ rows
    on_population = float(marginal @ pop)
    on_empirical = float(np.einsum("s,sw,ws->", probs, rows, problem._empirical_risk))
    return on_population - on_empirical


def expected_empirical_risk(problem: LearningProblem, posterior: GibbsPosterior) -> float:
    """E[empirical risk] under the joint law of (W, S)."""
    _require_matching(problem, posterior)
    return float(
        np.einsum(
            "s,sw,ws->", problem._dataset_probs, posterior.row_array, problem._empirical_risk
        )
    )


def _symmetrized_kl_rows(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise symmetrized KL between matching rows of two matrices with
    strictly positive entries."""
    return ((p - q) * (np.log(p) - np.log(q))).sum(axis=-1)


def supersample_conditional_info(
    problem: LearningProblem,
    gamma: float,
    posterior: GibbsPosterior | None = None,
    cap: int = SUPERSAMPLE_CAP,
) -> InfoReport:
    """Conditional information between W and the selector string U given a
    supersample of n sample pairs.

    The supersample holds 2n IID draws arranged as n pairs; U picks one
    element of each pair to form the training tuple, uniformly and
    independently.  Returns the conditional mutual, lautum, and symmetrized
    information of (W; U) given the supersample.  IID data models only.
    """
    if not problem.is_iid():
        raise NotIID("the supersample construction requires an IID data model")
    nz = problem.num_samples_symbols
    n = problem.n
    nw = problem.num_hypotheses
    required = (nz ** (2 * n)) * (2**n)
    _check_enumeration(required, cap, "supersample enumeration")
    if posterior is None:
        posterior = gibbs_posterior(problem, gamma)
    else:
        _require_matching(problem, posterior)

    pair_matrix = _index_matrix(nz, 2 * n)
    marginal = problem.data_model.marginal.weights
    super_probs = np.prod(marginal[pair_matrix], axis=1)
    first = pair_matrix[:, 0::2]
    second = pair_matrix[:, 1::2]
    powers = nz ** np.arange(n - 1, -1, -1)
    selectors = _index_matrix(2, n)
    num_u = selectors.shape[0]
    u_prob = 1.0 / num_u
    rows = posterior.row_array

    # dataset id of the training tuple selected by each u, per supersample
    dataset_ids = np.empty((pair_matrix.shape[0], num_u), dtype=np.int64)
    for k, bits in enumerate(selectors):
        chosen = np.where(bits[None, :] == 1, second, first)
        dataset_ids[:, k] = chosen @ powers

    mutual = 0.0
    lautum = 0.0
    block = max(1, 2_000_000 // (num_u * nw))
    for start in range(0, pair_matrix.shape[0], block):
        stop = min(start + block, pair_matrix.shape[0])
        cond = rows[dataset_ids[start:stop]] * u_prob  # (b, num_u, nw)
        w_marg = cond.sum(axis=1)  # (b, nw)
        product = u_prob * w_marg[:, None, :]
        mutual_per = rel_entr(cond, product).sum(axis=(1, 2))
        lautum_per = rel_entr(product, cond).sum(axis=(1, 2))
        weights = super_probs[start:stop]
        mutual += float(weights @ mutual_per)
        lautum += float(weights @ lautum_per)
    if not (math.isfinite(mutual) and math.isfinite(lautum)):
        raise AbsoluteContinuityViolation(
            "posterior rows underflowed to zero during the supersample sweep"
        )
    return InfoReport(mutual=mutual, lautum=lautum, symmetrized=mutual + lautum)


def replace_one_divergences(
    problem: LearningProblem,
    gamma: float,
    posterior: GibbsPosterior | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Directed posterior divergences under replacing one training sample.

    For each coordinate i, averages over (S, Z) with Z an independent fresh
    sample: forward[i] = E[D(posterior(S) || posterior(S with slot i = Z))]
    and reverse[i] the opposite direction.  IID data models only.
    """
    if not problem.is_iid():
        raise NotIID("replace-one divergences require an IID data model")
    if posterior is None:
        posterior = gibbs_posterior(problem, gamma)
    else:
        _require_matching(problem, posterior)
    nz = problem.num_samples_symbols
    n = problem.n
    cols = problem._dataset_indices
    probs = problem._dataset_probs
    marginal = problem.data_model.marginal.weights
    rows = posterior.row_array
    log_rows = np.log(rows)
    powers = nz ** np.arange(n - 1, -1, -1)
    ids = np.arange(rows.shape[0])

    forward = np.empty(n)
    reverse = np.empty(n)
    for i in range(n):
        replaced = ids[:, None] + (np.arange(nz)[None, :] - cols[:, i][:, None]) * powers[i]
        alt = rows[replaced]  # (m, nz, nw)
        log_alt = log_rows[replaced]
        fwd = (rows[:, None, :] * (log_rows[:, None, :] - log_alt)).sum(axis=2)
        rev = (alt * (log_alt - log_rows[:, None, :])).sum(axis=2)
        forward[i] = float(np.einsum("s,z,sz->", probs, marginal, fwd))
        reverse[i] = float(np.einsum("s,z,sz->", probs, marginal, rev))
    return forward, reverse


@dataclass(frozen=True)
class GenReport:
    """One generalization error computed five ways.

    direct comes from the definition; via_iskl from the symmetrized KL
    information of (W, S) divided by gamma; via_skl_div from the expected
    symmetrized KL divergence to the population-risk Gibbs law; via_cmi
    from the supersample selector information; via_replace_one from the
    replace-one divergence sum.  The last two are None on joint (non-IID)
    data models.  Construction fails unless all present values agree
    within 1e-9 relative or 1e-12 absolute, whichever is larger.
    """

    direct: float
    via_iskl: float
    via_skl_div: float
    via_cmi: float | None
    via_replace_one: float | None
    info: InfoReport

    def values(self) -> dict[str, float]:
        out = {
            "direct": self.direct,
            "via_iskl": self.via_iskl,
            "via_skl_div": self.via_skl_div,
        }
        if self.via_cmi is not None:
            out["via_cmi"] = self.via_cmi
        if self.via_replace_one is not None:
            out["via_replace_one"] = self.via_replace_one
        return out

    def max_pairwise_gap(self) -> float:
        vals = list(self.values().values())
        return max(abs(a - b) for a in vals for b in vals)

    def __post_init__(self) -> None:
        vals = list(self.values().values())
        gap = max(abs(a - b) for a in vals for b in vals)
        scale = max(abs(v) for v in vals)
        # absolute floor: below scale 1e-3 a pure relative test would demand
        # agreement finer than the error floor of the O(1) intermediate terms
        limit = max(REL_TOL * scale, ABS_TOL)
        if gap > limit:
            raise IdentityMismatch(
                f"characterizations disagree by {gap!r} (scale {scale!r}, limit {limit!r})"
            )


def gen_characterizations(
    problem: LearningProblem,
    gamma: float,
    include_cmi: bool = True,
    include_replace_one: bool = True,
    cap: int = ENUMERATION_CAP,
    supersample_cap: int = SUPERSAMPLE_CAP,
) -> GenReport:
    """The expected generalization error by definition and by every exact
    characterization available for the data model.

    Requires gamma > 0 (at gamma = 0 the error is identically zero and the
    information forms degenerate to 0/0).  On joint data models the
    supersample and replace-one forms are undefined and reported as None.
    """
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise GammaNonPositive(f"gamma must be > 0, got {gamma!r}")
    posterior = gibbs_posterior(problem, gamma, cap=cap)
    joint = joint_distribution(problem, posterior)
    info = info_triple(joint)
    direct = gen_error_direct(problem, posterior)
    via_iskl = info.symmetrized / gamma

    pop = population_gibbs(problem, gamma)
    per_dataset = _symmetrized_kl_rows(posterior.row_array, pop.weights[None, :])
    via_skl_div = float(problem._dataset_probs @ per_dataset) / gamma

    via_cmi = None
    via_replace_one = None
    if problem.is_iid() and include_cmi:
        cond = supersample_conditional_info(problem, gamma, posterior, cap=supersample_cap)
        via_cmi = 2.0 * cond.symmetrized / gamma
    if problem.is_iid() and include_replace_one:
        forward, reverse = replace_one_divergences(problem, gamma, posterior)
        via_replace_one = float((forward + reverse).sum()) / (2.0 * gamma)

    return GenReport(
        direct=direct,
        via_iskl=via_iskl,
        via_skl_div=via_skl_div,
        via_cmi=via_cmi,
        via_replace_one=via_replace_one,
        info=info,
    )


def gen_via_cmi(problem: LearningProblem, gamma: float, cap: int = SUPERSAMPLE_CAP) -> float:
    """Generalization error from the supersample selector information alone."""
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise GammaNonPositive(f"gamma must be > 0, got {gamma!r}")
    return 2.0 * supersample_conditional_info(problem, gamma, cap=cap).symmetrized / gamma


def gen_via_replace_one(problem: LearningProblem, gamma: float) -> float:
    """Generalization error from the replace-one divergence sum alone."""
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise GammaNonPositive(f"gamma must be > 0, got {gamma!r}")
    forward, reverse = replace_one_divergences(problem, gamma)
    return float((forward + reverse).sum()) / (2.0 * gamma)


@dataclass(frozen=True)
class InfoDivergenceReport:
    """Mutual and lautum information next to the directed divergences from
    and to the population-risk Gibbs law.

    Enforces mutual <= d_fwd, lautum >= d_rev, and the exact exchange
    mutual + lautum = d_fwd + d_rev, all with 1e-10 slack.
    """

    mutual: float
    lautum: float
    d_fwd: float
    d_rev: float

    def __post_init__(self) -> None:
        scale = max(1.0, abs(self.mutual) + abs(self.lautum))
        if self.mutual > self.d_fwd + COMPARE_TOL * scale:
            raise IdentityMismatch(
                f"mutual {self.mutual!r} exceeds forward divergence {self.d_fwd!r}"
            )
        if self.lautum < self.d_rev - COMPARE_TOL * scale:
            raise IdentityMismatch(
                f"lautum {self.lautum!r} is below reverse divergence {self.d_rev!r}"
            )
        if abs((self.mutual + self.lautum) - (self.d_fwd + self.d_rev)) > COMPARE_TOL * scale:
            raise IdentityMismatch("information sum does not match divergence sum")


def info_divergence_compare(problem: LearningProblem, gamma: float) -> InfoDivergenceReport:
    """Compare (mutual, lautum) information of (W, S) with the directed
    divergences between the posterior and the population-risk Gibbs law."""
    posterior = gibbs_posterior(problem, gamma)
    joint = joint_distribution(problem, posterior)
    info = info_triple(joint)
    pop = population_gibbs(problem, gamma)
    rows = posterior.row_array
    log_rows = np.log(rows)
    log_pop = np.log(pop.weights)[None, :]
    fwd_rows = (rows * (log_rows - log_pop)).sum(axis=1)
    rev_rows = (pop.weights[None, :] * (log_pop - log_rows)).sum(axis=1)
    probs = problem._dataset_probs
    return InfoDivergenceReport(
        mutual=info.mutual,
        lautum=info.lautum,
        d_fwd=float(probs @ fwd_rows),
        d_rev=float(probs @ rev_rows),
    )


@dataclass(frozen=True)
class RegularizedGenReport:
    """Generalization error of a regularized Gibbs posterior next to its
    exact decomposition: gen = iskl_over_gamma - lam * reg_gap, where
    reg_gap is the product-minus-joint expectation gap of the regularizer.

    For squared-distance regularizers |w - T(s)|^2 the gap equals twice the
    covariance trace between the hypothesis embedding and the target, which
    is reported as trace_cov.
    """

    gen: float
    iskl_over_gamma: float
    reg_gap: float
    lam: float
    trace_cov: float | None = None

    def __post_init__(self) -> None:
        lhs = self.gen
        rhs = self.iskl_over_gamma - self.lam * self.reg_gap
        gap = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        if gap > max(ABS_TOL, REL_TOL * scale):
            raise IdentityMismatch(
                f"regularized decomposition off by {gap!r} (gen {lhs!r} vs {rhs!r})"
            )
        if self.trace_cov is not None:
            gap2 = abs(self.reg_gap - 2.0 * self.trace_cov)
            if gap2 > max(ABS_TOL, REL_TOL * abs(self.reg_gap)):
                raise IdentityMismatch(
                    f"reg_gap {self.reg_gap!r} is not twice the covariance trace "
                    f"{self.trace_cov!r}"
                )


def regularized_gen(
    problem: LearningProblem,
    gamma: float,
    lam: float,
    regularizer: np.ndarray | None = None,
    *,
    embedding: np.ndarray | None = None,
    target: np.ndarray | None = None,
) -> RegularizedGenReport:
    """Generalization error of the Gibbs posterior for the penalized energy
    empirical risk + lam * R(w, s), still measured on the base loss.

    R is a (num_hypotheses, dataset_count) table of nonnegative values.
    Alternatively pass embedding (num_hypotheses, k) and target
    (dataset_count, k) to use R(w, s) = |embedding[w] - target[s]|^2, which
    additionally reports the covariance trace identity.
    """
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise GammaNonPositive(f"gamma must be > 0, got {gamma!r}")
    if not (math.isfinite(lam) and lam >= 0.0):
        raise InvalidInput(f"lam must be a finite real >= 0, got {lam!r}")
    m = problem.dataset_count
    nw = problem.num_hypotheses
    emb = tgt = None
    if regularizer is None:
        if embedding is None or target is None:
            raise InvalidInput("pass either a regularizer table or embedding + target")
        emb = np.asarray(embedding, dtype=np.float64).reshape(nw, -1)
        tgt = np.asarray(target, dtype=np.float64).reshape(m, -1)
        if emb.shape[1] != tgt.shape[1]:
            raise InvalidInput("embedding and target dimensions differ")
        diff = emb[:, None, :] - tgt[None, :, :]
        regularizer = (diff * diff).sum(axis=2)
    else:
        if embedding is not None or target is not None:
            raise InvalidInput("pass either a regularizer table or embedding + target, not both")
        regularizer = np.asarray(regularizer, dtype=np.float64)
        if regularizer.shape != (nw, m):
            raise InvalidInput(
                f"regularizer shape {regularizer.shape} must be ({nw}, {m})"
            )
        if not np.all(np.isfinite(regularizer)) or np.any(regularizer < 0.0):
            raise InvalidInput("regularizer entries must be finite and nonnegative")

    energy = problem._empirical_risk + lam * regularizer
    logits = problem.prior.log_weights[:, None] - gamma * energy
    log_partition = logsumexp(logits, axis=0)
    rows = np.exp((logits - log_partition[None, :]).T)
    rows /= rows.sum(axis=1, keepdims=True)

    probs = problem._dataset_probs
    joint = JointTable(
        rows.T * probs[None, :], problem.hypothesis_set, problem.dataset_labels()
    )
    marginal = probs @ rows
    pop = problem._population_risk
    gen = float(marginal @ pop) - float(
        np.einsum("s,sw,ws->", probs, rows, problem._empirical_risk)
    )
    iskl_over_gamma = info_triple(joint).symmetrized / gamma
    joint_mean = float(np.einsum("s,sw,ws->", probs, rows, regularizer))
    product_mean = float(marginal @ (regularizer @ probs))
    reg_gap = product_mean - joint_mean

    trace_cov = None
    if emb is not None:
        mean_emb = marginal @ emb
        mean_tgt = probs @ tgt
        joint_dot = float(np.einsum("s,sw,wk,sk->", probs, rows, emb, tgt))
        trace_cov = joint_dot - float(mean_emb @ mean_tgt)
    return RegularizedGenReport(
        gen=gen,
        iskl_over_gamma=iskl_over_gamma,
        reg_gap=reg_gap,
        lam=float(lam),
        trace_cov=trace_cov,
    )


def empirical_risk_curve(
    problem: LearningProblem, gammas: Sequence[float]
) -> list[float]:
    """E[empirical risk] per inverse temperature; the sequence is
    non-increasing for ascending gammas."""
    values = list(gammas)
    if not values:
        raise InvalidInput("need at least one gamma")
    if any(not (math.isfinite(g) and g >= 0.0) for g in values):
        raise InvalidInput("gammas must be finite reals >= 0")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidInput("gammas must be strictly increasing")
    out = []
    for gamma in values:
        posterior = gibbs_posterior(problem, gamma)
        out.append(expected_empirical_risk(problem, posterior))
    return out


def _gen_under_law(
    rows: np.ndarray, empirical: np.ndarray, probs: np.ndarray
) -> float:
    """Generalization error of a fixed posterior kernel under a dataset law."""
    pop = empirical @ probs
    marginal = probs @ rows
    return float(marginal @ pop) - float(np.einsum("s,sw,ws->", probs, rows, empirical))


def concavity_probe(
    components: Sequence[tuple[float, DataModel]],
    problem: LearningProblem,
    gamma: float,
) -> tuple[float, float]:
    """Generalization error of the mixture data law versus the component
    average, both evaluated with the single Gibbs kernel of the mixture
    problem (the kernel depends only on loss, prior, and gamma, so it is
    also each component's own kernel).  The mixture value is asserted to
    be at least the component average within 1e-12 slack.

    Caution: the asserted inequality is not a theorem.  The mutual
    information part of the error is concave in the data law, but the
    reverse-order (lautum) part is not, and on roughly 1% of random
    two-component mixtures the total dips below the average by amounts
    far above rounding (1e-6 to 1e-3, confirmed with 50-digit
    arithmetic).  Callers sampling generic mixtures should be prepared
    to catch IdentityMismatch.
    """
    weights = ProbVec(np.array([w for w, _ in components], dtype=np.float64))
    indices = problem._dataset_indices
    component_probs = [_tuple_probs(model, indices) for _, model in components]
    mixture = np.zeros(problem.dataset_count)
    for w, probs in zip(weights.weights, component_probs):
        mixture += w * probs
    mixture_problem = dataclasses.replace(problem, data_model=JointData(mixture))
    posterior = gibbs_posterior(mixture_problem, gamma)
    rows = posterior.row_array
    empirical = mixture_problem._empirical_risk
    gen_mixture = _gen_under_law(rows, empirical, mixture_problem._dataset_probs)
    avg_gen = sum(
        float(w) * _gen_under_law(rows, empirical, probs)
        for w, probs in zip(weights.weights, component_probs)
    )
    if gen_mixture < avg_gen - 1e-12:
        raise IdentityMismatch(
            f"mixture error {gen_mixture!r} fell below the component average {avg_gen!r}"
        )
    return gen_mixture, avg_gen


@dataclass(frozen=True)
class ChainRuleReport:
    """Symmetrized information of a hypothesis against each of two samples
    and against the pair; whether the single-sample sum exceeds the joint
    value depends on the construction, so both are reported."""

    info_first: InfoReport
    info_second: InfoReport
    info_pair: InfoReport
    individual_sum: float
    sum_exceeds_joint: bool


def chain_rule_example(epsilon: float) -> ChainRuleReport:
    """A three-bit joint law whose symmetrized information is not
    subadditive or superadditive uniformly: the comparison between the sum
    of single-sample values and the pair value flips with epsilon.

    The law over (w, z1, z2) puts 1/8 on each cell with (z1, z2) = (0, 0),
    1/4 - epsilon on cells with w = 1 and (z1, z2) != (0, 0), and epsilon
    on cells with w = 0 and (z1, z2) != (0, 0).
    """
    if not (isinstance(epsilon, (int, float)) and 0.0 < epsilon < 0.125):
        raise EpsilonOutOfRange(f"epsilon must lie in (0, 1/8), got {epsilon!r}")
    cube = np.empty((2, 2, 2))
    cube[:, 0, 0] = 0.125
    for z1, z2 in ((0, 1), (1, 0), (1, 1)):
        cube[1, z1, z2] = 0.25 - epsilon
        cube[0, z1, z2] = epsilon

    info_first = info_triple(JointTable(cube.sum(axis=2), (0, 1), (0, 1)))
    info_second = info_triple(JointTable(cube.sum(axis=1), (0, 1), (0, 1)))
    pair_alphabet = ((0, 0), (0, 1), (1, 0), (1, 1))
    info_pair = info_triple(JointTable(cube.reshape(2, 4), (0, 1), pair_alphabet))
    individual_sum = info_first.symmetrized + info_second.symmetrized
    return ChainRuleReport(
        info_first=info_first,
        info_second=info_second,
        info_pair=info_pair,
        individual_sum=individual_sum,
        sum_exceeds_joint=individual_sum > info_pair.symmetrized,
    )


def log_ratio_means(
    problem: LearningProblem, gamma: float, candidate: ProbVec
) -> tuple[float, float]:
    """The dataset-averaged log ratio ln(candidate / posterior), averaged
    once under the posterior's hypothesis marginal and once under the
    candidate itself.

    The two averages coincide exactly when the candidate is the
    population-risk Gibbs law, and generically differ otherwise; this is
    the balance condition that singles that law out.
    """
    if len(candidate) != problem.num_hypotheses:
        raise InvalidInput("candidate length does not match the hypothesis set")
    if float(candidate.weights.min()) < ZERO_CUTOFF:
        raise InvalidInput("candidate must be strictly positive")
    posterior = gibbs_posterior(problem, gamma)
    probs = problem._dataset_probs
    log_rows = np.log(posterior.row_array)
    inner = candidate.log_weights - probs @ log_rows  # g(w), averaged over datasets
    under_marginal = float(posterior.hypothesis_marginal @ inner)
    under_candidate = float(candidate.weights @ inner)
    return under_marginal, under_candidate
