"""Randomized enumerable problem instances for identity and bound sweeps.

Instances are drawn from counter-based substreams keyed by (seed, index),
so instance k is the same no matter how many instances a sweep requests
or in which order workers pick them up.  Weights get a small positive
floor before normalization: strictly positive laws keep every posterior
comparison absolutely continuous, which is the regime the identity
checks are about (support mismatches are exercised separately in the
unit tests).
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .gibbs import DataModel, IIDData, JointData, LearningProblem
from .probability import ProbVec

WEIGHT_FLOOR = 0.05


def _positive_weights(rng: np.random.Generator, size: int) -> np.ndarray:
    raw = rng.random(size) + WEIGHT_FLOOR
    return raw / raw.sum()


def instance_rng(seed: int, index: int) -> np.random.Generator:
    """The substream that generates instance number ``index``."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def random_problem(
    rng: np.random.Generator,
    max_symbols: int = 4,
    max_hypotheses: int = 5,
    max_n: int = 3,
    iid: bool = True,
) -> LearningProblem:
    """One random problem: alphabet sizes and n uniform up to the caps,
    losses uniform in [0, 1], strictly positive random prior and data law."""
    if max_symbols < 2 or max_hypotheses < 2 or max_n < 1:
        raise InvalidInput("caps must allow at least two symbols, two hypotheses, n >= 1")
    nz = int(rng.integers(2, max_symbols + 1))
    nw = int(rng.integers(2, max_hypotheses + 1))
    n = int(rng.integers(1, max_n + 1))
    loss = rng.random((nw, nz))
    prior = ProbVec(_positive_weights(rng, nw))
    model: DataModel
    if iid:
        model = IIDData(ProbVec(_positive_weights(rng, nz)))
    else:
        model = JointData(_positive_weights(rng, nz**n))
    return LearningProblem(
        sample_alphabet=tuple(range(nz)),
        hypothesis_set=tuple(range(nw)),
        loss=loss,
        prior=prior,
        data_model=model,
        n=n,
    )


def instance_sweep(
    count: int,
    seed: int,
    max_symbols: int = 4,
    max_hypotheses: int = 5,
    max_n: int = 3,
) -> list[tuple[int, LearningProblem]]:
    """count reproducible instances, alternating IID and joint data models."""
    if count < 1:
        raise InvalidInput(f"count must be >= 1, got {count!r}")
    out = []
    for index in range(count):
        rng = instance_rng(seed, index)
        problem = random_problem(
            rng,
            max_symbols=max_symbols,
            max_hypotheses=max_hypotheses,
            max_n=max_n,
            iid=(index % 2 == 0),
        )
        out.append((index, problem))
    return out


def random_mixture_components(
    rng: np.random.Generator, problem: LearningProblem
) -> list[tuple[float, DataModel]]:
    """Two random iid component laws (each domain draws its n samples
    independently from its own marginal) with a random mixture weight,
    for mixture probes over domain-dependent data."""
    w = float(rng.uniform(0.2, 0.8))
    nz = problem.num_samples_symbols
    return [
        (w, IIDData(ProbVec(_positive_weights(rng, nz), problem.sample_alphabet))),
        (1.0 - w, IIDData(ProbVec(_positive_weights(rng, nz), problem.sample_alphabet))),
    ]
