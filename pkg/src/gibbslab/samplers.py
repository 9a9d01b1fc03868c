"""Sampling approximations of the Gibbs posterior.

sgld_run implements the unadjusted Langevin iteration

    W_{k+1} = W_k - step * grad(W_k, dataset) + sqrt(2 step / gamma) * noise_k

whose stationary law approximates the Gibbs density proportional to
exp(-gamma * objective).  For a quadratic objective (w - m)^2 the exact
stationary law of the discrete chain is Gaussian with mean m and
variance 1 / (2 gamma (1 - step)), so the continuous-time variance
1 / (2 gamma) is recovered as the step vanishes; tests lean on both
facts.  All noise comes from one counter-based stream keyed by the
seed, so a run is bit-reproducible.

mc_gen_error is the generic sampled analogue of the enumerable
generalization error: per trial it draws a training tuple, one
hypothesis from a user-supplied posterior sampler, and a held-out
block, and averages held-out-minus-training loss.  Each trial owns a
counter-based substream keyed by (seed, trial), so results do not
depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import Diverged, InvalidInput

DIVERGENCE_NORM = 1e10


@dataclass(frozen=True)
class SgldConfig:
    """Langevin iteration parameters.

    burn_in defaults to a fifth of the iterations; only iterates after
    it are returned.
    """

    step: float
    gamma: float
    iterations: int
    burn_in: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise InvalidInput(f"step must be > 0, got {self.step!r}")
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise InvalidInput(f"gamma must be > 0, got {self.gamma!r}")
        if not (isinstance(self.iterations, int) and self.iterations >= 1):
            raise InvalidInput(f"iterations must be a positive integer, got {self.iterations!r}")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.iterations // 5)
        if not (isinstance(self.burn_in, int) and 0 <= self.burn_in < self.iterations):
            raise InvalidInput(
                f"burn_in must lie in [0, iterations), got {self.burn_in!r}"
            )


def sgld_run(
    gradient: Callable[[np.ndarray, object], np.ndarray],
    initial: object,
    config: SgldConfig,
    dataset: object = None,
) -> np.ndarray:
    """Run the Langevin chain and return the post-burn-in iterates.

    gradient(w, dataset) must return the gradient of the objective whose
    Gibbs density (at the config's gamma) is being targeted.  The chain
    raises Diverged as soon as an iterate's norm exceeds 1e10 or stops
    being finite.  Returns an array of shape (iterations - burn_in, dim).
    """
    w = np.atleast_1d(np.asarray(initial, dtype=np.float64)).copy()
    if w.ndim != 1:
        raise InvalidInput(f"initial must be a scalar or vector, got shape {w.shape}")
    rng = np.random.Generator(np.random.Philox(key=np.array([config.seed, 0], dtype=np.uint64)))
    noise = rng.standard_normal((config.iterations, w.size))
    scale = math.sqrt(2.0 * config.step / config.gamma)
    iterates = np.empty((config.iterations, w.size))
    for k in range(config.iterations):
        grad = np.asarray(gradient(w, dataset), dtype=np.float64).reshape(w.shape)
        w = w - config.step * grad + scale * noise[k]
        norm = float(np.linalg.norm(w))
        if not math.isfinite(norm) or norm > DIVERGENCE_NORM:
            raise Diverged(
                f"iterate norm {norm!r} at step {k} exceeded {DIVERGENCE_NORM:g}",
                iteration=k,
                norm=norm,
            )
        iterates[k] = w
    return iterates[config.burn_in :]


def mc_gen_error(
    sample_source: Callable[[np.random.Generator, int], object],
    n: int,
    posterior_sampler: Callable[[np.random.Generator, object], object],
    loss_fn: Callable[[object, object], float],
    trials: int,
    seed: int,
    held_out: int = 8,
) -> tuple[float, float]:
    """Sampled generalization error for models too large to enumerate.

    sample_source(rng, count) returns an iterable of count samples;
    posterior_sampler(rng, training) returns one hypothesis given the
    training iterable; loss_fn(w, z) a scalar loss.  Per trial the gap
    is the held-out average loss minus the training average loss of the
    drawn hypothesis.  Returns (estimate, standard error).
    """
    if not (isinstance(n, int) and n >= 1):
        raise InvalidInput(f"n must be a positive integer, got {n!r}")
    if not (isinstance(trials, int) and trials >= 1000):
        raise InvalidInput(f"trials must be an integer >= 1000, got {trials!r}")
    if not (isinstance(held_out, int) and held_out >= 1):
        raise InvalidInput(f"held_out must be a positive integer, got {held_out!r}")
    gaps = np.empty(trials)
    for trial in range(trials):
        rng = np.random.Generator(
            np.random.Philox(key=np.array([seed, trial], dtype=np.uint64))
        )
        training = sample_source(rng, n)
        w = posterior_sampler(rng, training)
        fresh = sample_source(rng, held_out)
        on_train = float(np.mean([loss_fn(w, z) for z in training]))
        on_fresh = float(np.mean([loss_fn(w, z) for z in fresh]))
        gaps[trial] = on_fresh - on_train
    estimate = float(gaps.mean())
    std_error = float(gaps.std(ddof=1) / math.sqrt(trials))
    return estimate, std_error
