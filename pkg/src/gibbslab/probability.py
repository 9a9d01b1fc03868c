"""Finite-alphabet probability primitives and information measures.

Everything downstream (Gibbs posteriors, bound suites, counterexamples) is
built on exact tabulated distributions, so this module is deliberately
strict: weights must be nonnegative and normalized to 1e-12, divergences
demand absolute continuity instead of returning infinities, and all
ratio-of-probability arithmetic runs in the log domain.

Conventions:
  * All information quantities are in nats.
  * Total variation follows the unnormalized sum-of-absolute-differences
    convention, so its range is [0, 2] (disjoint point masses give 2).
  * Probabilities below 1e-300 are treated as exact zeros when checking
    absolute continuity; this keeps underflow from masquerading as support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy.special import logsumexp, rel_entr

from .errors import (
    AbsoluteContinuityViolation,
    AlphaOutOfRange,
    AlphabetMismatch,
    InvalidDistribution,
    InvalidInput,
)

ZERO_CUTOFF = 1e-300
NORMALIZATION_TOL = 1e-12
IDENTITY_TOL = 1e-12


def _as_weight_array(weights: object, ndim: int) -> np.ndarray:
    arr = np.asarray(weights, dtype=np.float64)
    if arr.ndim != ndim:
        raise InvalidDistribution(f"expected a {ndim}-d weight array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistribution("weights must be finite")
    if np.any(arr < 0.0):
        raise InvalidDistribution(f"weights must be nonnegative, min is {arr.min()}")
    total = float(arr.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise InvalidDistribution(f"weights must sum to 1 within {NORMALIZATION_TOL}, got {total!r}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def _zeroed(weights: np.ndarray) -> np.ndarray:
    """Weights with sub-cutoff entries replaced by exact zeros."""
    return np.where(weights < ZERO_CUTOFF, 0.0, weights)


@dataclass(frozen=True, eq=False)
class ProbVec:
    """A probability distribution on a finite labeled alphabet.

    Immutable after construction; the weight array is marked read-only and
    log weights are cached on first use (zeros map to -inf).
    """

    weights: np.ndarray
    alphabet: tuple = ()

    def __post_init__(self) -> None:
        arr = _as_weight_array(self.weights, ndim=1)
        object.__setattr__(self, "weights", arr)
        alphabet = tuple(self.alphabet) if self.alphabet else tuple(range(arr.size))
        if len(alphabet) != arr.size:
            raise AlphabetMismatch(f"alphabet has {len(alphabet)} labels for {arr.size} weights")
        object.__setattr__(self, "alphabet", alphabet)

    @cached_property
    def log_weights(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            logs = np.log(self.weights)
        logs.flags.writeable = False
        return logs

    def __len__(self) -> int:
        return self.weights.size

    def support(self) -> np.ndarray:
        """Indices carrying probability above the zero cutoff."""
        return np.flatnonzero(self.weights >= ZERO_CUTOFF)


@dataclass(frozen=True, eq=False)
class JointTable:
    """A joint distribution on the product of two finite alphabets.

    ``table[i, j]`` is the probability of ``(row_alphabet[i], col_alphabet[j])``.
    """

    table: np.ndarray
    row_alphabet: tuple = ()
    col_alphabet: tuple = ()

    def __post_init__(self) -> None:
        arr = _as_weight_array(self.table, ndim=2)
        object.__setattr__(self, "table", arr)
        rows = tuple(self.row_alphabet) if self.row_alphabet else tuple(range(arr.shape[0]))
        cols = tuple(self.col_alphabet) if self.col_alphabet else tuple(range(arr.shape[1]))
        if (len(rows), len(cols)) != arr.shape:
            raise AlphabetMismatch(
                f"alphabet sizes {(len(rows), len(cols))} do not match table shape {arr.shape}"
            )
        object.__setattr__(self, "row_alphabet", rows)
        object.__setattr__(self, "col_alphabet", cols)

    def row_marginal(self) -> ProbVec:
        return ProbVec(self.table.sum(axis=1), self.row_alphabet)

    def col_marginal(self) -> ProbVec:
        return ProbVec(self.table.sum(axis=0), self.col_alphabet)

    def product_of_marginals(self) -> "JointTable":
        """The independent coupling of this table's marginals."""
        outer = np.outer(self.table.sum(axis=1), self.table.sum(axis=0))
        return JointTable(outer, self.row_alphabet, self.col_alphabet)

    def flattened(self) -> ProbVec:
        """The table as a ProbVec on the row-major pair alphabet."""
        pairs = tuple((r, c) for r in self.row_alphabet for c in self.col_alphabet)
        return ProbVec(self.table.reshape(-1), pairs)


@dataclass(frozen=True)
class CondTable:
    """One ProbVec per conditioning value, all on a shared alphabet."""

    rows: tuple[ProbVec, ...]
    conditioning_alphabet: tuple = ()

    def __post_init__(self) -> None:
        rows = tuple(self.rows)
        if not rows:
            raise InvalidInput("CondTable needs at least one row")
        alphabet = rows[0].alphabet
        for i, row in enumerate(rows):
            if row.alphabet != alphabet:
                raise AlphabetMismatch(f"row {i} alphabet differs from row 0")
        cond = (
            tuple(self.conditioning_alphabet)
            if self.conditioning_alphabet
            else tuple(range(len(rows)))
        )
        if len(cond) != len(rows):
            raise AlphabetMismatch(f"{len(cond)} conditioning labels for {len(rows)} rows")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "conditioning_alphabet", cond)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class InfoReport:
    """Mutual, lautum, and symmetrized-KL information of one coupling,
    in nats.  symmetrized is always the sum of the other two."""

    mutual: float
    lautum: float
    symmetrized: float

    def __post_init__(self) -> None:
        if self.mutual < -IDENTITY_TOL or self.lautum < -IDENTITY_TOL:
            raise InvalidInput(
                f"information must be nonnegative, got mutual={self.mutual!r} lautum={self.lautum!r}"
            )
        if abs(self.symmetrized - (self.mutual + self.lautum)) > IDENTITY_TOL * max(
            1.0, abs(self.symmetrized)
        ):
            raise InvalidInput("symmetrized must equal mutual + lautum")


def _require_same_alphabet(p: ProbVec, q: ProbVec) -> None:
    if p.alphabet != q.alphabet:
        raise AlphabetMismatch(
            f"distributions live on different alphabets ({len(p)} vs {len(q)} labels)"
        )


def _kl_arrays(p: np.ndarray, q: np.ndarray, context: str) -> float:
    """KL divergence between weight arrays known to share a shape.

    Raises AbsoluteContinuityViolation when p puts mass where q has none;
    0 * ln(0/q) terms contribute nothing.
    """
    pz = _zeroed(p)
    qz = _zeroed(q)
    bad = (pz > 0.0) & (qz == 0.0)
    if bad.any():
        idx = tuple(int(k[0]) for k in np.nonzero(bad))
        raise AbsoluteContinuityViolation(
            f"{context}: mass {pz[bad][0]!r} on a zero-probability point at index {idx}",
            index=idx if len(idx) > 1 else idx[0],
        )
    return float(rel_entr(pz, qz).sum())


def kl_divergence(p: ProbVec, q: ProbVec) -> float:
    """KL divergence D(p || q) in nats; requires p absolutely continuous
    with respect to q."""
    _require_same_alphabet(p, q)
    return _kl_arrays(p.weights, q.weights, "kl_divergence")


def symmetrized_kl(p: ProbVec, q: ProbVec) -> float:
    """Jeffreys divergence D(p || q) + D(q || p); requires mutual absolute
    continuity."""
    return kl_divergence(p, q) + kl_divergence(q, p)


def renyi_divergence(p: ProbVec, q: ProbVec, alpha: float) -> float:
    """Renyi divergence of order alpha: ln(sum p^alpha q^(1-alpha)) / (alpha - 1).

    alpha must be positive and different from 1; callers wanting the
    alpha -> 1 limit should call kl_divergence instead.  For alpha > 1, p
    must be absolutely continuous with respect to q.
    """
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha)):
        raise AlphaOutOfRange(f"alpha must be a finite real, got {alpha!r}")
    if alpha <= 0.0 or alpha == 1.0:
        raise AlphaOutOfRange(f"alpha must be > 0 and != 1, got {alpha!r}")
    _require_same_alphabet(p, q)
    pw = _zeroed(p.weights)
    qw = _zeroed(q.weights)
    if alpha > 1.0:
        bad = (pw > 0.0) & (qw == 0.0)
        if bad.any():
            idx = int(np.flatnonzero(bad)[0])
            raise AbsoluteContinuityViolation(
                f"renyi_divergence with alpha={alpha}: p has mass where q is zero at index {idx}",
                index=idx,
            )
    # Terms with p_i = 0 vanish for every alpha > 0; for alpha < 1 so do
    # terms with q_i = 0.
    mask = (pw > 0.0) & (qw > 0.0)
    if not mask.any():
        raise AbsoluteContinuityViolation("renyi_divergence: supports are disjoint")
    with np.errstate(divide="ignore"):
        terms = alpha * np.log(pw[mask]) + (1.0 - alpha) * np.log(qw[mask])
    return float(logsumexp(terms)) / (alpha - 1.0)


def total_variation(p: ProbVec, q: ProbVec) -> float:
    """Total variation in the sum |p_i - q_i| convention, range [0, 2]."""
    _require_same_alphabet(p, q)
    return float(np.abs(p.weights - q.weights).sum())


def info_triple(joint: JointTable) -> InfoReport:
    """Mutual, lautum, and symmetrized-KL information of a joint table.

    mutual = D(joint || product of marginals), lautum = the reverse
    divergence; lautum requires the product to be absolutely continuous
    with respect to the joint, which fails exactly when some cell with
    both marginals positive carries zero joint mass.
    """
    product = np.outer(joint.table.sum(axis=1), joint.table.sum(axis=0))
    mutual = _kl_arrays(joint.table, product, "info_triple (joint vs product)")
    lautum = _kl_arrays(product, joint.table, "info_triple (product vs joint)")
    return InfoReport(mutual=mutual, lautum=lautum, symmetrized=mutual + lautum)


def conditional_info_triple(
    joints_by_condition: Iterable[tuple[float, JointTable]],
) -> InfoReport:
    """Weighted average of per-condition information triples.

    The weights must form a probability vector over conditions; conditions
    with zero weight are skipped.  Errors from a condition's table are
    re-raised with the condition index attached.
    """
    pairs = list(joints_by_condition)
    if not pairs:
        raise InvalidInput("need at least one (weight, JointTable) pair")
    weight_vec = ProbVec(np.array([w for w, _ in pairs], dtype=np.float64))
    mutual = 0.0
    lautum = 0.0
    for idx, (weight, table) in enumerate(pairs):
        if weight_vec.weights[idx] < ZERO_CUTOFF:
            continue
        try:
            report = info_triple(table)
        except AbsoluteContinuityViolation as exc:
            raise AbsoluteContinuityViolation(
                f"condition {idx}: {exc}", index=exc.index
            ) from exc
        mutual += float(weight_vec.weights[idx]) * report.mutual
        lautum += float(weight_vec.weights[idx]) * report.lautum
    return InfoReport(mutual=mutual, lautum=lautum, symmetrized=mutual + lautum)
