"""Probability distributions, entropies, and exact guessing entropy.

Distributions are kept strictly positive and sorted in non-increasing order,
which is the natural shape for guessing: candidates are tried from most to
least likely, and the expected number of trials is ``sum(i * p_i)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DistributionError",
    "NoPositiveMassError",
    "SupportOverflowError",
    "ProbDist",
    "ProductDistStats",
    "GEBoundCell",
    "GECurveRow",
    "GECurve",
    "make_dist",
    "shannon_entropy",
    "binary_entropy",
    "guessing_entropy_exact",
    "combine_stats",
    "combine_materialize",
    "load_prob_csv",
]

# Input sums farther than this from 1 are renormalized and flagged.
NORMALIZATION_TOL = 1e-9


class DistributionError(ValueError):
    """Invalid probability data."""


class NoPositiveMassError(DistributionError):
    """No positive mass: the input is empty or contains only zeros."""


class SupportOverflowError(DistributionError):
    """Materializing a product would exceed the configured support cap."""


@dataclass(frozen=True, eq=False)
class ProbDist:
    """A finite probability distribution, strictly positive and non-increasing.

    Use :func:`make_dist` for arbitrary nonnegative input; the constructor
    itself only validates (it never reorders or rescales), which keeps
    mass-preserving transformations such as splitting exact.

    Attributes
    ----------
    probs : np.ndarray
        Probabilities, descending, summing to 1 within ``NORMALIZATION_TOL``.
    dropped_zeros : int
        Number of zero entries removed while building this distribution.
    renormalized : bool
        True when the input sum was farther than the tolerance from 1.
    """

    probs: np.ndarray
    dropped_zeros: int = 0
    renormalized: bool = False

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise NoPositiveMassError("a distribution needs at least one probability")
        if not np.all(np.isfinite(arr)):
            raise DistributionError("probabilities must be finite")
        if np.any(np.diff(arr) > 0.0):
            raise DistributionError("probabilities must be sorted in non-increasing order")
        if arr[-1] <= 0.0:
            raise DistributionError("probabilities must be strictly positive")
        total = math.fsum(arr)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DistributionError(f"probabilities sum to {total!r}, expected 1 within {NORMALIZATION_TOL}")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n(self) -> int:
        """Support size."""
        return int(self.probs.size)

    @property
    def min_prob(self) -> float:
        """Smallest probability (the last entry)."""
        return float(self.probs[-1])


@dataclass(frozen=True)
class ProductDistStats:
    """Statistics of a tensor product of distributions, never materialized.

    Entropy is additive over independent factors, so the product's entropy,
    minimum probability, and support size can all be accumulated factor by
    factor in constant memory.
    """

    entropy_bits: float
    log2_min_prob: float
    log2_support: float
    factor_count: int


@dataclass(frozen=True)
class GEBoundCell:
    """One bound's value for one curve row, in log2 (bits) form."""

    log2_bits: float
    applicable: bool


@dataclass(frozen=True)
class GECurveRow:
    """Averaged evaluation record for one trace count.

    ``exact_ge_log2`` is None when the combined candidate space was too large
    to materialize for at least one experiment.
    """

    n_traces: int
    entropy_bits: float
    log2_min_prob: float
    exact_ge_log2: float | None
    bounds: dict[str, GEBoundCell] = field(default_factory=dict)


@dataclass(frozen=True)
class GECurve:
    """Per-trace-count record of exact guessing entropy and every bound."""

    rows: list[GECurveRow]
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def trace_counts(self) -> list[int]:
        return [row.n_traces for row in self.rows]


def make_dist(values) -> ProbDist:
    """Build a ProbDist from nonnegative weights.

    Zero entries are dropped (their count is surfaced on the result), the
    remainder is normalized to sum 1 and sorted descending with a stable
    sort. Inputs whose sum is farther than ``NORMALIZATION_TOL`` from 1 are
    renormalized silently but flagged, both on the result and through the
    warnings channel.

    Raises
    ------
    NoPositiveMassError
        If the input is empty or all entries are zero.
    DistributionError
        If any entry is negative or non-finite.
    """
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1:
        raise DistributionError("expected a one-dimensional list of probabilities")
    if arr.size == 0:
        raise NoPositiveMassError("no positive mass: input is empty")
    if not np.all(np.isfinite(arr)):
        raise DistributionError("probabilities must be finite")
    negative = np.flatnonzero(arr < 0.0)
    if negative.size:
        raise DistributionError(f"negative probability at index {int(negative[0])}")
    kept = arr[arr > 0.0]
    if kept.size == 0:
        raise NoPositiveMassError("no positive mass: all entries are zero")
    dropped = int(arr.size - kept.size)
    total = math.fsum(kept)
    renormalized = abs(total - 1.0) > NORMALIZATION_TOL
    if renormalized:
        warnings.warn(
            f"input sums to {total!r}; renormalizing to 1",
            RuntimeWarning,
            stacklevel=2,
        )
    order = np.argsort(-kept, kind="stable")
    return ProbDist(kept[order] / total, dropped_zeros=dropped, renormalized=renormalized)


def shannon_entropy(d: ProbDist) -> float:
    """Shannon entropy ``-sum(p * log2(p))`` in bits, compensated summation."""
    p = d.probs
    return -math.fsum(p * np.log2(p))


def binary_entropy(alpha: float) -> float:
    """Entropy of a Bernoulli(alpha) variable in bits, with h(0) = h(1) = 0."""
    if not 0.0 <= alpha <= 1.0:
        raise DistributionError(f"alpha must lie in [0, 1], got {alpha!r}")
    if alpha == 0.0 or alpha == 1.0:
        return 0.0
    return -(alpha * math.log2(alpha) + (1.0 - alpha) * math.log2(1.0 - alpha))


def guessing_entropy_exact(d: ProbDist) -> float:
    """Expected number of guesses ``sum(i * p_i)`` with the optimal guessing order.

    Lies in [1, (n+1)/2]; the upper end is attained exactly at the uniform
    distribution.
    """
    ranks = np.arange(1, d.probs.size + 1, dtype=np.float64)
    return math.fsum(ranks * d.probs)


def combine_stats(factors) -> ProductDistStats:
    """Accumulate product statistics over independent factors.

    Entropy and log-minimum add across factors, so the result costs O(total
    factor size) regardless of the product support (which may be 2^128 or
    more). Nothing is materialized.
    """
    factors = list(factors)
    if not factors:
        raise DistributionError("at least one factor is required")
    entropy = math.fsum(shannon_entropy(f) for f in factors)
    log2_min = math.fsum(math.log2(f.min_prob) for f in factors)
    log2_support = math.fsum(math.log2(f.n) for f in factors)
    return ProductDistStats(entropy, log2_min, log2_support, len(factors))


def combine_materialize(factors, max_support: int) -> ProbDist:
    """Materialize the full tensor product, sorted descending and renormalized.

    Raises
    ------
    SupportOverflowError
        If the product of factor lengths exceeds ``max_support``.
    """
    factors = list(factors)
    if not factors:
        raise DistributionError("at least one factor is required")
    support = 1
    for f in factors:
        support *= f.n
    if support > max_support:
        raise SupportOverflowError(
            f"product support {support} exceeds the materialization cap {max_support}"
        )
    acc = factors[0].probs
    for f in factors[1:]:
        acc = np.multiply.outer(acc, f.probs).ravel()
    positive = acc > 0.0
    dropped = int(acc.size - np.count_nonzero(positive))
    if dropped:
        # Tiny cross products can underflow to zero; drop them like make_dist does.
        acc = acc[positive]
    if acc.size == 0:
        raise NoPositiveMassError("no positive mass: every product term underflowed")
    order = np.argsort(-acc, kind="stable")
    acc = acc[order]
    return ProbDist(acc / math.fsum(acc), dropped_zeros=dropped)


def load_prob_csv(path) -> ProbDist:
    """Parse a probability-list CSV: one real per line, '#' starts a comment."""
    values: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise DistributionError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise NoPositiveMassError(f"{path}: no positive mass: file holds no values")
    return make_dist(values)
