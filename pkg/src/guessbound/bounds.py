"""Massey-like lower bounds on guessing entropy.

Every bound here has the shape ``a * b**H + c`` for entropy H in bits. Two
families are covered, each with refinements that sharpen the base bound using
the smallest probability ``p_n``:

* the Massey family ``2**(H-2) + 1`` (meaningful once H >= 2 bits), and
* the Rioul family ``2**H / e`` and its additive improvement ``2**H / e + 1/2``
  (meaningful for every H >= 0).

The refinements come from splitting the smallest mass ``p_n`` into
``((1-alpha) p_n, alpha p_n)``: a single split buys ``p_n * h(alpha)`` extra
bits of entropy at the price of ``alpha * p_n`` extra guesses, and repeating
the split on the shrinking tail telescopes those rates to ``h(alpha)/(1-alpha)``
and ``alpha/(1-alpha)``. Taking the supremum over the split fraction
``alpha in [0, 1/2]`` gives the strongest member of each family.

Everything is evaluated both in linear form and in an overflow-safe log2 form,
so bounds stay usable when H reaches thousands of bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import ProbDist, ProductDistStats, shannon_entropy

__all__ = [
    "BoundsError",
    "MasseyLikeCoefficients",
    "EntropyInput",
    "BoundResult",
    "ALL_METHODS",
    "SUP_METHODS",
    "PN_FREE_METHODS",
    "massey_bound",
    "massey_split_half_bound",
    "massey_chain_half_bound",
    "massey_chain_sup_bound",
    "rioul_bound",
    "rioul_improved_bound",
    "rioul_split_sup_bound",
    "rioul_chain_sup_bound",
    "rioul_chain_half_weak_bound",
    "optimize_alpha",
    "max_entropy_given_ge",
    "bound_log2",
    "evaluate_all",
]

_LN2 = math.log(2.0)
_INV_E = 1.0 / math.e
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Entropy thresholds (bits) under which a bound is flagged inapplicable.
MASSEY_MIN_ENTROPY = 2.0
SPLIT_MIN_ENTROPY = 1.0

# Linear values are reported only while b**H fits comfortably in a double.
_LINEAR_EXP_LIMIT = 1000.0

METHOD_MASSEY = "massey"
METHOD_MASSEY_SPLIT_HALF = "massey_split_half"
METHOD_MASSEY_CHAIN_HALF = "massey_chain_half"
METHOD_MASSEY_CHAIN_SUP = "massey_chain_sup"
METHOD_RIOUL = "rioul"
METHOD_RIOUL_IMPROVED = "rioul_improved"
METHOD_RIOUL_SPLIT_SUP = "rioul_split_sup"
METHOD_RIOUL_CHAIN_SUP = "rioul_chain_sup"

ALL_METHODS = (
    METHOD_MASSEY,
    METHOD_MASSEY_SPLIT_HALF,
    METHOD_MASSEY_CHAIN_HALF,
    METHOD_MASSEY_CHAIN_SUP,
    METHOD_RIOUL,
    METHOD_RIOUL_IMPROVED,
    METHOD_RIOUL_SPLIT_SUP,
    METHOD_RIOUL_CHAIN_SUP,
)
SUP_METHODS = frozenset({METHOD_MASSEY_CHAIN_SUP, METHOD_RIOUL_SPLIT_SUP, METHOD_RIOUL_CHAIN_SUP})
PN_FREE_METHODS = frozenset({METHOD_MASSEY, METHOD_RIOUL, METHOD_RIOUL_IMPROVED})

_NOTE_MASSEY = "needs H >= 2 bits"
_NOTE_RIOUL = "holds for all H >= 0"
_NOTE_SPLIT = "needs H >= 1 bit"


class BoundsError(ValueError):
    """Invalid input to a bound evaluation."""


@dataclass(frozen=True)
class MasseyLikeCoefficients:
    """Coefficients (a, b, c) of a candidate lower bound ``a * b**H + c``."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise BoundsError(f"coefficient a must be finite and > 0, got {self.a!r}")
        if not (math.isfinite(self.b) and self.b > 1.0):
            raise BoundsError(f"coefficient b must be finite and > 1, got {self.b!r}")
        if not math.isfinite(self.c):
            raise BoundsError(f"coefficient c must be finite, got {self.c!r}")


@dataclass(frozen=True)
class EntropyInput:
    """Entropy (bits) plus, when known, the smallest probability.

    Built either from a full distribution or from product statistics whose
    support is far too large to materialize; in the latter case only
    ``log2_min_prob`` may be meaningful (the linear minimum can underflow).
    """

    entropy_bits: float
    min_prob: float | None = None
    log2_min_prob: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.entropy_bits) and self.entropy_bits >= 0.0):
            raise BoundsError(f"entropy_bits must be finite and >= 0, got {self.entropy_bits!r}")
        if self.min_prob is not None and not (0.0 < self.min_prob <= 1.0):
            raise BoundsError(f"min_prob must lie in (0, 1], got {self.min_prob!r}")
        if self.log2_min_prob is not None and not (
            math.isfinite(self.log2_min_prob) and self.log2_min_prob <= 0.0
        ):
            raise BoundsError(f"log2_min_prob must be finite and <= 0, got {self.log2_min_prob!r}")
        if self.min_prob is not None and self.log2_min_prob is not None:
            if abs(math.log2(self.min_prob) - self.log2_min_prob) > 1e-12 * max(
                1.0, abs(self.log2_min_prob)
            ):
                raise BoundsError("min_prob and log2_min_prob disagree")

    @classmethod
    def from_dist(cls, d: ProbDist) -> "EntropyInput":
        pn = d.min_prob
        return cls(shannon_entropy(d), min_prob=pn, log2_min_prob=math.log2(pn))

    @classmethod
    def from_stats(cls, stats: ProductDistStats) -> "EntropyInput":
        pn = 2.0 ** stats.log2_min_prob
        return cls(
            stats.entropy_bits,
            min_prob=pn if pn > 0.0 else None,
            log2_min_prob=stats.log2_min_prob,
        )

    @property
    def pn(self) -> float | None:
        """Smallest probability as a float; 0.0 signals underflow, None unknown."""
        if self.min_prob is not None:
            return self.min_prob
        if self.log2_min_prob is not None:
            return 2.0 ** self.log2_min_prob
        return None


@dataclass(frozen=True)
class BoundResult:
    """One evaluated bound.

    ``value`` is absent when only the log2 form is finite in double precision.
    ``alpha_star`` is present exactly for the sup-form methods.
    """

    method: str
    value: float | None
    value_log2_bits: float
    applicable: bool
    condition_note: str
    alpha_star: float | None = None


def _h_bits(alpha):
    """Binary entropy in bits, elementwise, with the 0/1 endpoints sent to 0."""
    if isinstance(alpha, float):
        if alpha <= 0.0 or alpha >= 1.0:
            return 0.0
        return -(alpha * math.log2(alpha) + (1.0 - alpha) * math.log2(1.0 - alpha))
    a = np.asarray(alpha, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = -(a * np.log2(a) + (1.0 - a) * np.log2(1.0 - a))
    return np.where((a <= 0.0) | (a >= 1.0), 0.0, raw)


def _log2_abc(a, c, entropy_bits):
    """log2(a * 2**H + c) without forming 2**H; -inf when the bound is <= 0."""
    if isinstance(a, float) and isinstance(c, float) and isinstance(entropy_bits, float):
        x = (c / a) * 2.0 ** (-entropy_bits)
        if x <= -1.0:
            return -math.inf
        return math.log2(a) + entropy_bits + math.log1p(x) / _LN2
    x = (c / a) * 2.0 ** (-entropy_bits)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.log1p(x) / _LN2
    out = np.log2(a) + entropy_bits + corr
    return np.where(x <= -1.0, -np.inf, out)


def bound_log2(coeffs: MasseyLikeCoefficients, entropy_bits: float) -> float:
    """log2 of ``a * b**H + c`` evaluated without forming ``b**H``.

    Splits the logarithm as ``log2(a) + H*log2(b) + log2(1 + (c/a) b**-H)``
    with the last term going through log1p, so the result stays exact when
    H is thousands of bits and the correction underflows. Returns ``-inf``
    when the bound is not meaningful (``a * b**H + c <= 0``).
    """
    h_scaled = entropy_bits * math.log2(coeffs.b)
    x = (coeffs.c / coeffs.a) * 2.0 ** (-h_scaled)
    if x <= -1.0:
        return -math.inf
    return math.log2(coeffs.a) + h_scaled + math.log1p(x) / _LN2


def max_entropy_given_ge(mu: float) -> float:
    """Largest Shannon entropy (bits) any distribution with guessing entropy mu can have.

    Among distributions with a fixed expected guess count mu > 1, entropy is
    maximized by a geometric profile, giving
    ``log2(mu-1) - mu*log2(1-1/mu)``.
    """
    if not (math.isfinite(mu) and mu > 1.0):
        raise BoundsError(f"mu must be finite and > 1, got {mu!r}")
    return math.log2(mu - 1.0) - mu * math.log1p(-1.0 / mu) / _LN2


def optimize_alpha(objective, *, grid_points: int = 1025, bracket_tol: float = 1e-12):
    """Maximize ``objective`` on [0, 1/2].

    A coarse equispaced grid locates the best bracket (guarding against
    multimodality), then golden-section refinement narrows it to
    ``bracket_tol``. Returns ``(alpha_star, value)`` for the best point
    actually evaluated; the grid contains 0, 1/4, and 1/2, so the result
    never falls below the objective there.
    """
    grid = np.linspace(0.0, 0.5, grid_points)
    try:
        vals = np.asarray(objective(grid), dtype=np.float64)
        if vals.shape != grid.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.asarray([float(objective(float(a))) for a in grid])
    if not np.all(np.isfinite(vals)):
        raise BoundsError("objective returned a non-finite value on [0, 1/2]")

    best = int(np.argmax(vals))
    alpha_star = float(grid[best])
    value = float(vals[best])

    lo = float(grid[best - 1]) if best > 0 else float(grid[0])
    hi = float(grid[best + 1]) if best + 1 < grid.size else float(grid[-1])
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc = float(objective(c))
    fd = float(objective(d))
    while hi - lo > bracket_tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = float(objective(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = float(objective(d))
    mid = 0.5 * (lo + hi)
    fmid = float(objective(mid))
    for cand_alpha, cand_value in ((c, fc), (d, fd), (mid, fmid)):
        if math.isfinite(cand_value) and cand_value > value:
            alpha_star, value = cand_alpha, cand_value
    if not math.isfinite(value):
        raise BoundsError("objective returned a non-finite value on [0, 1/2]")
    return alpha_star, value


# --- family plumbing --------------------------------------------------------
#
# Each bound is characterized by its family (the base coefficients) and by the
# exponent-gain and guess-cost rates applied to p_n. Keeping one code path for
# the base bound and for alpha=0 of the refined ones makes "alpha = 0 recovers
# the base bound exactly" hold bit for bit.


def _split_rate(alpha):
    return _h_bits(alpha)


def _split_cost(alpha):
    return alpha if isinstance(alpha, float) else np.asarray(alpha, dtype=np.float64)


def _chain_rate(alpha):
    if isinstance(alpha, float):
        return _h_bits(alpha) / (1.0 - alpha)
    return _h_bits(alpha) / (1.0 - np.asarray(alpha, dtype=np.float64))


def _chain_cost(alpha):
    if isinstance(alpha, float):
        return alpha / (1.0 - alpha)
    a = np.asarray(alpha, dtype=np.float64)
    return a / (1.0 - a)


def _massey_value(entropy_bits, gain, cost):
    exponent = entropy_bits + gain - 2.0
    if exponent > _LINEAR_EXP_LIMIT:
        return None
    return 2.0 ** exponent + 1.0 - cost


def _massey_log2(entropy_bits, gain, cost):
    return _log2_abc(2.0 ** (gain - 2.0), 1.0 - cost, entropy_bits)


def _rioul_value(entropy_bits, gain, cost):
    exponent = entropy_bits + gain
    if exponent > _LINEAR_EXP_LIMIT:
        return None
    return _INV_E * 2.0 ** exponent + 0.5 - cost


def _rioul_log2(entropy_bits, gain, cost):
    return _log2_abc(_INV_E * 2.0 ** gain, 0.5 - cost, entropy_bits)


_FAMILIES = {
    "massey": (_massey_value, _massey_log2, MASSEY_MIN_ENTROPY, _NOTE_MASSEY),
    "rioul": (_rioul_value, _rioul_log2, SPLIT_MIN_ENTROPY, _NOTE_SPLIT),
}


def _require_pn(inp: EntropyInput, method: str) -> float:
    pn = inp.pn
    if pn is None:
        raise BoundsError(f"{method} needs the minimum probability")
    return pn


def _fixed_alpha_result(method, family, rate_fn, cost_fn, inp, alpha):
    value_fn, log2_fn, min_h, note = _FAMILIES[family]
    pn = _require_pn(inp, method)
    gain = float(rate_fn(alpha)) * pn
    cost = float(cost_fn(alpha)) * pn
    h = inp.entropy_bits
    return BoundResult(
        method=method,
        value=value_fn(h, gain, cost),
        value_log2_bits=float(log2_fn(h, gain, cost)),
        applicable=h >= min_h,
        condition_note=note,
    )


def _sup_result(method, family, rate_fn, cost_fn, inp, alpha=None):
    value_fn, log2_fn, min_h, note = _FAMILIES[family]
    pn = _require_pn(inp, method)
    h = inp.entropy_bits
    if alpha is None:
        if pn == 0.0:
            # The objective is constant in alpha; keep the base-bound point.
            alpha = 0.0
        else:

            def objective(a):
                return log2_fn(h, rate_fn(a) * pn, cost_fn(a) * pn)

            alpha, _ = optimize_alpha(objective)
    elif not 0.0 <= alpha <= 0.5:
        raise BoundsError(f"alpha must lie in [0, 1/2], got {alpha!r}")
    gain = float(rate_fn(alpha)) * pn
    cost = float(cost_fn(alpha)) * pn
    return BoundResult(
        method=method,
        value=value_fn(h, gain, cost),
        value_log2_bits=float(log2_fn(h, gain, cost)),
        applicable=h >= min_h,
        condition_note=note,
        alpha_star=float(alpha),
    )


# --- the bounds --------------------------------------------------------------


def massey_bound(inp: EntropyInput) -> BoundResult:
    """Base Massey bound ``2**(H-2) + 1``, meaningful once H >= 2 bits."""
    h = inp.entropy_bits
    return BoundResult(
        method=METHOD_MASSEY,
        value=_massey_value(h, 0.0, 0.0),
        value_log2_bits=float(_massey_log2(h, 0.0, 0.0)),
        applicable=h >= MASSEY_MIN_ENTROPY,
        condition_note=_NOTE_MASSEY,
    )


def massey_split_half_bound(inp: EntropyInput) -> BoundResult:
    """Massey sharpened by one half-split of p_n: ``2**(H+p_n-2) + 1 - p_n/2``."""
    return _fixed_alpha_result(
        METHOD_MASSEY_SPLIT_HALF, "massey", _split_rate, _split_cost, inp, 0.5
    )


def massey_chain_half_bound(inp: EntropyInput) -> BoundResult:
    """Massey sharpened by the full half-split chain: ``2**(H+2*p_n-2) + 1 - p_n``."""
    return _fixed_alpha_result(
        METHOD_MASSEY_CHAIN_HALF, "massey", _chain_rate, _chain_cost, inp, 0.5
    )


def massey_chain_sup_bound(inp: EntropyInput, *, alpha: float | None = None) -> BoundResult:
    """Strongest Massey-family refinement: sup over the split fraction.

    ``sup_alpha 2**(H + h(a)/(1-a) * p_n - 2) + 1 - a/(1-a) * p_n``. Passing
    ``alpha`` evaluates the objective at that point instead of maximizing.
    """
    return _sup_result(
        METHOD_MASSEY_CHAIN_SUP, "massey", _chain_rate, _chain_cost, inp, alpha
    )


def rioul_bound(inp: EntropyInput) -> BoundResult:
    """Base exponential bound ``2**H / e``, valid for every H >= 0."""
    h = inp.entropy_bits
    exponent_ok = h <= _LINEAR_EXP_LIMIT
    return BoundResult(
        method=METHOD_RIOUL,
        value=_INV_E * 2.0 ** h if exponent_ok else None,
        value_log2_bits=float(_log2_abc(_INV_E, 0.0, h)),
        applicable=True,
        condition_note=_NOTE_RIOUL,
    )


def rioul_improved_bound(inp: EntropyInput) -> BoundResult:
    """Improved exponential bound ``2**H / e + 1/2``, valid for every H >= 0."""
    h = inp.entropy_bits
    return BoundResult(
        method=METHOD_RIOUL_IMPROVED,
        value=_rioul_value(h, 0.0, 0.0),
        value_log2_bits=float(_rioul_log2(h, 0.0, 0.0)),
        applicable=True,
        condition_note=_NOTE_RIOUL,
    )


def rioul_split_sup_bound(inp: EntropyInput, *, alpha: float | None = None) -> BoundResult:
    """Single-split refinement: ``sup_alpha 2**(H + p_n h(a))/e - a*p_n + 1/2``.

    Splitting the smallest mass once raises entropy by ``p_n h(a)`` while
    raising the guess count by only ``a * p_n``; flagged applicable for
    H >= 1 bit, the stated condition.
    """
    return _sup_result(
        METHOD_RIOUL_SPLIT_SUP, "rioul", _split_rate, _split_cost, inp, alpha
    )


def rioul_chain_sup_bound(inp: EntropyInput, *, alpha: float | None = None) -> BoundResult:
    """Recursive-split refinement, the strongest bound of the Rioul family.

    ``sup_alpha 2**(H + h(a)/(1-a) * p_n)/e + 1/2 - a/(1-a) * p_n``; the
    rates are the geometric limits of splitting the shrinking tail forever.
    """
    return _sup_result(
        METHOD_RIOUL_CHAIN_SUP, "rioul", _chain_rate, _chain_cost, inp, alpha
    )


def rioul_chain_half_weak_bound(inp: EntropyInput) -> BoundResult:
    """Reporting variant ``2**(H + p_n/2)/e + 1/2 - p_n``.

    Weaker than the half-split point of the chain (whose exponent gain is
    ``2*p_n``), kept for side-by-side reporting; the sup form dominates it.
    """
    pn = _require_pn(inp, "rioul_chain_half_weak")
    h = inp.entropy_bits
    gain = 0.5 * pn
    cost = 1.0 * pn
    return BoundResult(
        method="rioul_chain_half_weak",
        value=_rioul_value(h, gain, cost),
        value_log2_bits=float(_rioul_log2(h, gain, cost)),
        applicable=h >= SPLIT_MIN_ENTROPY,
        condition_note=_NOTE_SPLIT,
    )


_DISPATCH = {
    METHOD_MASSEY: massey_bound,
    METHOD_MASSEY_SPLIT_HALF: massey_split_half_bound,
    METHOD_MASSEY_CHAIN_HALF: massey_chain_half_bound,
    METHOD_MASSEY_CHAIN_SUP: massey_chain_sup_bound,
    METHOD_RIOUL: rioul_bound,
    METHOD_RIOUL_IMPROVED: rioul_improved_bound,
    METHOD_RIOUL_SPLIT_SUP: rioul_split_sup_bound,
    METHOD_RIOUL_CHAIN_SUP: rioul_chain_sup_bound,
}


def evaluate_all(inp: EntropyInput, methods=None) -> list[BoundResult]:
    """Evaluate every bound (or the requested subset) on one input.

    Bounds that need the smallest probability are skipped when the input
    carries none; inapplicable bounds are still computed and reported with
    ``applicable=False`` so threshold crossings stay visible.
    """
    if methods is None:
        chosen = ALL_METHODS
    else:
        chosen = tuple(methods)
        unknown = [m for m in chosen if m not in _DISPATCH]
        if unknown:
            raise BoundsError(f"unknown bound method(s): {', '.join(unknown)}")
    have_pn = inp.pn is not None
    return [_DISPATCH[m](inp) for m in chosen if have_pn or m in PN_FREE_METHODS]
