"""Brute-force and finite-difference verifiers for the analytical claims.

Three independent checks live here:

* the split/refine construction behind the chain bounds, with its telescoped
  entropy and guess-count identities checked against closed forms;
* the extremal gap ``f(mu)`` separating the improved exponential bound from
  the best entropy any distribution with guessing entropy mu can carry, with
  closed-form derivatives and finite-difference validation;
* a grid falsifier that hunts for counterexamples to candidate coefficient
  triples (a, b, c), confirming that (1/e, 2, 1/2) survives while anything
  more generous fails.

Plus the deterministic corpus samplers the test batteries run on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import MasseyLikeCoefficients
from .dist import DistributionError, ProbDist, binary_entropy, make_dist
from .seeding import keyed_rng

__all__ = [
    "RefinementSequence",
    "ExtremalGap",
    "FiniteDiffReport",
    "CounterexampleReport",
    "split_once",
    "refine_sequence",
    "chain_bound_at_depth",
    "f_gap",
    "finite_diff_check",
    "falsify_coefficients",
    "log_mu_grid",
    "random_dist",
    "SAMPLERS",
]

_LN2 = math.log(2.0)
_INV_E = 1.0 / math.e

SAMPLERS = ("flat", "geometric", "spiky")


@dataclass(frozen=True)
class RefinementSequence:
    """A distribution after ``depth`` tail splits at fraction ``alpha``.

    Only the current distribution is stored; the telescoped identities
    ``H(current) = H(base) + p_n h(alpha) (1-alpha^k)/(1-alpha)`` and
    ``GE(current) = GE(base) + p_n alpha (1-alpha^k)/(1-alpha)`` are checked
    against closed forms rather than stored history.
    """

    base: ProbDist
    alpha: float
    depth: int
    current: ProbDist


@dataclass(frozen=True)
class ExtremalGap:
    """Value and derivatives (nats) of the extremal gap function at mu.

    ``f(mu) = ln(mu-1/2) + 1 - ln(mu-1) + mu*ln(1-1/mu)`` measures how far
    the improved exponential bound sits below the extremal entropy curve;
    positivity of f for every mu > 1 is what makes the bound valid, and its
    decay to 0 is what makes the coefficients unimprovable.
    """

    mu: float
    f_value: float
    f_prime: float
    f_second: float


@dataclass(frozen=True)
class FiniteDiffReport:
    """Central-difference estimates of f' and f'' with their residuals."""

    mu: float
    h_step: float
    first_estimate: float
    first_residual: float
    second_estimate: float
    second_residual: float


@dataclass(frozen=True)
class CounterexampleReport:
    """Outcome of a coefficient falsification scan.

    ``mu_witness`` is the smallest grid point where the candidate inequality
    fails, or None; ``margin`` is the violation magnitude in natural-log
    units (0 when no witness was found).
    """

    coeffs: MasseyLikeCoefficients
    mu_witness: float | None
    margin: float


def split_once(d: ProbDist, alpha: float) -> ProbDist:
    """Split the smallest mass p_n into ((1-alpha) p_n, alpha p_n).

    The two parts are carved out of p_n itself (never recomputed from the
    total), so the overall mass is preserved to machine precision. The
    result is descending exactly when alpha <= 1/2, hence the domain.
    """
    if not 0.0 < alpha <= 0.5:
        raise DistributionError(f"alpha must lie in (0, 1/2], got {alpha!r}")
    tail = d.probs[-1]
    low = alpha * tail
    if low <= 0.0:
        raise DistributionError("split underflowed: alpha * p_n is zero")
    high = tail - low
    out = np.empty(d.probs.size + 1, dtype=np.float64)
    out[:-2] = d.probs[:-1]
    out[-2] = high
    out[-1] = low
    return ProbDist(out)


def refine_sequence(d: ProbDist, alpha: float, k: int) -> RefinementSequence:
    """Apply ``split_once`` to the shrinking tail k times."""
    if k < 0:
        raise DistributionError(f"depth must be >= 0, got {k!r}")
    current = d
    for _ in range(k):
        current = split_once(current, alpha)
    return RefinementSequence(base=d, alpha=float(alpha), depth=int(k), current=current)


def chain_bound_at_depth(entropy_bits: float, min_prob: float, alpha: float, depth: int) -> float:
    """Guessing-entropy bound induced by a depth-k tail refinement.

    ``2**(H + p_n h(a) s_k)/e + 1/2 - p_n a s_k`` with
    ``s_k = (1-a**k)/(1-a)``; non-decreasing in k and converging (ratio a)
    to the chain-sup objective at the same alpha.
    """
    if not 0.0 < alpha <= 0.5:
        raise DistributionError(f"alpha must lie in (0, 1/2], got {alpha!r}")
    if depth < 0:
        raise DistributionError(f"depth must be >= 0, got {depth!r}")
    s_k = (1.0 - alpha ** depth) / (1.0 - alpha)
    gain = min_prob * binary_entropy(alpha) * s_k
    cost = min_prob * alpha * s_k
    return _INV_E * 2.0 ** (entropy_bits + gain) + 0.5 - cost


def f_gap(mu: float) -> ExtremalGap:
    """Closed-form f(mu), f'(mu), f''(mu) in nats.

    Evaluated through log1p so the 1/mu-scale cancellations survive across
    the working grid. The value still carries ~2e-16 absolute noise from the
    ``1 + mu*log1p`` cancellation; since f itself decays like 1/(24 mu^2),
    its sign is resolved reliably for mu up to about 1e6.
    """
    if not (math.isfinite(mu) and mu > 1.0):
        raise ValueError(f"mu must be finite and > 1, got {mu!r}")
    f_value = math.log1p(0.5 / (mu - 1.0)) + 1.0 + mu * math.log1p(-1.0 / mu)
    f_prime = 1.0 / (mu - 0.5) + math.log1p(-1.0 / mu)
    f_second = 1.0 / (4.0 * mu * (mu - 1.0) * (mu - 0.5) ** 2)
    return ExtremalGap(mu=float(mu), f_value=f_value, f_prime=f_prime, f_second=f_second)


def finite_diff_check(mu: float, h_step: float) -> FiniteDiffReport:
    """Central-difference validation of the closed-form derivatives at mu."""
    if not (math.isfinite(h_step) and h_step > 0.0):
        raise ValueError(f"h_step must be finite and > 0, got {h_step!r}")
    if mu - h_step <= 1.0:
        raise ValueError(f"step {h_step!r} reaches outside the domain mu > 1 at mu={mu!r}")
    lower = f_gap(mu - h_step)
    upper = f_gap(mu + h_step)
    center = f_gap(mu)
    first = (upper.f_value - lower.f_value) / (2.0 * h_step)
    second = (upper.f_prime - lower.f_prime) / (2.0 * h_step)
    return FiniteDiffReport(
        mu=float(mu),
        h_step=float(h_step),
        first_estimate=first,
        first_residual=first - center.f_prime,
        second_estimate=second,
        second_residual=second - center.f_second,
    )


def log_mu_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """Log-spaced mu grid; the deficits decay like 1/mu, so log spacing
    spends the budget where violations can actually hide."""
    if not lo > 1.0:
        raise ValueError(f"mu grid must stay above 1, got lower end {lo!r}")
    if not hi > lo:
        raise ValueError("mu grid upper end must exceed the lower end")
    if count < 2:
        raise ValueError("mu grid needs at least 2 points")
    return np.geomspace(lo, hi, count)


def _gap_nats(coeffs: MasseyLikeCoefficients, mu: np.ndarray) -> np.ndarray:
    """lhs - rhs of the necessary condition, in nats.

    A candidate bound a*b**H + c can only be universally valid if
    ``log_b((mu-c)/a) >= log2(mu-1) - mu*log2(1-1/mu)`` for every mu > 1;
    negative entries are violations.
    """
    rhs_extra = mu * np.log1p(-1.0 / mu)
    if coeffs.b == 2.0:
        # Same cancellation pattern as f(mu); log1p keeps 1/mu-scale margins honest.
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs_minus = np.log1p((1.0 - coeffs.c) / (mu - 1.0))
        gap = lhs_minus - math.log(coeffs.a) + rhs_extra
    else:
        scale = _LN2 / math.log(coeffs.b)
        with np.errstate(divide="ignore", invalid="ignore"):
            gap = scale * np.log((mu - coeffs.c) / coeffs.a) - np.log(mu - 1.0) + rhs_extra
    return np.where(mu - coeffs.c > 0.0, gap, -np.inf)


def falsify_coefficients(coeffs: MasseyLikeCoefficients, mu_grid) -> CounterexampleReport:
    """Scan a mu grid for counterexamples to the candidate coefficients.

    Returns the smallest grid point where the bound would exceed the
    extremal entropy curve (i.e. where some distribution must violate it),
    together with the violation margin in nats; or no witness.
    """
    grid = np.asarray(mu_grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("mu grid is empty")
    if not np.all(grid > 1.0):
        raise ValueError("mu grid must stay above 1")
    gaps = _gap_nats(coeffs, grid)
    bad = np.flatnonzero(gaps < 0.0)
    if bad.size == 0:
        return CounterexampleReport(coeffs=coeffs, mu_witness=None, margin=0.0)
    first = bad[np.argmin(grid[bad])]
    return CounterexampleReport(
        coeffs=coeffs,
        mu_witness=float(grid[first]),
        margin=float(-gaps[first]),
    )


def random_dist(sampler: str, n: int, seed: int) -> ProbDist:
    """Deterministic corpus sampler keyed by (sampler, n, seed).

    Samplers: "flat" (Dirichlet-style, exponential weights), "geometric"
    (ratio drawn in [0.30, 0.95]), "spiky" (one dominant mass in
    [0.5, 0.995] with exponential crumbs).
    """
    if n < 1:
        raise DistributionError(f"support size must be >= 1, got {n!r}")
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}; expected one of {SAMPLERS}")
    rng = keyed_rng(SAMPLERS.index(sampler), n, seed)
    if sampler == "flat":
        weights = rng.standard_exponential(n)
    elif sampler == "geometric":
        ratio = rng.uniform(0.30, 0.95)
        weights = ratio ** np.arange(n, dtype=np.float64)
    else:
        top = rng.uniform(0.5, 0.995)
        crumbs = rng.standard_exponential(n)
        weights = crumbs * ((1.0 - top) / crumbs.sum())
        weights[0] += top
    total = weights.sum()
    if total <= 0.0:
        # Astronomically unlikely, but keep the sampler total-safe.
        weights = np.ones(n, dtype=np.float64)
        total = float(n)
    return make_dist(weights / total)
