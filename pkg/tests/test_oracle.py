"""Verifier module: tail splits, refinement sequences, the gap function, falsification."""

import math

import numpy as np
import pytest

from guessbound.bounds import EntropyInput, MasseyLikeCoefficients, rioul_chain_sup_bound
from guessbound.dist import (
    DistributionError,
    guessing_entropy_exact,
    make_dist,
    shannon_entropy,
)
from guessbound.oracle import (
    SAMPLERS,
    chain_bound_at_depth,
    f_gap,
    falsify_coefficients,
    finite_diff_check,
    log_mu_grid,
    random_dist,
    refine_sequence,
    split_once,
)

INV_E = 1.0 / math.e

# Frozen references (50-digit arithmetic).
F_AT_2 = 0.0191707469882738
F_PRIME_AT_2 = -0.0264805138932786
F_AT_1E6 = 4.1666708e-14
SPLIT_DH_06_04_QUARTER = 0.3245112497836531


def independent_gap(a: float, b: float, c: float, mu: float) -> float:
    """Textbook-form gap in nats, written without the stable rearrangement."""
    return (math.log(2.0) / math.log(b)) * math.log((mu - c) / a) - math.log(mu - 1.0) \
        + mu * math.log(1.0 - 1.0 / mu)


def test_split_once_shapes_and_identities():
    d = make_dist([0.6, 0.4])
    q = split_once(d, 0.25)
    assert q.n == 3
    assert math.isclose(q.probs[1], 0.3, rel_tol=1e-15)
    assert math.isclose(q.probs[2], 0.1, rel_tol=1e-15)
    dh = shannon_entropy(q) - shannon_entropy(d)
    assert math.isclose(dh, SPLIT_DH_06_04_QUARTER, rel_tol=1e-12)
    dge = guessing_entropy_exact(q) - guessing_entropy_exact(d)
    assert math.isclose(dge, 0.25 * 0.4, rel_tol=1e-12)


def test_split_once_alpha_domain():
    d = make_dist([0.6, 0.4])
    with pytest.raises(DistributionError):
        split_once(d, 0.0)
    with pytest.raises(DistributionError):
        split_once(d, 0.6)
    # alpha = 1/2 keeps the result descending
    q = split_once(d, 0.5)
    assert q.probs[-1] == q.probs[-2]


def test_refine_sequence_telescopes():
    d = make_dist([0.25] * 4)
    pn = d.min_prob
    for alpha in (0.5, 0.25):
        for k in (1, 3, 7):
            seq = refine_sequence(d, alpha, k)
            assert seq.depth == k
            assert seq.current.n == 4 + k
            scale = (1.0 - alpha ** k) / (1.0 - alpha)
            dh = shannon_entropy(seq.current) - shannon_entropy(d)
            from guessbound.dist import binary_entropy

            assert math.isclose(dh, pn * binary_entropy(alpha) * scale, abs_tol=1e-12)
            dge = guessing_entropy_exact(seq.current) - guessing_entropy_exact(d)
            assert math.isclose(dge, pn * alpha * scale, abs_tol=1e-12)


def test_refine_sequence_zero_depth_is_identity():
    d = make_dist([0.5, 0.5])
    seq = refine_sequence(d, 0.5, 0)
    assert seq.current.n == 2
    assert np.array_equal(seq.current.probs, d.probs)


def test_chain_bound_depth_zero_is_base():
    from guessbound.bounds import rioul_improved_bound

    d = make_dist([0.25] * 4)
    inp = EntropyInput.from_dist(d)
    v0 = chain_bound_at_depth(2.0, 0.25, 0.5, 0)
    assert math.isclose(v0, rioul_improved_bound(inp).value, rel_tol=1e-14)


def test_chain_bound_converges_to_sup_form():
    d = make_dist([0.25] * 4)
    inp = EntropyInput.from_dist(d)
    for alpha in (0.5, 0.3):
        target = rioul_chain_sup_bound(inp, alpha=alpha).value
        prev = -math.inf
        for k in range(41):
            v = chain_bound_at_depth(2.0, 0.25, alpha, k)
            assert v >= prev - 1e-12
            prev = v
        assert abs(prev - target) < 1e-6


def test_f_gap_frozen_values():
    gap = f_gap(2.0)
    assert math.isclose(gap.f_value, F_AT_2, rel_tol=1e-12)
    assert math.isclose(gap.f_prime, F_PRIME_AT_2, rel_tol=1e-12)
    assert math.isclose(gap.f_second, 1.0 / 18.0, rel_tol=1e-14)
    far = f_gap(1e6)
    # the two log1p terms cancel to ~2e-16 absolute, so only percent-level
    # relative agreement is meaningful this far out
    assert math.isclose(far.f_value, F_AT_1E6, rel_tol=1e-2)


def test_f_gap_signs_across_scales():
    # beyond mu ~ 1e7 the true value sinks under the float64 cancellation
    # floor, so the sign contract covers (1, 1e6]
    for mu in (1.0001, 1.01, 1.5, 3.0, 50.0, 1e4, 1e6):
        gap = f_gap(mu)
        assert gap.f_value > 0.0
        assert gap.f_prime < 0.0
        assert gap.f_second > 0.0


def test_f_gap_beyond_resolution_stays_near_zero():
    assert abs(f_gap(1e8).f_value) < 1e-15


def test_f_gap_domain():
    with pytest.raises(ValueError):
        f_gap(1.0)
    with pytest.raises(ValueError):
        f_gap(0.5)


def test_f_second_matches_derivative_difference_form():
    # d/dmu of f' gives 1/(mu(mu-1)) - 1/(mu-1/2)^2; at moderate mu this
    # direct form agrees with the factored one to high precision.
    for mu in (1.5, 2.0, 10.0, 100.0):
        direct = 1.0 / (mu * (mu - 1.0)) - 1.0 / (mu - 0.5) ** 2
        assert math.isclose(f_gap(mu).f_second, direct, rel_tol=1e-9)


def test_finite_diff_residuals_small():
    for mu in (1.5, 2.0, 10.0, 100.0):
        report = finite_diff_check(mu, 1e-4)
        assert abs(report.first_residual) < 1e-6
        assert abs(report.second_residual) < 1e-6


def test_finite_diff_validation():
    with pytest.raises(ValueError):
        finite_diff_check(2.0, 0.0)
    with pytest.raises(ValueError):
        finite_diff_check(1.0001, 1e-3)  # stencil would leave the domain


def test_log_mu_grid_properties():
    grid = log_mu_grid(1.001, 1e6, 101)
    assert grid.size == 101
    assert math.isclose(grid[0], 1.001, rel_tol=1e-12)
    assert math.isclose(grid[-1], 1e6, rel_tol=1e-12)
    assert np.all(np.diff(grid) > 0)
    with pytest.raises(ValueError):
        log_mu_grid(1.0, 10.0, 5)


def test_falsify_keeps_optimal_coefficients():
    grid = log_mu_grid(1.001, 1e6, 2000)
    report = falsify_coefficients(MasseyLikeCoefficients(INV_E, 2.0, 0.5), grid)
    assert report.mu_witness is None
    assert report.margin == 0.0


def test_falsify_finds_raised_constant():
    coeffs = MasseyLikeCoefficients(INV_E, 2.0, 0.55)
    report = falsify_coefficients(coeffs, np.array([2.0]))
    assert report.mu_witness == 2.0
    expected = -independent_gap(INV_E, 2.0, 0.55, 2.0)
    assert math.isclose(report.margin, expected, rel_tol=1e-12)
    assert report.margin > 0.01


def test_falsify_reports_smallest_witness():
    coeffs = MasseyLikeCoefficients(INV_E, 2.0, 0.55)
    grid = log_mu_grid(1.001, 1e6, 10_000)
    report = falsify_coefficients(coeffs, grid)
    assert report.mu_witness is not None
    # no earlier grid point violates
    earlier = grid[grid < report.mu_witness]
    for mu in earlier[-5:]:
        assert independent_gap(INV_E, 2.0, 0.55, float(mu)) >= 0.0


def test_falsify_raised_base_and_scale():
    grid = log_mu_grid(1.001, 1e6, 10_000)
    for a, b, c in ((0.4, 2.0, 0.5), (INV_E, 2.05, 0.5)):
        report = falsify_coefficients(MasseyLikeCoefficients(a, b, c), grid)
        assert report.mu_witness is not None
        assert report.margin > 0.0


def test_falsify_handles_nonpositive_argument():
    # mu - c <= 0 means the candidate bound exceeds every distribution there
    coeffs = MasseyLikeCoefficients(1.0, 2.0, 3.0)
    report = falsify_coefficients(coeffs, np.array([2.0]))
    assert report.mu_witness == 2.0
    assert report.margin == math.inf


def test_falsify_grid_validation():
    coeffs = MasseyLikeCoefficients(INV_E, 2.0, 0.5)
    with pytest.raises(ValueError):
        falsify_coefficients(coeffs, np.array([]))
    with pytest.raises(ValueError):
        falsify_coefficients(coeffs, np.array([0.5, 2.0]))


def test_random_dist_samplers_and_determinism():
    for sampler in SAMPLERS:
        a = random_dist(sampler, 64, seed=5)
        b = random_dist(sampler, 64, seed=5)
        assert np.array_equal(a.probs, b.probs)
        c = random_dist(sampler, 64, seed=6)
        assert not np.array_equal(a.probs, c.probs)
        assert a.probs[-1] > 0.0


def test_random_dist_point_support():
    d = random_dist("flat", 1, seed=0)
    assert d.n == 1
    assert d.probs[0] == 1.0


def test_random_dist_validation():
    with pytest.raises(ValueError):
        random_dist("unknown", 8, seed=0)
    with pytest.raises(ValueError):
        random_dist("flat", 0, seed=0)


def test_spiky_sampler_has_heavy_head():
    d = random_dist("spiky", 128, seed=11)
    assert d.probs[0] >= 0.5
