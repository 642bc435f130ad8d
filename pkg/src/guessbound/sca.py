"""Simulated side-channel traces, template attacks, and bound-curve experiments.

The leakage model is the univariate Hamming weight of the AES S-box output
plus additive Gaussian noise. A template attack profiles the nine
Hamming-weight classes (per-class means, one pooled variance) and turns attack
traces into a posterior probability list over the 256 key-byte candidates;
those lists are exactly what the guessing-entropy bounds consume.

Multi-byte experiments combine per-byte posteriors: materialized (exact
guessing entropy available) while the product support stays within the cap,
statistics-only (bounds only) beyond it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds as gb_bounds
from .dist import (
    GEBoundCell,
    GECurve,
    GECurveRow,
    ProbDist,
    combine_materialize,
    combine_stats,
    guessing_entropy_exact,
    shannon_entropy,
)
from .seeding import derive_seed, keyed_rng

__all__ = [
    "AES_SBOX",
    "LeakageParams",
    "TraceSet",
    "TemplateSet",
    "TemplateError",
    "aes_sbox",
    "hamming_weight",
    "simulate_traces",
    "build_templates",
    "attack_posteriors",
    "run_ge_experiment",
    "VARIANCE_FLOOR",
    "DEFAULT_MATERIALIZE_CAP",
]

# FIPS-197 S-box.
AES_SBOX = np.array([
    0x63, 0x7C, 0x77, 0x7B, 0xF2, 0x6B, 0x6F, 0xC5, 0x30, 0x01, 0x67, 0x2B, 0xFE, 0xD7, 0xAB, 0x76,
    0xCA, 0x82, 0xC9, 0x7D, 0xFA, 0x59, 0x47, 0xF0, 0xAD, 0xD4, 0xA2, 0xAF, 0x9C, 0xA4, 0x72, 0xC0,
    0xB7, 0xFD, 0x93, 0x26, 0x36, 0x3F, 0xF7, 0xCC, 0x34, 0xA5, 0xE5, 0xF1, 0x71, 0xD8, 0x31, 0x15,
    0x04, 0xC7, 0x23, 0xC3, 0x18, 0x96, 0x05, 0x9A, 0x07, 0x12, 0x80, 0xE2, 0xEB, 0x27, 0xB2, 0x75,
    0x09, 0x83, 0x2C, 0x1A, 0x1B, 0x6E, 0x5A, 0xA0, 0x52, 0x3B, 0xD6, 0xB3, 0x29, 0xE3, 0x2F, 0x84,
    0x53, 0xD1, 0x00, 0xED, 0x20, 0xFC, 0xB1, 0x5B, 0x6A, 0xCB, 0xBE, 0x39, 0x4A, 0x4C, 0x58, 0xCF,
    0xD0, 0xEF, 0xAA, 0xFB, 0x43, 0x4D, 0x33, 0x85, 0x45, 0xF9, 0x02, 0x7F, 0x50, 0x3C, 0x9F, 0xA8,
    0x51, 0xA3, 0x40, 0x8F, 0x92, 0x9D, 0x38, 0xF5, 0xBC, 0xB6, 0xDA, 0x21, 0x10, 0xFF, 0xF3, 0xD2,
    0xCD, 0x0C, 0x13, 0xEC, 0x5F, 0x97, 0x44, 0x17, 0xC4, 0xA7, 0x7E, 0x3D, 0x64, 0x5D, 0x19, 0x73,
    0x60, 0x81, 0x4F, 0xDC, 0x22, 0x2A, 0x90, 0x88, 0x46, 0xEE, 0xB8, 0x14, 0xDE, 0x5E, 0x0B, 0xDB,
    0xE0, 0x32, 0x3A, 0x0A, 0x49, 0x06, 0x24, 0x5C, 0xC2, 0xD3, 0xAC, 0x62, 0x91, 0x95, 0xE4, 0x79,
    0xE7, 0xC8, 0x37, 0x6D, 0x8D, 0xD5, 0x4E, 0xA9, 0x6C, 0x56, 0xF4, 0xEA, 0x65, 0x7A, 0xAE, 0x08,
    0xBA, 0x78, 0x25, 0x2E, 0x1C, 0xA6, 0xB4, 0xC6, 0xE8, 0xDD, 0x74, 0x1F, 0x4B, 0xBD, 0x8B, 0x8A,
    0x70, 0x3E, 0xB5, 0x66, 0x48, 0x03, 0xF6, 0x0E, 0x61, 0x35, 0x57, 0xB9, 0x86, 0xC1, 0x1D, 0x9E,
    0xE1, 0xF8, 0x98, 0x11, 0x69, 0xD9, 0x8E, 0x94, 0x9B, 0x1E, 0x87, 0xE9, 0xCE, 0x55, 0x28, 0xDF,
    0x8C, 0xA1, 0x89, 0x0D, 0xBF, 0xE6, 0x42, 0x68, 0x41, 0x99, 0x2D, 0x0F, 0xB0, 0x54, 0xBB, 0x16,
], dtype=np.uint8)
AES_SBOX.setflags(write=False)

_HW8 = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(axis=1).astype(np.int64)
_HW8.setflags(write=False)

N_CLASSES = 9
VARIANCE_FLOOR = 1e-12
DEFAULT_MATERIALIZE_CAP = 2 ** 20
DEFAULT_PROFILING_TRACES = 10_000

_ROLE_KEYS = 0
_ROLE_PROFILING = 1
_ROLE_ATTACK = 2


class TemplateError(ValueError):
    """Profiling data cannot support a template set."""


def aes_sbox(x: int) -> int:
    """Standard AES S-box lookup."""
    if not 0 <= x <= 255:
        raise ValueError(f"S-box input must be a byte, got {x!r}")
    return int(AES_SBOX[x])


def hamming_weight(x: int) -> int:
    """Number of set bits of a byte."""
    if not 0 <= x <= 255:
        raise ValueError(f"expected a byte, got {x!r}")
    return int(_HW8[x])


@dataclass(frozen=True)
class LeakageParams:
    """Simulation parameters for one target key byte."""

    noise_sigma: float
    key_byte: int
    rng_seed: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma > 0.0):
            raise ValueError(f"noise_sigma must be finite and > 0, got {self.noise_sigma!r}")
        if not 0 <= self.key_byte <= 255:
            raise ValueError(f"key_byte must be a byte, got {self.key_byte!r}")


@dataclass(frozen=True, eq=False)
class TraceSet:
    """Plaintext bytes with one scalar leakage sample each."""

    plaintexts: np.ndarray
    leakages: np.ndarray

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(self.plaintexts, dtype=np.uint8)
        leaks = np.ascontiguousarray(self.leakages, dtype=np.float64)
        if pts.shape != leaks.shape or pts.ndim != 1:
            raise ValueError("plaintexts and leakages must be 1-D and the same length")
        pts.setflags(write=False)
        leaks.setflags(write=False)
        object.__setattr__(self, "plaintexts", pts)
        object.__setattr__(self, "leakages", leaks)

    @property
    def n_traces(self) -> int:
        return int(self.plaintexts.size)


@dataclass(frozen=True, eq=False)
class TemplateSet:
    """Per-class leakage means with a single pooled variance."""

    class_means: np.ndarray
    pooled_variance: float

    def __post_init__(self) -> None:
        means = np.ascontiguousarray(self.class_means, dtype=np.float64)
        if means.shape != (N_CLASSES,):
            raise ValueError(f"expected {N_CLASSES} class means, got shape {means.shape}")
        if not (math.isfinite(self.pooled_variance) and self.pooled_variance > 0.0):
            raise ValueError(f"pooled variance must be finite and > 0, got {self.pooled_variance!r}")
        means.setflags(write=False)
        object.__setattr__(self, "class_means", means)


def _hw_classes(plaintexts: np.ndarray, key_byte: int) -> np.ndarray:
    return _HW8[AES_SBOX[plaintexts ^ np.uint8(key_byte)]]


def simulate_traces(params: LeakageParams, n_traces: int) -> TraceSet:
    """Draw uniform plaintexts and their noisy Hamming-weight leakages.

    leakage = HW(sbox(plaintext XOR key_byte)) + N(0, noise_sigma^2);
    deterministic under the seed.
    """
    if n_traces < 1:
        raise ValueError(f"n_traces must be >= 1, got {n_traces!r}")
    rng = keyed_rng(params.rng_seed)
    plaintexts = rng.integers(0, 256, size=n_traces, dtype=np.uint8)
    hw = _hw_classes(plaintexts, params.key_byte).astype(np.float64)
    leakages = hw + rng.normal(0.0, params.noise_sigma, size=n_traces)
    return TraceSet(plaintexts, leakages)


def build_templates(profiling: TraceSet, true_key: int) -> TemplateSet:
    """Profile per-class means and a pooled variance from labeled traces.

    Sums go through math.fsum, which is exactly rounded, so the templates do
    not depend on trace order. The pooled variance is floored at
    ``VARIANCE_FLOOR`` to survive noiseless profiling data.
    """
    if not 0 <= true_key <= 255:
        raise ValueError(f"true_key must be a byte, got {true_key!r}")
    classes = _hw_classes(profiling.plaintexts, true_key)
    counts = np.bincount(classes, minlength=N_CLASSES)
    for cls in range(N_CLASSES):
        if counts[cls] < 2:
            raise TemplateError(
                f"Hamming-weight class {cls} observed {int(counts[cls])} times; need at least 2"
            )
    means = np.empty(N_CLASSES, dtype=np.float64)
    for cls in range(N_CLASSES):
        means[cls] = math.fsum(profiling.leakages[classes == cls]) / counts[cls]
    residuals = profiling.leakages - means[classes]
    pooled = math.fsum(residuals * residuals) / (profiling.n_traces - N_CLASSES)
    return TemplateSet(means, max(pooled, VARIANCE_FLOOR))


def _posterior_from_loglikes(loglikes: np.ndarray) -> tuple[ProbDist, np.ndarray]:
    """Normalize per-candidate log-likelihoods into a sorted posterior.

    Max-subtraction before exponentiation; candidates whose scaled
    likelihood underflows to zero are dropped (their count is surfaced on
    the ProbDist). Returns the posterior and the candidate indices in
    posterior order.
    """
    weights = np.exp(loglikes - loglikes.max())
    order = np.argsort(-weights, kind="stable")
    weights = weights[order]
    positive = weights > 0.0
    weights = weights[positive]
    candidates = order[positive].astype(np.int64)
    dist = ProbDist(
        weights / math.fsum(weights),
        dropped_zeros=int(loglikes.size - weights.size),
    )
    return dist, candidates


def _candidate_loglikes(templates: TemplateSet, attack: TraceSet) -> np.ndarray:
    """256 x n_traces matrix of per-trace Gaussian log-likelihoods."""
    classes = _HW8[AES_SBOX[attack.plaintexts[None, :] ^ np.arange(256, dtype=np.uint8)[:, None]]]
    mu = templates.class_means[classes]
    var = templates.pooled_variance
    const = -0.5 * math.log(2.0 * math.pi * var)
    return const - np.square(attack.leakages[None, :] - mu) / (2.0 * var)


def attack_posteriors(templates: TemplateSet, attack: TraceSet) -> tuple[ProbDist, np.ndarray]:
    """Posterior over the 256 key candidates given attack traces.

    Log-likelihoods are accumulated per candidate in the natural-log domain
    under a uniform key prior. Returns the posterior (descending) and the
    matching candidate-index map.
    """
    if attack.n_traces == 0:
        raise ValueError("attack set is empty")
    var = templates.pooled_variance
    if not (math.isfinite(var) and var > 0.0):
        raise ValueError(f"degenerate template variance: {var!r}")
    loglikes = _candidate_loglikes(templates, attack).sum(axis=1)
    return _posterior_from_loglikes(loglikes)


def _combine_posteriors(dists: list[ProbDist], cap: int):
    """Combine per-byte posteriors; returns (EntropyInput, exact_ge_log2, log2_min_prob)."""
    if len(dists) == 1:
        support = dists[0].n
    else:
        support = 1
        for d in dists:
            support *= d.n
    if support <= cap:
        combined = combine_materialize(dists, cap) if len(dists) > 1 else dists[0]
        inp = gb_bounds.EntropyInput.from_dist(combined)
        exact_log2 = math.log2(guessing_entropy_exact(combined))
        return inp, exact_log2, math.log2(combined.min_prob)
    stats = combine_stats(dists)
    return gb_bounds.EntropyInput.from_stats(stats), None, stats.log2_min_prob


def run_ge_experiment(
    params: LeakageParams,
    trace_schedule,
    n_experiments: int = 100,
    n_bytes: int = 1,
    *,
    profiling_traces: int = DEFAULT_PROFILING_TRACES,
    max_materialize_support: int = DEFAULT_MATERIALIZE_CAP,
    methods=None,
) -> GECurve:
    """Template-attack experiment: guessing entropy and every bound vs. trace count.

    For each experiment, every target byte gets its own profiling and attack
    trace sets (seeds derived from the master seed, the experiment index, the
    byte index, and the role). Per-byte posteriors are combined exactly while
    the product support fits ``max_materialize_support`` and via additive
    statistics beyond that, so the 16-byte case emits bounds but no exact
    guessing entropy. Exact values and bounds are averaged across experiments
    in the log2 domain; a bound is flagged applicable on a row only when it
    was applicable in every experiment.
    """
    schedule = [int(c) for c in trace_schedule]
    if not schedule or any(c < 1 for c in schedule):
        raise ValueError("trace schedule must hold positive counts")
    if any(b >= a for a, b in zip(schedule[1:], schedule)):
        raise ValueError("trace schedule must be strictly increasing")
    if n_experiments < 1:
        raise ValueError(f"n_experiments must be >= 1, got {n_experiments!r}")
    if n_bytes < 1:
        raise ValueError(f"n_bytes must be >= 1, got {n_bytes!r}")

    method_names = tuple(methods) if methods is not None else gb_bounds.ALL_METHODS
    n_counts = len(schedule)
    max_traces = schedule[-1]
    count_index = np.asarray(schedule, dtype=np.int64) - 1

    entropy_sum = np.zeros(n_counts)
    log2_min_sum = np.zeros(n_counts)
    ge_log2_sum = np.zeros(n_counts)
    ge_available = np.ones(n_counts, dtype=bool)
    bits_sum = {m: np.zeros(n_counts) for m in method_names}
    applicable_all = {m: np.ones(n_counts, dtype=bool) for m in method_names}

    for exp in range(n_experiments):
        key_rng = keyed_rng(params.rng_seed, exp, _ROLE_KEYS)
        keys = key_rng.integers(0, 256, size=n_bytes)
        keys[0] = params.key_byte

        # Cumulative per-candidate log-likelihoods let one attack set serve
        # every trace count in the schedule.
        per_byte: list[list[ProbDist]] = [[] for _ in range(n_counts)]
        for byte in range(n_bytes):
            key = int(keys[byte])
            prof_params = LeakageParams(
                params.noise_sigma, key, derive_seed(params.rng_seed, exp, byte, _ROLE_PROFILING)
            )
            profiling = simulate_traces(prof_params, profiling_traces)
            templates = build_templates(profiling, key)
            attack_params = LeakageParams(
                params.noise_sigma, key, derive_seed(params.rng_seed, exp, byte, _ROLE_ATTACK)
            )
            attack = simulate_traces(attack_params, max_traces)
            cumulative = np.cumsum(_candidate_loglikes(templates, attack), axis=1)
            for ci in range(n_counts):
                dist, _ = _posterior_from_loglikes(cumulative[:, count_index[ci]])
                per_byte[ci].append(dist)

        for ci in range(n_counts):
            inp, exact_log2, log2_min = _combine_posteriors(per_byte[ci], max_materialize_support)
            entropy_sum[ci] += inp.entropy_bits
            log2_min_sum[ci] += log2_min
            if exact_log2 is None:
                ge_available[ci] = False
            else:
                ge_log2_sum[ci] += exact_log2
            for res in gb_bounds.evaluate_all(inp, methods=method_names):
                bits_sum[res.method][ci] += res.value_log2_bits
                if not res.applicable:
                    applicable_all[res.method][ci] = False

    rows = []
    for ci, count in enumerate(schedule):
        cells = {
            m: GEBoundCell(
                log2_bits=bits_sum[m][ci] / n_experiments,
                applicable=bool(applicable_all[m][ci]),
            )
            for m in method_names
        }
        rows.append(
            GECurveRow(
                n_traces=count,
                entropy_bits=entropy_sum[ci] / n_experiments,
                log2_min_prob=log2_min_sum[ci] / n_experiments,
                exact_ge_log2=(ge_log2_sum[ci] / n_experiments) if ge_available[ci] else None,
                bounds=cells,
            )
        )
    metadata = {
        "seed": str(params.rng_seed),
        "sigma": repr(params.noise_sigma),
        "experiments": str(n_experiments),
        "bytes": str(n_bytes),
        "key_byte": str(params.key_byte),
        "profiling_traces": str(profiling_traces),
        "max_materialize_support": str(max_materialize_support),
        "averaging": "mean-of-log2-across-experiments",
    }
    return GECurve(rows=rows, metadata=metadata)
