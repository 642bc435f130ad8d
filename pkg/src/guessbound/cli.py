"""Command-line front end for bound evaluation, combination, simulation, and verification.

Exit codes: 0 on success, 2 for usage errors (argparse), 3 for parse or data
errors, 4 when a verification claim fails.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys

from . import bounds as gb_bounds
from .csvio import (
    CsvFormatError,
    format_float,
    read_external_bound_column,
    write_bound_results,
    write_curve_csv,
    write_dist_csv,
)
from .dist import (
    DistributionError,
    combine_materialize,
    combine_stats,
    guessing_entropy_exact,
    load_prob_csv,
    make_dist,
    shannon_entropy,
)
from .oracle import (
    chain_bound_at_depth,
    f_gap,
    falsify_coefficients,
    finite_diff_check,
    log_mu_grid,
    random_dist,
    SAMPLERS,
)
from .sca import DEFAULT_MATERIALIZE_CAP, LeakageParams, run_ge_experiment

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_VERIFY = 4

_FD_MUS = (1.5, 2.0, 10.0, 100.0)
_FD_STEP = 1e-4
_FD_TOL = 1e-6
_F_REL_TOL = 1e-9
_REFINE_DEPTH = 40
_REFINE_TOL = 1e-6
_VALIDITY_SLACK = 1e-9


def _parse_schedule(text: str) -> list[int]:
    """Trace counts from ``a:b:step`` (inclusive), ``a:b``, or a comma list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                start, stop, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                start, stop, step = parts
            else:
                raise ValueError
            if start < 1 or stop < start or step < 1:
                raise ValueError
            counts = list(range(start, stop + 1, step))
        else:
            counts = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad trace schedule {text!r}: use a:b:step, a:b, or c1,c2,..."
        ) from None
    if not counts or counts[0] < 1 or any(b <= a for a, b in zip(counts, counts[1:])):
        raise argparse.ArgumentTypeError(
            f"trace schedule must be strictly increasing positive counts, got {text!r}"
        )
    return counts


def _parse_methods(text: str) -> list[str]:
    names = [p.strip() for p in text.split(",") if p.strip()]
    unknown = [m for m in names if m not in gb_bounds.ALL_METHODS]
    if unknown or not names:
        known = ", ".join(gb_bounds.ALL_METHODS)
        raise argparse.ArgumentTypeError(
            f"unknown method(s) {', '.join(unknown) or '<none>'}; choose from: {known}"
        )
    return names


def _parse_coeffs(text: str) -> gb_bounds.MasseyLikeCoefficients:
    try:
        a, b, c = (float(p) for p in text.split(","))
        return gb_bounds.MasseyLikeCoefficients(a=a, b=b, c=c)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad coefficients {text!r}: {exc}") from None


def _mu_min(text: str) -> float:
    value = float(text)
    if not value > 1.0:
        raise argparse.ArgumentTypeError(f"--mu-min must be > 1, got {text!r}")
    return value


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            yield fp


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guessbound",
        description="Guessing-entropy bounds for probability lists, with a "
        "side-channel simulation and verification harness.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_bounds = sub.add_parser("bounds", help="evaluate every bound on a probability-list CSV")
    p_bounds.add_argument("input", help="CSV file, one probability per line")
    p_bounds.add_argument("--methods", type=_parse_methods, default=None,
                          help="comma-separated subset of methods")
    p_bounds.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p_bounds.set_defaults(func=cmd_bounds)

    p_combine = sub.add_parser("combine", help="combine independent probability lists")
    p_combine.add_argument("inputs", nargs="+", help="probability-list CSV files")
    p_combine.add_argument("--out", default=None, help="stats CSV path (default stdout)")
    p_combine.add_argument("--materialized-out", default=None,
                           help="write the materialized product distribution here when it fits")
    p_combine.add_argument("--max-materialize-support", type=int, default=DEFAULT_MATERIALIZE_CAP,
                           help="largest product support to materialize (default %(default)s)")
    p_combine.set_defaults(func=cmd_combine)

    p_sim = sub.add_parser("simulate", help="run template-attack experiments, emit a bound curve")
    p_sim.add_argument("--seed", type=int, default=12345, help="master seed (default %(default)s)")
    p_sim.add_argument("--sigma", type=float, default=3.0,
                       help="leakage noise standard deviation (default %(default)s)")
    p_sim.add_argument("--traces", type=_parse_schedule, default=None,
                       help="attack-trace schedule a:b:step or comma list (default 1:10:1)")
    p_sim.add_argument("--experiments", type=int, default=100,
                       help="experiments to average (default %(default)s)")
    p_sim.add_argument("--bytes", type=int, default=1, dest="n_bytes",
                       help="independent key bytes to combine (default %(default)s)")
    p_sim.add_argument("--key-byte", type=int, default=42,
                       help="target key byte for byte 0 (default %(default)s)")
    p_sim.add_argument("--profiling-traces", type=int, default=10_000,
                       help="profiling traces per byte (default %(default)s)")
    p_sim.add_argument("--max-materialize-support", type=int, default=DEFAULT_MATERIALIZE_CAP,
                       help="largest combined support evaluated exactly (default %(default)s)")
    p_sim.add_argument("--methods", type=_parse_methods, default=None,
                       help="comma-separated subset of methods")
    p_sim.add_argument("--ches17-csv", default=None,
                       help="two-column CSV (n_traces, log2 bits) merged as an extra curve column")
    p_sim.add_argument("--plot-script", default=None,
                       help="also write a standalone matplotlib script to this path")
    p_sim.add_argument("--out", default=None, help="curve CSV path (default stdout)")
    p_sim.set_defaults(func=cmd_simulate)

    p_verify = sub.add_parser("verify", help="run the verification claim battery")
    p_verify.add_argument("--seed", type=int, default=1234, help="corpus seed (default %(default)s)")
    p_verify.add_argument("--mu-min", type=_mu_min, default=1.001,
                          help="lower end of the mu grid, must be > 1 (default %(default)s)")
    p_verify.add_argument("--mu-max", type=float, default=1e6,
                          help="upper end of the mu grid (default %(default)s)")
    p_verify.add_argument("--mu-points", type=int, default=10_000,
                          help="falsification grid size (default %(default)s)")
    p_verify.add_argument("--corpus-size", type=int, default=500,
                          help="random distributions for the validity claim (default %(default)s)")
    p_verify.add_argument("--falsify", type=_parse_coeffs, default=None, metavar="A,B,C",
                          help="expect these Massey-like coefficients to be falsified "
                          "and report the witness")
    p_verify.add_argument("--out", default=None, help="report CSV path (default stdout)")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def cmd_bounds(args) -> int:
    dist = load_prob_csv(args.input)
    inp = gb_bounds.EntropyInput.from_dist(dist)
    results = gb_bounds.evaluate_all(inp, methods=args.methods)
    with _open_out(args.out) as fp:
        write_bound_results(fp, results)
    return EXIT_OK


def cmd_combine(args) -> int:
    factors = [load_prob_csv(path) for path in args.inputs]
    stats = combine_stats(factors)
    support = 1
    for d in factors:
        support *= d.n
    materialized = support <= args.max_materialize_support
    extra: list[str] = [f"# materialized={'true' if materialized else 'false'}"]
    product = None
    if materialized:
        product = factors[0] if len(factors) == 1 else combine_materialize(
            factors, args.max_materialize_support
        )
        exact = guessing_entropy_exact(product)
        extra.append(f"# exact_ge={format_float(exact)}")
        extra.append(f"# exact_ge_log2={format_float(math.log2(exact))}")
    else:
        print(
            f"product support {support} exceeds --max-materialize-support "
            f"{args.max_materialize_support}; emitting statistics only",
            file=sys.stderr,
        )
    with _open_out(args.out) as fp:
        for line in extra:
            fp.write(line + "\n")
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["entropy_bits", "log2_min_prob", "log2_support", "factor_count"])
        writer.writerow([
            format_float(stats.entropy_bits),
            format_float(stats.log2_min_prob),
            format_float(stats.log2_support),
            str(stats.factor_count),
        ])
    if product is not None and args.materialized_out:
        with open(args.materialized_out, "w", encoding="utf-8") as fp:
            write_dist_csv(fp, product)
    return EXIT_OK


_PLOT_SCRIPT = '''\
#!/usr/bin/env python3
"""Plot a guessing-entropy curve CSV (pass the CSV path as the only argument)."""
import csv
import sys

path = sys.argv[1] if len(sys.argv) > 1 else {default_path!r}
rows = []
with open(path, encoding="utf-8") as fp:
    for record in csv.reader(fp):
        if not record or record[0].startswith("#"):
            continue
        rows.append(record)
header, data = rows[0], rows[1:]
x = [int(r[0]) for r in data]
series = {{}}
for idx, name in enumerate(header):
    if name.endswith("_log2") or name == "log2_ge_exact":
        pts = [(xi, float(r[idx])) for xi, r in zip(x, data) if r[idx] != ""]
        if pts:
            series[name] = pts

import matplotlib.pyplot as plt

fig, ax = plt.subplots(figsize=(7, 4.5))
for name, pts in series.items():
    style = "k--" if name == "log2_ge_exact" else "-"
    ax.plot([p[0] for p in pts], [p[1] for p in pts], style, label=name)
ax.set_xlabel("attack traces")
ax.set_ylabel("log2 guessing entropy (bits)")
ax.legend(fontsize=8)
fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print(f"wrote {{out}}")
'''


def cmd_simulate(args) -> int:
    schedule = args.traces if args.traces is not None else list(range(1, 11))
    params = LeakageParams(noise_sigma=args.sigma, key_byte=args.key_byte, rng_seed=args.seed)
    curve = run_ge_experiment(
        params,
        schedule,
        n_experiments=args.experiments,
        n_bytes=args.n_bytes,
        profiling_traces=args.profiling_traces,
        max_materialize_support=args.max_materialize_support,
        methods=args.methods,
    )
    extra = None
    if args.ches17_csv is not None:
        with open(args.ches17_csv, encoding="utf-8", newline="") as fp:
            extra = read_external_bound_column(fp, default_name="ches17_log2")
    with _open_out(args.out) as fp:
        write_curve_csv(fp, curve, extra_column=extra)
    if args.plot_script is not None:
        default_path = args.out if args.out not in (None, "-") else "curve.csv"
        with open(args.plot_script, "w", encoding="utf-8") as fp:
            fp.write(_PLOT_SCRIPT.format(default_path=default_path))
    return EXIT_OK


def _claim(rows: list[dict], claim: str, ok: bool, witness: str = "", margin: float | None = None):
    rows.append({
        "claim": claim,
        "status": "pass" if ok else "fail",
        "witness": witness,
        "margin": format_float(margin),
    })


def _verify_f_suite(rows: list[dict], mu_min: float, mu_max: float) -> None:
    grid = log_mu_grid(mu_min, mu_max, 1000)
    bad_sign = None
    worst_rel = 0.0
    worst_mu = None
    for mu in grid:
        gap = f_gap(float(mu))
        if not (gap.f_value > 0.0 and gap.f_prime < 0.0):
            bad_sign = float(mu)
            break
        closed = 1.0 / (4.0 * mu * (mu - 1.0) * (mu - 0.5) ** 2)
        rel = abs(gap.f_second - closed) / closed
        if rel > worst_rel:
            worst_rel, worst_mu = rel, float(mu)
    _claim(rows, "f_sign_pattern", bad_sign is None,
           witness="" if bad_sign is None else f"mu={bad_sign!r}")
    _claim(rows, "f_second_closed_form", bad_sign is None and worst_rel <= _F_REL_TOL,
           witness="" if worst_mu is None else f"mu={worst_mu!r}", margin=worst_rel)

    worst_fd = 0.0
    worst_fd_mu = None
    for mu in _FD_MUS:
        report = finite_diff_check(mu, _FD_STEP)
        err = max(abs(report.first_residual), abs(report.second_residual))
        if err > worst_fd:
            worst_fd, worst_fd_mu = err, mu
    _claim(rows, "f_finite_differences", worst_fd <= _FD_TOL,
           witness="" if worst_fd_mu is None else f"mu={worst_fd_mu!r}", margin=worst_fd)


def _verify_falsify_battery(rows: list[dict], grid) -> None:
    inv_e = 1.0 / math.e
    cases = [
        ("falsify_optimal_coefficients", gb_bounds.MasseyLikeCoefficients(inv_e, 2.0, 0.5), False),
        ("falsify_raised_constant", gb_bounds.MasseyLikeCoefficients(inv_e, 2.0, 0.55), True),
        ("falsify_raised_scale", gb_bounds.MasseyLikeCoefficients(0.4, 2.0, 0.5), True),
        ("falsify_raised_base", gb_bounds.MasseyLikeCoefficients(inv_e, 2.05, 0.5), True),
    ]
    for claim, coeffs, expect_witness in cases:
        report = falsify_coefficients(coeffs, grid)
        found = report.mu_witness is not None
        _claim(rows, claim, found == expect_witness,
               witness="" if report.mu_witness is None else f"mu={report.mu_witness!r}",
               margin=report.margin)


def _verify_refinement(rows: list[dict], seed: int) -> None:
    dists = [make_dist([0.25, 0.25, 0.25, 0.25])]
    draw = 0
    while len(dists) < 3:
        d = random_dist("flat", 64, seed + draw)
        draw += 1
        if shannon_entropy(d) >= 1.0:
            dists.append(d)
    worst = 0.0
    witness = ""
    monotone = True
    for i, d in enumerate(dists):
        h = shannon_entropy(d)
        pn = d.min_prob
        inp = gb_bounds.EntropyInput.from_dist(d)
        for alpha in (0.5, 0.25):
            target = gb_bounds.rioul_chain_sup_bound(inp, alpha=alpha).value
            prev = -math.inf
            for depth in range(_REFINE_DEPTH + 1):
                value = chain_bound_at_depth(h, pn, alpha, depth)
                if value < prev - 1e-12:
                    monotone = False
                    witness = f"dist{i}:alpha={alpha}:k={depth}"
                prev = value
            gap = abs(prev - target)
            if gap > worst:
                worst = gap
                if gap > _REFINE_TOL:
                    witness = f"dist{i}:alpha={alpha}"
    _claim(rows, "refinement_monotone_convergent", monotone and worst <= _REFINE_TOL,
           witness=witness, margin=worst)


def _verify_corpus(rows: list[dict], seed: int, count: int) -> None:
    sizes = (2, 3, 8, 64, 257, 1024)
    worst = -math.inf
    witness = ""
    ok = True
    for i in range(count):
        sampler = SAMPLERS[i % len(SAMPLERS)]
        n = sizes[i % len(sizes)]
        d = random_dist(sampler, n, seed + i)
        exact = guessing_entropy_exact(d)
        inp = gb_bounds.EntropyInput.from_dist(d)
        for res in gb_bounds.evaluate_all(inp):
            if not res.applicable or res.value is None:
                continue
            violation = res.value - exact
            if violation > worst:
                worst = violation
                if violation > _VALIDITY_SLACK:
                    ok = False
                    witness = f"dist{i}:{res.method}"
    _claim(rows, "corpus_bound_validity", ok, witness=witness, margin=worst)


def cmd_verify(args) -> int:
    if args.mu_max <= args.mu_min:
        raise ValueError(f"--mu-max must exceed --mu-min, got {args.mu_max!r}")
    rows: list[dict] = []
    if args.falsify is not None:
        grid = log_mu_grid(args.mu_min, args.mu_max, args.mu_points)
        report = falsify_coefficients(args.falsify, grid)
        _claim(rows, "expected_falsification", report.mu_witness is not None,
               witness="" if report.mu_witness is None else f"mu={report.mu_witness!r}",
               margin=report.margin)
    else:
        _verify_f_suite(rows, args.mu_min, args.mu_max)
        grid = log_mu_grid(args.mu_min, args.mu_max, args.mu_points)
        _verify_falsify_battery(rows, grid)
        _verify_refinement(rows, args.seed)
        _verify_corpus(rows, args.seed, args.corpus_size)
    with _open_out(args.out) as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["claim", "status", "witness", "margin"])
        for row in rows:
            writer.writerow([row["claim"], row["status"], row["witness"], row["margin"]])
    failed = [row for row in rows if row["status"] != "pass"]
    if failed:
        print(f"{len(failed)} claim(s) failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DistributionError, CsvFormatError, gb_bounds.BoundsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
