"""Front-end subcommands, exit codes, and CSV round-trips."""

import contextlib
import io
import math

import pytest

from guessbound.cli import main
from guessbound.csvio import (
    curve_round_trip_equal,
    read_bound_results,
    read_curve_csv,
    read_stats_csv,
)
from guessbound.dist import load_prob_csv


def write_uniform(path, n):
    path.write_text("".join(f"{1.0 / n!r}\n" for _ in range(n)))


def run_cli(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def test_bounds_uniform256(tmp_path):
    src = tmp_path / "u256.csv"
    write_uniform(src, 256)
    out = tmp_path / "bounds.csv"
    code, _ = run_cli("bounds", str(src), "--out", str(out))
    assert code == 0
    with open(out, encoding="utf-8") as fp:
        results = read_bound_results(fp)
    by_method = {r.method: r for r in results}
    assert by_method["massey"].value == 65.0
    assert by_method["rioul_chain_sup"].value >= 2.330998  # all bounds beat the printed floor
    assert len(results) == 8


def test_bounds_uniform4_floor(tmp_path):
    src = tmp_path / "u4.csv"
    write_uniform(src, 4)
    out = tmp_path / "bounds.csv"
    assert run_cli("bounds", str(src), "--out", str(out))[0] == 0
    with open(out, encoding="utf-8") as fp:
        by_method = {r.method: r for r in read_bound_results(fp)}
    assert by_method["rioul_chain_sup"].value >= 2.330998
    assert by_method["rioul_chain_sup"].value <= 2.5


def test_bounds_method_subset(tmp_path):
    src = tmp_path / "u4.csv"
    write_uniform(src, 4)
    out = tmp_path / "bounds.csv"
    code, _ = run_cli("bounds", str(src), "--methods", "massey,rioul", "--out", str(out))
    assert code == 0
    with open(out, encoding="utf-8") as fp:
        assert [r.method for r in read_bound_results(fp)] == ["massey", "rioul"]


def test_bounds_round_trip_exact(tmp_path):
    src = tmp_path / "u4.csv"
    write_uniform(src, 4)
    out = tmp_path / "bounds.csv"
    run_cli("bounds", str(src), "--out", str(out))
    with open(out, encoding="utf-8") as fp:
        first = read_bound_results(fp)
    # a second serialization pass reproduces identical floats
    from guessbound.csvio import write_bound_results

    buf = io.StringIO()
    write_bound_results(buf, first)
    buf.seek(0)
    second = read_bound_results(buf)
    assert first == second


def test_bounds_all_zero_file_is_data_error(tmp_path):
    src = tmp_path / "zeros.csv"
    src.write_text("0\n0\n0\n")
    code, _ = run_cli("bounds", str(src))
    assert code == 3


def test_bounds_unparseable_file_is_data_error(tmp_path):
    src = tmp_path / "junk.csv"
    src.write_text("0.5\nhello\n")
    assert run_cli("bounds", str(src))[0] == 3


def test_bounds_unknown_method_is_usage_error(tmp_path):
    src = tmp_path / "u4.csv"
    write_uniform(src, 4)
    with pytest.raises(SystemExit) as exc:
        main(["bounds", str(src), "--methods", "bogus"])
    assert exc.value.code == 2


def test_combine_two_bytes(tmp_path):
    src = tmp_path / "u256.csv"
    write_uniform(src, 256)
    out = tmp_path / "stats.csv"
    prod_path = tmp_path / "prod.csv"
    code, _ = run_cli(
        "combine", str(src), str(src), "--out", str(out), "--materialized-out", str(prod_path)
    )
    assert code == 0
    text = out.read_text()
    assert "# materialized=true" in text
    assert "# exact_ge=32768.5" in text
    with open(out, encoding="utf-8") as fp:
        stats = read_stats_csv(fp)
    assert stats.entropy_bits == 16.0
    prod = load_prob_csv(str(prod_path))
    assert prod.n == 65536


def test_combine_sixteen_bytes_stats_only(tmp_path, capsys):
    src = tmp_path / "u256.csv"
    write_uniform(src, 256)
    out = tmp_path / "stats.csv"
    code, _ = run_cli("combine", *([str(src)] * 16), "--out", str(out))
    assert code == 0
    err = capsys.readouterr().err
    assert "statistics only" in err
    text = out.read_text()
    assert "# materialized=false" in text
    assert "exact_ge" not in text
    with open(out, encoding="utf-8") as fp:
        stats = read_stats_csv(fp)
    assert stats.entropy_bits == 128.0
    assert stats.factor_count == 16


def test_simulate_writes_parseable_curve(tmp_path):
    out = tmp_path / "curve.csv"
    code, _ = run_cli(
        "simulate", "--seed", "7", "--sigma", "2.5", "--traces", "1:9:4",
        "--experiments", "3", "--out", str(out),
    )
    assert code == 0
    with open(out, encoding="utf-8") as fp:
        curve = read_curve_csv(fp)
    assert curve.trace_counts == [1, 5, 9]
    assert curve.metadata["seed"] == "7"
    assert curve.metadata["experiments"] == "3"
    assert len(curve.rows[0].bounds) == 8


def test_simulate_round_trip_within_tolerance(tmp_path):
    from guessbound.sca import LeakageParams, run_ge_experiment

    out = tmp_path / "curve.csv"
    run_cli(
        "simulate", "--seed", "7", "--sigma", "2.5", "--traces", "1:9:4",
        "--experiments", "3", "--out", str(out),
    )
    with open(out, encoding="utf-8") as fp:
        parsed = read_curve_csv(fp)
    direct = run_ge_experiment(
        LeakageParams(2.5, 42, rng_seed=7), [1, 5, 9], n_experiments=3
    )
    assert curve_round_trip_equal(parsed, direct, tol=1e-12)


def test_simulate_deterministic_files(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ["simulate", "--seed", "3", "--sigma", "2", "--traces", "1,3", "--experiments", "2"]
    run_cli(*args, "--out", str(a))
    run_cli(*args, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_simulate_merges_external_column(tmp_path):
    ext = tmp_path / "ext.csv"
    ext.write_text("n_traces,ches17_log2\n1,6.5\n3,5.5\n")
    out = tmp_path / "curve.csv"
    code, _ = run_cli(
        "simulate", "--seed", "3", "--sigma", "2", "--traces", "1,2,3",
        "--experiments", "2", "--ches17-csv", str(ext), "--out", str(out),
    )
    assert code == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    assert header[-1] == "ches17_log2"
    first_row = lines[1].split(",")
    assert first_row[-1] == "6.5"
    second_row = lines[2].split(",")
    assert second_row[-1] == ""  # no external value at n_traces=2


def test_simulate_emits_runnable_plot_script(tmp_path):
    out = tmp_path / "curve.csv"
    script = tmp_path / "plot.py"
    code, _ = run_cli(
        "simulate", "--seed", "3", "--sigma", "2", "--traces", "1,2",
        "--experiments", "1", "--out", str(out), "--plot-script", str(script),
    )
    assert code == 0
    source = script.read_text()
    compile(source, str(script), "exec")
    assert str(out) in source


def test_simulate_bad_schedule_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--traces", "9:1:1"])
    assert exc.value.code == 2


def test_verify_default_battery(tmp_path):
    out = tmp_path / "report.csv"
    code, _ = run_cli("verify", "--corpus-size", "40", "--mu-points", "2000", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "claim,status,witness,margin"
    claims = {l.split(",")[0]: l.split(",")[1] for l in lines[1:]}
    assert claims["falsify_optimal_coefficients"] == "pass"
    assert claims["corpus_bound_validity"] == "pass"
    assert all(status == "pass" for status in claims.values())


def test_verify_expected_falsification(tmp_path):
    out = tmp_path / "report.csv"
    code, _ = run_cli("verify", "--falsify", "0.367879441171442,2,0.6", "--out", str(out))
    assert code == 0
    text = out.read_text()
    assert "expected_falsification,pass" in text
    assert "mu=" in text


def test_verify_expected_falsification_fails_on_valid_coeffs(tmp_path):
    out = tmp_path / "report.csv"
    code, _ = run_cli("verify", "--falsify", "0.36787944117144233,2,0.5", "--out", str(out))
    assert code == 4
    assert "expected_falsification,fail" in out.read_text()


def test_verify_mu_grid_below_one_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--mu-min", "0.5"])
    assert exc.value.code == 2


def test_verify_report_margins_parse(tmp_path):
    out = tmp_path / "report.csv"
    run_cli("verify", "--corpus-size", "10", "--mu-points", "500", "--out", str(out))
    for line in out.read_text().splitlines()[1:]:
        margin = line.split(",")[3]
        if margin:
            float(margin)  # well-formed full-precision numbers


def test_stdout_default_output(tmp_path):
    src = tmp_path / "u4.csv"
    write_uniform(src, 4)
    code, text = run_cli("bounds", str(src))
    assert code == 0
    assert text.startswith("method,value,value_log2_bits")
    assert math.isclose(
        float(text.splitlines()[1].split(",")[1]), 2.0, rel_tol=1e-15
    )
