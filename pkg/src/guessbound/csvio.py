"""CSV serialization for distributions, bound tables, and guessing-entropy curves.

Every float is printed with 17 significant digits, so written files re-parse
to bit-identical values. Curve files carry their run configuration as
``# key=value`` comment lines ahead of the header row.
"""

from __future__ import annotations

import csv
import math
from typing import Iterable, TextIO

from .bounds import BoundResult
from .dist import GEBoundCell, GECurve, GECurveRow, ProbDist, ProductDistStats

__all__ = [
    "CsvFormatError",
    "format_float",
    "write_dist_csv",
    "write_bound_results",
    "read_bound_results",
    "write_stats_csv",
    "read_stats_csv",
    "write_curve_csv",
    "read_curve_csv",
    "read_external_bound_column",
]

_EXACT_COL = "log2_ge_exact"
_BASE_COLS = ("n_traces", "entropy_bits", "log2_min_prob", _EXACT_COL)


class CsvFormatError(ValueError):
    """A CSV file does not match the expected layout."""


def format_float(x: float | None) -> str:
    """17-significant-digit text, lossless on round-trip; None becomes blank."""
    if x is None:
        return ""
    return format(x, ".17g")


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise CsvFormatError(f"{where}: expected a real number, got {text!r}") from None


def _parse_optional_float(text: str, where: str) -> float | None:
    if text == "":
        return None
    return _parse_float(text, where)


def _parse_bool(text: str, where: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1"):
        return True
    if lowered in ("false", "0"):
        return False
    raise CsvFormatError(f"{where}: expected true/false, got {text!r}")


def write_dist_csv(fp: TextIO, dist: ProbDist) -> None:
    """One probability per line, descending; parses back via load_prob_csv."""
    for p in dist.probs:
        fp.write(format_float(float(p)) + "\n")


def write_bound_results(fp: TextIO, results: Iterable[BoundResult]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["method", "value", "value_log2_bits", "applicable", "alpha_star", "condition_note"])
    for res in results:
        writer.writerow([
            res.method,
            format_float(res.value),
            format_float(res.value_log2_bits),
            "true" if res.applicable else "false",
            format_float(res.alpha_star),
            res.condition_note,
        ])


def read_bound_results(fp: TextIO) -> list[BoundResult]:
    reader = csv.reader(fp)
    header = next(reader, None)
    expected = ["method", "value", "value_log2_bits", "applicable", "alpha_star", "condition_note"]
    if header != expected:
        raise CsvFormatError(f"bound table header mismatch: {header!r}")
    results = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(expected):
            raise CsvFormatError(f"line {lineno}: expected {len(expected)} fields, got {len(row)}")
        where = f"line {lineno}"
        results.append(
            BoundResult(
                method=row[0],
                value=_parse_optional_float(row[1], where),
                value_log2_bits=_parse_float(row[2], where),
                applicable=_parse_bool(row[3], where),
                condition_note=row[5],
                alpha_star=_parse_optional_float(row[4], where),
            )
        )
    return results


def write_stats_csv(fp: TextIO, stats: ProductDistStats) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["entropy_bits", "log2_min_prob", "log2_support", "factor_count"])
    writer.writerow([
        format_float(stats.entropy_bits),
        format_float(stats.log2_min_prob),
        format_float(stats.log2_support),
        str(stats.factor_count),
    ])


def read_stats_csv(fp: TextIO) -> ProductDistStats:
    rows = [
        row for row in csv.reader(fp) if row and not row[0].startswith("#")
    ]
    header = rows[0] if rows else None
    if header != ["entropy_bits", "log2_min_prob", "log2_support", "factor_count"]:
        raise CsvFormatError(f"stats header mismatch: {header!r}")
    row = rows[1] if len(rows) > 1 else None
    if row is None or len(row) != 4:
        raise CsvFormatError("stats file needs exactly one data row")
    return ProductDistStats(
        entropy_bits=_parse_float(row[0], "stats row"),
        log2_min_prob=_parse_float(row[1], "stats row"),
        log2_support=_parse_float(row[2], "stats row"),
        factor_count=int(row[3]),
    )


def _curve_methods(curve: GECurve) -> list[str]:
    if not curve.rows:
        raise ValueError("curve has no rows")
    methods = list(curve.rows[0].bounds)
    for row in curve.rows:
        if list(row.bounds) != methods:
            raise ValueError("curve rows disagree on bound methods")
    return methods


def write_curve_csv(
    fp: TextIO,
    curve: GECurve,
    extra_column: tuple[str, dict[int, float]] | None = None,
) -> None:
    """Curve rows with a ``# key=value`` metadata prologue.

    ``extra_column`` attaches an externally computed per-trace-count column
    (name, {n_traces: value}); counts missing from the mapping are left blank.
    """
    methods = _curve_methods(curve)
    for key in sorted(curve.metadata):
        fp.write(f"# {key}={curve.metadata[key]}\n")
    header = list(_BASE_COLS)
    for m in methods:
        header.append(f"{m}_log2")
        header.append(f"{m}_applicable")
    if extra_column is not None:
        header.append(extra_column[0])
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(header)
    for row in curve.rows:
        record = [
            str(row.n_traces),
            format_float(row.entropy_bits),
            format_float(row.log2_min_prob),
            format_float(row.exact_ge_log2),
        ]
        for m in methods:
            cell = row.bounds[m]
            record.append(format_float(cell.log2_bits))
            record.append("true" if cell.applicable else "false")
        if extra_column is not None:
            record.append(format_float(extra_column[1].get(row.n_traces)))
        writer.writerow(record)


def read_curve_csv(fp: TextIO) -> GECurve:
    """Inverse of write_curve_csv; ignores columns it does not recognize."""
    metadata: dict[str, str] = {}
    header: list[str] | None = None
    reader = csv.reader(fp)
    rows: list[GECurveRow] = []
    methods: list[str] = []
    col_index: dict[str, int] = {}
    for lineno, row in enumerate(reader, start=1):
        if not row:
            continue
        if row[0].startswith("#"):
            text = row[0].lstrip("#").strip()
            if "=" in text:
                key, _, value = text.partition("=")
                metadata[key.strip()] = value.strip()
            continue
        if header is None:
            header = row
            if list(header[:4]) != list(_BASE_COLS):
                raise CsvFormatError(f"curve header must start with {_BASE_COLS}, got {header[:4]}")
            col_index = {name: i for i, name in enumerate(header)}
            methods = [
                name[: -len("_log2")]
                for name in header
                if name.endswith("_log2") and f"{name[: -len('_log2')]}_applicable" in col_index
            ]
            continue
        if len(row) != len(header):
            raise CsvFormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        where = f"line {lineno}"
        bounds = {
            m: GEBoundCell(
                log2_bits=_parse_float(row[col_index[f"{m}_log2"]], where),
                applicable=_parse_bool(row[col_index[f"{m}_applicable"]], where),
            )
            for m in methods
        }
        rows.append(
            GECurveRow(
                n_traces=int(row[0]),
                entropy_bits=_parse_float(row[1], where),
                log2_min_prob=_parse_float(row[2], where),
                exact_ge_log2=_parse_optional_float(row[3], where),
                bounds=bounds,
            )
        )
    if header is None:
        raise CsvFormatError("curve file has no header row")
    return GECurve(rows=rows, metadata=metadata)


def read_external_bound_column(fp: TextIO, default_name: str = "external_log2") -> tuple[str, dict[int, float]]:
    """Read a two-column (n_traces, value) CSV for merging into curve output.

    The second header name labels the merged column; a headerless file gets
    ``default_name``. Values are taken to be log2 bits.
    """
    reader = csv.reader(fp)
    name = default_name
    mapping: dict[int, float] = {}
    first = True
    for lineno, row in enumerate(reader, start=1):
        if not row or row[0].startswith("#"):
            continue
        if len(row) < 2:
            raise CsvFormatError(f"line {lineno}: expected two columns (n_traces, value)")
        if first:
            first = False
            try:
                int(row[0])
            except ValueError:
                if row[1].strip():
                    name = row[1].strip()
                continue
        mapping[int(row[0])] = _parse_float(row[1], f"line {lineno}")
    if not mapping:
        raise CsvFormatError("external bound file has no data rows")
    return name, mapping


def curve_round_trip_equal(a: GECurve, b: GECurve, tol: float = 1e-12) -> bool:
    """True when two curves agree within tol on every numeric field."""

    def close(x: float | None, y: float | None) -> bool:
        if x is None or y is None:
            return x is y
        if math.isinf(x) or math.isinf(y):
            return x == y
        return math.isclose(x, y, rel_tol=tol, abs_tol=tol)

    if len(a.rows) != len(b.rows):
        return False
    for ra, rb in zip(a.rows, b.rows):
        if ra.n_traces != rb.n_traces:
            return False
        if not (
            close(ra.entropy_bits, rb.entropy_bits)
            and close(ra.log2_min_prob, rb.log2_min_prob)
            and close(ra.exact_ge_log2, rb.exact_ge_log2)
        ):
            return False
        if set(ra.bounds) != set(rb.bounds):
            return False
        for m, cell in ra.bounds.items():
            other = rb.bounds[m]
            if cell.applicable != other.applicable or not close(cell.log2_bits, other.log2_bits):
                return False
    return True
