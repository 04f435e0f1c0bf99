"""Serialization of reports to structured text and CSV.

The text format is a versioned ``key = value`` document with bracketed
sections; the CSV format is one row per regime x estimator x statistic.
All numbers are written with 12 significant digits, below the analytic
tolerances used in tests and above Monte Carlo noise.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .montecarlo import (
    DecompositionReport,
    RegimeReport,
    Table1Report,
    VarianceRatioSummary,
)

FORMAT_VERSION = 1
CSV_COLUMNS = ("regime", "estimator", "statistic", "value")


def fmt(value: float) -> str:
    """Format a number with 12 significant digits."""
    return f"{float(value):.12g}"


def fmt_vector(values: np.ndarray) -> str:
    return " ".join(fmt(v) for v in np.asarray(values).ravel())


def _header(kind: str) -> list[str]:
    return [f"format_version = {FORMAT_VERSION}", f"kind = {kind}"]


def _payload_lines(report: RegimeReport) -> list[str]:
    if report.conditioning_payload is None:
        return []
    name = "z" if report.regime == "conditional_on_z" else "epsilon"
    payload = np.asarray(report.conditioning_payload)
    if name == "z":
        text = " ".join(str(int(v)) for v in payload)
    else:
        text = fmt_vector(payload)
    return ["[conditioning_payload]", f"{name} = {text}"]


def regime_report_text(report: RegimeReport) -> str:
    lines = _header("regime_report")
    lines.append(f"regime = {report.regime}")
    lines.append(f"replications = {report.replications}")
    lines.append(f"exact = {str(report.exact).lower()}")
    for kind, summary in report.estimators.items():
        lines.append(f"[estimator {kind}]")
        lines.append(f"empirical_mean = {fmt(summary.empirical_mean)}")
        lines.append(f"empirical_variance = {fmt(summary.empirical_variance)}")
        lines.append(f"mc_se_mean = {fmt(summary.mc_se_mean)}")
        lines.append(f"mc_se_variance = {fmt(summary.mc_se_variance)}")
    if report.variance_gaps:
        lines.append("[variance_gaps]")
        for key, (gap, se) in report.variance_gaps.items():
            lines.append(f"{key} = {fmt(gap)}")
            lines.append(f"{key}_mc_se = {fmt(se)}")
    if report.analytic_reference:
        lines.append("[analytic_reference]")
        for key, value in report.analytic_reference.items():
            lines.append(f"{key} = {fmt(value)}")
    lines.extend(_payload_lines(report))
    return "\n".join(lines) + "\n"


def regime_report_rows(report: RegimeReport) -> list[tuple[str, str, str, str]]:
    """CSV rows: one per regime x estimator x statistic."""
    rows = []
    for kind, summary in report.estimators.items():
        rows.append((report.regime, kind, "empirical_mean", fmt(summary.empirical_mean)))
        rows.append(
            (report.regime, kind, "empirical_variance", fmt(summary.empirical_variance))
        )
        rows.append((report.regime, kind, "mc_se_mean", fmt(summary.mc_se_mean)))
        rows.append((report.regime, kind, "mc_se_variance", fmt(summary.mc_se_variance)))
    for key, (gap, se) in report.variance_gaps.items():
        rows.append((report.regime, key, "variance_gap", fmt(gap)))
        rows.append((report.regime, key, "variance_gap_mc_se", fmt(se)))
    for key, value in report.analytic_reference.items():
        rows.append((report.regime, "analytic", key, fmt(value)))
    return rows


def decomposition_text(report: DecompositionReport) -> str:
    lines = _header("decomposition_report")
    lines.append(f"estimator = {report.estimator}")
    lines.append(f"conditioning = {report.conditioning}")
    lines.append(f"r_outer = {report.r_outer}")
    lines.append(f"r_inner = {report.r_inner}")
    for name in (
        "outer_variance",
        "mean_inner_variance",
        "variance_of_inner_mean",
        "gap",
        "se_outer",
        "se_mean_inner",
        "se_variance_of_inner_mean",
        "se_gap",
    ):
        lines.append(f"{name} = {fmt(getattr(report, name))}")
    return "\n".join(lines) + "\n"


def decomposition_rows(report: DecompositionReport) -> list[tuple[str, str, str, str]]:
    regime = f"decomposition_{report.conditioning}"
    rows = []
    for name in (
        "outer_variance",
        "mean_inner_variance",
        "variance_of_inner_mean",
        "gap",
        "se_outer",
        "se_mean_inner",
        "se_variance_of_inner_mean",
        "se_gap",
    ):
        rows.append((regime, report.estimator, name, fmt(getattr(report, name))))
    return rows


def ratio_summary_text(summary: VarianceRatioSummary) -> str:
    lines = _header("estimated_variance_comparison")
    lines.append(f"replications = {summary.replications}")
    for name in ("median", "q1", "q3", "fraction_below_one"):
        lines.append(f"{name} = {fmt(getattr(summary, name))}")
    return "\n".join(lines) + "\n"


def ratio_summary_rows(summary: VarianceRatioSummary) -> list[tuple[str, str, str, str]]:
    return [
        ("estimated_variance", "ratio", name, fmt(getattr(summary, name)))
        for name in ("median", "q1", "q3", "fraction_below_one")
    ]


def table1_text(report: Table1Report) -> str:
    lines = _header("table1_report")
    lines.append(f"all_passed = {str(report.all_passed).lower()}")
    if report.degenerate:
        lines.append("degenerate = no covariate signal (beta = 0)")
    lines.append(f"frozen_projected_imbalance = {fmt(report.frozen_pick.projected_imbalance)}")
    lines.append(f"frozen_delta_x = {fmt_vector(report.frozen_pick.delta_x)}")
    for cell in report.cells:
        lines.append(f"[cell {cell.row} {cell.column}]")
        lines.append(f"observed = {fmt(cell.observed)}")
        lines.append(f"reference = {fmt(cell.reference)}")
        lines.append(f"tolerance = {fmt(cell.tolerance)}")
        lines.append(f"passed = {str(cell.passed).lower()}")
        if cell.note:
            lines.append(f"note = {cell.note}")
    for regime_report in (
        report.unconditional,
        report.conditional_on_z,
        report.conditional_on_eps,
    ):
        lines.append(regime_report_text(regime_report).rstrip("\n"))
    return "\n".join(lines) + "\n"


def table1_rows(report: Table1Report) -> list[tuple[str, str, str, str]]:
    rows = []
    for cell in report.cells:
        rows.append((cell.row, cell.column, "observed", fmt(cell.observed)))
        rows.append((cell.row, cell.column, "reference", fmt(cell.reference)))
        rows.append((cell.row, cell.column, "tolerance", fmt(cell.tolerance)))
        rows.append((cell.row, cell.column, "passed", "1" if cell.passed else "0"))
    for regime_report in (
        report.unconditional,
        report.conditional_on_z,
        report.conditional_on_eps,
    ):
        rows.extend(regime_report_rows(regime_report))
    return rows


def rows_to_csv(rows: list[tuple[str, str, str, str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buffer.getvalue()
