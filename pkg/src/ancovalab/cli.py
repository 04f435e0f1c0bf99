"""Command-line front end.

Subcommands: ``table1`` (three-regime summary grid), ``vif`` (collinearity
diagnostics for a dataset on disk), ``simulate`` (regime runners and
decompositions), ``rerand`` (draw one rerandomized assignment).

Scenario configuration is a flat INI file with ``[dgp]``, ``[design]`` and
``[run]`` sections.  All randomness flows from the single ``seed`` key;
omitting it is an error, never an implicit random seed.  The resolved
configuration is echoed into every output so any run can be reproduced
bit-for-bit.

Exit codes: 0 ok, 1 check failure, 2 config error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ols, reporting
from .designs import (
    DesignSpec,
    complete_randomization,
    mahalanobis_balance,
    rerandomize,
)
from .dgp import DgpSpec, draw_errors, unit_variance_covariates
from .errors import AncovaLabError
from .estimators import Assignment, diff_in_means
from .montecarlo import (
    run_conditional_on_eps,
    run_conditional_on_z,
    run_unconditional,
    select_imbalanced_assignment,
    table1_report,
    total_variance_decomposition,
)
from .ols import DesignMatrix
from .rng import substream

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

# Substream tags local to the CLI (the montecarlo runners use tags 1-9).
_T_RERAND_DRAW = 100
_T_RERAND_PROBE = 101
_T_SIM_FROZEN_EPS = 102

_RERAND_PROBE_DRAWS = 1000

DEFAULT_CONFIG = """\
[dgp]
covariates = unitvar:100,2,7
alpha = 0
tau = 1
beta = 1 0.5
sigma = 1
error_dist = normal

[design]
kind = complete
n1 = 50

[run]
seed = 20260810
replications = 10000
r_outer = 300
r_inner = 300
"""


class ConfigError(Exception):
    """Invalid or missing configuration; maps to exit code 2."""


@dataclass(frozen=True)
class Scenario:
    """Parsed configuration plus the resolved key/value sections for echoing."""

    spec: DgpSpec
    replications: int
    r_outer: int
    r_inner: int
    seed: int
    sections: dict[str, dict[str, str]]

    def ini_text(self) -> str:
        blocks = []
        for section, entries in self.sections.items():
            lines = [f"[{section}]"]
            lines.extend(f"{key} = {value}" for key, value in entries.items())
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + "\n"

    def flat_lines(self) -> list[str]:
        lines = ["[resolved_config]"]
        for section, entries in self.sections.items():
            lines.extend(f"{section}.{key} = {value}" for key, value in entries.items())
        return lines


# ---------------------------------------------------------------------------
# configuration parsing


def _get(parser: configparser.ConfigParser, section: str, key: str, default=None) -> str:
    if not parser.has_section(section):
        raise ConfigError(f"missing [{section}] section")
    if not parser.has_option(section, key):
        if default is not None:
            return default
        raise ConfigError(f"missing [{section}] {key}")
    return parser.get(section, key).strip()


def _number(text: str, section: str, key: str, cast):
    try:
        return cast(text)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {text!r}") from exc


def _resolve_covariates(source: str, base_dir: Path) -> tuple[DesignMatrix, str]:
    """Parse the covariate source: ``file:PATH``, ``inline:ROWS`` or ``unitvar:N,K,SEED``."""
    if source.startswith("file:"):
        path = Path(source[len("file:") :])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"[dgp] covariates: file not found: {path}")
        matrix, labels = _read_covariate_csv(path)
        return DesignMatrix(matrix, labels), f"file:{path}"
    if source.startswith("inline:"):
        body = source[len("inline:") :]
        try:
            rows = [
                [float(cell) for cell in row.split()]
                for row in body.split(";")
                if row.strip()
            ]
            matrix = np.array(rows, dtype=float)
        except ValueError as exc:
            raise ConfigError(f"[dgp] covariates: bad inline matrix: {exc}") from exc
        if matrix.ndim != 2 or matrix.size == 0:
            raise ConfigError("[dgp] covariates: inline matrix is empty or ragged")
        return DesignMatrix(matrix), source
    if source.startswith("unitvar:"):
        body = source[len("unitvar:") :]
        parts = body.split(",")
        if len(parts) != 3:
            raise ConfigError("[dgp] covariates: unitvar needs N,K,SEED")
        n, k, cov_seed = (_number(p.strip(), "dgp", "covariates", int) for p in parts)
        try:
            return unit_variance_covariates(n, k, cov_seed), source
        except AncovaLabError as exc:
            raise ConfigError(f"[dgp] covariates: {exc}") from exc
    raise ConfigError(
        "[dgp] covariates must start with 'file:', 'inline:' or 'unitvar:'"
    )


def _read_covariate_csv(path: Path) -> tuple[np.ndarray, tuple[str, ...]]:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    try:
        matrix = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric cell: {exc}") from exc
    return matrix, tuple(label.strip() for label in header)


def load_scenario(text: str, base_dir: Path, seed_override: int | None = None) -> Scenario:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    covariates_source = _get(parser, "dgp", "covariates")
    x, echoed_source = _resolve_covariates(covariates_source, base_dir)
    alpha = _number(_get(parser, "dgp", "alpha"), "dgp", "alpha", float)
    tau = _number(_get(parser, "dgp", "tau"), "dgp", "tau", float)
    beta_text = _get(parser, "dgp", "beta")
    try:
        beta = np.array([float(v) for v in beta_text.split()])
    except ValueError as exc:
        raise ConfigError(f"[dgp] beta: cannot parse {beta_text!r}") from exc
    sigma = _number(_get(parser, "dgp", "sigma"), "dgp", "sigma", float)
    error_dist = _get(parser, "dgp", "error_dist", default="normal")

    kind = _get(parser, "design", "kind")
    n = x.n
    try:
        if kind == "complete":
            design = DesignSpec.complete(n, _number(_get(parser, "design", "n1"), "design", "n1", int))
        elif kind == "bernoulli":
            design = DesignSpec.bernoulli(n, _number(_get(parser, "design", "p"), "design", "p", float))
        elif kind == "rerandomized":
            design = DesignSpec.rerandomized(
                n,
                _number(_get(parser, "design", "n1"), "design", "n1", int),
                _number(_get(parser, "design", "threshold_a"), "design", "threshold_a", float),
                _number(
                    _get(parser, "design", "max_attempts", default="1000000"),
                    "design",
                    "max_attempts",
                    int,
                ),
            )
        else:
            raise ConfigError(f"[design] kind: unknown kind {kind!r}")
    except (AncovaLabError, ValueError) as exc:
        raise ConfigError(f"[design]: {exc}") from exc

    try:
        spec = DgpSpec(
            x=x, alpha=alpha, tau=tau, beta=beta, sigma=sigma, design=design, error_dist=error_dist
        )
    except (AncovaLabError, ValueError) as exc:
        raise ConfigError(f"[dgp]: {exc}") from exc

    seed_text = _get(parser, "run", "seed")
    seed = _number(seed_text, "run", "seed", int)
    if seed_override is not None:
        seed = seed_override
    if not 0 <= seed < 2**64:
        raise ConfigError(f"[run] seed: need a 64-bit unsigned integer, got {seed}")
    replications = _number(
        _get(parser, "run", "replications", default="10000"), "run", "replications", int
    )
    r_outer = _number(_get(parser, "run", "r_outer", default="300"), "run", "r_outer", int)
    r_inner = _number(_get(parser, "run", "r_inner", default="300"), "run", "r_inner", int)

    sections = {
        "dgp": {
            "covariates": echoed_source,
            "alpha": repr(alpha),
            "tau": repr(tau),
            "beta": " ".join(repr(float(b)) for b in beta),
            "sigma": repr(sigma),
            "error_dist": error_dist,
        },
        "design": _design_section(design),
        "run": {
            "seed": str(seed),
            "replications": str(replications),
            "r_outer": str(r_outer),
            "r_inner": str(r_inner),
        },
    }
    return Scenario(
        spec=spec,
        replications=replications,
        r_outer=r_outer,
        r_inner=r_inner,
        seed=seed,
        sections=sections,
    )


def _design_section(design: DesignSpec) -> dict[str, str]:
    entries = {"kind": design.kind}
    if design.kind in ("complete", "rerandomized"):
        entries["n1"] = str(design.n1)
    if design.kind == "bernoulli":
        entries["p"] = repr(design.p)
    if design.kind == "rerandomized":
        entries["threshold_a"] = repr(design.threshold_a)
        entries["max_attempts"] = str(design.max_attempts)
    return entries


def _load_from_args(args) -> Scenario:
    if args.config is None:
        return load_scenario(DEFAULT_CONFIG, Path.cwd(), args.seed)
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return load_scenario(path.read_text(), path.parent.resolve(), args.seed)


# ---------------------------------------------------------------------------
# output plumbing


def _emit(args, scenario: Scenario | None, name: str, text: str, rows) -> None:
    if scenario is not None:
        text = text + "\n".join(scenario.flat_lines()) + "\n"
    print(text, end="")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.format == "csv":
            (out_dir / f"{name}.csv").write_text(reporting.rows_to_csv(rows))
        else:
            (out_dir / f"{name}.txt").write_text(text)
        if scenario is not None:
            (out_dir / "resolved_config.ini").write_text(scenario.ini_text())


# ---------------------------------------------------------------------------
# subcommands


def cmd_table1(args) -> int:
    scenario = _load_from_args(args)
    report = table1_report(scenario.spec, scenario.replications, scenario.seed)
    text = reporting.table1_text(report)
    _emit(args, scenario, "table1", text, reporting.table1_rows(report))
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILURE


def _read_vif_csv(path: Path):
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        rows = list(reader)
    if len(header) < 3 or header[0] != "y" or header[1] != "z":
        raise ConfigError(f"{path}: header must be y, z, x_1...x_K, got {header}")
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    try:
        data = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric cell: {exc}") from exc
    if data.shape[1] != len(header):
        raise ConfigError(f"{path}: row width does not match header")
    return data[:, 0], data[:, 1], data[:, 2:], tuple(header[2:])


def cmd_vif(args) -> int:
    path = Path(args.data)
    if not path.exists():
        raise ConfigError(f"data file not found: {path}")
    y, z, x_values, labels = _read_vif_csv(path)
    x = DesignMatrix(x_values, labels)
    vif_value = ols.vif(z, x)
    r2 = ols.r_squared_z_given_x(z, x)
    adjusted = ols.estimated_variance_adjusted(y, z, x)
    unadjusted = ols.estimated_variance_unadjusted(y, z)
    fmt = reporting.fmt
    lines = [
        "format_version = 1",
        "kind = vif_report",
        f"source = {path.resolve()}",
        f"n = {len(y)}",
        f"k = {x.p}",
        f"vif = {fmt(vif_value)}",
        f"r_squared_z_given_x = {fmt(r2)}",
        f"est_variance_adjusted = {fmt(adjusted)}",
        f"est_variance_unadjusted = {fmt(unadjusted)}",
    ]
    rows = [
        ("vif", "diagnostic", "vif", fmt(vif_value)),
        ("vif", "diagnostic", "r_squared_z_given_x", fmt(r2)),
        ("vif", "diagnostic", "est_variance_adjusted", fmt(adjusted)),
        ("vif", "diagnostic", "est_variance_unadjusted", fmt(unadjusted)),
    ]
    _emit(args, None, "vif", "\n".join(lines) + "\n", rows)
    return EXIT_OK


def _parse_freeze(value: str):
    if value.startswith("candidates:"):
        count = value[len("candidates:") :]
        try:
            return ("candidates", int(count))
        except ValueError as exc:
            raise ConfigError(f"--freeze-from: bad candidate count {count!r}") from exc
    if value.startswith("file:"):
        return ("file", Path(value[len("file:") :]))
    raise ConfigError("--freeze-from must be 'candidates:N' or 'file:PATH'")


def _frozen_assignment(args, scenario: Scenario) -> tuple[Assignment, list[str]]:
    mode, value = _parse_freeze(args.freeze_from or "candidates:1000")
    if mode == "candidates":
        pick = select_imbalanced_assignment(scenario.spec, value, scenario.seed)
        lines = [
            f"frozen_source = candidates:{value}",
            f"frozen_delta_x = {reporting.fmt_vector(pick.delta_x)}",
            f"frozen_projected_imbalance = {reporting.fmt(pick.projected_imbalance)}",
        ]
        return pick.assignment, lines
    if not value.exists():
        raise ConfigError(f"--freeze-from file not found: {value}")
    try:
        z = np.array([int(v) for v in value.read_text().split()])
    except ValueError as exc:
        raise ConfigError(f"{value}: expected 0/1 entries: {exc}") from exc
    try:
        assignment = Assignment.from_z(z)
    except AncovaLabError as exc:
        raise ConfigError(f"{value}: {exc}") from exc
    delta = np.atleast_1d(diff_in_means(scenario.spec.x.values, assignment))
    lines = [
        f"frozen_source = file:{value.resolve()}",
        f"frozen_delta_x = {reporting.fmt_vector(delta)}",
        f"frozen_projected_imbalance = {reporting.fmt(float(scenario.spec.beta @ delta))}",
    ]
    return assignment, lines


def _frozen_errors(args, scenario: Scenario) -> tuple[np.ndarray, list[str]]:
    if args.freeze_from is None:
        eps = draw_errors(
            scenario.spec.n,
            scenario.spec.sigma,
            scenario.spec.error_dist,
            substream(scenario.seed, _T_SIM_FROZEN_EPS),
        )
        return eps, ["frozen_source = seeded"]
    mode, value = _parse_freeze(args.freeze_from)
    if mode != "file":
        raise ConfigError("--freeze-from for conditional-eps must be 'file:PATH'")
    if not value.exists():
        raise ConfigError(f"--freeze-from file not found: {value}")
    try:
        eps = np.array([float(v) for v in value.read_text().split()])
    except ValueError as exc:
        raise ConfigError(f"{value}: expected numbers: {exc}") from exc
    if eps.shape[0] != scenario.spec.n:
        raise ConfigError(f"{value}: got {eps.shape[0]} errors, need {scenario.spec.n}")
    return eps, [f"frozen_source = file:{value.resolve()}"]


def cmd_simulate(args) -> int:
    scenario = _load_from_args(args)
    spec = scenario.spec
    extra: list[str] = []
    if args.regime == "unconditional":
        report = run_unconditional(spec, replications=scenario.replications, seed=scenario.seed)
        text = reporting.regime_report_text(report)
        rows = reporting.regime_report_rows(report)
    elif args.regime == "conditional-z":
        frozen, extra = _frozen_assignment(args, scenario)
        report = run_conditional_on_z(
            spec, frozen, replications=scenario.replications, seed=scenario.seed
        )
        text = reporting.regime_report_text(report)
        rows = reporting.regime_report_rows(report)
    elif args.regime == "conditional-eps":
        frozen_eps, extra = _frozen_errors(args, scenario)
        enumerate_all = True if args.enumerate else None
        report = run_conditional_on_eps(
            spec,
            frozen_eps,
            replications=scenario.replications,
            seed=scenario.seed,
            enumerate_all=enumerate_all,
        )
        text = reporting.regime_report_text(report)
        rows = reporting.regime_report_rows(report)
    else:  # decompose-z | decompose-eps
        conditioning = "on_z" if args.regime == "decompose-z" else "on_eps"
        texts, rows = [], []
        for estimator in ("unadjusted", "ancova"):
            report = total_variance_decomposition(
                spec,
                estimator,
                scenario.r_outer,
                scenario.r_inner,
                conditioning,
                scenario.seed,
            )
            texts.append(reporting.decomposition_text(report))
            rows.extend(reporting.decomposition_rows(report))
        text = "".join(texts)
    if extra:
        text = text + "\n".join(extra) + "\n"
    _emit(args, scenario, "simulate", text, rows)
    return EXIT_OK


def cmd_rerand(args) -> int:
    scenario = _load_from_args(args)
    design = scenario.spec.design
    if design.kind != "rerandomized":
        raise ConfigError("[design] kind must be 'rerandomized' for the rerand command")
    x = scenario.spec.x
    assignment, attempts = rerandomize(
        x,
        design.n1,
        design.threshold_a,
        substream(scenario.seed, _T_RERAND_DRAW),
        max_attempts=design.max_attempts,
    )
    balance = mahalanobis_balance(x, assignment)
    probe_rng = substream(scenario.seed, _T_RERAND_PROBE)
    accepted = 0
    for _ in range(_RERAND_PROBE_DRAWS):
        probe = complete_randomization(design.n, design.n1, probe_rng)
        if mahalanobis_balance(x, probe) <= design.threshold_a:
            accepted += 1
    rate = accepted / _RERAND_PROBE_DRAWS
    fmt = reporting.fmt
    lines = [
        "format_version = 1",
        "kind = rerand_report",
        f"attempts_used = {attempts}",
        f"mahalanobis_balance = {fmt(balance)}",
        f"acceptance_rate_estimate = {fmt(rate)}",
        f"probe_draws = {_RERAND_PROBE_DRAWS}",
        "z = " + " ".join(str(int(v)) for v in assignment.z),
    ]
    rows = [
        ("rerand", "assignment", "attempts_used", str(attempts)),
        ("rerand", "assignment", "mahalanobis_balance", fmt(balance)),
        ("rerand", "assignment", "acceptance_rate_estimate", fmt(rate)),
    ]
    _emit(args, scenario, "rerand", "\n".join(lines) + "\n", rows)
    if args.out:
        out_dir = Path(args.out)
        with open(out_dir / "assignment.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["z"])
            writer.writerows([[int(v)] for v in assignment.z])
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="scenario config file (INI)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="directory for report files")
    parser.add_argument(
        "--format", choices=("csv", "text"), default="text", help="report file format"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ancovalab",
        description="Covariate adjustment under randomization: diagnostics and Monte Carlo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_table1 = sub.add_parser("table1", help="run the three-regime summary grid")
    _add_common(p_table1)
    p_table1.set_defaults(func=cmd_table1)

    p_vif = sub.add_parser("vif", help="collinearity diagnostics for a CSV dataset")
    _add_common(p_vif)
    p_vif.add_argument("--data", required=True, help="CSV with columns y, z, x_1...x_K")
    p_vif.set_defaults(func=cmd_vif)

    p_sim = sub.add_parser("simulate", help="run one conditioning regime")
    _add_common(p_sim)
    p_sim.add_argument(
        "--regime",
        required=True,
        choices=(
            "unconditional",
            "conditional-z",
            "conditional-eps",
            "decompose-z",
            "decompose-eps",
        ),
    )
    p_sim.add_argument(
        "--enumerate",
        action="store_true",
        help="force exact enumeration of the assignment distribution (conditional-eps)",
    )
    p_sim.add_argument(
        "--freeze-from",
        help="'candidates:N' (imbalance heuristic) or 'file:PATH' for the frozen Z or errors",
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_rerand = sub.add_parser("rerand", help="draw one rerandomized assignment")
    _add_common(p_rerand)
    p_rerand.set_defaults(func=cmd_rerand)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except AncovaLabError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
