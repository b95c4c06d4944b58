"""Command-line front end: ``principal-points {solve,table,experiment,check}``.

Exit status is 0 on success, 2 for usage or parameter errors, 3 when a
numerical routine fails to converge and 1 when ``check`` finds a mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .distributions import TABULATED, catalog_make, family_defaults
from .errors import ConvergenceError, ParameterError, PrincipalPointsError, UnknownDistributionError
from .solver import NewtonConfig, SolverReport, newton_solve
from .validation import (
    MAX_DP_POINTS,
    discretize,
    grid_bruteforce,
    iteration_study,
    jacobian_fd_check,
    lloyd_solve,
    t_convergence_experiment,
)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2, 3

FORMATS = ("csv", "json", "table", "latex")
ORACLES = ("lloyd", "dp", "jacobian")
FAMILY_FLAGS = ("r", "s", "a", "b", "k")
CSV_HEADER = ("distribution", "n", "j", "a_j", "V_n", "residual", "iterations")

LLOYD_TOL = 1e-10
JACOBIAN_TOL = 1e-6
OFFBAND_TOL = 1e-8
FD_STEP = 1e-6
DEFAULT_K = "3,5,10,50,100,500"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    distributions: list[str]
    parameters: dict[str, float] = field(default_factory=dict)
    n: int | None = None
    n_max: int | None = None
    tol: float | None = None
    format: str = "table"
    output: str | None = None

    def newton(self) -> NewtonConfig:
        return NewtonConfig() if self.tol is None else NewtonConfig(residual_tol=self.tol)

    def family_parameters(self, name: str) -> dict[str, float]:
        accepted = family_defaults(name)
        return {k: v for k, v in self.parameters.items() if k in accepted}


def _g17(x: float) -> str:
    return format(float(x), ".17g")


# --- argument handling -------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _choice(options):
    def convert(text):
        if text not in options:
            raise argparse.ArgumentTypeError(f"choose from {', '.join(options)}")
        return text
    return convert


# Shared by the parser and the --config reader so both validate identically.
_CONVERTERS = {
    "dist": str,
    "n": _positive_int,
    "n_max": _positive_int,
    "tol": _positive_float,
    "format": _choice(FORMATS),
    "output": str,
    "oracles": str,
    "k": str,
    "r": str,
    "s": str,
    "a": str,
    "b": str,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--dist", help="distribution name, comma-separated list, or 'all'")
    common.add_argument("--n", type=_CONVERTERS["n"], help="number of principal points")
    common.add_argument("--n-max", dest="n_max", type=_CONVERTERS["n_max"],
                        help="largest n for table and iteration-study")
    common.add_argument("--tol", type=_CONVERTERS["tol"], help="Newton residual tolerance")
    common.add_argument("--format", type=_CONVERTERS["format"], metavar="{csv,json,table,latex}")
    common.add_argument("--output", help="write here instead of standard output")
    common.add_argument("--oracles", help="comma-separated subset of lloyd,dp,jacobian")
    common.add_argument("--k", help="student-t degrees of freedom; a list for t-convergence")
    for flag in ("r", "s", "a", "b"):
        common.add_argument(f"--{flag}", help=f"family parameter {flag}")

    parser = argparse.ArgumentParser(prog="principal-points",
                                     description="Principal points of univariate distributions.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve one (distribution, n)")
    sub.add_parser("table", parents=[common], help="points for n = 1..n-max")
    exp = sub.add_parser("experiment", parents=[common], help="t-convergence or iteration-study")
    exp.add_argument("name", choices=("t-convergence", "iteration-study"))
    sub.add_parser("check", parents=[common], help="cross-check against independent oracles")
    return parser


def read_config(path: str) -> dict[str, object]:
    values: dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONVERTERS:
            raise UsageError(f"{path}:{lineno}: expected key=value with a known key")
        try:
            values[key] = _CONVERTERS[key](value.strip())
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{path}:{lineno}: {key}: {exc}") from None
    return values


def _merged(args: argparse.Namespace) -> dict[str, object]:
    merged = read_config(args.config) if args.config else {}
    for key in _CONVERTERS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _distributions(spec: object, allow_all: bool) -> list[str]:
    if not spec:
        raise UsageError("--dist is required")
    names = [s.strip() for s in str(spec).split(",") if s.strip()]
    if allow_all and names == ["all"]:
        return list(TABULATED)
    for name in names:
        family_defaults(name)
    return names


def _family_parameters(opts, names) -> dict[str, float]:
    params = {}
    for flag in FAMILY_FLAGS:
        raw = opts.get(flag)
        if raw is None:
            continue
        if not any(flag in family_defaults(n) for n in names):
            raise UsageError(f"--{flag} does not apply to {', '.join(names)}")
        try:
            params[flag] = float(raw)
        except ValueError:
            raise UsageError(f"--{flag} expects a number, got {raw!r}") from None
    return params


def _run_config(opts, *, allow_all=False) -> RunConfig:
    names = _distributions(opts.get("dist"), allow_all)
    return RunConfig(distributions=names,
                     parameters=_family_parameters(opts, names),
                     n=opts.get("n"), n_max=opts.get("n_max"), tol=opts.get("tol"),
                     format=opts.get("format") or "table",
                     output=opts.get("output"))


# --- rendering ---------------------------------------------------------------

def _record(name: str, params: dict, report: SolverReport) -> dict:
    return {
        "distribution": name,
        "parameters": params,
        "n": report.n,
        "points": [float(x) for x in report.points],
        "V_n": report.distortion,
        "residual_inf_norm": report.residual_inf_norm,
        "iterations": report.iterations,
        "path": report.path,
    }


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _points_csv(records) -> str:
    rows = []
    for rec in records:
        for j, a in enumerate(rec["points"], 1):
            rows.append((rec["distribution"], rec["n"], j, _g17(a), _g17(rec["V_n"]),
                         _g17(rec["residual_inf_norm"]), rec["iterations"]))
    return _csv_text(CSV_HEADER, rows)


def _json_text(payload) -> str:
    # repr floats are the shortest strings that round-trip exactly
    return json.dumps(payload, indent=2, allow_nan=True) + "\n"


def _aligned(header, rows) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)] if rows else \
        [len(h) for h in header]
    lines = ["  ".join(str(c).rjust(w) for c, w in zip(row, widths)) for row in [header, *rows]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _latex(caption, header, rows) -> str:
    spec = "r" * len(header)
    body = [" & ".join(header) + r" \\", r"\hline"]
    body += [" & ".join(str(c) for c in row) + r" \\" for row in rows]
    return "\n".join([r"\begin{table}[ht]", r"\centering", rf"\caption{{{caption}}}",
                      rf"\begin{{tabular}}{{{spec}}}", r"\hline", *body, r"\hline",
                      r"\end{tabular}", r"\end{table}"]) + "\n"


def _title(name, params) -> str:
    if not params:
        return name
    return f"{name} ({', '.join(f'{k}={v:g}' for k, v in sorted(params.items()))})"


def _display_rows(entries, width):
    rows = []
    for n, rec, err in entries:
        if rec is None:
            rows.append((n, f"failed: {err}", *([""] * width)))
            continue
        pts = [f"{a:.4f}" for a in rec["points"]]
        rows.append((n, f"{rec['V_n']:.4f}", *pts, *([""] * (width - len(pts)))))
    return rows


def _display(fmt, name, params, entries) -> str:
    width = max((len(rec["points"]) for _, rec, _ in entries if rec), default=0)
    header = ("n", "V_n", *[f"a_{j}" for j in range(1, width + 1)])
    rows = _display_rows(entries, width)
    if fmt == "latex":
        header = ("$n$", "$V_n$", *[f"$a_{{{j}}}$" for j in range(1, width + 1)])
        return _latex(_title(name, params), header, rows)
    return _title(name, params) + "\n" + _aligned(header, rows)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _diagnostic(name, n, exc) -> None:
    record = {"error": type(exc).__name__, "message": str(exc), "distribution": name, "n": n}
    if isinstance(exc, ConvergenceError):
        record["residual"] = None if exc.residual is None else float(exc.residual)
        record["iterations"] = exc.iterations
    print(json.dumps(record), file=sys.stderr)


# --- subcommands -------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    if cfg.n is None:
        raise UsageError("--n is required")
    if len(cfg.distributions) != 1:
        raise UsageError("solve takes a single distribution")
    name = cfg.distributions[0]
    params = cfg.family_parameters(name)
    model = catalog_make(name, params)
    try:
        report = newton_solve(model, cfg.n, cfg.newton())
    except ArithmeticError as exc:
        _diagnostic(name, cfg.n, exc)
        return EXIT_NONCONVERGENCE
    rec = _record(name, dict(model.parameters), report)
    if cfg.format == "csv":
        text = _points_csv([rec])
    elif cfg.format == "json":
        text = _json_text(rec)
    else:
        text = _display(cfg.format, name, model.parameters, [(cfg.n, rec, None)])
    _emit(text, cfg.output)
    return EXIT_OK


def cmd_table(cfg: RunConfig) -> int:
    n_max = cfg.n_max or 16
    status = EXIT_OK
    records, blocks = [], []
    for name in cfg.distributions:
        model = catalog_make(name, cfg.family_parameters(name))
        entries = []
        for n in range(1, n_max + 1):
            try:
                rec = _record(name, dict(model.parameters), newton_solve(model, n, cfg.newton()))
                entries.append((n, rec, None))
                records.append(rec)
            except ArithmeticError as exc:
                _diagnostic(name, n, exc)
                entries.append((n, None, type(exc).__name__))
                status = EXIT_NONCONVERGENCE
        if cfg.format in ("table", "latex"):
            blocks.append(_display(cfg.format, name, model.parameters, entries))
    if cfg.format == "csv":
        text = _points_csv(records)
    elif cfg.format == "json":
        text = _json_text(records)
    else:
        text = "\n".join(blocks)
    _emit(text, cfg.output)
    return status


def _k_list(raw) -> list[int]:
    try:
        values = [float(s) for s in str(raw).split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--k expects comma-separated integers, got {raw!r}") from None
    if not values or any(v != int(v) or v < 3 for v in values):
        raise UsageError("every --k value must be an integer k >= 3")
    return sorted({int(v) for v in values})


def cmd_experiment(name: str, opts: dict) -> int:
    fmt = opts.get("format") or "table"
    tol = opts.get("tol")
    config = NewtonConfig() if tol is None else NewtonConfig(residual_tol=tol)
    if name == "t-convergence":
        n = opts.get("n") or 5
        ks = _k_list(opts.get("k") or DEFAULT_K)
        try:
            series = t_convergence_experiment(n, ks, config)
        except ArithmeticError as exc:
            _diagnostic("student-t", n, exc)
            return EXIT_NONCONVERGENCE
        rows = [(n, int(k), float(d)) for k, d in zip(series.k_values, series.deviations)]
        header = ("n", "k", "deviation")
        if fmt == "csv":
            text = _csv_text(header, [(n, k, _g17(d)) for n, k, d in rows])
        elif fmt == "json":
            text = _json_text({"n": n, "k_values": [r[1] for r in rows],
                               "deviations": [r[2] for r in rows]})
        else:
            shown = [(n, k, f"{d:.4e}") for n, k, d in rows]
            text = (_latex(f"student-t vs normal, n={n}", header, shown) if fmt == "latex"
                    else _aligned(header, shown))
        _emit(text, opts.get("output"))
        return EXIT_OK

    cfg = _run_config(opts, allow_all=True)
    n_max = cfg.n_max or 100
    header = ("distribution", "n", "iterations", "residual", "status")
    rows, status = [], EXIT_OK
    for dist in cfg.distributions:
        model = catalog_make(dist, cfg.family_parameters(dist))
        for rec in iteration_study(model, n_max, config):
            if rec.error:
                status = EXIT_NONCONVERGENCE
            rows.append((dist, rec.n, rec.iterations, rec.residual, rec.error or "ok"))
    if fmt == "csv":
        text = _csv_text(header, [(d, n, "" if i is None else i, _g17(r), s)
                                  for d, n, i, r, s in rows])
    elif fmt == "json":
        text = _json_text([dict(zip(header, row)) for row in rows])
    else:
        shown = [(d, n, "-" if i is None else i, f"{r:.2e}", s) for d, n, i, r, s in rows]
        text = (_latex("Newton iterations", header, shown) if fmt == "latex"
                else _aligned(header, shown))
    _emit(text, cfg.output)
    return status


def _oracles(raw) -> list[str]:
    names = [s.strip() for s in str(raw or "lloyd,jacobian").split(",") if s.strip()]
    unknown = [s for s in names if s not in ORACLES]
    if unknown or not names:
        raise UsageError(f"unknown oracle(s) {', '.join(unknown)}; choose from {', '.join(ORACLES)}")
    return list(dict.fromkeys(names))


def run_checks(model, n: int, oracles: Sequence[str], config: NewtonConfig | None = None):
    """Rows ``(oracle, tolerance, deviation, passed)`` for the selected oracles."""
    points = newton_solve(model, n, config).points
    rows = []
    for oracle in oracles:
        if oracle == "lloyd":
            dev = float(np.max(np.abs(lloyd_solve(model, n) - points)))
            rows.append(("lloyd", LLOYD_TOL, dev, dev <= LLOYD_TOL))
        elif oracle == "dp":
            tol = 2.0 * discretize(model).spacing
            dev = float(np.max(np.abs(grid_bruteforce(model, n) - points)))
            rows.append(("dp", tol, dev, dev <= tol))
        else:
            check = jacobian_fd_check(model, points, FD_STEP)
            rows.append(("jacobian", JACOBIAN_TOL, check.deviation,
                         check.deviation <= JACOBIAN_TOL))
            rows.append(("jacobian-offband", OFFBAND_TOL, check.offband,
                         check.offband <= OFFBAND_TOL))
    return rows


def cmd_check(opts: dict) -> int:
    cfg = _run_config(opts)
    if cfg.n is None:
        raise UsageError("--n is required")
    if len(cfg.distributions) != 1:
        raise UsageError("check takes a single distribution")
    oracles = _oracles(opts.get("oracles"))
    if "dp" in oracles and cfg.n > MAX_DP_POINTS:
        raise UsageError(f"the dp oracle needs n <= {MAX_DP_POINTS}")
    name = cfg.distributions[0]
    model = catalog_make(name, cfg.family_parameters(name))
    try:
        rows = run_checks(model, cfg.n, oracles, cfg.newton())
    except ArithmeticError as exc:
        _diagnostic(name, cfg.n, exc)
        return EXIT_NONCONVERGENCE
    header = ("oracle", "tolerance", "deviation", "status")
    if cfg.format == "csv":
        text = _csv_text(header, [(o, _g17(t), _g17(d), "pass" if ok else "FAIL")
                                  for o, t, d, ok in rows])
    elif cfg.format == "json":
        text = _json_text({"distribution": name, "n": cfg.n, "checks": [
            {"oracle": o, "tolerance": t, "deviation": d, "passed": bool(ok)}
            for o, t, d, ok in rows]})
    else:
        shown = [(o, f"{t:.1e}", f"{d:.3e}", "pass" if ok else "FAIL") for o, t, d, ok in rows]
        title = f"{_title(name, model.parameters)}, n={cfg.n}"
        text = (_latex(title, header, shown) if cfg.format == "latex"
                else title + "\n" + _aligned(header, shown))
    _emit(text, cfg.output)
    return EXIT_OK if all(ok for *_, ok in rows) else EXIT_MISMATCH


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _merged(args)
        if args.command == "solve":
            return cmd_solve(_run_config(opts))
        if args.command == "table":
            return cmd_table(_run_config(opts, allow_all=True))
        if args.command == "experiment":
            return cmd_experiment(args.name, opts)
        return cmd_check(opts)
    except (UsageError, ParameterError, UnknownDistributionError, ValueError) as exc:
        print(f"principal-points: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrincipalPointsError, ArithmeticError) as exc:
        print(f"principal-points: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
