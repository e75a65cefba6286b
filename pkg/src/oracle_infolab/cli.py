"""Command-line front end: ``oracle-infolab {run,tables,optimize,hsp,phase}``.

Every command prints a CSV table (or JSON with ``--format json``) to stdout.
With ``--out DIR`` it also writes ``<stem>.csv`` and ``<stem>.json`` there,
plus a ``<stem>.meta.json`` sidecar carrying the wall time, so the two
report files stay byte-identical across runs with the same arguments.

Exit codes: 0 ok, 2 configuration error, 3 numerical cross-check failure,
4 reference-table deviation above tolerance, 5 optimizer non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, hspkit, optimizer, reference
from .densemat import CAP_ENV_VAR, DimensionCapError, dimension_cap
from .ensembles import STAGES, StageLabel
from .infometrics import DIVERGENCE_TOL, IDENTITY_TOL, CrossCheckError, MetricsRow, fano_bounds
from .problems import (
    OracleProblem,
    PriorKind,
    bit_oracle_problem,
    build_bv,
    build_dj,
    build_phase_estimation,
    build_simon,
    make_prior,
)
from .simulator import lift_t_queries, run_stages, stage_metrics

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CROSSCHECK = 3
EXIT_TOLERANCE = 4
EXIT_NONCONVERGED = 5

CSV_DECIMALS = 6
PROBLEMS = ("dj", "bv", "simon", "phase", "custom")


class ConfigError(ValueError):
    pass


@dataclass
class Report:
    """Rows plus provenance; ``columns`` fixes the CSV column order."""
    stem: str
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK


# ---------------------------------------------------------------- custom files

def parse_problem_file(text: str, name_hint: str = "custom") -> OracleProblem:
    """Parse the plain-text custom problem format.

    Header lines ``key: value`` (``name``, ``m`` input bits, ``out_bits``
    default 1, ``prior`` one of uniform/partition_uniform/custom), then one
    line per oracle ``id class truth_table [weight]``.  The truth table
    lists outputs in lexicographic input order, either as a digit string
    (``0110``) or comma separated (``0,1,3,2``).  ``#`` starts a comment.
    """
    header: dict = {}
    tables: dict = {}
    class_of: dict = {}
    weights: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line and not tables and len(line.split()) <= 2 and line.split(":", 1)[0].isidentifier():
            key, value = (s.strip() for s in line.split(":", 1))
            header[key.lower()] = value
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise ConfigError(f"line {lineno}: expected 'id class truth_table [weight]'")
        fid, cls, table = parts[:3]
        if fid in tables:
            raise ConfigError(f"line {lineno}: duplicate oracle id {fid!r}")
        try:
            values = [int(v) for v in table.split(",")] if "," in table else [int(c, 16) for c in table]
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad truth table {table!r}") from exc
        tables[fid] = values
        class_of[fid] = cls
        if len(parts) == 4:
            try:
                weights[fid] = Fraction(parts[3])
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"line {lineno}: bad weight {parts[3]!r}") from exc
    if not tables:
        raise ConfigError("problem file lists no oracles")
    try:
        m = int(header["m"])
        out_bits = int(header.get("out_bits", 1))
    except KeyError as exc:
        raise ConfigError("problem file header needs 'm'") from exc
    except ValueError as exc:
        raise ConfigError("'m' and 'out_bits' must be integers") from exc
    kind = header.get("prior", PriorKind.CUSTOM if weights else PriorKind.PARTITION_UNIFORM)
    if kind not in PriorKind.ALL:
        raise ConfigError(f"unknown prior kind {kind!r}")
    if kind == PriorKind.CUSTOM:
        if set(weights) != set(tables):
            raise ConfigError("custom prior needs a weight on every oracle line")
        total = sum(weights.values())
        if total <= 0:
            raise ConfigError("prior weights must have a positive sum")
        weights = {f: w / total for f, w in weights.items()}
    prior = make_prior(kind, class_of, weights or None)
    try:
        return bit_oracle_problem(header.get("name", name_hint), "custom", tables, class_of,
                                  m, out_bits, prior)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------- formatting

def _fmt_csv(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        text = f"{float(value):.{CSV_DECIMALS}f}"
        return "0.000000" if text == "-0.000000" else text
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, StageLabel):
        return value.value
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, Fraction):
        return float(value)
    return value


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    for key in ("command", "version", "seed"):
        if key in report.meta:
            buf.write(f"# {key}={report.meta[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow(_fmt_csv(row.get(c)) for c in report.columns)
    return buf.getvalue()


def render_json(report: Report) -> str:
    doc = {**report.meta, "columns": report.columns, "rows": report.rows, **report.extra}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def _row_dict(row: MetricsRow, **prefix) -> dict:
    d = dict(prefix)
    d["stage"] = row.stage.value
    for c in MetricsRow.COLUMNS:
        d[c] = getattr(row, c)
    d["irrealism"] = row.irrealism
    d["lower_bound"] = row.lower_bound
    d["H_J"] = row.H_J
    d["p_success"] = row.p_success
    d["digest"] = row.digest
    return d


METRIC_COLUMNS = ["stage", *MetricsRow.COLUMNS, "irrealism", "lower_bound", "H_J", "p_success", "digest"]


# ---------------------------------------------------------------- problems

def build_problem(args) -> OracleProblem:
    kind = args.problem
    if kind is None:
        raise ConfigError("--problem is required")
    try:
        if kind == "dj":
            return build_dj(_need(args, "k"))
        if kind == "bv":
            return build_bv(_need(args, "n"))
        if kind == "simon":
            return build_simon(_need(args, "n"))
        if kind == "phase":
            n = _need(args, "n")
            return build_phase_estimation(n, args.t if args.t is not None else n)
        if kind == "custom":
            if not args.file:
                raise ConfigError("--problem custom needs --file")
            path = Path(args.file)
            if not path.is_file():
                raise ConfigError(f"problem file {path} not found")
            return parse_problem_file(path.read_text(), path.stem)
    except ConfigError:
        raise
    except (ValueError, DimensionCapError) as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown problem {kind!r}")


def _need(args, name: str) -> int:
    value = getattr(args, name)
    if value is None:
        raise ConfigError(f"--{name} is required for --problem {args.problem}")
    return value


def _stages(args) -> list:
    if not args.stage or args.stage == "all":
        return list(STAGES)
    try:
        return [StageLabel.parse(s) for s in args.stage.split(",")]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _tolerances(args) -> dict:
    return {"identity": IDENTITY_TOL, "cross_check": DIVERGENCE_TOL, "optimizer": args.tol,
            "table": reference.PRINTED_TOL}


def _meta(args, command: str) -> dict:
    return {"command": command, "version": __version__, "seed": args.seed,
            "threads": args.threads, "dimension_cap": dimension_cap(), "tolerances": _tolerances(args)}


# ---------------------------------------------------------------- commands

def cmd_run(args) -> Report:
    problem = build_problem(args)
    queries = args.t if (args.t is not None and args.problem != "phase") else 1
    stages = _stages(args)
    if args.problem == "simon" and queries > 1:
        if stages != [StageLabel.FINAL] and args.stage not in (None, "all"):
            raise ConfigError("t-query Simon is available at the final stage only")
        p = problem.params
        rows = [_row_dict(hspkit.hsp_metrics_t(p["group"], p["subgroups"], p["priors"], queries), queries=queries)]
    else:
        try:
            if queries > 1:
                problem = lift_t_queries(problem, queries)
            result = stage_metrics(problem, stages=stages)
        except DimensionCapError as exc:
            raise ConfigError(str(exc)) from exc
        rows = [_row_dict(r, queries=queries) for r in result.values()]
    n_classes = len(problem.classes)
    for r in rows:
        if r["stage"] == StageLabel.FINAL.value and n_classes >= 2 and r["p_success"] is not None:
            r["fano_upper"], r["fano_lower"] = fano_bounds(r["I_JY"], n_classes)
    columns = ["problem", "queries", *METRIC_COLUMNS, "fano_upper", "fano_lower"]
    for r in rows:
        r["problem"] = problem.name
    return Report(f"run_{_slug(problem.name)}", columns, rows, _meta(args, "run"))


def cmd_phase(args) -> Report:
    args.problem = "phase"
    return cmd_run(args)


def cmd_hsp(args) -> Report:
    """HSP over a boolean group (``--n``) or any small abelian group (``--orders``)."""
    try:
        if args.orders:
            group = hspkit.FiniteAbelianGroup(tuple(int(x) for x in args.orders.split(",")))
            subgroups = hspkit.all_subgroups(group)
        else:
            n = _need(args, "n")
            group = hspkit.FiniteAbelianGroup.boolean(n)
            subgroups = hspkit.simon_subgroups(n)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    t_max = args.t if args.t is not None else 1
    if t_max < 1:
        raise ConfigError("--t must be >= 1")
    priors = np.full(len(subgroups), 1.0 / len(subgroups))
    rows = []
    for t in range(1, t_max + 1):
        try:
            row = hspkit.hsp_metrics_t(group, subgroups, priors, t)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        d = _row_dict(row, group="x".join(map(str, group.cycle_orders)), t=t)
        rows.append(d)
    columns = ["group", "t", *METRIC_COLUMNS]
    return Report(f"hsp_{'x'.join(map(str, group.cycle_orders))}", columns, rows, _meta(args, "hsp"),
                  {"n_subgroups": len(subgroups)})


def _compare(rows: list, table: str, key: str, computed: MetricsRow, expected: dict, tol: float) -> bool:
    ok = True
    for col, ref_value in expected.items():
        value = getattr(computed, col)
        dev = abs(value - float(ref_value))
        passed = dev <= tol
        ok &= passed
        rows.append({"table": table, "row": key, "stage": computed.stage.value, "column": col,
                     "reference": float(ref_value), "computed": value, "deviation": dev,
                     "tolerance": tol, "pass": passed})
    return ok


def cmd_tables(args) -> Report:
    which = [int(w) for w in args.which.split(",")] if args.which else [1, 2, 3, 4, 5]
    if any(w not in range(1, 6) for w in which):
        raise ConfigError("--which takes table numbers 1..5")
    scale = args.scale
    rows: list = []
    ok = True
    tol = reference.PRINTED_TOL
    if 1 in which:
        for k in range(1, 5):
            res = stage_metrics(build_dj(k))
            for s, row in res.items():
                ok &= _compare(rows, "dj", f"k={k}", row, dict(zip(reference.COLUMNS, reference.DJ[(k, s.value)])), tol)
    if 2 in which:
        for n in range(1, 7):
            res = stage_metrics(build_bv(n))
            for s, row in res.items():
                ok &= _compare(rows, "bv", f"n={n}", row, reference.bv(n)[s.value], 1e-8)
    if 3 in which:
        for n in range(2, 5):
            res = stage_metrics(build_simon(n))
            for s, row in res.items():
                ok &= _compare(rows, "simon", f"n={n}", row, reference.simon(n)[s.value], 2.0 ** (-n + 2))
    if 4 in which:
        for n, t in reference.simon_t_rows():
            p = build_simon(n).params
            row = hspkit.hsp_metrics_t(p["group"], p["subgroups"], p["priors"], t)
            ok &= _compare(rows, "simon_t", f"n={n},t={t}", row, reference.SIMON_T[(n, t)], tol)
    if 5 in which:
        for n, t in reference.phase_rows(scale):
            row = stage_metrics(build_phase_estimation(n, t), stages=[StageLabel.FINAL])[StageLabel.FINAL]
            ok &= _compare(rows, "phase", f"n={n},t={t}", row, reference.PHASE[(n, t)], tol)
    columns = ["table", "row", "stage", "column", "reference", "computed", "deviation", "tolerance", "pass"]
    worst = max((r["deviation"] for r in rows), default=0.0)
    failures = [r for r in rows if not r["pass"]]
    report = Report(f"tables_{scale}", columns, rows, _meta(args, "tables"),
                    {"scale": scale, "max_deviation": worst, "n_cells": len(rows), "n_failures": len(failures)})
    report.exit_code = EXIT_OK if ok else EXIT_TOLERANCE
    return report


def cmd_optimize(args) -> Report:
    problem = build_problem(args)
    if args.t is not None and args.problem != "phase":
        try:
            problem = lift_t_queries(problem, args.t)
        except (ValueError, DimensionCapError) as exc:
            raise ConfigError(str(exc)) from exc
    post = run_stages(problem)[StageLabel.POST_QUERY]
    cert = optimizer.certify(post)
    from .infometrics import holevo
    chi = holevo(post)
    if cert.pairwise_commuting:
        basis = optimizer.simultaneous_diagonalizer(post, args.seed).W
        d_min = optimizer.discord_in_basis(post, basis)
        converged, method, sweeps = True, "simultaneous_diagonalization", []
    else:
        res = optimizer.minimize_discord(post, restarts=args.restarts, tol=args.tol, seed=args.seed)
        basis, d_min, converged, sweeps = res.basis.W, res.D_min, res.converged, res.sweeps
        method = f"coordinate_ascent:{res.winner}"
    row = {"problem": problem.name, "orthogonal_support": cert.orthogonal_support,
           "pairwise_commuting": cert.pairwise_commuting, "chi": chi, "D_min": d_min,
           "I_max": max(chi - d_min, 0.0), "H_J": problem.class_entropy(), "converged": converged,
           "method": method}
    columns = list(row)
    extra = {"certificate": cert.as_dict(), "restarts": args.restarts, "sweeps": sweeps,
             "basis_real": basis.real, "basis_imag": basis.imag}
    report = Report(f"optimize_{_slug(problem.name)}", columns, [row], _meta(args, "optimize"), extra)
    report.extra["basis_file"] = f"{report.stem}.basis.npy"
    report.meta["_basis"] = basis
    report.exit_code = EXIT_OK if converged else EXIT_NONCONVERGED
    return report


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name).strip("_")


# ---------------------------------------------------------------- driver

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", choices=PROBLEMS)
    common.add_argument("--k", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--t", type=int)
    common.add_argument("--stage", help="pre_query, post_query, final, a comma list, or all")
    common.add_argument("--file", help="custom problem file")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="directory for report files")
    common.add_argument("--seed", type=int, default=optimizer.DEFAULT_SEED)
    common.add_argument("--scale", choices=("desk", "full"), default="desk")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--restarts", type=int, default=optimizer.DEFAULT_RESTARTS)
    common.add_argument("--tol", type=float, default=optimizer.DEFAULT_TOL)

    parser = argparse.ArgumentParser(prog="oracle-infolab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="stage metrics for one problem")
    p = sub.add_parser("tables", parents=[common], help="reproduce the reference tables")
    p.add_argument("--which", help="comma list of table numbers 1..5 (default all)")
    sub.add_parser("optimize", parents=[common], help="optimal post-query measurement")
    p = sub.add_parser("hsp", parents=[common], help="abelian hidden subgroup problem, t queries")
    p.add_argument("--orders", help="cycle orders of the group, e.g. 2,4")
    sub.add_parser("phase", parents=[common], help="phase estimation stage metrics")
    return parser


COMMANDS = {"run": cmd_run, "tables": cmd_tables, "optimize": cmd_optimize, "hsp": cmd_hsp, "phase": cmd_phase}


def _write(report: Report, out_dir: str, wall: float) -> None:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    basis = report.meta.pop("_basis", None)
    (path / f"{report.stem}.csv").write_text(render_csv(report))
    (path / f"{report.stem}.json").write_text(render_json(report))
    if basis is not None:
        np.save(path / f"{report.stem}.basis.npy", basis)
    side = {"wall_time_s": wall, "exit_code": report.exit_code, "version": __version__}
    (path / f"{report.stem}.meta.json").write_text(json.dumps(side, indent=2) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.threads < 1 or args.restarts < 1 or args.tol <= 0:
        print("error: --threads and --restarts must be >= 1 and --tol > 0", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        dimension_cap()
    except ValueError:
        print(f"error: {CAP_ENV_VAR} must be an integer", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        report = COMMANDS[args.command](args)
    except (ConfigError, DimensionCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CrossCheckError as exc:
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    wall = time.perf_counter() - start
    if args.out:
        _write(report, args.out, wall)
    report.meta.pop("_basis", None)
    sys.stdout.write(render_json(report) if args.format == "json" else render_csv(report))
    if report.exit_code == EXIT_TOLERANCE:
        bad = report.extra.get("n_failures", 0)
        print(f"{bad} reference cell(s) outside tolerance", file=sys.stderr)
    elif report.exit_code == EXIT_NONCONVERGED:
        print("optimizer did not converge; report flagged", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
