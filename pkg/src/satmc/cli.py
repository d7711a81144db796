"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 model or property error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .checker import ModelChecker, results_csv
from .ctmc import build_state_space
from .errors import NumericalError, ParseError, SatmcError
from .export import to_csv, to_dot
from .lang.parser import parse_model, parse_property
from .numerics import DEFAULT_EPS, DEFAULT_TOL
from .ram.experiments import (
    bundled_manifests,
    load_manifest,
    parse_sweep,
    read_bundled,
    run_experiment_sweep,
    run_manifest,
)
from .sim import SimConfig, estimate_query, estimates_csv

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env_float(name: str, fallback: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"environment variable {name}={raw!r} is not a number") from None


def _common(p: argparse.ArgumentParser, queries: bool = True) -> None:
    p.add_argument("model", help="model file (bundled models may be named directly)")
    if queries:
        p.add_argument("-q", "--query", action="append", default=[], help="property text; repeatable")
        p.add_argument("-p", "--properties", help="file with one property per line")
    p.add_argument("-c", "--const", action="append", default=[], metavar="NAME=VALUE", help="constant override")
    p.add_argument("-o", "--output", help="output file (default: standard output)")


def _numeric(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, help="truncation error bound (env SATMC_EPS)")
    p.add_argument("--tol", type=float, help="iterative solver tolerance (env SATMC_TOL)")
    p.add_argument("--full-precision", action="store_true", help="print 17 significant digits")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="satmc", description="CSL model checking of continuous-time Markov chains")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="evaluate properties")
    _common(p)
    _numeric(p)
    p.add_argument("--format", choices=("text", "csv"), default="text")

    p = sub.add_parser("sweep", help="evaluate properties over a parameter grid")
    _common(p)
    _numeric(p)
    p.add_argument("--sweep", action="append", default=[], metavar="NAME=LO:HI:STEP", required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("simulate", help="estimate properties by simulation")
    _common(p)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--full-precision", action="store_true")

    p = sub.add_parser("export", help="write the state space")
    _common(p, queries=False)
    p.add_argument("--format", choices=("dot", "csv"), default="csv")

    p = sub.add_parser("ram", help="run a bundled experiment manifest")
    p.add_argument("manifest", nargs="?", help="manifest name or .manifest file")
    p.add_argument("--list", action="store_true", help="list bundled manifests")
    p.add_argument("-o", "--output", help="directory for one CSV per experiment")
    p.add_argument("--jobs", type=int, default=1)
    _numeric(p)
    return parser


# -- helpers -------------------------------------------------------------------


def _read_model(path: str) -> str:
    p = Path(path)
    if p.is_file():
        return p.read_text()
    if p.parent == Path(".") and not p.exists():
        try:
            return read_bundled(p.name)
        except FileNotFoundError:
            pass
    raise FileNotFoundError(f"model file {path!r} not found")


def _constants(items: list[str]) -> dict[str, float | bool]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or not name.isidentifier():
            raise UsageError(f"malformed constant override {item!r}; expected NAME=VALUE")
        value = value.strip()
        if value in ("true", "false"):
            out[name] = value == "true"
            continue
        try:
            out[name] = float(value)
        except ValueError:
            raise UsageError(f"constant {name}: {value!r} is not a number") from None
    return out


def _queries(args) -> list[str]:
    queries = list(args.query)
    if args.properties:
        text = Path(args.properties).read_text()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("//", 1)[0].strip()
            if line:
                try:
                    parse_property(line)
                except ParseError as exc:
                    raise ParseError(f"{args.properties}: {exc.message}", lineno, exc.column) from None
                queries.append(line)
    if not queries:
        raise UsageError("no properties given (use -q or -p)")
    for q in queries:
        parse_property(q)
    return queries


def _tolerances(args) -> tuple[float, float]:
    eps = args.eps if args.eps is not None else _env_float("SATMC_EPS", DEFAULT_EPS)
    tol = args.tol if args.tol is not None else _env_float("SATMC_TOL", DEFAULT_TOL)
    if not 0 < eps <= 1e-3:
        raise UsageError("--eps must lie in (0, 1e-3]")
    if not tol > 0:
        raise UsageError("--tol must be positive")
    return eps, tol


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _digits(args) -> int:
    return 17 if getattr(args, "full_precision", False) else 6


# -- subcommands ------------------------------------------------------------------


def _cmd_check(args) -> None:
    eps, tol = _tolerances(args)
    source = _read_model(args.model)
    queries = _queries(args)
    c = build_state_space(parse_model(source), _constants(args.const))
    checker = ModelChecker(c, eps, tol)
    results = [checker.check(q) for q in queries]
    if args.format == "csv":
        _emit(results_csv(results, _digits(args)), args.output)
    else:
        width = max(len(r.query) for r in results)
        lines = [f"{r.query.ljust(width)}  {r.format_value(_digits(args))}  (tolerance {r.tolerance:g})" for r in results]
        _emit("\n".join(lines) + "\n", args.output)


def _cmd_sweep(args) -> None:
    eps, tol = _tolerances(args)
    source = _read_model(args.model)
    queries = _queries(args)
    try:
        sweeps = [parse_sweep(s) for s in args.sweep]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    table = run_experiment_sweep(
        parse_model(source), queries, sweeps, _constants(args.const), jobs=args.jobs, eps=eps, tol=tol
    )
    _emit(table.to_csv(_digits(args)), args.output)


def _cmd_simulate(args) -> None:
    source = _read_model(args.model)
    queries = _queries(args)
    try:
        cfg = SimConfig(args.reps, 0.0, args.seed, args.confidence)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    c = build_state_space(parse_model(source), _constants(args.const))
    rows = [(q, estimate_query(c, q, cfg)) for q in queries]
    _emit(estimates_csv(rows, _digits(args)), args.output)


def _cmd_export(args) -> None:
    source = _read_model(args.model)
    c = build_state_space(parse_model(source), _constants(args.const))
    _emit(to_dot(c) if args.format == "dot" else to_csv(c), args.output)


def _cmd_ram(args) -> None:
    if args.list:
        _emit("\n".join(bundled_manifests()) + "\n", None)
        return
    if not args.manifest:
        raise UsageError("name a manifest or pass --list")
    eps, tol = _tolerances(args)
    manifest = load_manifest(args.manifest)
    tables = run_manifest(manifest, jobs=args.jobs, eps=eps, tol=tol)
    digits = _digits(args)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        for name, table in tables.items():
            (out / f"{manifest.name}-{name}.csv").write_text(table.to_csv(digits))
    else:
        chunks = [f"# {manifest.name}/{name}\n{table.to_csv(digits)}" for name, table in tables.items()]
        _emit("\n".join(chunks), None)


COMMANDS = {
    "check": _cmd_check,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "export": _cmd_export,
    "ram": _cmd_ram,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"satmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"satmc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SatmcError, FileNotFoundError, ValueError) as exc:
        print(f"satmc: error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
