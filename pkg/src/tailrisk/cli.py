"""Command-line front end.

Subcommands::

    tailrisk estimate --config run.json [--seed S] [--workers W] [--format csv|table] [--out PATH]
    tailrisk reproduce-table --table {1,2,3,4} [--N 10000] [--reps 100] [--seed S] [--out PATH]
    tailrisk diagnose --config run.json [--c-grid 0.5,1,2] [--format csv|table] [--out PATH]

Exit codes: 0 success, 1 runtime error, 2 usage error, 3 config file not
found, 4 config schema violation, 5 sampler configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import jsonschema

from . import __version__
from .asymptotics import AsymptoticContext, es_ratio_bound, phi_conditional, phi_scaling, tail_approx_U, var_ratio_bound
from .edf import second_moment_ratio, second_moment_ratio_se
from .harness import (
    TABLES,
    ExperimentConfig,
    oracle_tail_n2,
    reproduce_table,
    run_experiment,
    table_to_csv,
    table_to_text,
)
from .samplers import Algorithm, ConfigError, batch
from .streams import substream

log = logging.getLogger("tailrisk")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_SCHEMA = 4
EXIT_SAMPLER = 5

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tailrisk experiment config",
    "type": "object",
    "additionalProperties": False,
    "required": ["alpha", "n", "levels", "algorithm", "N", "reps", "seed", "mode"],
    "properties": {
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "n": {"type": "integer", "minimum": 1},
        "levels": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        },
        "algorithm": {"enum": ["standard", "conditional", "scaling", "mc", "dlw", "sm"]},
        "N": {"type": "integer", "minimum": 1},
        "reps": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "mode": {"enum": ["VaR", "ES", "TailProb"]},
        "a": {"type": "number"},
        "sigma": {"type": "number"},
        "mix_p": {"type": "array", "items": {"type": "number"}},
        "output": {"type": "string"},
        "format": {"enum": ["csv", "table"]},
    },
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def load_config(path: str | Path) -> tuple[ExperimentConfig, dict]:
    """Parse and validate a JSON config; returns the experiment config and output options."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise CliError(EXIT_NOT_FOUND, f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_SCHEMA, f"{path}: invalid JSON: {exc}") from None
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        field = "".join(f"[{p}]" if isinstance(p, int) else (f".{p}" if i else str(p))
                        for i, p in enumerate(exc.absolute_path)) or "<root>"
        raise CliError(EXIT_SCHEMA, f"{path}: field {field}: {exc.message}") from None
    out_opts = {k: raw.pop(k) for k in ("output", "format") if k in raw}
    try:
        cfg = ExperimentConfig(**raw)
    except ConfigError as exc:
        raise CliError(EXIT_SAMPLER, f"{path}: {exc}") from None
    return cfg, out_opts


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_estimate(args) -> int:
    cfg, opts = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    fmt = args.format or opts.get("format", "csv")
    report = run_experiment(cfg, workers=args.workers, backend=args.backend)
    text = report.to_csv(timing=args.timing) if fmt == "csv" else report.to_table()
    _emit(text, args.out or opts.get("output"))
    return EXIT_OK


def cmd_reproduce_table(args) -> int:
    rows = reproduce_table(
        args.table, N=args.N, reps=args.reps, seed=args.seed,
        reference_N=args.reference_N, reference_reps=args.reference_reps,
        workers=args.workers, backend=args.backend, with_reference=not args.no_reference,
    )
    csv_text = table_to_csv(rows)
    if args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        print(table_to_text(args.table, rows))
    if args.out:
        Path(args.out).write_text(csv_text)
        log.info("wrote %s", args.out)
    return EXIT_OK


def _reference_tail(cfg: ExperimentConfig):
    d = cfg.dist
    if cfg.n == 1:
        return d.tail, "exact"
    if cfg.n == 2:
        return (lambda x: oracle_tail_n2(d, x)), "exact"
    ctx = AsymptoticContext(d, cfg.n)
    return (lambda x: tail_approx_U(ctx, x)), "U"


def diagnose_rows(cfg: ExperimentConfig, c_grid, backend=None) -> tuple[list[dict], list[str]]:
    d = cfg.dist
    tail_fn, tail_kind = _reference_tail(cfg)
    rows, notes = [], []
    for j, p in enumerate(cfg.levels):
        lam = cfg.anchor(p)
        mix = cfg.mixture(lam)
        samples = batch(d, mix, cfg.N, substream(cfg.seed, j, 0), backend)
        ctx = AsymptoticContext(d, cfg.n, None if mix.algorithm is Algorithm.STANDARD else mix)
        for c in c_grid:
            if mix.algorithm is Algorithm.CONDITIONAL:
                phi = phi_conditional(ctx, c) if c >= 1 else math.nan
            elif mix.algorithm is Algorithm.SCALING:
                phi = phi_scaling(ctx, c, lam)
            else:
                phi = math.nan
            rows.append({
                "p": p, "lambda": lam, "c": c,
                "ratio": second_moment_ratio(samples, c, lam, tail_fn),
                "ratio_se": second_moment_ratio_se(samples, c, lam, tail_fn),
                "phi": phi,
            })
        if mix.algorithm is Algorithm.STANDARD:
            notes.append(f"p={p}: no phi bound for standard Monte Carlo")
            continue
        notes.append(f"p={p}: var_ratio_bound={var_ratio_bound(ctx, lam):.6g}")
        if cfg.alpha <= 2:
            notes.append(f"p={p}: es_ratio_bound=not applicable (α ≤ 2)")
        elif mix.algorithm is Algorithm.CONDITIONAL:
            K = phi_conditional(ctx, 1.0)
            notes.append(f"p={p}: es_ratio_bound={es_ratio_bound(cfg.alpha, K):.6g} (K=phi(1)={K:.6g})")
        else:
            notes.append(f"p={p}: es_ratio_bound=not applicable (scaling bound is not of the form K c^-alpha)")
    notes.append(f"reference tail: {tail_kind}")
    return rows, notes


def cmd_diagnose(args) -> int:
    cfg, opts = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    try:
        grid = [float(x) for x in args.c_grid.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_USAGE, f"invalid --c-grid {args.c_grid!r}") from None
    if not grid or any(not c > 0 for c in grid):
        raise CliError(EXIT_USAGE, "--c-grid needs positive numbers")
    rows, notes = diagnose_rows(cfg, grid, backend=args.backend)
    fmt = args.format or opts.get("format", "table")
    if fmt == "csv":
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow({k: repr(v) for k, v in r.items()})
        text = buf.getvalue() + "".join(f"# {n}\n" for n in notes)
    else:
        lines = [f"{'p':>10} {'lambda':>12} {'c':>6} {'ratio':>12} {'(se)':>10} {'phi(c)':>12}"]
        for r in rows:
            lines.append(f"{r['p']:>10.6g} {r['lambda']:>12.6g} {r['c']:>6.3g} {r['ratio']:>12.6g} "
                         f"{r['ratio_se']:>10.3g} {r['phi']:>12.6g}")
        text = "\n".join(lines + notes) + "\n"
    _emit(text, args.out or opts.get("output"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailrisk", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="top-level seed (unsigned 64-bit)")
        p.add_argument("--workers", type=int, default=1, help="replication threads")
        p.add_argument("--format", choices=("csv", "table"), default=None)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--backend", choices=("numba", "numpy"), default=None)

    p = sub.add_parser("estimate", help="run a replicated experiment from a config file")
    common(p)
    p.add_argument("--timing", action="store_true", help="add the avg_time_s column to CSV output")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("reproduce-table", help="rerun one of the four reference tables")
    common(p, config=False)
    p.add_argument("--table", type=int, choices=sorted(TABLES), required=True)
    p.add_argument("--N", type=int, default=10_000, help="samples per replication")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--reference-N", type=int, default=50_000)
    p.add_argument("--reference-reps", type=int, default=100)
    p.add_argument("--no-reference", action="store_true", help="skip the reference (True) column")
    p.set_defaults(func=cmd_reproduce_table, seed=0)

    p = sub.add_parser("diagnose", help="second-moment ratios against the phi bounds")
    common(p)
    p.add_argument("--c-grid", default="0.5,1,2,4", help="comma-separated c values")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "reproduce-table" and args.seed is None:
        args.seed = 0
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SAMPLER
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
