"""Command line entry point: ``closinglab <kind> [options]``.

Exit status is 0 when every row passes, 1 when at least one row fails, 2 on bad input.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import reports
from .errors import ConfigError, GeometryError
from .experiments import RUNNERS, ExperimentConfig, constants_table, run_experiment

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2

# flags that only control output, kept out of the CSV header
OUTPUT_KEYS = {"out", "json_out", "plot", "config", "extra"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    # defaults are None so that config-file values are only overridden by explicit flags
    p.add_argument("--kappa1", type=float)
    p.add_argument("--kappa2", type=float)
    p.add_argument("--kappa", type=float, help="curvature scale of the model plane (defaults to kappa1)")
    p.add_argument("--t0", type=float)
    p.add_argument("--inj-radius", dest="inj_radius", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--json-out", dest="json_out")
    p.add_argument("--plot", help="SVG output path (partner, partner-scaling, closing)")
    p.add_argument("--T1", type=float)
    p.add_argument("--T2", type=float)
    p.add_argument("--eps-min", dest="eps_min", type=float)
    p.add_argument("--eps-max", dest="eps_max", type=float)
    p.add_argument("--eps-count", dest="eps_count", type=int)
    p.add_argument("--allow-large-eps", dest="allow_large_eps", action="store_true", default=None)
    p.add_argument("--mirror", action="store_true", default=None)
    p.add_argument("--sup-step", dest="sup_step", type=float)
    p.add_argument("--cone-samples", dest="cone_samples", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--strength", type=float)
    p.add_argument("--word")
    p.add_argument("--L", dest="L", type=int)
    p.add_argument("--L-cut", dest="L_cut", type=int)
    p.add_argument("--side-min", dest="side_min", type=float)
    p.add_argument("--side-max", dest="side_max", type=float)
    p.add_argument("--r-lo", dest="r_lo", type=float)
    p.add_argument("--r-hi", dest="r_hi", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="closinglab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in RUNNERS:
        _add_common(sub.add_parser(kind))
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - fields
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for k, v in vars(args).items():
        if v is not None and k in fields:
            values[k] = v
    values["kind"] = args.kind
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def header_for(cfg: ExperimentConfig) -> dict:
    settings = {k: v for k, v in dataclasses.asdict(cfg).items() if k not in OUTPUT_KEYS}
    return {
        "kind": cfg.kind,
        "seed": cfg.seed,
        "sup_step": cfg.sup_step,
        "constants": cfg.constants.as_dict(),
        "config": settings,
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        rows, summary = run_experiment(cfg)
    except (ConfigError, GeometryError) as exc:
        print(f"closinglab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    header = header_for(cfg)
    if cfg.kind == "constants" and cfg.out is None:
        print(constants_table(cfg.constants))
    else:
        text = reports.csv_text(rows, header, reports.schema_columns(cfg.kind))
        if cfg.out:
            Path(cfg.out).write_text(text)
        else:
            sys.stdout.write(text)
    if cfg.json_out:
        reports.write_json(cfg.json_out, rows, header, summary)
    if cfg.plot:
        try:
            reports.emit_plot(rows, cfg.kind, cfg.plot)
        except ValueError as exc:
            print(f"closinglab: error: {exc}", file=sys.stderr)
            return EXIT_INPUT
    print("summary: " + reports.dumps(summary), file=sys.stderr)
    return EXIT_VIOLATION if summary["violations"] else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
