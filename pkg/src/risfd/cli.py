"""Command-line front end: one subcommand per experiment kind.

Exit codes: 0 on success, 2 for configuration problems, 3 for I/O failures.
A JSON config file mirrors the ExperimentSpec fields; command-line flags
override anything the file sets.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .experiments import (DEFAULT_SWEEPS, KINDS, ConfigError, ExperimentSpec,
                          aggregate, emit_csv, emit_svg, headline_metric,
                          run_experiment)
from .scene import Scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _parse_bits(token: str):
    if token == "inf":
        return math.inf
    try:
        return int(token)
    except ValueError as err:
        raise ConfigError(f"bad --bits value {token!r}") from err


def _parse_sweep_tokens(kind: str, tokens: list[str]) -> list:
    if kind == "convergence":
        return list(tokens)
    if kind == "kappa_vs_bits":
        return [math.inf if t == "inf" else int(t) for t in tokens]
    out = []
    for t in tokens:
        v = float(t)
        out.append(int(v) if v.is_integer() else v)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risfd",
        description="Design and evaluate RIS-assisted in-band full-duplex links.")
    sub = parser.add_subparsers(dest="kind_cmd", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind.replace("_", "-"), help=f"run the {kind} experiment")
        p.set_defaults(kind=kind)
        p.add_argument("--config", help="JSON file with ExperimentSpec fields")
        p.add_argument("--seed", type=int, help="base RNG seed")
        p.add_argument("--trials", type=int, help="channel draws per sweep point")
        p.add_argument("--layout", choices=("ula", "ura"), help="BS array layout")
        p.add_argument("--ris", help="RIS grid size, e.g. 16x16")
        p.add_argument("--bits", help="RIS phase resolution: 2..6 or inf")
        p.add_argument("--md", type=int, help="downlink effective antennas")
        p.add_argument("--enob", help="comma-separated ADC resolutions (ENOB sweep)")
        p.add_argument("--sweep", help="comma-separated sweep points for this kind")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--svg", action="store_true",
                       help="also write a chart next to the CSV")
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from err
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    data["kind"] = args.kind  # the subcommand wins over the file

    scn = data.get("scenario", {})
    if not isinstance(scn, dict):
        raise ConfigError("scenario must be a JSON object")
    if args.seed is not None:
        scn["seed"] = args.seed
    if args.layout is not None:
        scn["layout"] = args.layout
    if args.ris is not None:
        from .experiments import parse_ris_size
        scn["ris_rows"], scn["ris_cols"] = parse_ris_size(args.ris)
    if args.bits is not None:
        scn["ris_bits"] = "inf" if args.bits == "inf" else _parse_bits(args.bits)
    if args.md is not None:
        scn["m_d"] = args.md
    data["scenario"] = scn

    if args.trials is not None:
        data["trials"] = args.trials
    if args.out is not None:
        data["out_path"] = args.out
    if args.enob is not None and args.kind == "rates_vs_enob":
        data["sweep"] = _parse_sweep_tokens(args.kind, args.enob.split(","))
    if args.sweep is not None:
        data["sweep"] = _parse_sweep_tokens(args.kind, args.sweep.split(","))
    try:
        return ExperimentSpec.from_dict(data)
    except ValueError as err:
        raise ConfigError(str(err)) from err


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _spec_from_args(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    records = run_experiment(spec)
    try:
        emit_csv(records, spec.out_path)
        if args.svg:
            svg_path = spec.out_path.rsplit(".", 1)[0] + ".svg"
            emit_svg(records, svg_path)
            print(f"wrote {svg_path}")
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO

    metric = headline_metric(spec.kind)
    for method, rows in sorted(aggregate(records, metric).items()):
        for point, mean, std, n in rows:
            print(f"{spec.kind} {method} {point}: {metric} = {mean:.4g} +- {std:.2g} (n={n})")
    print(f"wrote {spec.out_path} ({len(records)} records)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
