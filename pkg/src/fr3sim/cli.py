"""Command-line entry point: ``fr3sim power | rate | reproduce``.

All randomness derives from ``--seed`` (default 42). ``FR3SIM_THREADS`` caps
the number of worker threads of the rate engine.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
import time
from pathlib import Path

from . import reference
from .channel import ChannelError
from .linkrate import energy_efficiency, ergodic_rates
from .powermodel import p_total
from .scenario import ScenarioConfig, ScenarioError, load_scenario, preset
from .sweep import full_load_rates, upa_dims

DEFAULT_SEED = 42
EXIT_FAIL, EXIT_USAGE = 1, 2


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return a, b


def _m_ant(text: str) -> tuple[int, int]:
    """``1024`` (most nearly square UPA) or ``32x32``."""
    try:
        if "x" in text:
            rows, cols = (int(v) for v in text.split("x"))
            return rows, cols
        return upa_dims(int(text))
    except (ValueError, ScenarioError):
        raise argparse.ArgumentTypeError(f"expected an antenna count or ROWSxCOLS, got {text!r}")


def _scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("scenario", nargs="?", help="JSON scenario file overriding the preset")
    p.add_argument("--preset", default="paper-fig2", help="base parameter set (default: paper-fig2)")
    p.add_argument("--m-rf", type=int, help="number of RF chains")
    p.add_argument("--m-ant", type=_m_ant, help="antenna count or ROWSxCOLS")
    p.add_argument("--load", type=_pair, metavar="X_DL,X_UL", help="resource loads in [0, 1]")
    p.add_argument("--channel", choices=("rayleigh", "clustered"), help="channel model")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--drops", type=int, help="channel drops of the rate engine")
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")
    p.add_argument("--out-dir", type=Path, help="also write the result here")


def build_scenario(args) -> ScenarioConfig:
    config = preset(args.preset)
    if args.scenario:
        config = load_scenario(args.scenario, base=config)
    changes = {}
    if args.m_ant:
        changes.update(M_ant_rows=args.m_ant[0], M_ant_cols=args.m_ant[1])
        if args.m_rf is None and config.M_rf > args.m_ant[0] * args.m_ant[1]:
            changes["M_rf"] = args.m_ant[0] * args.m_ant[1]
    if args.m_rf is not None:
        changes["M_rf"] = args.m_rf
    if args.load:
        changes.update(x_dl=args.load[0], x_ul=args.load[1])
    if args.channel:
        changes["channel"] = dataclasses.replace(config.channel, model=args.channel)
    return config.replace(**changes) if changes else config


def _emit(record: dict, fmt: str, name: str, out_dir: Path | None, table_text: str) -> None:
    if fmt == "json":
        text = json.dumps(record, indent=2)
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(record), lineterminator="\n")
        writer.writeheader()
        writer.writerow(record)
        text = buf.getvalue().rstrip("\n")
    else:
        text = table_text
    print(text)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{name}.json").write_text(json.dumps(record, indent=2))


def cmd_power(args) -> int:
    config = build_scenario(args)
    if args.assume_rates is not None:
        rates = args.assume_rates
    else:
        full = full_load_rates(
            [config], args.drops or reference.POWER_PREPASS_DROPS, args.seed, quiet=True)[0]
        rates = (config.x_dl * full[0], config.x_ul * full[1])
    b = p_total(config, rates)
    record = b.flat()
    record.update(M_rf=config.M_rf, M_ant=config.M_ant, fully_digital=config.fully_digital,
                  load_independent=b.load_independent)
    rows = [("digital", b.digital_load_independent, b.digital_load_dependent),
            ("analog", b.analog_load_independent, b.analog_load_dependent),
            ("PA", b.pa_load_independent, b.pa_load_dependent)]
    lines = [f"M_ant={config.M_ant} M_rf={config.M_rf} "
             f"({'fully digital' if config.fully_digital else 'hybrid'}) "
             f"loads=({config.x_dl:g}, {config.x_ul:g}) rates=({rates[0] / 1e9:.3f}, {rates[1] / 1e9:.3f}) Gbit/s",
             f"{'component':<10} {'load-indep W':>13} {'load-dep W':>11}"]
    lines += [f"{n:<10} {a:13.3f} {d:11.3f}" for n, a, d in rows]
    lines.append(f"{'total':<10} {b.total:13.3f} W")
    _emit(record, args.format, "power", args.out_dir, "\n".join(lines))
    return 0


def cmd_rate(args) -> int:
    config = build_scenario(args)
    rep = ergodic_rates(config, n_drops=args.drops or 200, seed=args.seed)
    record = rep.to_dict()
    b = p_total(config, (rep.R_dl, rep.R_ul))
    rep.ee = energy_efficiency(rep, b) if b.total > 0 else None
    record["ee_bit_per_joule"] = rep.ee
    record["P_total"] = b.total
    text = (f"model={rep.model} M_rf={rep.M_rf} drops={rep.n_drops} seed={rep.seed}\n"
            f"R_DL = {rep.R_dl / 1e9:.4f} Gbit/s (stderr {rep.stderr_dl / 1e9:.4f})\n"
            f"R_UL = {rep.R_ul / 1e9:.4f} Gbit/s (stderr {rep.stderr_ul / 1e9:.4f})\n"
            f"EE   = {(rep.ee or 0) / 1e6:.3f} Mbit/J at {b.total:.1f} W")
    _emit(record, args.format, "rate", args.out_dir, text)
    if args.out_dir is not None:
        rep.write_per_drop_csv(args.out_dir / "rate_per_drop.csv")
    return 0


def cmd_reproduce(args) -> int:
    base = preset(args.preset)
    if args.scenario:
        base = load_scenario(args.scenario, base=base)
    if args.channel:
        base = base.replace(channel=dataclasses.replace(base.channel, model=args.channel))
    t0 = time.perf_counter()
    result = reference.reproduce(args.figure, base, args.out_dir, args.drops, args.seed,
                                 args.assume_rates)
    elapsed = time.perf_counter() - t0
    summary = result.summary()
    summary["runtime_s"] = elapsed
    if args.format == "json":
        print(json.dumps(summary, indent=2))
    elif args.format == "csv":
        print(result.table.to_csv().rstrip("\n"))
    else:
        print(reference.format_checks(result.checks))
        print(f"\n{args.figure}: {summary['n_checks'] - summary['n_failed']}/{summary['n_checks']} "
              f"checks within tolerance ({elapsed:.2f} s) -> {'PASS' if result.passed else 'FAIL'}")
    if args.out_dir is not None:
        (args.out_dir / f"{args.figure}.summary.json").write_text(json.dumps(summary, indent=2))
    return 0 if result.passed else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fr3sim", description="Base-station power and rate evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("power", help="power consumption breakdown of one scenario")
    _scenario_args(p)
    p.add_argument("--assume-rates", type=_pair, metavar="R_DL,R_UL",
                   help="use these rates in bit/s instead of running the rate engine")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("rate", help="ergodic DL/UL sum rates of one scenario")
    _scenario_args(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("reproduce", help="rerun a reference figure and compare with its targets")
    p.add_argument("figure", choices=reference.FIGURES)
    _scenario_args(p)
    p.add_argument("--assume-rates", type=_pair, metavar="R_DL,R_UL",
                   help="full-load rates in bit/s for the power figures")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ChannelError) as exc:
        print(f"fr3sim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"fr3sim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
