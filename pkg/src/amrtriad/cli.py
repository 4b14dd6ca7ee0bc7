"""Command-line entry point ``amrtriad``.

Exit status: 0 on success, 1 when a run or a validation check fails,
2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import __version__
from .config import (
    ConfigError,
    EngineChoice,
    EnsembleSpec,
    ScenarioConfig,
    parse_config,
    serialize_config,
)
from .model import ModelError
from .presets import PRESET_NAMES, preset_document
from .runner import run_scenario
from .sde import NoisePlan
from .validation import run_all

ENV_OUT = "AMRTRIAD_OUT"
ENV_SEED = "AMRTRIAD_SEED"
ENV_THREADS = "AMRTRIAD_THREADS"
ENV_CONFIG = "AMRTRIAD_CONFIG"


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {v}")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help=f"scenario document (default: ${ENV_CONFIG})")
    common.add_argument("--out", metavar="DIR", help=f"output directory (default: ${ENV_OUT} or ./out)")
    common.add_argument("--seed", type=_u64, metavar="U64",
                        help=f"noise seed and ensemble base seed (default: ${ENV_SEED})")
    common.add_argument("--threads", type=_positive, metavar="INT",
                        help=f"worker threads (default: ${ENV_THREADS} or 1)")
    common.add_argument("--print-config", action="store_true",
                        help="print the effective configuration and exit")

    parser = argparse.ArgumentParser(
        prog="amrtriad",
        description="Resistance-reversal model: deterministic, stochastic and fractional runs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("thresholds", parents=[common],
                   help="threshold and equilibrium table (defaults to the thresholds-table preset)")
    sub.add_parser("simulate", parents=[common], help="run the trajectories of a scenario")
    sub.add_parser("ensemble", parents=[common],
                   help="run a stochastic ensemble with stationary histograms")
    fig = sub.add_parser("figure", parents=[common], help="run a named preset")
    fig.add_argument("preset", choices=PRESET_NAMES)
    sub.add_parser("validate", help="run the oracle checks")
    return parser


def _resolve(args, environ) -> tuple[ScenarioConfig, str, int]:
    config_path = args.config or environ.get(ENV_CONFIG)
    if args.command == "figure":
        if args.config:
            raise ConfigError("--config", "figure runs a preset; drop --config")
        text = preset_document(args.preset)
    elif config_path:
        with open(config_path, encoding="utf-8") as fh:
            text = fh.read()
    elif args.command == "thresholds":
        text = preset_document("thresholds-table")
    else:
        raise ConfigError("--config", f"{args.command} needs a scenario document")

    cfg = parse_config(text, environ)

    if args.command == "thresholds":
        cfg = replace(cfg, task="thresholds")
    elif args.command == "simulate":
        if cfg.task == "thresholds":
            cfg = replace(cfg, task="simulate")
        if cfg.ensemble is not None:
            raise ConfigError("ensemble", "use the 'ensemble' subcommand for ensemble scenarios")
    elif args.command == "ensemble":
        if cfg.engine is not EngineChoice.SDE:
            raise ConfigError("engine", "ensemble needs engine = sde")
        cfg = replace(cfg, task="simulate", ensemble=cfg.ensemble or EnsembleSpec())

    seed = args.seed
    if seed is None and environ.get(ENV_SEED):
        try:
            seed = _u64(environ[ENV_SEED])
        except argparse.ArgumentTypeError as exc:
            raise ConfigError(ENV_SEED, str(exc)) from None
    if seed is not None:
        cfg = replace(cfg, noise=NoisePlan(seed, increment_rule=cfg.noise.increment_rule))
        if cfg.ensemble is not None:
            if seed + cfg.ensemble.n_paths > 2**64:
                raise ConfigError("--seed", "derived path seeds must fit in 64 bits")
            cfg = replace(cfg, ensemble=replace(cfg.ensemble, base_seed=seed))

    out = args.out or environ.get(ENV_OUT) or "out"
    threads = args.threads
    if threads is None:
        try:
            threads = _positive(environ.get(ENV_THREADS, "1"))
        except argparse.ArgumentTypeError as exc:
            raise ConfigError(ENV_THREADS, str(exc)) from None
    return cfg, out, threads


def _summary(report: dict) -> list[str]:
    lines = []
    if report["task"] == "thresholds":
        lines.append(f"{'gamma':>6} {'sigma':>8} {'K0d':>9} {'K0s':>9} {'xi_d':>12} {'xi_s':>12}")
        for c in report["cells"]:
            th = c["thresholds"]
            g = report["config"]["model.gamma"] if c["sweep_value"] is None else c["sweep_value"]
            sigma = report["config"]["model.sigma"]
            xi_d = "-" if th["xi_d"] is None else f"{th['xi_d']:.2f}"
            xi_s = "-" if th["xi_s"] is None else f"{th['xi_s']:.2f}"
            lines.append(f"{g:>6g} {sigma:>8.1e} {th['k0_d']:>9.6f} {th['k0_s']:>9.6f} "
                         f"{xi_d:>12} {xi_s:>12}")
        return lines
    for c in report["cells"]:
        coords = " ".join(f"{k}={c[k]}" for k in ("panel", "engine", "gamma", "sigma", "alpha")
                          if k in c)
        if "outcome" in c:
            o = c["outcome"]
            lines.append(f"{coords}: {o['kind']} (R_end={o['terminal_value']:.6g})")
        else:
            e = c["ensemble"]
            lines.append(f"{coords}: histogram mean {e['histogram_mean']:.6g}, "
                         f"paths {e['path_outcomes']}")
        for note in c["annotations"]:
            lines.append(f"    note: {note}")
    return lines


def main(argv=None, environ=None) -> int:
    environ = os.environ if environ is None else environ
    args = build_parser().parse_args(argv)

    if args.command == "validate":
        results = run_all()
        for c in results:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail} ({c.seconds:.2f} s)")
        return 0 if all(c.passed for c in results) else 1

    try:
        cfg, out, threads = _resolve(args, environ)
    except (ModelError, OSError) as exc:
        print(f"amrtriad: configuration error: {exc}", file=sys.stderr)
        return 2

    if args.print_config:
        sys.stdout.write(serialize_config(cfg))
        return 0

    try:
        report = run_scenario(cfg, out, threads=threads)
    except ModelError as exc:
        print(f"amrtriad: run failed: {exc}", file=sys.stderr)
        return 1
    for line in _summary(report):
        print(line)
    print(f"wrote {len(report['cells'])} cell(s) to {out} "
          f"in {report['runtime_s']:.1f} s; report: {report['report']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
