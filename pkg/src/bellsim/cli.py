"""Command-line entry point.

Subcommands::

    simulate       run a configured experiment, write an event log + manifest
    chsh           analyze an event log into a CHSH report
    lightcone      audit a geometry file for the locality loophole
    enumerate-lhv  print the exact classical CHSH bound by exhaustion
    benchmark      compare the compiled and numpy trial kernels

Exit codes: ``simulate`` 0 ok / 2 bad config / 3 unwritable output;
``chsh`` 0 ok (violation or not) / 1 missing data / 2 unreadable log;
``lightcone`` 0 pass / 1 fail / 2 parse error; others 0 or 2 on bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__, config as config_mod, estimators, kernels, lhv, sim, spacetime
from .errors import ConfigError, GeometryError, LogParseError, NoDataError

EXIT_OK = 0
EXIT_ANALYSIS_ERROR = 1
EXIT_AUDIT_FAIL = 1
EXIT_PARSE_ERROR = 2
EXIT_CONFIG_ERROR = 2
EXIT_OUTPUT_ERROR = 3

_MODE_BY_FLAG = {
    "fair": estimators.MODE_FAIR_SAMPLING,
    "inclusive": estimators.MODE_INCLUSIVE,
}


def _err(message: str) -> None:
    print(f"bellsim: error: {message}", file=sys.stderr)


def _load_run_config(args: argparse.Namespace) -> config_mod.ExperimentConfig:
    if (args.config is None) == (args.preset is None):
        raise ConfigError("exactly one of --config or --preset is required")
    if args.config is not None:
        cfg = config_mod.load_config(args.config)
    else:
        cfg = config_mod.load_preset(args.preset)
    return cfg.with_overrides(seed=args.seed, n_trials=args.n_trials)


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        cfg = _load_run_config(args)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG_ERROR

    log = sim.run_experiment(cfg, threads=args.threads)
    out_path = Path(args.out)
    manifest_path = Path(str(out_path) + ".manifest.json")
    manifest = {
        "config_digest": cfg.digest(),
        "seed": cfg.seed,
        "tool_version": __version__,
        "command_line": list(sys.argv),
        "outputs": [str(out_path)],
    }
    try:
        sim.write_event_log(log, out_path)
        manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_OUTPUT_ERROR
    print(f"wrote {out_path} ({cfg.n_trials} trials, config {cfg.digest()})")
    print(f"wrote {manifest_path}")
    return EXIT_OK


def cmd_chsh(args: argparse.Namespace) -> int:
    try:
        log = sim.read_event_log(args.log)
    except LogParseError as exc:
        _err(str(exc))
        return EXIT_PARSE_ERROR
    if sim.verify_header_digest(log) is False:
        print(
            "bellsim: warning: config digest in log header does not match the "
            "embedded config (was the file edited?)",
            file=sys.stderr,
        )
    try:
        report = estimators.chsh_report(
            estimators.tabulate(log),
            mode=_MODE_BY_FLAG[args.mode],
            config_digest=log.config_digest,
        )
    except NoDataError as exc:
        _err(str(exc))
        return EXIT_ANALYSIS_ERROR
    print(report.render(), end="")
    return EXIT_OK


def cmd_lightcone(args: argparse.Namespace) -> int:
    try:
        if args.preset is not None:
            geometry_path = config_mod.preset_geometry_path(args.preset)
        else:
            if args.geometry is None:
                raise GeometryError("a geometry file (or --preset) is required")
            geometry_path = Path(args.geometry)
        alice, bob = spacetime.load_geometry(geometry_path)
    except (GeometryError, ConfigError) as exc:
        _err(str(exc))
        return EXIT_PARSE_ERROR
    report = spacetime.lightcone_audit(alice, bob)
    print(report.render(), end="")
    return EXIT_OK if report.passed else EXIT_AUDIT_FAIL


def cmd_enumerate_lhv(args: argparse.Namespace) -> int:
    bound = lhv.enumerate_deterministic_chsh_bound(minus_position=args.grouping)
    if args.grouping is None:
        print(f"deterministic_chsh_bound = {bound:.9g}")
    else:
        from .core import CORRELATOR_LABELS

        label = CORRELATOR_LABELS[args.grouping]
        print(f"deterministic_chsh_bound_minus_{label} = {bound:.9g}")
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    try:
        cfg = config_mod.load_preset(args.preset).with_overrides(n_trials=args.n_trials)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG_ERROR

    print(f"kernel benchmark: preset={args.preset} n_trials={cfg.n_trials} threads={args.threads}")
    logs = {}
    for backend in kernels.available_backends():
        sim.run_experiment(cfg.with_overrides(n_trials=min(cfg.n_trials, 10_000)), backend=backend)
        start = time.perf_counter()
        logs[backend] = sim.run_experiment(cfg, threads=args.threads, backend=backend)
        elapsed = time.perf_counter() - start
        rate = cfg.n_trials / elapsed
        print(f"  backend={backend:<8} {elapsed:8.3f} s  {rate:10.3e} trials/s")
    if len(logs) == 2:
        import numpy as np

        same = all(
            np.array_equal(getattr(logs["compiled"], f), getattr(logs["python"], f))
            for f in ("a_set", "b_set", "a_out", "b_out", "valid")
        )
        print(f"  outputs identical: {'yes' if same else 'NO (bug!)'}")
        if not same:
            return 1
    else:
        print("  compiled backend not available; timed the numpy backend only")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellsim",
        description="Monte Carlo simulation and analysis of Bell-CHSH experiments.",
    )
    parser.add_argument("--version", action="version", version=f"bellsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run an experiment and write an event log")
    p_sim.add_argument("--config", help="experiment config file (key = value)")
    p_sim.add_argument("--preset", help=f"built-in config preset ({', '.join(config_mod.preset_names())})")
    p_sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sim.add_argument("--n-trials", type=int, default=None, help="override the trial count")
    p_sim.add_argument("--threads", type=int, default=1, help="worker threads (results unchanged)")
    p_sim.add_argument("--out", required=True, help="event-log output path")
    p_sim.set_defaults(func=cmd_simulate)

    p_chsh = sub.add_parser("chsh", help="CHSH report from an event log")
    p_chsh.add_argument("log", help="event-log file")
    p_chsh.add_argument(
        "--mode",
        choices=sorted(_MODE_BY_FLAG),
        default="fair",
        help="fair: coincidences only; inclusive: all events, non-detections as 0",
    )
    p_chsh.set_defaults(func=cmd_chsh)

    p_lc = sub.add_parser("lightcone", help="audit a geometry for the locality loophole")
    p_lc.add_argument("geometry", nargs="?", help="geometry file (key = value)")
    p_lc.add_argument("--preset", help="built-in geometry preset (photon_400m, ion_trap)")
    p_lc.set_defaults(func=cmd_lightcone)

    p_enum = sub.add_parser(
        "enumerate-lhv", help="exact classical CHSH bound over all 256 strategy pairs"
    )
    p_enum.add_argument(
        "--grouping",
        type=int,
        choices=(0, 1, 2, 3),
        default=None,
        help="restrict to one minus position (default: max over all four)",
    )
    p_enum.set_defaults(func=cmd_enumerate_lhv)

    p_bench = sub.add_parser("benchmark", help="compare trial-kernel backends")
    p_bench.add_argument("--preset", default="zw_ideal", help="config preset to simulate")
    p_bench.add_argument("--n-trials", type=int, default=1_000_000)
    p_bench.add_argument("--threads", type=int, default=1, help="worker threads for both backends")
    p_bench.set_defaults(func=cmd_benchmark)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
