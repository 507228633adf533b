"""Command line front end: run episodes, inspect metrics, list presets, serve."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .configio import (
    ConfigError,
    default_config,
    load_config,
    load_trajectory_csv,
    save_snapshots_json,
    save_trajectory_csv,
)
from .contact import SolverError
from .gait import GaitKind, preset
from .runner import Metrics, SimConfig, compute_metrics, run_episode

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

HARDWARE_SPEEDS = {  # mm/s, desk measurements of the physical robot
    GaitKind.FORWARD: 27.6,
    GaitKind.BACKWARD: 35.5,
    GaitKind.SIDEWINDING: 20.0,
}

_KIND_CHOICES = ("forward", "backward", "sidewinding")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snakesim",
        description="Desk-scale locomotion simulator for a tendon-driven snake robot.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one episode and print its metrics")
    run.add_argument("--config", help="key=value config file; defaults used if omitted")
    run.add_argument("--gait", choices=_KIND_CHOICES,
                     help="locomotion preset; overrides the config's gait kind and pulls")
    run.add_argument("--cycles", type=int, help="undulation periods to simulate")
    run.add_argument("--dt", type=float, help="timestep in seconds")
    run.add_argument("--out", help="write the trajectory CSV here")
    run.add_argument("--bias", type=float, default=0.0,
                     help="constant steering bias in degrees")
    run.add_argument("--snapshots", action="store_true",
                     help="also write per-tick centerline JSON next to --out")

    metrics = sub.add_parser("metrics", help="recompute metrics from a trajectory CSV")
    metrics.add_argument("--traj", required=True, help="trajectory CSV path")
    metrics.add_argument("--config", help="config the trajectory was produced with")
    metrics.add_argument("--gait", choices=_KIND_CHOICES,
                         help="gait preset the trajectory was produced with")
    metrics.add_argument("--bias", type=float, default=0.0,
                         help="constant bias the trajectory was produced with")

    sub.add_parser("presets", help="print the locomotion parameter presets")

    serve = sub.add_parser("serve", help="start the teleoperation service")
    serve.add_argument("--config", help="key=value config file; defaults used if omitted")
    serve.add_argument("--bind", default="127.0.0.1:8000", help="addr:port to listen on")
    serve.add_argument("--record", help="append received commands to this JSONL file")
    serve.add_argument("--decimation", type=int, default=5,
                       help="broadcast every Nth simulation tick")
    return parser


def _resolve_config(args) -> SimConfig:
    if args.config:
        config = load_config(args.config)
        if args.gait:
            kind = GaitKind(args.gait)
            config = replace(config, gait=replace(
                config.gait, tendons=preset(kind).tendons, kind=kind))
    else:
        config = default_config(GaitKind(args.gait) if args.gait else GaitKind.FORWARD)
    overrides = {}
    if getattr(args, "cycles", None) is not None:
        overrides["cycles"] = args.cycles
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
    return replace(config, **overrides) if overrides else config


def _print_metrics(metrics: Metrics, config: SimConfig, out=None) -> None:
    out = out if out is not None else sys.stdout
    kind = config.gait.kind
    speed_line = f"mean speed      {metrics.mean_speed:8.2f} mm/s"
    if kind in HARDWARE_SPEEDS:
        speed_line += f"   (hardware {kind.value}: {HARDWARE_SPEEDS[kind]} mm/s)"
    print(speed_line, file=out)
    print(f"heading drift   {metrics.heading_drift:+8.2f} deg/cycle", file=out)
    print(f"direction       [{metrics.direction[0]:+.3f}, {metrics.direction[1]:+.3f}]",
          file=out)
    cells = " ".join(f"{d:.1f}" for d in metrics.per_cycle_displacement)
    print(f"per-cycle displacement mm: {cells}", file=out)


def cmd_run(args) -> int:
    config = _resolve_config(args)
    bias = args.bias
    bias_fn = (lambda t: bias) if bias else None
    traj = run_episode(config, bias_fn, snapshots=args.snapshots)
    print(f"gait {config.gait.kind.value}: {config.cycles} cycles, "
          f"dt {config.dt} s, {len(traj.rows)} ticks")
    if args.out:
        save_trajectory_csv(traj, args.out)
        print(f"trajectory written to {args.out}")
        if args.snapshots:
            snap_path = args.out + ".snapshots.json"
            save_snapshots_json(traj, snap_path)
            print(f"snapshots written to {snap_path}")
    elif args.snapshots:
        raise ConfigError("--snapshots needs --out")
    if config.cycles >= 2:
        _print_metrics(compute_metrics(traj, config, bias_fn), config)
    else:
        print("metrics need at least 2 cycles; skipped")
    return EXIT_OK


def cmd_metrics(args) -> int:
    config = _resolve_config(args)
    traj = load_trajectory_csv(args.traj, config.gait.period)
    bias = args.bias
    bias_fn = (lambda t: bias) if bias else None
    if not args.config and not args.gait:
        print("note: assuming the forward preset config; pass --config or --gait "
              "if the trajectory used something else")
    _print_metrics(compute_metrics(traj, config, bias_fn), config)
    return EXIT_OK


def cmd_presets(args) -> int:
    for kind in (GaitKind.FORWARD, GaitKind.BACKWARD, GaitKind.SIDEWINDING):
        params = preset(kind)
        pulls = []
        if params.tendons.upper_pull:
            pulls.append(f"Lu {params.tendons.upper_pull} mm")
        if params.tendons.lower_pull:
            pulls.append(f"Ll {params.tendons.lower_pull} mm")
        if params.tendons.spiral_pull:
            pulls.append(f"Lt {params.tendons.spiral_pull} mm")
        print(f"{kind.value:12s} amplitude {params.amplitude} deg, "
              f"period {params.period} s, phase shift {params.phase_shift} deg, "
              + ", ".join(pulls))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve

    host, sep, port = args.bind.rpartition(":")
    if not sep or not port.isdigit():
        raise ConfigError(f"--bind must be addr:port, got {args.bind!r}")
    config = load_config(args.config) if args.config else None
    serve(config=config, host=host or "127.0.0.1", port=int(port),
          record=args.record, decimation=args.decimation)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": cmd_run,
        "metrics": cmd_metrics,
        "presets": cmd_presets,
        "serve": cmd_serve,
    }[args.command]
    try:
        return handler(args)
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
