"""Command line interface: ``lwrnet simulate|validate|compare``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .diagnostics import mass_balance
from .errors import FluxError, LwrnetError, MassViolationError, NetworkError, ParseError
from .flux import JunctionFluxKind
from .io import RunConfig, fmt, parse_config, write_outputs
from .network import validate_network
from .timestep import run_simulation

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ABORT = 2
EXIT_USAGE = 64

log = logging.getLogger("lwrnet")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _kind(text: str) -> JunctionFluxKind:
    try:
        return JunctionFluxKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lwrnet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run one simulation and write CSV output")
    sim.add_argument("--config", required=True, type=Path)
    sim.add_argument("--out", required=True, type=Path)
    sim.add_argument("--flux", type=_kind, help="alpha-outside | alpha-inside | max-possible")
    sim.add_argument("--dt", type=float)
    sim.add_argument("--t-end", type=float)
    sim.add_argument("--emit-traces", action="store_true", help="also write element-face traces")

    val = sub.add_parser("validate", help="parse and validate a configuration only")
    val.add_argument("--config", required=True, type=Path)

    cmp_ = sub.add_parser("compare", help="run every applicable junction flux on one network")
    cmp_.add_argument("--config", required=True, type=Path)
    cmp_.add_argument("--out", required=True, type=Path)
    cmp_.add_argument("--dt", type=float)
    cmp_.add_argument("--t-end", type=float)
    return parser


def _load(path, **overrides) -> tuple[RunConfig, object]:
    cfg = parse_config(path).with_overrides(**overrides)
    network = validate_network(cfg.network, u_max=cfg.diagram.u_max)
    return cfg, network


def _run(cfg: RunConfig, network, out_dir: Path, emit_traces=False):
    t0 = time.perf_counter()
    traj, records, events = run_simulation(network, cfg.diagram, cfg.kind, cfg.solver)
    runtime = time.perf_counter() - t0
    write_outputs(traj, records, out_dir, cfg, events, runtime, emit_traces)
    return traj, records, events


def _print_block(cfg: RunConfig, traj, records, events) -> None:
    final = records[-1]
    balance = mass_balance(traj)
    print(f"[{cfg.kind.value}]")
    print(f"  t = {fmt(final.t)}")
    for rid, mass in final.masses.items():
        print(f"  road {rid}: {mass:.6f}")
    print(f"  total: {final.total:.12f}  drift: {balance.unaccounted:.3e}")
    print(f"  mass violations: {events.mass_violations}")


def _simulate(args) -> int:
    cfg, network = _load(args.config, kind=args.flux, dt=args.dt, t_end=args.t_end)
    traj, records, events = _run(cfg, network, args.out, args.emit_traces)
    _print_block(cfg, traj, records, events)
    return EXIT_OK


def _validate(args) -> int:
    cfg, network = _load(args.config)
    print(
        f"ok: {len(network.roads)} roads, {len(network.junctions)} junctions, "
        f"{cfg.solver.num_steps} steps"
    )
    return EXIT_OK


def _compare(args) -> int:
    cfg, network = _load(args.config, dt=args.dt, t_end=args.t_end)
    kinds = [
        k
        for k in (JunctionFluxKind.ALPHA_INSIDE, JunctionFluxKind.ALPHA_OUTSIDE, JunctionFluxKind.MAX_POSSIBLE_1X2)
        if all(
            k.applicable(len(j.incoming), len(j.outgoing))
            and (k is not JunctionFluxKind.MAX_POSSIBLE_1X2 or 0.0 < j.distribution[0][0] < 1.0)
            for j in network.junctions
        )
    ]
    masses = {}
    times = None
    for kind in kinds:
        sub_cfg = cfg.with_overrides(kind=kind)
        traj, records, events = _run(sub_cfg, network, args.out / kind.value)
        _print_block(sub_cfg, traj, records, events)
        masses[kind] = records
        times = [r.t for r in records]
    rows = ["t,road_id," + ",".join(k.value for k in kinds)]
    for n, t in enumerate(times or []):
        for rid in network.road_ids:
            rows.append(",".join([fmt(t), str(rid)] + [fmt(masses[k][n].masses[rid]) for k in kinds]))
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "compare.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler = {"simulate": _simulate, "validate": _validate, "compare": _compare}[args.command]
    try:
        return handler(args)
    except MassViolationError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ParseError, NetworkError, FluxError) as exc:
        print(f"invalid configuration: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (LwrnetError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
