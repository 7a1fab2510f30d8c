"""Command-line entry point: ``loopgas sweep`` and ``loopgas bench``."""

from __future__ import annotations

import argparse
import logging
import sys

from .lattice import LatticeError, parse_cluster
from .sweep import ConfigError, SweepConfig, parse_x_grid, run_sweep, with_overrides


def _clusters(text: str) -> list[tuple[int, int]]:
    return [parse_cluster(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopgas", description=__doc__)
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="VQE + exact-diagonalization sweep over x")
    sw.add_argument("--config", help="JSON config file; flags below override its fields")
    sw.add_argument("--clusters", type=_clusters, help="e.g. 3x3,4x3")
    sw.add_argument("--x-grid", type=parse_x_grid, dest="x_values",
                    help="start:stop:step (inclusive) or a comma list")
    sw.add_argument("--restarts", type=int, dest="n_restarts")
    sw.add_argument("--iters", type=int, dest="max_iterations")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--no-ed", action="store_false", dest="run_ed", default=None)
    sw.add_argument("--output", dest="output_path")
    sw.add_argument("--export-qasm", dest="export_qasm", metavar="DIR")
    sw.add_argument("--tripartition", dest="tripartition_override", metavar="JSON")
    sw.add_argument("--workers", type=int)

    bench = sub.add_parser("bench", help="time the compiled and numpy kernels")
    bench.add_argument("--qubits", default="12,17,20")
    bench.add_argument("--repeat", type=int, default=5)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(name)s: %(message)s")

    if args.command == "bench":
        from .bench import run_benchmarks
        run_benchmarks([int(n) for n in args.qubits.split(",")], repeat=args.repeat)
        return 0

    try:
        cfg = SweepConfig.from_json(args.config) if args.config else SweepConfig()
        cfg = with_overrides(
            cfg,
            clusters=args.clusters, x_values=args.x_values, n_restarts=args.n_restarts,
            max_iterations=args.max_iterations, seed=args.seed, run_ed=args.run_ed,
            output_path=args.output_path, export_qasm=args.export_qasm,
            tripartition_override=args.tripartition_override, workers=args.workers,
        )
        cfg.validate()
    except (ConfigError, LatticeError, ValueError, OSError) as exc:
        print(f"loopgas: {exc}", file=sys.stderr)
        return 2
    run_sweep(cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
