"""Compare the compiled amplitude kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--qubits 12,17,20] [--repeat 5]

Prints best-of-``repeat`` wall time per kernel and the speedup of the
compiled version.  Also times one full PLGC energy evaluation on 4x3.
"""

import argparse
import time

import numpy as np

from loopgas import _backend, statevector, vqe
from loopgas.bench import run_benchmarks
from loopgas.lattice import build_lattice


def energy_eval_timing(repeat: int) -> None:
    geom = build_lattice(4, 3)
    thetas = np.linspace(0.1, 2.0, geom.n_plaquettes)
    for name in ["python"] + (["cython"] if _backend.compiled is not None else []):
        k = _backend.get_kernels(name)
        vqe.kernels = statevector.kernels = k
        obj = vqe.EnergyObjective(geom, 0.3)
        best = min(_timed(obj, thetas) for _ in range(repeat))
        print(f"energy evaluation, 4x3, {name:<7}{best * 1e3:10.3f}ms")


def _timed(fn, arg) -> float:
    t0 = time.perf_counter()
    fn(arg)
    return time.perf_counter() - t0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", default="12,17,20")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    run_benchmarks([int(n) for n in args.qubits.split(",")], repeat=args.repeat)
    print()
    energy_eval_timing(args.repeat)
