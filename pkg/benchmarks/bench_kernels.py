"""Compare the numba and pure-numpy gate kernels.

Times a single two-mode gate applied to a dense multimode state, then a full
oracle visibility evaluation, under each backend. Usage::

    python3 benchmarks/bench_kernels.py [--nmax 10] [--modes 5] [--repeat 5]
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from mzteleport.interferometer import MzConfig
from mzteleport.oracle import _kernels, oracle_visibility, set_backend
from mzteleport.oracle.gates import beamsplitter, two_mode_squeezer
from mzteleport.teleporter import TeleporterParams, gain_from_squeezing


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up (includes numba compilation on first use)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nmax", type=int, default=10)
    ap.add_argument("--modes", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    d = args.nmax + 1
    rng = np.random.default_rng(0)
    psi = rng.normal(size=(d,) * args.modes) + 1j * rng.normal(size=(d,) * args.modes)
    gates = {
        "beamsplitter": beamsplitter(0.37, args.nmax),
        "two_mode_squeezer": two_mode_squeezer(0.4, args.nmax),
    }
    cfg = MzConfig(TeleporterParams(gain_from_squeezing(0.5), 1.0 / math.sqrt(5)))
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])

    print(f"state: {args.modes} modes x {d} levels ({psi.size} amplitudes)")
    print(f"{'case':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, g in gates.items():
        sp = _kernels.to_sparse(g, tol=1e-300)
        fill = sp[0].size / g.size
        row = []
        for b in backends:
            set_backend(b)
            row.append(best_of(lambda: _kernels.apply_gate(psi, (1, 3), g, sp), args.repeat))
        label = f"{name} (fill {fill:.1%})"
        print(f"{label:<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in row) + (f"{row[0] / row[-1]:>9.1f}x" if len(row) > 1 else ""))
    row = []
    for b in backends:
        set_backend(b)
        row.append(best_of(lambda: oracle_visibility(cfg, args.nmax), args.repeat))
    print(f"{'oracle_visibility':<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in row) + (f"{row[0] / row[-1]:>9.1f}x" if len(row) > 1 else ""))


if __name__ == "__main__":
    main()
