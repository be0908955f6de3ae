"""Compare the numba kernel against the numpy fallback.

    python benchmarks/bench_backends.py [--size 100] [--steps 1000] [--repeat 3]

Both backends must produce byte-identical records; the script aborts otherwise.
"""
import argparse
import time

import numpy as np

from sisresilience._accel import HAVE_NUMBA
from sisresilience.dynamics import PerceptionParams, RunConfig, SeedingSpec, run
from sisresilience.topology import LatticeSpec, ScaleFreeSpec, build_lattice, build_scale_free


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=100)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    graphs = {
        f"lattice {args.size}x{args.size}": build_lattice(LatticeSpec(args.size, args.size)),
        f"scale-free n={args.size ** 2} m=4": build_scale_free(ScaleFreeSpec(args.size ** 2, 4, seed=1)),
    }
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'graph':<28}{'backend':<8}{'seconds':>10}{'us/step':>10}")
    for name, topo in graphs.items():
        cfg = RunConfig(topo, PerceptionParams(0.3, j_local=0.2, w_global=1e-4, mu=0.1), SeedingSpec("fraction", 0.1),
                        control_time=args.steps, master_seed=3, stop_on_eradication=False)
        if HAVE_NUMBA:
            run(RunConfig(topo, cfg.params, cfg.seeding, control_time=2), backend="numba")  # compile
        results = {}
        for b in backends:
            secs, rec = best_of(lambda: run(cfg, backend=b), args.repeat)
            results[b] = rec
            print(f"{name:<28}{b:<8}{secs:>10.3f}{1e6 * secs / args.steps:>10.1f}")
        if len(results) == 2:
            a, c = results["numpy"], results["numba"]
            same = all(np.array_equal(getattr(a, f), getattr(c, f))
                       for f in ("infected", "omega", "new_infections", "mean_effective_tau"))
            if not same:
                raise SystemExit("backends disagree")
    print("backends agree bit for bit" if HAVE_NUMBA else "numba unavailable; numpy path only")


if __name__ == "__main__":
    main()
