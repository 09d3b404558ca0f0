"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_backends.py [--trajectories 200] [--nodes 400]

Reports per-trajectory classification time on random initial states of the
default model and throughput of kernel-matrix assembly.
"""
import argparse
import time

import numpy as np

from basin_atlas import _backend
from basin_atlas.dynamics import AttractorClassifier, ModelParams


def _time(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trajectories", type=int, default=200)
    ap.add_argument("--nodes", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = ["python"] + (["compiled"] if _backend.compiled is not None else [])
    if len(backends) == 1:
        print("compiled extension not built; timing the Python fallback only")
    rng = np.random.default_rng(args.seed)
    starts = rng.uniform(0, 6, (args.trajectories, 3))
    X = rng.uniform(0, 1, (args.nodes, 3))
    P = ModelParams.default()

    rows = {}
    for be in backends:
        clf = AttractorClassifier(P, backend=be)
        labels = []
        t_traj = _time(lambda: labels.append([clf(x) for x in starts]), repeat=1 if be == "python" else 3)
        mod = _backend.get(be)
        t_kern = _time(lambda: mod.cross_kernel(X, X, _backend.python.WENDLAND_C6, 1.0))
        rows[be] = (t_traj / len(starts), args.nodes ** 2 / t_kern, labels[0])

    print(f"{'backend':<10} {'us/trajectory':>14} {'kernel evals/s':>16}")
    for be, (tt, kt, _) in rows.items():
        print(f"{be:<10} {tt * 1e6:>14.1f} {kt:>16.3e}")
    if len(rows) == 2:
        py, cc = rows["python"], rows["compiled"]
        print(f"speedup: trajectories x{py[0] / cc[0]:.1f}, kernel matrix x{cc[1] / py[1]:.1f}")
        print("labels identical:", py[2] == cc[2])


if __name__ == "__main__":
    main()
