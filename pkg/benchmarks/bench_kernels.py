"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--paths 64] [--steps 20000] [--cd 200000] [--repeat 5]

Also times one full non-integer skeleton and the cost-only counter.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from bessel_skeleton import kernels
from bessel_skeleton.core import make_bessel_spec
from bessel_skeleton.sampling import RngStream
from bessel_skeleton.skeletons import bessel_skeleton_noninteger, count_points, default_weights


def walk_inputs(paths, steps, seed=0):
    rng = np.random.default_rng(seed)
    return (
        rng.uniform(0, 1, paths),
        rng.uniform(-1, 1, (paths, steps)),
        rng.gamma(1.5, 0.05, (paths, steps)),
        rng.gamma(0.5, 0.05, (paths, steps)),
    )


def cd_inputs(m, seed=1):
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(0.05, 1.5, m)
    beta = rng.uniform(0.5, 3, m)
    t = beta * rng.uniform(1e-3, 0.9, m)
    log_ratio = np.log(beta / t)
    floor = np.exp(-alpha * log_ratio)
    return alpha, log_ratio, floor, 1 - floor, np.sqrt(alpha * t * log_ratio)


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=64)
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--cd", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    walk = walk_inputs(args.paths, args.steps)
    cd = cd_inputs(args.cd)
    rows = []
    t_np = best_of(lambda: kernels.radial_walk_numpy(*walk), args.repeat)
    rows.append(("radial walk", "numpy", t_np))
    t_np_cd = best_of(lambda: kernels.cd_rounds_numpy(np.random.default_rng(2), *cd), args.repeat)
    rows.append(("rejection rounds", "numpy", t_np_cd))
    if kernels.USING_NUMBA:
        kernels.radial_walk_numba(*walk)  # compile / load cache
        kernels.cd_rounds_numba(np.random.default_rng(2), *cd)
        rows.append(("radial walk", "numba", best_of(lambda: kernels.radial_walk_numba(*walk), args.repeat)))
        rows.append(("rejection rounds", "numba",
                     best_of(lambda: kernels.cd_rounds_numba(np.random.default_rng(2), *cd), args.repeat)))
    else:
        print("numba disabled (BESSEL_SKELETON_NUMBA=0 or not installed); numpy timings only")

    print(f"{'kernel':<18}{'backend':<9}{'seconds':>10}")
    for name, backend, sec in rows:
        print(f"{name:<18}{backend:<9}{sec:>10.4f}")
    if kernels.USING_NUMBA:
        print(f"speedup: radial walk x{t_np / rows[2][2]:.1f}, rejection rounds x{t_np_cd / rows[3][2]:.1f}")

    spec = make_bessel_spec(2.2, 0.5, 0.05, False)
    w = default_weights(spec)
    full = best_of(lambda: bessel_skeleton_noninteger(RngStream(3), spec, w, 0.25), args.repeat)
    cost = best_of(lambda: count_points(RngStream(3), spec, 0.25, w), args.repeat)
    n = count_points(RngStream(3), spec, 0.25, w)
    print(f"non-integer skeleton, delta=2.2 eps=0.05 T=0.25 ({n} points): full {full:.4f}s, count only {cost:.4f}s "
          f"[{kernels.backend_name()}]")


if __name__ == "__main__":
    main()
