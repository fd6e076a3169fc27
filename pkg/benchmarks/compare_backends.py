"""Compare the numba-compiled kernels against the pure-numpy fallbacks.

The backend is fixed at import time by the PLATEWAVE_NUMBA environment
variable, so this script re-executes itself in two subprocesses (one per
backend) and prints a timing table.

Usage: python benchmarks/compare_backends.py
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time


def _time(fn, *args, repeats=5):
    fn(*args)  # warm-up (numba compilation happens here)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmarks() -> dict:
    import numpy as np

    from platewave import _accel

    rng = np.random.default_rng(0)

    n = 513
    values = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    offsets = np.array(
        [(i, j) for i in range(-3, 4) for j in range(-3, 4)], dtype=np.int64
    )
    weights = rng.standard_normal(len(offsets)) + 0j

    m = 241
    xs = np.linspace(-1800.0, 1800.0, m)
    x, y = (a.ravel() for a in np.meshgrid(xs, xs, indexing="ij"))
    centers = np.linspace(-1200.0, 1200.0, 33)
    cx, cy = (a.ravel() for a in np.meshgrid(centers, centers, indexing="ij"))
    amps = rng.uniform(-1.0, 1.0, cx.size)

    z = rng.uniform(0.1, 90.0, 20000) + 1j * rng.uniform(0.0, 40.0, 20000)
    nodes = np.cos(np.pi * (np.arange(200) + 0.5) / 200)
    qweights = (np.pi / 200) * np.ones(200) + 0j

    poly = rng.standard_normal(24) + 0j
    logpoly = rng.standard_normal(24) + 0j
    pole = rng.standard_normal(3) + 0j

    return {
        "backend": _accel.BACKEND,
        "stencil_apply (513^2, 49 pts)": _time(
            _accel.stencil_apply, values, offsets, weights
        ),
        "gaussian_accumulate (241^2, 1089 bumps)": _time(
            _accel.gaussian_accumulate, x, y, cx, cy, amps, 75.0
        ),
        "oscillatory_quadrature (20k pts, 200 nodes)": _time(
            _accel.oscillatory_quadrature, z, nodes, qweights
        ),
        "poly_log_eval (20k pts)": _time(
            _accel.poly_log_eval, z, poly, logpoly, pole
        ),
    }


def main() -> int:
    if os.environ.get("_PLATEWAVE_BENCH_CHILD"):
        print(json.dumps(run_benchmarks()))
        return 0

    results = {}
    for flag in ("1", "0"):
        env = dict(os.environ, PLATEWAVE_NUMBA=flag, _PLATEWAVE_BENCH_CHILD="1")
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        data = json.loads(out.stdout.strip().splitlines()[-1])
        results[data.pop("backend")] = data

    numba = results.get("numba")
    numpy_res = results["numpy"]
    if numba is None:
        print("numba backend unavailable; numpy fallback timings only:")
        for name, t in numpy_res.items():
            print(f"  {name}: {t * 1e3:.2f} ms")
        return 0

    width = max(len(k) for k in numba)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  speedup")
    for name in numba:
        tn, tp = numba[name], numpy_res[name]
        print(
            f"{name:<{width}}  {tn * 1e3:>8.2f}ms  {tp * 1e3:>8.2f}ms  "
            f"{tp / tn:>6.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
