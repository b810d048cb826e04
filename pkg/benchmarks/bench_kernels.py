#!/usr/bin/env python3
"""Time the numba kernels against their numpy fallbacks.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

The first numba call compiles; it is run once before timing.  Each line
reports the best of ``--repeat`` runs and the max deviation between the
two backends.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from bpbdisc import _kernels as K


def _cases(rng):
    z = np.exp(2j * np.pi * np.arange(4096) / 4096)
    coeffs = rng.standard_normal(33) + 1j * rng.standard_normal(33)
    C = rng.standard_normal((33, 8)) + 1j * rng.standard_normal((33, 8))
    theta = np.linspace(-np.pi, np.pi, 20001)
    A = rng.standard_normal((4096, 33)) + 1j * rng.standard_normal((4096, 33))
    X = rng.standard_normal((33, 512)) + 1j * rng.standard_normal((33, 512))
    V = rng.standard_normal((4096, 8)) + 1j * rng.standard_normal((4096, 8))
    return {
        "polyval": lambda: K.polyval(coeffs, z),
        "polyval_columns": lambda: K.polyval_columns(C, z),
        "stolz_radius": lambda: K.stolz_radius(0.3, theta),
        "straight_radius": lambda: K.straight_radius(0.3, theta),
        "sup_abs_columns": lambda: K.sup_abs_columns(A, X),
        "row_qnorms(q=3)": lambda: K.row_qnorms(V, 3.0),
    }


def best_time(fn, repeat: int) -> tuple[float, np.ndarray]:
    out = fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the table as JSON")
    args = ap.parse_args(argv)

    if not K.HAVE_NUMBA:
        print("numba is not importable; nothing to compare")
        return 1
    rows = []
    print(f"{'kernel':18s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in _cases(np.random.default_rng(0)).items():
        with K.using_backend("numpy"):
            t_np, ref = best_time(fn, args.repeat)
        with K.using_backend("numba"):
            t_nb, out = best_time(fn, args.repeat)
        diff = float(np.max(np.abs(out - ref)))
        rows.append({"kernel": name, "numpy_s": t_np, "numba_s": t_nb, "speedup": t_np / t_nb, "max_diff": diff})
        print(f"{name:18s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.2f} {diff:10.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
