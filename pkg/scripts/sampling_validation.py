"""Sampled error estimates against exhaustive ones on small grids."""
from __future__ import annotations

import argparse
import json
import math

from chebmps.bench import load
from chebmps.corpus import get_function
from chebmps.metrics import Mode, SamplingConfig, distance, l2_distance_exact
from chebmps.mps import EXACT, from_dense

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", nargs="+", type=int, default=[1, 2, 3])
    ap.add_argument("--qubits", type=int, default=8)
    ap.add_argument("--order", type=int, default=6)
    ap.add_argument("--per-batch", nargs="+", type=int, default=[10, 30, 100, 300, 1000])
    args = ap.parse_args()

    for m in args.dims:
        fn = get_function("product_gaussian", m)
        mps, _ = load(fn, "chebyshev-clenshaw", args.qubits, args.order, 1e-10)
        N = mps.meta.total_qubits
        bits = (np.arange(2**N)[:, None] >> np.arange(N - 1, -1, -1)) & 1
        reference = from_dense(fn(mps.meta.coordinates(bits)), EXACT, mps.meta)
        row = {"m": m, "exhaustive_linf": distance(reference, mps, math.inf, Mode.EXHAUSTIVE).value,
               "exact_l2": l2_distance_exact(reference, mps, normalized=True)}
        for k in args.per_batch:
            cfg = SamplingConfig(10, k)
            row[f"linf_{k}"] = distance(reference, mps, math.inf, Mode.SAMPLED, cfg, seed=7).value
            l2 = distance(reference, mps, 2, Mode.SAMPLED, cfg, seed=7)
            row[f"l2_{k}"] = [l2.value, l2.std_dev]
        print(json.dumps(row), flush=True)


if __name__ == "__main__":
    main()
