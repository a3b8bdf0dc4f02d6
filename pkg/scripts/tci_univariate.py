"""Tensor cross-interpolation of the univariate corpus: error, bonds and evaluations per sweep."""
from __future__ import annotations

import argparse
import json
import math

import numpy as np

from chebmps.corpus import get_function
from chebmps.metrics import Mode, SamplingConfig, distance
from chebmps.mps import DomainMeta
from chebmps.tci import BlackBox, CrossConfig, cross_interpolate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--functions", nargs="+", default=["f_G", "f_O", "f_A", "f_S"])
    ap.add_argument("--qubits", nargs="+", type=int, default=[16])
    ap.add_argument("--chi-thr", nargs="+", type=int, default=[30])
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()

    for name in args.functions:
        f = get_function(name)
        for n in args.qubits:
            meta = DomainMeta.univariate(n, f.interval)
            for chi in args.chi_thr:
                errs, evals, bonds = [], [], []
                for seed in range(args.seeds):
                    bb = BlackBox(f, meta)
                    mps, diag = cross_interpolate(bb, CrossConfig(chi_thr=chi, seed=seed))
                    err = distance(BlackBox(f, meta), mps, math.inf, Mode.SAMPLED, SamplingConfig(10, 1000), seed + 100)
                    errs.append(err.value)
                    evals.append(diag.eval_count)
                    bonds.append(mps.max_bond)
                print(json.dumps({"function": f.id, "n": n, "chi_thr": chi, "error_mean": float(np.mean(errs)),
                                  "error_max": float(np.max(errs)), "eval_count_mean": float(np.mean(evals)),
                                  "chi_max": int(np.max(bonds)), "fraction_sampled": float(np.mean(evals)) / 2**n}),
                      flush=True)


if __name__ == "__main__":
    main()
