"""Chebyshev-Clenshaw error and bond dimension versus order for the univariate corpus.

Writes one JSON line per (function, n, d) point and prints the fitted rates.
"""
from __future__ import annotations

import argparse

from chebmps.bench import ExperimentSpec, run
from chebmps.cli import summarize
from chebmps.metrics import SamplingConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--functions", nargs="+", default=["f_G", "f_O", "f_A", "f_S"])
    ap.add_argument("--qubits", nargs="+", type=int, default=[14, 20])
    ap.add_argument("--orders", nargs="+", type=int, default=[16, 32, 64, 128, 256, 512])
    ap.add_argument("--eps", type=float, default=1e-14)
    ap.add_argument("--out", default="univariate_chebyshev.jsonl")
    args = ap.parse_args()

    records = []
    with open(args.out, "w") as fh:
        for fn in args.functions:
            spec = ExperimentSpec(fn, "chebyshev-clenshaw", tuple(args.qubits), tuple(args.orders), (args.eps,),
                                  samples=SamplingConfig(10, 1000))
            for rec in run(spec):
                fh.write(rec.to_json() + "\n")
                records.append(rec.to_dict())
                print(f"{rec.function:12s} n={rec.n:2d} d={rec.d_or_chi:5d} chi={rec.chi_max} "
                      f"err={rec.error:.2e} {rec.runtime_ms:.0f} ms {' '.join(rec.flags)}", flush=True)
    for fit in summarize(records):
        if fit["quantity"] == "error":
            print(f"{fit['function']:12s} n={fit['fixed']} {fit['model']:11s} rate={fit['rate']:.3f}")


if __name__ == "__main__":
    main()
