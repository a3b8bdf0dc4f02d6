"""Bond dimension growth with the number of variables for serial and interleaved layouts."""
from __future__ import annotations

import argparse

from chebmps.bench import ExperimentSpec, run
from chebmps.metrics import SamplingConfig, fit_growth


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--functions", nargs="+", default=["product_gaussian", "squeezed_gaussian"])
    ap.add_argument("--dims", nargs="+", type=int, default=[1, 2, 3, 4, 5])
    ap.add_argument("--qubits", type=int, default=10)
    ap.add_argument("--eps", type=float, default=1e-10)
    ap.add_argument("--method", default="chebyshev-clenshaw")
    ap.add_argument("--out", default="multivariate.jsonl")
    args = ap.parse_args()

    with open(args.out, "w") as fh:
        for name in args.functions:
            for layout in ("serial", "interleaved"):
                spec = ExperimentSpec(name, args.method, (args.qubits,), (None,), (args.eps,), tuple(args.dims),
                                      (layout,), samples=SamplingConfig(10, 1000))
                records = run(spec)
                for rec in records:
                    fh.write(rec.to_json() + "\n")
                    print(f"{name:18s} {layout:11s} m={rec.m} chi={rec.chi_max} err={rec.error:.2e} "
                          f"d={rec.d_or_chi} {rec.runtime_ms:.0f} ms", flush=True)
                ms = [r.m for r in records if r.chi_max]
                chis = [r.chi_max for r in records if r.chi_max]
                if len(ms) >= 2:
                    print(f"  power exponent {fit_growth(ms, chis, 'power')[0]:.2f}, "
                          f"exponential rate {fit_growth(ms, chis, 'exponential')[0]:.2f}")


if __name__ == "__main__":
    main()
