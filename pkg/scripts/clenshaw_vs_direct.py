"""Peak intermediate bond dimension and agreement of the Clenshaw and direct evaluations."""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from chebmps.chebyshev import EvaluationTrace, clenshaw_evaluate, direct_evaluate, estimate_order, interpolation_coefficients
from chebmps.corpus import get_function
from chebmps.encodings import x_encoding
from chebmps.mps import SimplifyStrategy, to_dense


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--function", default="f_O")
    ap.add_argument("--qubits", nargs="+", type=int, default=[10, 14])
    ap.add_argument("--orders", nargs="+", type=int, default=None, help="default: the estimated order")
    ap.add_argument("--eps", type=float, default=1e-14)
    ap.add_argument("--no-guard", action="store_true")
    args = ap.parse_args()

    f = get_function(args.function)
    orders = args.orders or [estimate_order(f, f.interval)]
    strategy = SimplifyStrategy(args.eps)
    for n in args.qubits:
        g = x_encoding(n, f.interval)
        for d in orders:
            exp = interpolation_coefficients(f, d, f.interval)
            out = {"function": f.id, "n": n, "d": d}
            states = {}
            for name, method in (("clenshaw", clenshaw_evaluate), ("direct", direct_evaluate)):
                trace = EvaluationTrace()
                t = time.perf_counter()
                states[name] = method(exp, g, f.interval, strategy, guard=not args.no_guard, trace=trace)
                out[f"{name}_seconds"] = time.perf_counter() - t
                out[f"{name}_peak_chi"] = trace.peak
                out[f"{name}_final_chi"] = states[name].max_bond
            if n <= 20:
                out["max_difference"] = float(np.max(np.abs(to_dense(states["clenshaw"]) - to_dense(states["direct"]))))
            print(json.dumps(out), flush=True)


if __name__ == "__main__":
    main()
