"""Command line: ``chebmps {load,compose,cross,bench,report}``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from collections import defaultdict
from pathlib import Path

from . import bench, corpus, io
from .metrics import InsufficientPoints, Mode, SamplingConfig, distance, fit_convergence, fit_growth
from .mps import DomainMeta, Order
from .tci import BlackBox, CrossConfig, cross_interpolate


def _samples(args) -> SamplingConfig:
    return SamplingConfig(per_batch=args.samples) if args.samples else SamplingConfig()


def _emit(payload: dict):
    text = json.dumps(payload)
    print(text)
    return text


def cmd_load(args) -> int:
    fn = corpus.get_function(args.function, args.dims)
    order = args.order if args.method.startswith("chebyshev") else args.chi_thr
    mps, info = bench.load(fn, args.method, args.qubits, order, args.eps, args.seed, Order(args.layout))
    if args.out:
        io.save(args.out, mps)
    err = bench.measure(fn, mps, _samples(args), args.seed)
    _emit({"function": fn.id, "method": args.method, "chi_max": mps.max_bond, "bonds": mps.bonds,
           "error": err.value, "error_std": err.std_dev, "error_mode": err.mode.value,
           "flags": info["flags"], "out": args.out})
    return 0


def cmd_compose(args) -> int:
    data = json.loads(Path(args.manifest).read_text())
    for key, flag in (("qubits", args.qubits), ("dims", args.dims), ("epsilon", args.eps), ("order", args.order)):
        if flag is not None:
            data[key] = flag
    if args.layout:
        data["layout"] = args.layout
    comp = bench.Composition.from_manifest(data)
    mps, expansion = bench.compose(comp)
    if args.out:
        io.save(args.out, mps)
    mode = Mode.EXHAUSTIVE if len(mps) <= bench.EXHAUSTIVE_MAX else Mode.SAMPLED
    err = distance(BlackBox(comp.closed_form, mps.meta), mps, math.inf, mode, _samples(args), args.seed)
    _emit({"outer": comp.outer, "inner": comp.inner, "dims": comp.dims, "order": expansion.degree,
           "chi_max": mps.max_bond, "error": err.value, "error_std": err.std_dev, "out": args.out})
    return 0


def cmd_cross(args) -> int:
    fn = corpus.get_function(args.function, args.dims)
    if fn.dims > 1:
        meta = DomainMeta.uniform(fn.dims, args.qubits, fn.interval, args.layout)
    else:
        meta = DomainMeta.univariate(args.qubits, fn.interval)
    bb = BlackBox(fn, meta)
    mps, diag = cross_interpolate(bb, CrossConfig(chi_thr=args.chi_thr, seed=args.seed))
    if args.out:
        io.save(args.out, mps)
    payload = json.loads(diag.to_json())
    payload["chi_max"] = mps.max_bond
    _emit(payload)
    return 0


def cmd_bench(args) -> int:
    data = json.loads(Path(args.spec).read_text())
    if args.out:
        data["out"] = args.out
    spec = bench.ExperimentSpec.from_dict(data)
    bench.run(spec, sink=lambda rec: print(rec.to_json(), flush=True))
    return 0


FIELDS = ["function", "method", "n", "d_or_chi", "epsilon", "m", "order", "seed",
          "error", "error_std", "chi_max", "runtime_ms", "eval_count", "flags"]


def summarize(records: list[dict]) -> list[dict]:
    """Fitted rates per (function, method) for every axis that varies."""
    groups = defaultdict(list)
    for r in records:
        if r.get("error") is not None:
            groups[(r["function"], r["method"], r["m"], r["order"])].append(r)
    fits = []
    for (function, method, m, order), rows in sorted(groups.items()):
        for axis, fixed in (("d_or_chi", "n"), ("n", "d_or_chi"), ("m", None)):
            by_fixed = defaultdict(list)
            for r in rows:
                by_fixed[r[fixed] if fixed else None].append(r)
            for key, sub in by_fixed.items():
                xs = sorted({r[axis] for r in sub if r[axis] is not None})
                if len(xs) < 4:
                    continue
                pick = {r[axis]: r for r in sub}
                base = {"function": function, "method": method, "m": m, "order": order, "axis": axis, "fixed": key}
                series = [(x, pick[x]["error"]) for x in xs]
                for model in ("exponential", "algebraic"):
                    try:
                        f = fit_convergence(series, model, floor=1e-15)
                        fits.append({**base, "quantity": "error", "model": model, "rate": f.rate, "residual": f.residual})
                    except InsufficientPoints:
                        pass
                for q in ("runtime_ms", "chi_max"):
                    ys = [pick[x][q] for x in xs]
                    if all(y and y > 0 for y in ys):
                        c, res = fit_growth(xs, ys, "power")
                        fits.append({**base, "quantity": q, "model": "power", "rate": c, "residual": res})
    return fits


def cmd_report(args) -> int:
    records = bench.read_records(args.results)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=FIELDS)
        writer.writeheader()
        for r in records:
            row = {k: r.get(k) for k in FIELDS}
            row["flags"] = ";".join(r.get("flags", []))
            writer.writerow(row)
    finally:
        if args.out:
            out.close()
    fits = summarize(records)
    if args.out:
        Path(args.out).with_suffix(".fits.json").write_text(json.dumps(fits, indent=1))
    print(json.dumps(fits, indent=1), file=sys.stderr if not args.out else sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--qubits", type=int, default=None, help="qubits per dimension")
    common.add_argument("--order", "--degree", dest="order", type=int, default=None, help="Chebyshev order d")
    common.add_argument("--eps", type=float, default=None, help="simplification tolerance")
    common.add_argument("--chi-thr", type=int, default=30, help="TCI bond cap")
    common.add_argument("--dims", type=int, default=None, help="number of variables m")
    common.add_argument("--layout", choices=[o.value for o in Order], default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=None, help="samples per batch for sampled errors")
    common.add_argument("--out", default=None, help="output file")

    parser = argparse.ArgumentParser(prog="chebmps", description="Chebyshev and cross-interpolation loading of functions into MPS.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", parents=[common], help="load one corpus function into an MPS file")
    p.add_argument("function", help=f"one of {corpus.names()}")
    p.add_argument("--method", choices=bench.METHODS, default="chebyshev-clenshaw")
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("compose", parents=[common], help="evaluate outer(inner(x)) from a JSON manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("cross", parents=[common], help="tensor cross-interpolation of a corpus function")
    p.add_argument("function")
    p.set_defaults(func=cmd_cross)

    p = sub.add_parser("bench", parents=[common], help="run an experiment spec, write JSON lines")
    p.add_argument("spec")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", parents=[common], help="JSON lines to CSV plus fitted rates")
    p.add_argument("results")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("load", "cross"):
        args.dims = args.dims or 1
        args.qubits = args.qubits or 10
        args.layout = args.layout or "serial"
    try:
        return args.func(args)
    except (KeyError, ValueError, OverflowError) as exc:
        print(f"chebmps: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
