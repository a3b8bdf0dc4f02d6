"""Experiment runner: build an MPS by some method, measure it, emit a record."""
from __future__ import annotations

import dataclasses
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import corpus
from .algebra import combine, hadamard, tensor_product
from .chebyshev import (
    ChebyshevExpansion,
    EvaluationTrace,
    clenshaw_evaluate,
    direct_evaluate,
    estimate_order,
    interpolation_coefficients,
)
from .encodings import PolynomialSpec, constant_encoding, exponential_encoding, polynomial_encoding, x_encoding
from .metrics import Mode, SamplingConfig, distance
from .mps import MPS, DomainMeta, Order, SimplifyStrategy, from_dense
from .tci import BlackBox, CrossConfig, cross_interpolate

METHODS = ("chebyshev-clenshaw", "chebyshev-direct", "tci", "svd", "analytic")
EXHAUSTIVE_MAX = 24
UNRESOLVED_TAIL = 1e-8


@dataclass
class Record:
    function: str
    method: str
    n: int
    d_or_chi: int | None
    epsilon: float | None
    m: int = 1
    order: str = "serial"
    seed: int | None = None
    error: float | None = None
    error_std: float | None = None
    chi_max: int | None = None
    runtime_ms: float | None = None
    eval_count: int | None = None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# --- composition ------------------------------------------------------------------

OUTER = {
    "exp_neg": lambda t: np.exp(-t),
    "exp": np.exp,
    "identity": lambda t: t,
    "square": lambda t: t**2,
    "cos": np.cos,
    "sin": np.sin,
}

INNER = ("sum_of_squares", "square_of_sum", "sum")


@dataclass(frozen=True)
class Composition:
    """``outer(inner(x_1, ..., x_m))`` with ``inner`` assembled from encodings."""

    outer: str
    inner: str
    dims: int
    qubits: int
    support: tuple[float, float] | None
    interval: tuple[float, float] = (-1.0, 1.0)
    layout: Order = Order.SERIAL
    order: int | None = None
    tol: float = 1e-15
    epsilon: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "layout", Order(self.layout))
        if self.outer not in OUTER:
            raise KeyError(f"unknown outer function {self.outer!r}; known: {sorted(OUTER)}")
        if self.inner not in INNER:
            raise KeyError(f"unknown inner recipe {self.inner!r}; known: {list(INNER)}")
        if self.support is None:
            raise ValueError("a composition needs the support bound of its inner function")
        object.__setattr__(self, "support", tuple(map(float, self.support)))
        object.__setattr__(self, "interval", tuple(map(float, self.interval)))

    @classmethod
    def from_manifest(cls, data: dict) -> "Composition":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown manifest keys {sorted(unknown)}")
        if "support" not in data:
            raise ValueError("manifest is missing the 'support' bound of the inner function")
        return cls(**data)

    def meta(self) -> DomainMeta:
        return DomainMeta.uniform(self.dims, self.qubits, self.interval, self.layout)

    def closed_form(self, x):
        x = np.asarray(x, dtype=float)
        x = x[:, None] if x.ndim == 1 else x
        if self.inner == "sum_of_squares":
            g = np.sum(x**2, axis=1)
        elif self.inner == "square_of_sum":
            g = np.sum(x, axis=1) ** 2
        else:
            g = np.sum(x, axis=1)
        return OUTER[self.outer](g)


def natural_support(inner: str, dims: int, interval=(-1.0, 1.0)) -> tuple[float, float]:
    """Range of the inner recipe over the box ``interval**dims``."""
    a, b = interval
    if inner == "sum":
        return dims * a, dims * b
    sq = (0.0 if a <= 0 <= b else min(a * a, b * b), max(a * a, b * b))
    if inner == "sum_of_squares":
        return dims * sq[0], dims * sq[1]
    lo, hi = dims * a, dims * b
    return (0.0 if lo <= 0 <= hi else min(lo * lo, hi * hi)), max(lo * lo, hi * hi)


def _embed(states: Sequence[MPS], j: int, dims: int, n: int, interval, layout: Order) -> MPS:
    one = constant_encoding(n, 1.0, interval=interval)
    factors = [states[j] if i == j else one for i in range(dims)]
    return tensor_product(factors, layout)


def inner_state(comp: Composition, strategy: SimplifyStrategy) -> MPS:
    n, m, iv = comp.qubits, comp.dims, comp.interval
    if comp.inner == "sum_of_squares":
        univariate = [polynomial_encoding(PolynomialSpec((0.0, 0.0, 1.0), iv, n))] * m
    else:
        univariate = [x_encoding(n, iv)] * m
    total = combine([(1.0, _embed(univariate, j, m, n, iv, comp.layout)) for j in range(m)], strategy)
    if comp.inner == "square_of_sum":
        total = hadamard(total, total, strategy)
    return total.with_meta(comp.meta())


def compose(comp: Composition, method: str = "clenshaw", trace: EvaluationTrace | None = None) -> tuple[MPS, ChebyshevExpansion]:
    strategy = SimplifyStrategy(comp.epsilon)
    g = inner_state(comp, strategy)
    outer = OUTER[comp.outer]
    d = comp.order if comp.order is not None else estimate_order(outer, comp.support, comp.tol)
    expansion = interpolation_coefficients(outer, d, comp.support)
    evaluate = clenshaw_evaluate if method == "clenshaw" else direct_evaluate
    return evaluate(expansion, g, comp.support, strategy, trace=trace), expansion


# --- univariate loaders --------------------------------------------------------------


def _grid(fn: corpus.CorpusFunction, n: int) -> np.ndarray:
    a, b = fn.interval
    return a + (b - a) * np.arange(2**n) / 2**n


def expansion_flags(expansion: ChebyshevExpansion) -> list[str]:
    c = np.abs(expansion.coefficients)
    if c.size > 1 and c[-1] > UNRESOLVED_TAIL * c.max():
        return ["unresolved_expansion"]
    return []


def load(
    fn: corpus.CorpusFunction,
    method: str,
    n: int,
    d_or_chi: int | None,
    epsilon: float | None,
    seed: int | None = 0,
    order: Order = Order.SERIAL,
) -> tuple[MPS, dict]:
    """Build the MPS of ``fn`` by ``method``; returns it with side information."""
    info: dict = {"flags": []}
    strategy = SimplifyStrategy(epsilon if epsilon is not None else 1e-14)
    if fn.dims > 1:
        meta = DomainMeta.uniform(fn.dims, n, fn.interval, order)
    else:
        meta = DomainMeta.univariate(n, fn.interval)
    if method in ("chebyshev-clenshaw", "chebyshev-direct"):
        if fn.dims > 1:
            inner = {"product_gaussian": "sum_of_squares", "squeezed_gaussian": "square_of_sum"}.get(fn.id)
            if inner is None:
                raise ValueError(f"{fn.id} has no composition recipe")
            comp = Composition(
                "exp_neg", inner, fn.dims, n, natural_support(inner, fn.dims, fn.interval), fn.interval,
                order, d_or_chi, epsilon=strategy.tolerance,
            )
            trace = EvaluationTrace()
            mps, expansion = compose(comp, "clenshaw" if method.endswith("clenshaw") else "direct", trace)
        else:
            d = d_or_chi if d_or_chi is not None else estimate_order(fn, fn.interval)
            expansion = interpolation_coefficients(fn, d, fn.interval)
            g = x_encoding(n, fn.interval)
            trace = EvaluationTrace()
            evaluate = clenshaw_evaluate if method == "chebyshev-clenshaw" else direct_evaluate
            mps = evaluate(expansion, g, fn.interval, strategy, trace=trace)
        info["flags"] += expansion_flags(expansion)
        info["peak_chi"] = trace.peak
        info["order"] = expansion.degree
        return mps, info
    if method == "tci":
        bb = BlackBox(fn, meta)
        cfg = CrossConfig(chi_thr=d_or_chi or 30, seed=seed)
        mps, diag = cross_interpolate(bb, cfg)
        info["eval_count"] = diag.eval_count
        info["flags"].append(f"halt:{diag.halt_reason.value}")
        info["diagnostics"] = diag
        return mps, info
    if method == "svd":
        if meta.total_qubits > EXHAUSTIVE_MAX:
            raise OverflowError("SVD baseline needs the dense tensor")
        bits = (np.arange(2**meta.total_qubits)[:, None] >> np.arange(meta.total_qubits - 1, -1, -1)) & 1
        values = fn(meta.coordinates(bits) if fn.dims > 1 else meta.coordinates(bits)[:, 0])
        return from_dense(values, strategy, meta), info
    if method == "analytic":
        if fn.id == "exp":
            return exponential_encoding(n, fn.interval), info
        raise ValueError(f"no analytic encoding for {fn.id}")
    raise ValueError(f"unknown method {method!r}; known: {METHODS}")


def measure(fn: corpus.CorpusFunction, mps: MPS, samples: SamplingConfig = SamplingConfig(), seed=0):
    bb = BlackBox(fn, mps.meta)
    mode = Mode.EXHAUSTIVE if len(mps) <= EXHAUSTIVE_MAX else Mode.SAMPLED
    return distance(bb, mps, math.inf, mode, samples, seed)


# --- experiment grids ------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    function: str
    method: str
    qubits: tuple[int, ...] = (10,)
    d_or_chi: tuple[int | None, ...] = (None,)
    epsilons: tuple[float, ...] = (1e-14,)
    dims: tuple[int, ...] = (1,)
    orders: tuple[str, ...] = ("serial",)
    seeds: tuple[int, ...] = (0,)
    samples: SamplingConfig = SamplingConfig()
    out: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; known: {METHODS}")
        for name in ("qubits", "d_or_chi", "epsilons", "dims", "orders", "seeds"):
            value = tuple(getattr(self, name))
            if not value:
                raise ValueError(f"grid {name} is empty")
            object.__setattr__(self, name, value)
        for o in self.orders:
            Order(o)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        if "samples" in data and not isinstance(data["samples"], SamplingConfig):
            s = data["samples"]
            data["samples"] = SamplingConfig(**s) if isinstance(s, dict) else SamplingConfig(per_batch=int(s))
        return cls(**data)

    def grid(self) -> Iterable[tuple]:
        return itertools.product(self.qubits, self.d_or_chi, self.epsilons, self.dims, self.orders, self.seeds)


def run_point(function: str, method: str, n, d, eps, m, order, seed, samples=SamplingConfig()) -> Record:
    rec = Record(function, method, n, d, eps, m, order, seed)
    try:
        fn = corpus.get_function(function, m)
        t0 = time.perf_counter()
        mps, info = load(fn, method, n, d, eps, seed, Order(order))
        rec.runtime_ms = 1e3 * (time.perf_counter() - t0)
        rec.chi_max = mps.max_bond
        rec.eval_count = info.get("eval_count")
        if rec.d_or_chi is None and "order" in info:
            rec.d_or_chi = info["order"]
        rec.flags += info["flags"]
        err = measure(fn, mps, samples, seed or 0)
        rec.error, rec.error_std = err.value, err.std_dev
    except Exception as exc:  # recorded, not raised: one bad point must not sink a grid
        rec.flags.append(f"failed:{type(exc).__name__}: {exc}")
    return rec


def run(spec: ExperimentSpec, sink: Callable[[Record], None] | None = None) -> list[Record]:
    records = []
    handle = open(spec.out, "w") if spec.out else None
    try:
        for n, d, eps, m, order, seed in spec.grid():
            rec = run_point(spec.function, spec.method, n, d, eps, m, order, seed, spec.samples)
            records.append(rec)
            if handle:
                handle.write(rec.to_json() + "\n")
                handle.flush()
            if sink:
                sink(rec)
    finally:
        if handle:
            handle.close()
    return records


def read_records(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
