"""Chebyshev interpolants and their evaluation on MPS arguments.

An expansion of order ``d`` is ``p(t) = sum_{k=0}^{d} c_k T_k(t)`` with ``t``
the image of ``x`` in ``[-1, 1]``.  The coefficient ``c_0`` is stored already
halved, so the plain sum applies everywhere.  Order ``d`` interpolates on
``d + 1`` nodes.
"""
from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft

from .algebra import affine_rescale, hadamard
from .encodings import constant_encoding
from .mps import MPS, SimplifyStrategy, simplify, zero_mps

EPS = np.finfo(float).eps


class NodeKind(str, enum.Enum):
    GAUSS = "gauss"
    LOBATTO = "lobatto"


class ExpansionNotConverged(RuntimeError):
    """The coefficient tail never fell below tolerance before the order cap."""

    def __init__(self, message: str, order: int, tail: float):
        super().__init__(message)
        self.order = order
        self.tail = tail


class PrecisionWarning(UserWarning):
    """Coefficients below machine precision reached an MPS evaluation."""


@dataclass(frozen=True)
class ChebyshevExpansion:
    coefficients: np.ndarray
    interval: tuple[float, float] = (-1.0, 1.0)
    node_kind: NodeKind = NodeKind.GAUSS

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=np.result_type(self.coefficients, float)))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("need a non-empty coefficient vector")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        a, b = map(float, self.interval)
        if not a < b:
            raise ValueError(f"empty interval [{a}, {b}]")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "interval", (a, b))
        object.__setattr__(self, "node_kind", NodeKind(self.node_kind))

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def to_unit(self, x):
        a, b = self.interval
        return (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)

    def __call__(self, x):
        return chebyshev_sum(self.coefficients, self.to_unit(x))

    def to_json(self) -> str:
        c = self.coefficients
        coeffs = c.tolist() if not np.iscomplexobj(c) else [[z.real, z.imag] for z in c]
        return json.dumps({"interval": list(self.interval), "node_kind": self.node_kind.value, "coefficients": coeffs})

    @classmethod
    def from_json(cls, text: str) -> "ChebyshevExpansion":
        data = json.loads(text)
        c = np.asarray(data["coefficients"], dtype=float)
        if c.ndim == 2:
            c = c[:, 0] + 1j * c[:, 1]
        return cls(c, tuple(data["interval"]), NodeKind(data.get("node_kind", "gauss")))


def chebyshev_sum(c, t):
    """Scalar Clenshaw recurrence for ``sum_k c_k T_k(t)``."""
    t = np.asarray(t)
    y1 = np.zeros(np.broadcast(t, c[0]).shape, dtype=np.result_type(t, c))
    y2 = np.zeros_like(y1)
    for ck in c[:0:-1]:
        y1, y2 = ck - y2 + 2 * t * y1, y1
    return c[0] - y2 + t * y1


# --- nodes and coefficients -------------------------------------------------------


def gauss_nodes(d: int) -> np.ndarray:
    """The ``d`` zeros of ``T_d``, in decreasing order."""
    if d < 1:
        raise ValueError("Gauss nodes need d >= 1")
    k = np.arange(1, d + 1)
    return np.cos(np.pi * (2 * k - 1) / (2 * d))


def lobatto_nodes(d: int) -> np.ndarray:
    """The ``d + 1`` extrema of ``T_d`` on ``[-1, 1]``, in decreasing order."""
    if d < 1:
        raise ValueError("Lobatto nodes need d >= 1")
    x = np.cos(np.pi * np.arange(d + 1) / d)
    x[0], x[-1] = 1.0, -1.0
    if d % 2 == 0:
        x[d // 2] = 0.0
    return x


def nodes(d: int, kind: NodeKind | str = NodeKind.GAUSS) -> np.ndarray:
    """Interpolation nodes of an order-``d`` expansion (always ``d + 1`` points)."""
    kind = NodeKind(kind)
    return gauss_nodes(d + 1) if kind is NodeKind.GAUSS else lobatto_nodes(max(d, 1))


def _sample(f: Callable, t: np.ndarray, interval) -> np.ndarray:
    a, b = interval
    x = 0.5 * (a + b) + 0.5 * (b - a) * t
    v = np.asarray(f(x))
    if v.shape != x.shape:
        v = np.broadcast_to(v, x.shape)
    if not np.all(np.isfinite(v)):
        raise ValueError("function is not finite at the interpolation nodes")
    return v


def _gauss_dct(v: np.ndarray) -> np.ndarray:
    N = v.size
    c = scipy.fft.dct(v, type=2) / N
    c[0] *= 0.5
    return c


def _lobatto_dct(v: np.ndarray) -> np.ndarray:
    d = v.size - 1
    c = scipy.fft.dct(v, type=1) / d
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def coefficients_from_values(values, kind: NodeKind | str = NodeKind.GAUSS) -> np.ndarray:
    """Interpolation coefficients from function values at :func:`nodes`."""
    v = np.asarray(values)
    kind = NodeKind(kind)
    if kind is NodeKind.LOBATTO and v.size == 1:
        return v.astype(float).copy()
    if np.iscomplexobj(v):
        fn = _gauss_dct if kind is NodeKind.GAUSS else _lobatto_dct
        return fn(v.real) + 1j * fn(v.imag)
    return _gauss_dct(v) if kind is NodeKind.GAUSS else _lobatto_dct(v)


def direct_coefficients(values, kind: NodeKind | str = NodeKind.GAUSS) -> np.ndarray:
    """Same as :func:`coefficients_from_values` by explicit O(d^2) sums."""
    v = np.asarray(values)
    kind = NodeKind(kind)
    N = v.size
    if kind is NodeKind.GAUSS:
        theta = np.pi * (np.arange(N) + 0.5) / N
        T = np.cos(np.outer(np.arange(N), theta))
        c = (2.0 / N) * (T @ v)
        c[0] *= 0.5
        return c
    d = N - 1
    if d == 0:
        return v.astype(float).copy()
    theta = np.pi * np.arange(N) / d
    w = np.full(N, 1.0)
    w[0] = w[-1] = 0.5
    T = np.cos(np.outer(np.arange(N), theta))
    c = (2.0 / d) * (T @ (w * v))
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def interpolation_coefficients(
    f: Callable, d: int, interval=(-1.0, 1.0), kind: NodeKind | str = NodeKind.GAUSS, method: str = "dct"
) -> ChebyshevExpansion:
    """Order-``d`` interpolant of ``f`` on ``interval``."""
    if d < 0:
        raise ValueError("order must be non-negative")
    kind = NodeKind(kind)
    v = _sample(f, nodes(d, kind), interval)
    if method == "dct":
        c = coefficients_from_values(v, kind)
    elif method == "direct":
        c = direct_coefficients(v, kind)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ChebyshevExpansion(c, tuple(interval), kind)


@dataclass(frozen=True)
class OrderSearch:
    start: int = 16
    cap: int = 1 << 14
    noise_factor: float = 16.0


def estimate_order(f: Callable, interval=(-1.0, 1.0), tol: float = 1e-15, search: OrderSearch = OrderSearch()) -> int:
    """Order after which every coefficient stays below the tolerance.

    Trial orders double from ``search.start``.  A trial is accepted when its
    last eighth (at least four coefficients) lies below
    ``max(tol * max|c|, noise_factor * eps * max|f|)``; the answer is the last
    coefficient above that threshold.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = search.start
    tail = np.inf
    while N <= search.cap:
        t = nodes(N)
        v = _sample(f, t, interval)
        c = np.abs(coefficients_from_values(v))
        threshold = max(tol * c.max(), search.noise_factor * EPS * np.abs(v).max())
        segment = max(4, N // 8)
        tail = c[-segment:].max() / max(c.max(), np.finfo(float).tiny)
        if c.max() == 0.0:
            return 0
        if np.all(c[-segment:] <= threshold):
            above = np.flatnonzero(c > threshold)
            return int(above[-1]) if above.size else 0
        N *= 2
    raise ExpansionNotConverged(
        f"coefficients still at {tail:.2e} of the maximum at order {N // 2}", order=N // 2, tail=tail
    )


def guard_coefficients(c: np.ndarray, rel: float = EPS) -> np.ndarray:
    """Zero coefficients below ``rel * max|c|`` and trim the trailing zeros."""
    c = np.array(c)
    scale = np.abs(c).max()
    c[np.abs(c) < rel * scale] = 0.0
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else c[:1] * 0


# --- calculus -------------------------------------------------------------------


def differentiate(expansion: ChebyshevExpansion) -> ChebyshevExpansion:
    c = expansion.coefficients
    d = c.size - 1
    a, b = expansion.interval
    if d == 0:
        return ChebyshevExpansion(np.zeros(1, dtype=c.dtype), expansion.interval, expansion.node_kind)
    out = np.zeros(d + 2, dtype=c.dtype)
    for k in range(d, 0, -1):
        out[k - 1] = out[k + 1] + 2 * k * c[k]
    out[0] *= 0.5
    return ChebyshevExpansion(out[:d] * (2.0 / (b - a)), expansion.interval, expansion.node_kind)


def integrate(expansion: ChebyshevExpansion, constant=0.0) -> ChebyshevExpansion:
    """Antiderivative whose value at the left end of the interval is ``constant``."""
    c = expansion.coefficients
    d = c.size - 1
    a, b = expansion.interval
    ext = np.concatenate([c, np.zeros(2, dtype=c.dtype)])
    ext[0] *= 2.0
    out = np.zeros(d + 2, dtype=c.dtype)
    for k in range(1, d + 2):
        out[k] = (ext[k - 1] - ext[k + 1]) / (2 * k)
    out *= 0.5 * (b - a)
    signs = (-1.0) ** np.arange(d + 2)
    out[0] = constant - np.sum(signs[1:] * out[1:])
    return ChebyshevExpansion(out, expansion.interval, expansion.node_kind)


# --- evaluation on MPS -------------------------------------------------------------


@dataclass
class ClenshawState:
    """Two most recent iterates of the backward recurrence."""

    y_next: MPS | None = None  # y_{k+2}
    y_curr: MPS | None = None  # y_{k+1}
    k: int = 0

    def push(self, y: MPS | None):
        self.y_next, self.y_curr = self.y_curr, y
        self.k -= 1


@dataclass
class EvaluationTrace:
    """Bond dimension seen after every recurrence step."""

    chi: list[int] = field(default_factory=list)

    @property
    def peak(self) -> int:
        return max(self.chi, default=1)


def _prepare(expansion: ChebyshevExpansion, g: MPS, g_support, strategy, guard: bool):
    c = expansion.coefficients
    if guard:
        c = guard_coefficients(c)
    else:
        small = np.abs(c) < EPS * np.abs(c).max()
        if small.any():
            warnings.warn(
                f"{int(small.sum())} coefficients below machine precision; bond dimensions may grow",
                PrecisionWarning,
                stacklevel=3,
            )
    gt = affine_rescale(g, g_support, (-1.0, 1.0), strategy)
    one = constant_encoding(len(g), 1.0, meta=g.meta)
    return c, gt, one


def _combine(terms, n, meta, strategy) -> MPS | None:
    live = [(a, m) for a, m in terms if m is not None and a != 0]
    if not live:
        return None
    return simplify(live, strategy)


def clenshaw_evaluate(
    expansion: ChebyshevExpansion,
    g: MPS,
    g_support,
    strategy: SimplifyStrategy = SimplifyStrategy(),
    guard: bool = True,
    trace: EvaluationTrace | None = None,
) -> MPS:
    """MPS of ``p(g(x))`` by the backward three-term recurrence.

    ``y_k = c_k - y_{k+2} + 2 g~ y_{k+1}`` from ``k = d`` down to ``0`` with a
    simplification after every step, then ``p = y_0 - g~ y_1``.
    """
    c, gt, one = _prepare(expansion, g, g_support, strategy, guard)
    n, meta = len(g), g.meta
    state = ClenshawState(k=c.size)
    for k in range(c.size - 1, -1, -1):
        prod = None if state.y_curr is None else hadamard(gt, state.y_curr)
        y = _combine([(c[k], one), (-1.0, state.y_next), (2.0, prod)], n, meta, strategy)
        state.push(y)
        if trace is not None:
            trace.chi.append(1 if y is None else y.max_bond)
    y0, y1 = state.y_curr, state.y_next
    prod = None if y1 is None else hadamard(gt, y1)
    out = _combine([(1.0, y0), (-1.0, prod)], n, meta, strategy)
    if trace is not None:
        trace.chi.append(1 if out is None else out.max_bond)
    return zero_mps(n, meta) if out is None else out


def direct_evaluate(
    expansion: ChebyshevExpansion,
    g: MPS,
    g_support,
    strategy: SimplifyStrategy = SimplifyStrategy(),
    guard: bool = True,
    trace: EvaluationTrace | None = None,
) -> MPS:
    """MPS of ``p(g(x))`` from the forward recurrence ``T_{k+1} = 2 g~ T_k - T_{k-1}``.

    The partial sum is accumulated alongside; ``trace`` records the larger of
    the two bond dimensions per step.
    """
    c, gt, one = _prepare(expansion, g, g_support, strategy, guard)
    n, meta = len(g), g.meta
    t_prev, t_curr = one, gt
    acc = _combine([(c[0], one)] + ([(c[1], gt)] if c.size > 1 else []), n, meta, strategy)
    if trace is not None:
        trace.chi.append(max(gt.max_bond, 1 if acc is None else acc.max_bond))
    for k in range(2, c.size):
        t_next = simplify([(2.0, hadamard(gt, t_curr)), (-1.0, t_prev)], strategy)
        t_prev, t_curr = t_curr, t_next
        acc = _combine([(1.0, acc), (c[k], t_curr)], n, meta, strategy)
        if trace is not None:
            trace.chi.append(max(t_curr.max_bond, 1 if acc is None else acc.max_bond))
    return zero_mps(n, meta) if acc is None else acc


def evaluate(expansion, g, g_support, strategy=SimplifyStrategy(), method: str = "clenshaw", **kwargs) -> MPS:
    if method == "clenshaw":
        return clenshaw_evaluate(expansion, g, g_support, strategy, **kwargs)
    if method == "direct":
        return direct_evaluate(expansion, g, g_support, strategy, **kwargs)
    raise ValueError(f"unknown evaluation method {method!r}")
