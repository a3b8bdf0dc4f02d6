"""Finite-precision algebra on MPS: sums, element-wise products, tensor products."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encodings import constant_encoding
from .mps import EXACT, MPS, DomainMeta, Order, SimplifyStrategy, simplify, truncate


@dataclass(frozen=True)
class LinearCombination:
    terms: tuple[tuple[complex, MPS], ...]
    strategy: SimplifyStrategy = EXACT


def combine(terms, strategy: SimplifyStrategy | None = None) -> MPS:
    """Simplified ``sum_i alpha_i psi_i``.

    ``terms`` is a :class:`LinearCombination` or a sequence of
    ``(coefficient, state)`` pairs; an explicit ``strategy`` overrides the
    one carried by a :class:`LinearCombination`.
    """
    if isinstance(terms, LinearCombination):
        strategy = strategy or terms.strategy
        terms = terms.terms
    return simplify(list(terms), strategy or EXACT)


def hadamard(u: MPS, v: MPS, strategy: SimplifyStrategy | None = None) -> MPS:
    """Element-wise product.  Bonds multiply; ``strategy=None`` skips simplification."""
    if len(u) != len(v):
        raise ValueError("element-wise product needs equal core counts")
    cores = []
    for a, b in zip(u.cores, v.cores):
        c = np.einsum("asb,csd->acsbd", a, b)
        cores.append(c.reshape(a.shape[0] * b.shape[0], 2, a.shape[2] * b.shape[2]))
    out = MPS(cores, u.meta or v.meta)
    return out if strategy is None else truncate(out, strategy)


def _merged_meta(states: Sequence[MPS], order: Order) -> DomainMeta | None:
    metas = [s.meta for s in states]
    if any(m is None for m in metas):
        return None
    qubits = tuple(q for m in metas for q in m.qubits_per_dim)
    intervals = tuple(iv for m in metas for iv in m.intervals)
    if order is Order.INTERLEAVED and any(m.dims != 1 for m in metas):
        return None
    if order is Order.SERIAL and any(m.order is Order.INTERLEAVED and m.dims > 1 for m in metas):
        return None
    return DomainMeta(qubits, intervals, order)


def tensor_product(states: Sequence[MPS], order: Order | str = Order.SERIAL) -> MPS:
    """Outer product of states over disjoint variables.

    Serial order concatenates the chains.  Interleaved order places bit ``k``
    of every state next to each other; the bond then carries the current
    bond of every factor, ordered with the first state most significant.
    """
    order = Order(order)
    states = list(states)
    if not states:
        raise ValueError("need at least one state")
    meta = _merged_meta(states, order)
    if order is Order.SERIAL or len(states) == 1:
        return MPS([c for s in states for c in s.cores], meta)
    n = len(states[0])
    if any(len(s) != n for s in states):
        raise ValueError("interleaved order requires equal core counts")
    # bonds[j]: bond of state j immediately left of the current site
    bonds = [1] * len(states)
    cores = []
    for k in range(n):
        for j, s in enumerate(states):
            A = s.cores[k]
            before = int(np.prod(bonds[:j]))
            after = int(np.prod(bonds[j + 1:]))
            core = np.einsum("ab,isj,cd->aicsbjd", np.eye(before), A, np.eye(after))
            cores.append(core.reshape(before * A.shape[0] * after, 2, before * A.shape[2] * after))
            bonds[j] = A.shape[2]
    return MPS(cores, meta)


def interleave_permutation(qubits: int, dims: int) -> np.ndarray:
    """Axis permutation taking the serial tensor layout to the interleaved one.

    ``serial.reshape((2,) * N).transpose(perm)`` equals the interleaved tensor.
    """
    return np.array([j * qubits + k for k in range(qubits) for j in range(dims)])


def affine_rescale(g: MPS, source, target, strategy: SimplifyStrategy = EXACT) -> MPS:
    """Map values of ``g`` from ``[a, b]`` onto ``[c, d]``, keeping orientation."""
    a, b = map(float, source)
    c, d = map(float, target)
    if a == b:
        raise ValueError("degenerate source interval")
    scale = (d - c) / (b - a)
    shift = c - a * scale
    if shift == 0.0:
        return truncate(g.scaled(scale), strategy)
    one = constant_encoding(len(g), 1.0, meta=g.meta)
    return combine([(scale, g), (shift, one)], strategy)
