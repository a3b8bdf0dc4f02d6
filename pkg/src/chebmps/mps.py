"""Matrix product states over binary (quantized) indices.

An :class:`MPS` is a chain of rank-3 cores ``(chi_left, 2, chi_right)`` with
unit boundary bonds.  Bit ``s_1`` (site 0) addresses the coarsest length
scale, so the row-major flattening of :func:`to_dense` enumerates grid points
in their natural order.

All operations are pure: they return new states and never touch their inputs.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

#: Largest core count that :func:`to_dense` / :func:`from_dense` accept.
DENSE_LIMIT = 28


class Order(str, enum.Enum):
    """Placement of the qubits of several variables along the chain."""

    SERIAL = "serial"
    INTERLEAVED = "interleaved"


@dataclass(frozen=True)
class DomainMeta:
    """Grid attached to an MPS: ``m`` variables, ``n_j`` qubits each.

    Variable ``j`` lives on the half-open uniform grid
    ``a_j + i (b_j - a_j) / 2**n_j``.
    """

    qubits_per_dim: tuple[int, ...]
    intervals: tuple[tuple[float, float], ...]
    order: Order = Order.SERIAL

    def __post_init__(self):
        q = tuple(int(k) for k in self.qubits_per_dim)
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        object.__setattr__(self, "qubits_per_dim", q)
        object.__setattr__(self, "intervals", iv)
        object.__setattr__(self, "order", Order(self.order))
        if len(q) == 0 or len(q) != len(iv):
            raise ValueError("need one interval per dimension")
        if any(k < 1 for k in q):
            raise ValueError("every dimension needs at least one qubit")
        for a, b in iv:
            if not a < b:
                raise ValueError(f"empty interval [{a}, {b})")
        if self.order is Order.INTERLEAVED and len(set(q)) != 1:
            raise ValueError("interleaved order requires equal qubits per dimension")

    @classmethod
    def univariate(cls, n: int, interval=(0.0, 1.0)) -> "DomainMeta":
        return cls((n,), (tuple(interval),))

    @classmethod
    def uniform(cls, m: int, n: int, interval=(0.0, 1.0), order=Order.SERIAL) -> "DomainMeta":
        return cls((n,) * m, (tuple(interval),) * m, order)

    @property
    def dims(self) -> int:
        return len(self.qubits_per_dim)

    @property
    def total_qubits(self) -> int:
        return sum(self.qubits_per_dim)

    def site_layout(self) -> list[tuple[int, int]]:
        """``(dimension, bit level)`` for every site, level 0 being the MSB."""
        if self.order is Order.SERIAL:
            return [(j, k) for j, n in enumerate(self.qubits_per_dim) for k in range(n)]
        n = self.qubits_per_dim[0]
        return [(j, k) for k in range(n) for j in range(self.dims)]

    def bit_weights(self) -> np.ndarray:
        """Integer matrix ``M`` (sites x dims) with ``bits @ M`` = grid indices."""
        M = np.zeros((self.total_qubits, self.dims), dtype=np.int64)
        for site, (j, k) in enumerate(self.site_layout()):
            M[site, j] = 1 << (self.qubits_per_dim[j] - 1 - k)
        return M

    def spacing(self) -> np.ndarray:
        return np.array([(b - a) / 2**n for (a, b), n in zip(self.intervals, self.qubits_per_dim)])

    def coordinates(self, bits) -> np.ndarray:
        """Map bit patterns ``(B, N)`` to grid coordinates ``(B, m)``."""
        bits = np.atleast_2d(np.asarray(bits, dtype=np.int64))
        idx = bits @ self.bit_weights()
        lower = np.array([a for a, _ in self.intervals])
        return lower + idx * self.spacing()


class Budget(str, enum.Enum):
    """How the tolerance is shared between the bonds of one truncation sweep."""

    GLOBAL = "global"  # split evenly: all bonds together discard <= tolerance
    LOCAL = "local"  # every bond may discard up to tolerance on its own


@dataclass(frozen=True)
class SimplifyStrategy:
    """Truncation policy shared by every finite-precision operation.

    ``tolerance`` is a relative squared-norm budget.  With the default
    ``GLOBAL`` budget the discarded weight of all truncations in a sweep
    together stays below ``tolerance * |psi|^2``.  ``LOCAL`` lets every bond
    discard that much on its own, so a bond's rank does not depend on the
    length of the chain, at the price of a looser overall bound.
    """

    tolerance: float = 1e-14
    max_bond: int | None = None
    max_sweeps: int = 4
    normalize: bool = False
    budget: Budget = Budget.GLOBAL

    def __post_init__(self):
        object.__setattr__(self, "budget", Budget(self.budget))
        if not 0.0 <= self.tolerance <= 1.0:
            raise ValueError("tolerance must lie in [0, 1]")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be positive")
        if self.max_bond is not None and self.max_bond < 1:
            raise ValueError("max_bond must be positive")


EXACT = SimplifyStrategy(tolerance=0.0)


class MPS:
    """Open-boundary matrix product state with physical dimension 2."""

    __slots__ = ("cores", "meta")

    def __init__(self, cores: Iterable[np.ndarray], meta: DomainMeta | None = None):
        cores = tuple(np.asarray(c) for c in cores)
        if not cores:
            raise ValueError("an MPS needs at least one core")
        for i, c in enumerate(cores):
            if c.ndim != 3 or c.shape[1] != 2:
                raise ValueError(f"core {i} has shape {c.shape}, expected (chi, 2, chi')")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ValueError("boundary bonds must be 1")
        for i in range(len(cores) - 1):
            if cores[i].shape[2] != cores[i + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {i} and {i + 1}")
        if meta is not None and meta.total_qubits != len(cores):
            raise ValueError("domain metadata does not match the number of cores")
        object.__setattr__(self, "cores", cores)
        object.__setattr__(self, "meta", meta)

    def __setattr__(self, name, value):
        raise AttributeError("MPS is immutable")

    def __len__(self) -> int:
        return len(self.cores)

    def __repr__(self) -> str:
        return f"MPS(n={len(self)}, chi_max={self.max_bond}, dtype={self.dtype})"

    @property
    def size(self) -> int:
        return len(self.cores)

    @property
    def physical_dims(self) -> list[int]:
        return [c.shape[1] for c in self.cores]

    @property
    def dtype(self):
        return np.result_type(*self.cores)

    @property
    def bonds(self) -> list[int]:
        """Internal bond dimensions chi_1 .. chi_{n-1}."""
        return [c.shape[2] for c in self.cores[:-1]]

    @property
    def max_bond(self) -> int:
        return max(self.bonds, default=1)

    def with_meta(self, meta: DomainMeta | None) -> "MPS":
        return MPS(self.cores, meta)

    def scaled(self, factor) -> "MPS":
        return MPS((self.cores[0] * factor,) + self.cores[1:], self.meta)


def bond_profile(mps: MPS) -> list[int]:
    return mps.bonds


def zero_mps(n: int, meta: DomainMeta | None = None, dtype=np.float64) -> MPS:
    """The canonical zero state: all cores zero, every bond 1."""
    return MPS([np.zeros((1, 2, 1), dtype=dtype) for _ in range(n)], meta)


def product_mps(vectors: Sequence, meta: DomainMeta | None = None) -> MPS:
    """Bond-1 state from per-site 2-vectors."""
    return MPS([np.asarray(v).reshape(1, 2, 1) for v in vectors], meta)


def random_mps(n: int, chi: int, seed=None, dtype=np.float64) -> MPS:
    """Random state with bonds ``min(chi, 2**k, 2**(n-k))``."""
    rng = np.random.default_rng(seed)
    bonds = [1] + [min(chi, 2**k, 2 ** (n - k)) for k in range(1, n)] + [1]
    cores = []
    for k in range(n):
        shape = (bonds[k], 2, bonds[k + 1])
        c = rng.standard_normal(shape)
        if np.issubdtype(dtype, np.complexfloating):
            c = c + 1j * rng.standard_normal(shape)
        cores.append(c.astype(dtype) / np.sqrt(bonds[k]))
    return MPS(cores)


def is_zero(mps: MPS) -> bool:
    return any(not np.any(c) for c in mps.cores)


# --- queries -----------------------------------------------------------------


def to_dense(mps: MPS) -> np.ndarray:
    """Contract all cores into the flat vector of ``2**n`` amplitudes."""
    if len(mps) > DENSE_LIMIT:
        raise OverflowError(f"refusing to densify {len(mps)} qubits (limit {DENSE_LIMIT})")
    out = mps.cores[0].reshape(2, -1)
    for c in mps.cores[1:]:
        out = (out @ c.reshape(c.shape[0], -1)).reshape(-1, c.shape[2])
    return out.reshape(-1)


def element(mps: MPS, bits: Sequence[int]):
    """Amplitude at one bit pattern, as a product of selected matrices."""
    bits = list(bits)
    if len(bits) != len(mps):
        raise ValueError(f"expected {len(mps)} bits, got {len(bits)}")
    v = np.ones(1, dtype=mps.dtype)
    for c, s in zip(mps.cores, bits):
        if s not in (0, 1):
            raise ValueError(f"bit values must be 0 or 1, got {s}")
        v = v @ c[:, s, :]
    return v[0]


def elements(mps: MPS, bits) -> np.ndarray:
    """Vectorised :func:`element` over a ``(B, n)`` array of bit patterns."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.intp))
    if bits.shape[1] != len(mps):
        raise ValueError(f"expected {len(mps)} bits per row, got {bits.shape[1]}")
    v = mps.cores[0][0, bits[:, 0], :]
    for k in range(1, len(mps)):
        c = mps.cores[k]
        # two matrix products and a select; gathering c per sample costs B * chi^2 memory
        v = np.where(bits[:, k, None] == 0, v @ c[:, 0, :], v @ c[:, 1, :])
    return v[:, 0]


def _check_pair(u: MPS, v: MPS):
    if len(u) != len(v) or u.physical_dims != v.physical_dims:
        raise ValueError("states have incompatible shapes")


def inner(u: MPS, v: MPS):
    """<u|v> = sum conj(u) v, by a left-to-right environment sweep."""
    _check_pair(u, v)
    env = np.ones((1, 1), dtype=np.result_type(u.dtype, v.dtype))
    for a, b in zip(u.cores, v.cores):
        env = np.einsum("ij,isk,jsl->kl", env, a.conj(), b, optimize=True)
    return env[0, 0]


def norm2(mps: MPS) -> float:
    return float(math.sqrt(max(np.real(inner(mps, mps)), 0.0)))


# --- gauge -------------------------------------------------------------------


def _svd(a: np.ndarray):
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")


def _left_qr_step(cores: list, i: int):
    l, s, r = cores[i].shape
    Q, R = np.linalg.qr(cores[i].reshape(l * s, r))
    cores[i] = Q.reshape(l, s, Q.shape[1])
    cores[i + 1] = np.tensordot(R, cores[i + 1], axes=(1, 0))


def _right_qr_step(cores: list, i: int):
    l, s, r = cores[i].shape
    Q, R = np.linalg.qr(cores[i].reshape(l, s * r).T)
    cores[i] = Q.T.reshape(Q.shape[1], s, r)
    cores[i - 1] = np.tensordot(cores[i - 1], R.T, axes=(2, 0))


def canonicalize(mps: MPS, center: int) -> MPS:
    """Mixed canonical form: left isometries before ``center``, right after."""
    n = len(mps)
    if not 0 <= center < n:
        raise IndexError(f"center {center} outside [0, {n})")
    cores = list(mps.cores)
    for i in range(center):
        _left_qr_step(cores, i)
    for i in range(n - 1, center, -1):
        _right_qr_step(cores, i)
    return MPS(cores, mps.meta)


# --- truncation ----------------------------------------------------------------


def _keep(S: np.ndarray, budget: float, max_bond: int | None) -> tuple[int, bool]:
    """Smallest rank whose discarded squared tail fits in ``budget``.

    Returns the rank and whether ``max_bond`` cut below it.
    """
    tail = np.cumsum((S * S)[::-1])[::-1]
    k = int(np.count_nonzero(tail > budget))
    k = max(k, 1)
    if max_bond is not None and k > max_bond:
        return max_bond, True
    return k, False


def _bond_budget(strategy: SimplifyStrategy, norm_sq: float, n: int) -> float:
    if strategy.budget is Budget.LOCAL:
        return strategy.tolerance * norm_sq
    return strategy.tolerance * norm_sq / max(n - 1, 1)


def _svd_compress(cores: list, strategy: SimplifyStrategy) -> tuple[list, float, bool]:
    """Right-canonicalise, then truncate left to right.

    Returns the new cores (orthogonality centre on the last site), the squared
    norm of the input and whether the bond cap was binding anywhere.
    """
    n = len(cores)
    cores = list(cores)
    for i in range(n - 1, 0, -1):
        _right_qr_step(cores, i)
    norm_sq = float(np.real(np.vdot(cores[0], cores[0])))
    if norm_sq == 0.0:
        return cores, 0.0, False
    budget = _bond_budget(strategy, norm_sq, n)
    capped = False
    for i in range(n - 1):
        l, s, r = cores[i].shape
        U, S, Vt = _svd(cores[i].reshape(l * s, r))
        k, hit = _keep(S, budget, strategy.max_bond)
        capped |= hit
        cores[i] = U[:, :k].reshape(l, s, k)
        cores[i + 1] = np.tensordot(S[:k, None] * Vt[:k], cores[i + 1], axes=(1, 0))
    return cores, norm_sq, capped


def _direct_sum(terms: Sequence[tuple[complex, MPS]]) -> list:
    n = len(terms[0][1])
    dtype = np.result_type(*(np.asarray(a) for a, _ in terms), *(m.dtype for _, m in terms))
    if n == 1:
        return [sum(a * m.cores[0] for a, m in terms).astype(dtype)]
    out = []
    for k in range(n):
        blocks = [m.cores[k] for _, m in terms]
        if k == 0:
            core = np.concatenate([a * b for (a, _), b in zip(terms, blocks)], axis=2)
        elif k == n - 1:
            core = np.concatenate(blocks, axis=0)
        else:
            L = sum(b.shape[0] for b in blocks)
            R = sum(b.shape[2] for b in blocks)
            core = np.zeros((L, 2, R), dtype=dtype)
            i = j = 0
            for b in blocks:
                core[i:i + b.shape[0], :, j:j + b.shape[2]] = b
                i += b.shape[0]
                j += b.shape[2]
        out.append(core.astype(dtype, copy=False))
    return out


def _variational_sweeps(
    target: list, guess: list, strategy: SimplifyStrategy, target_norm_sq: float
) -> tuple[list, float]:
    """Two-site fitting of ``guess`` to ``target`` under tolerance and bond cap.

    Stops when a full sweep improves the squared residual by less than
    ``tolerance / 10`` (relative) or after ``max_sweeps`` sweeps.  Returns the
    cores and the final squared residual.
    """
    n = len(target)
    phi = list(guess)
    for i in range(n - 1, 0, -1):
        _right_qr_step(phi, i)
    budget = _bond_budget(strategy, target_norm_sq, n)

    def grow_left(env, a, b):
        return np.einsum("ij,isk,jsl->kl", env, a.conj(), b, optimize=True)

    def grow_right(env, a, b):
        return np.einsum("isk,jsl,kl->ij", a.conj(), b, env, optimize=True)

    one = np.ones((1, 1))
    R = [None] * (n + 1)
    R[n] = one
    for i in range(n - 1, 1, -1):
        R[i] = grow_right(R[i + 1], phi[i], target[i])
    L = [None] * (n + 1)
    L[0] = one

    def two_site(i):
        return np.einsum("ab,bsc,cte,fe->astf", L[i], target[i], target[i + 1], R[i + 2], optimize=True)

    previous = np.inf
    for _ in range(strategy.max_sweeps):
        for i in range(n - 1):
            M = two_site(i)
            a, s, t, f = M.shape
            U, S, Vt = _svd(M.reshape(a * s, t * f))
            k, _ = _keep(S, budget, strategy.max_bond)
            phi[i] = U[:, :k].reshape(a, s, k)
            phi[i + 1] = (S[:k, None] * Vt[:k]).reshape(k, t, f)
            L[i + 1] = grow_left(L[i], phi[i], target[i])
        for i in range(n - 2, -1, -1):
            M = two_site(i)
            a, s, t, f = M.shape
            U, S, Vt = _svd(M.reshape(a * s, t * f))
            k, _ = _keep(S, budget, strategy.max_bond)
            phi[i] = (U[:, :k] * S[:k]).reshape(a, s, k)
            phi[i + 1] = Vt[:k].reshape(k, t, f)
            R[i + 1] = grow_right(R[i + 2], phi[i + 1], target[i + 1])
        overlap = np.einsum("isk,jsl,kl->ij", phi[0].conj(), target[0], R[1], optimize=True)[0, 0]
        phi_sq = float(np.real(np.vdot(phi[0], phi[0])))
        residual = max(target_norm_sq - 2 * np.real(overlap) + phi_sq, 0.0)
        if previous - residual < 0.1 * strategy.tolerance * target_norm_sq:
            break
        previous = residual
    return phi, residual


def simplify(terms: Sequence[tuple[complex, MPS]], strategy: SimplifyStrategy = EXACT) -> MPS:
    """Closest bond-limited MPS to ``sum_i alpha_i psi_i``.

    The exact direct sum is SVD-compressed in canonical form, then two-site
    variational sweeps refit it to the sum.  A single SVD pass keeps noise
    that only later bonds reveal; the sweeps truncate every bond again with
    the rest of the chain already compressed.  If the sweeps end farther from
    the sum than the tolerance allows (and no bond cap forced it), the SVD
    result is returned instead.
    """
    terms = [(a, m) for a, m in terms]
    if not terms:
        raise ValueError("empty linear combination")
    first = terms[0][1]
    for _, m in terms[1:]:
        _check_pair(first, m)
    n = len(first)
    live = [(a, m) for a, m in terms if a != 0 and not is_zero(m)]
    dtype = np.result_type(*(np.asarray(a) for a, _ in terms), *(m.dtype for _, m in terms))
    if not live:
        return zero_mps(n, first.meta, dtype)
    target = _direct_sum(live)
    cores, norm_sq, capped = _svd_compress(target, strategy)
    if norm_sq == 0.0 or not np.isfinite(norm_sq):
        if not np.isfinite(norm_sq):
            raise FloatingPointError("non-finite amplitudes in linear combination")
        return zero_mps(n, first.meta, dtype)
    if n > 1 and (capped or strategy.tolerance > 0):
        fitted, residual = _variational_sweeps(target, cores, strategy, norm_sq)
        allowed = norm_sq * strategy.tolerance * (n - 1 if strategy.budget is Budget.LOCAL else 1)
        if capped or residual <= allowed:
            cores = fitted
    out = MPS(cores, first.meta)
    if strategy.normalize:
        out = out.scaled(1.0 / norm2(out))
    return out


def truncate(mps: MPS, strategy: SimplifyStrategy) -> MPS:
    """Compress a single state; ``tolerance=0`` only drops exact zero weight."""
    return simplify([(1.0, mps)], strategy)


def from_dense(values, strategy: SimplifyStrategy = EXACT, meta: DomainMeta | None = None) -> MPS:
    """Tensor-train SVD of a vector with ``2**N`` entries (MSB first)."""
    v = np.asarray(values)
    N = int(round(math.log2(v.size))) if v.size else -1
    if N < 1 or 2**N != v.size:
        raise ValueError("length must be a positive power of two")
    if N > DENSE_LIMIT:
        raise OverflowError(f"{N} qubits exceeds the dense limit {DENSE_LIMIT}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite input values")
    v = v.reshape(-1)
    norm_sq = float(np.real(np.vdot(v, v)))
    if norm_sq == 0.0:
        return zero_mps(N, meta, v.dtype)
    budget = _bond_budget(strategy, norm_sq, N)
    cores = []
    rest = v.reshape(1, -1)
    r = 1
    for _ in range(N - 1):
        U, S, Vt = _svd(rest.reshape(r * 2, -1))
        k, _ = _keep(S, budget, strategy.max_bond)
        cores.append(U[:, :k].reshape(r, 2, k))
        rest = S[:k, None] * Vt[:k]
        r = k
    cores.append(rest.reshape(r, 2, 1))
    out = MPS(cores, meta)
    if strategy.normalize:
        out = out.scaled(1.0 / norm2(out))
    return out
