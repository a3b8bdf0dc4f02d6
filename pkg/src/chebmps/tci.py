"""Tensor cross-interpolation of black-box functions on quantized grids.

One-site scheme with nested pivot sets: a left set ``I[k]`` holds prefixes of
length ``k``, a right set ``J[k]`` holds suffixes covering sites ``k..N-1``.
Site ``k`` sees the fiber ``A(I[k], s, J[k+1])``.  Sweeps alternate direction;
every half-sweep may grow each bond by one via rectangular maxvol.  The
returned MPS comes from a final non-growing left-to-right pass whose cores
are ``U U[rows]^-1``, so it reproduces the black box on every final fiber.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .mps import MPS, DomainMeta, Order, SimplifyStrategy, elements, truncate


class RankDeficientError(np.linalg.LinAlgError):
    def __init__(self, rank: int, wanted: int):
        super().__init__(f"matrix has numerical rank {rank}, need {wanted}")
        self.rank = rank
        self.wanted = wanted


class SingularPivotError(np.linalg.LinAlgError):
    def __init__(self, bond, cond: float):
        super().__init__(f"singular pivot submatrix at bond {bond} (condition {cond:.2e})")
        self.bond = bond


# --- maxvol -----------------------------------------------------------------------


def maxvol_square(A: np.ndarray, dominance_tol: float = 1e-2, max_iters: int = 200) -> np.ndarray:
    """Rows of a dominant ``r x r`` submatrix of the tall matrix ``A``.

    Starts from the pivots of an LU factorisation and swaps rows while some
    entry of ``A A[rows]^-1`` exceeds ``1 + dominance_tol`` in modulus.  Each
    swap multiplies ``|det A[rows]|`` by that entry.
    """
    A = np.asarray(A)
    p, r = A.shape
    if p < r:
        raise ValueError("maxvol needs at least as many rows as columns")
    if r == 0:
        return np.zeros(0, dtype=np.intp)
    S = np.linalg.svd(A, compute_uv=False)
    rank = int(np.count_nonzero(S > S[0] * max(p, r) * np.finfo(float).eps)) if S[0] > 0 else 0
    if rank < r:
        raise RankDeficientError(rank, r)
    P, _, _ = scipy.linalg.lu(A)
    rows = np.argmax(P, axis=0)[:r].astype(np.intp)
    C = np.linalg.solve(A[rows].T, A.T).T
    for _ in range(max_iters):
        flat = int(np.argmax(np.abs(C)))
        i, j = divmod(flat, r)
        pivot = C[i, j]
        if abs(pivot) <= 1.0 + dominance_tol:
            break
        e = np.zeros(r, dtype=C.dtype)
        e[j] = 1.0
        C -= np.outer(C[:, j], C[i, :] - e) / pivot
        rows[j] = i
    return rows


def maxvol_rect(
    A: np.ndarray, r_min: int | None = None, r_max: int | None = None, tol: float = 0.0, dominance_tol: float = 1e-2
) -> tuple[np.ndarray, np.ndarray]:
    """Grow a square maxvol set by rows of largest leverage.

    Row ``i`` raises the squared rectangular volume ``det(A_S^T A_S)`` by the
    factor ``1 + l_i`` with ``l_i = a_i (A_S^T A_S)^-1 a_i^T``.  Rows are added
    greedily: always until ``r_min``, then while ``l_i >= tol`` up to ``r_max``.
    Returns the rows and the gains ``l_i`` of the appended ones.
    """
    A = np.asarray(A)
    p, r = A.shape
    r_min = r if r_min is None else r_min
    r_max = max(r_min, r if r_max is None else r_max)
    r_max = min(r_max, p)
    rows = list(maxvol_square(A, dominance_tol))
    G_inv = np.linalg.inv(A[rows].conj().T @ A[rows])
    chosen = np.zeros(p, dtype=bool)
    chosen[rows] = True
    gains = []
    while len(rows) < r_max:
        lev = np.real(np.einsum("ij,jk,ik->i", A.conj(), G_inv, A))
        lev[chosen] = -np.inf
        i = int(np.argmax(lev))
        gain = max(float(lev[i]), 0.0)
        if len(rows) >= r_min and gain < tol:
            break
        a = A[i:i + 1]
        Ga = G_inv @ a.conj().T
        G_inv = G_inv - (Ga @ Ga.conj().T) / (1.0 + gain)
        rows.append(i)
        chosen[i] = True
        gains.append(gain)
    return np.asarray(rows, dtype=np.intp), np.asarray(gains)


def skeleton(A: np.ndarray, rows, cols, bond=None) -> np.ndarray:
    """``A[:, cols] A[rows, cols]^-1 A[rows, :]`` through a QR of the columns."""
    A = np.asarray(A)
    rows, cols = np.asarray(rows), np.asarray(cols)
    Q, R = np.linalg.qr(A[:, cols])
    W = Q[rows]
    # the pivot block A[rows, cols] = W R must be invertible, not just W
    cond = np.linalg.cond(W) * np.linalg.cond(R)
    if not np.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
        raise SingularPivotError(bond, cond)
    return Q @ np.linalg.solve(W, A[rows, :])


# --- black boxes --------------------------------------------------------------------


@dataclass(frozen=True)
class IndexMap:
    """``bits @ matrix`` gives the per-dimension grid indices."""

    matrix: np.ndarray
    order: Order = Order.SERIAL

    def indices(self, bits) -> np.ndarray:
        return np.asarray(bits, dtype=np.int64) @ self.matrix


def build_index_map(meta: DomainMeta) -> IndexMap:
    return IndexMap(meta.bit_weights(), meta.order)


def _keys(bits: np.ndarray) -> list[bytes]:
    packed = np.packbits(bits.astype(np.uint8), axis=1)
    return [row.tobytes() for row in packed]


class BlackBox:
    """Deterministic function of bit patterns with a tally of evaluated points.

    ``fn`` receives grid coordinates: a ``(B,)`` array for one variable or a
    ``(B, m)`` array otherwise.  With ``on_bits=True`` it receives the raw
    ``(B, N)`` bit patterns instead.  Points seen before are served from a
    cache and not counted again; ``sample_count`` tallies evaluations made for
    error estimates separately.
    """

    def __init__(self, fn: Callable, domain: DomainMeta, index_map: IndexMap | None = None, on_bits: bool = False):
        self.fn = fn
        self.domain = domain
        self.index_map = index_map or build_index_map(domain)
        self.on_bits = on_bits
        self.eval_count = 0
        self.sample_count = 0
        self._cache: dict[bytes, complex] = {}
        self._lower = np.array([a for a, _ in domain.intervals])
        self._spacing = domain.spacing()

    @classmethod
    def from_mps(cls, mps: MPS, domain: DomainMeta | None = None) -> "BlackBox":
        domain = domain or mps.meta or DomainMeta.univariate(len(mps))
        return cls(lambda bits: elements(mps, bits), domain, on_bits=True)

    @property
    def sites(self) -> int:
        return self.domain.total_qubits

    def _raw(self, bits: np.ndarray) -> np.ndarray:
        if self.on_bits:
            v = self.fn(bits)
        else:
            x = self._lower + self.index_map.indices(bits) * self._spacing
            v = self.fn(x[:, 0] if x.shape[1] == 1 else x)
        v = np.asarray(v)
        if v.shape != (bits.shape[0],):
            v = np.broadcast_to(v, (bits.shape[0],))
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("black box returned non-finite values")
        return v

    def __call__(self, bits) -> np.ndarray:
        """Cached evaluation counted in ``eval_count``."""
        bits = np.atleast_2d(np.asarray(bits, dtype=np.int64))
        keys = _keys(bits)
        missing = {}
        for i, k in enumerate(keys):
            if k not in self._cache and k not in missing:
                missing[k] = i
        if missing:
            idx = np.fromiter(missing.values(), dtype=np.intp)
            vals = self._raw(bits[idx])
            self.eval_count += idx.size
            for k, v in zip(missing, vals):
                self._cache[k] = v
        return np.array([self._cache[k] for k in keys])

    def sample(self, bits) -> np.ndarray:
        """Uncached evaluation for error estimates, counted in ``sample_count``."""
        bits = np.atleast_2d(np.asarray(bits, dtype=np.int64))
        self.sample_count += bits.shape[0]
        return self._raw(bits)


# --- cross interpolation ---------------------------------------------------------------


class HaltReason(str, enum.Enum):
    CONVERGED = "converged"
    STAGNATED = "stagnated"
    MAX_SWEEPS = "max_sweeps"


@dataclass(frozen=True)
class CrossConfig:
    chi_thr: int = 30
    halt_tol: float = 1e-12
    max_sweeps: int = 20
    seed: int | None = 0
    halt_samples: int = 1 << 10
    rank_tol: float = 1e-14
    insert_pivots: bool = True
    final_strategy: SimplifyStrategy | None = None

    def __post_init__(self):
        if self.chi_thr < 1:
            raise ValueError("chi_thr must be at least 1")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


@dataclass
class CrossDiagnostics:
    halt_reason: HaltReason = HaltReason.MAX_SWEEPS
    sweeps: int = 0
    eval_count: int = 0
    bond_profile_per_sweep: list[list[int]] = field(default_factory=list)
    sampled_error_per_sweep: list[float] = field(default_factory=list)
    # pivot sets of the returned state, one (rows, cols) pair per site
    fibers: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list, repr=False)

    def fiber_indices(self, site: int) -> np.ndarray:
        """All bit patterns of the final fiber at ``site``."""
        I, J = self.fibers[site]
        return _fiber_bits(I, J)

    def to_json(self) -> str:
        return json.dumps(
            {
                "halt_reason": self.halt_reason.value,
                "sweeps": self.sweeps,
                "eval_count": self.eval_count,
                "bond_profile_per_sweep": self.bond_profile_per_sweep,
                "sampled_error_per_sweep": self.sampled_error_per_sweep,
            }
        )


@dataclass
class CrossState:
    """Nested pivot sets: ``left[k]`` is ``(r, k)``, ``right[k]`` is ``(r, N - k)``."""

    left: list[np.ndarray]
    right: list[np.ndarray]
    sweep: int = 0

    @classmethod
    def from_index(cls, bits: np.ndarray) -> "CrossState":
        N = bits.size
        return cls([bits[None, :k] for k in range(N + 1)], [bits[None, k:] for k in range(N + 1)])

    def check_nested(self):
        """Assert nestedness of the sets used by interior bonds."""
        N = len(self.left) - 1
        for k in range(N - 1):
            prefixes = {tuple(r) for r in self.left[k]}
            for row in self.left[k + 1]:
                assert tuple(row[:k]) in prefixes, f"left set {k + 1} not nested"
        for k in range(1, N):
            suffixes = {tuple(r) for r in self.right[k + 1]}
            for row in self.right[k]:
                assert tuple(row[1:]) in suffixes, f"right set {k} not nested"

    def insert(self, bits: np.ndarray, cap: int) -> bool:
        """Add one full index to every interior set, keeping nestedness."""
        N = len(self.left) - 1
        if any(self.left[k].shape[0] >= cap or self.right[k].shape[0] >= cap for k in range(1, N)):
            return False
        added = False
        for k in range(1, N):
            if not np.all(self.left[k] == bits[:k], axis=1).any():
                self.left[k] = np.concatenate([self.left[k], bits[None, :k]])
                added = True
            if not np.all(self.right[k] == bits[k:], axis=1).any():
                self.right[k] = np.concatenate([self.right[k], bits[None, k:]])
                added = True
        return added


def _fiber_bits(I: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Bit patterns ``(I[p], s, J[j])`` ordered as ``(p, s, j)``."""
    r, q = I.shape[0], J.shape[0]
    left = np.repeat(I, 2 * q, axis=0)
    mid = np.tile(np.repeat(np.array([[0], [1]]), q, axis=0), (r, 1))
    right = np.tile(J, (2 * r, 1))
    return np.concatenate([left, mid, right], axis=1)


def _fiber(bb: BlackBox, I, J) -> np.ndarray:
    return bb(_fiber_bits(I, J)).reshape(I.shape[0], 2, J.shape[0])


def _numerical_rank(S: np.ndarray, rel: float) -> int:
    if S.size == 0 or S[0] == 0:
        return 0
    return int(np.count_nonzero(S > rel * S[0]))


def _select(M: np.ndarray, grow: bool, chi_thr: int, rel: float, rng) -> tuple[np.ndarray, np.ndarray | None]:
    """Row pivots of ``M`` and, for a fixed rank, the interpolating factor."""
    p, q = M.shape
    U, S, _ = np.linalg.svd(M, full_matrices=False)
    rho = _numerical_rank(S, rel)
    if rho == 0:
        r = min(q + 1, chi_thr, p) if grow else 1
        return np.sort(rng.choice(p, size=r, replace=False)), np.zeros((p, r))
    U = U[:, :rho]
    if grow and rho == min(p, q):
        r = min(rho + 1, chi_thr, p)
    else:
        r = min(rho, chi_thr)
        U = U[:, :r]
    if r > U.shape[1]:
        rows, _ = maxvol_rect(U, r, r)
        return rows, None
    rows = maxvol_square(U)
    return rows, np.linalg.solve(U[rows].T, U.T).T


def _left_to_right(bb, state: CrossState, cfg: CrossConfig, grow: bool, rng, cores: list | None = None):
    N = len(state.left) - 1
    for k in range(N - 1):
        I, J = state.left[k], state.right[k + 1]
        F = _fiber(bb, I, J)
        rows, core = _select(F.reshape(-1, J.shape[0]), grow, cfg.chi_thr, cfg.rank_tol, rng)
        p, s = rows // 2, rows % 2
        state.left[k + 1] = np.concatenate([I[p], s[:, None]], axis=1)
        if cores is not None:
            cores.append(core.reshape(I.shape[0], 2, rows.size))
    if cores is not None:
        cores.append(_fiber(bb, state.left[N - 1], state.right[N]))


def _right_to_left(bb, state: CrossState, cfg: CrossConfig, grow: bool, rng):
    N = len(state.left) - 1
    for k in range(N - 1, 0, -1):
        I, J = state.left[k], state.right[k + 1]
        F = _fiber(bb, I, J)
        q = J.shape[0]
        rows, _ = _select(F.reshape(I.shape[0], -1).T, grow, cfg.chi_thr, cfg.rank_tol, rng)
        s, j = rows // q, rows % q
        state.right[k] = np.concatenate([s[:, None], J[j]], axis=1)


def _assemble(bb, state: CrossState, cfg: CrossConfig, rng) -> tuple[MPS, list]:
    """Interpolating MPS from a non-growing pass over a copy of the left sets."""
    trial = CrossState(list(state.left), list(state.right), state.sweep)
    cores: list = []
    _left_to_right(bb, trial, cfg, False, rng, cores)
    fibers = [(trial.left[k], trial.right[k + 1]) for k in range(len(cores))]
    return MPS(cores, bb.domain), fibers


def _sampled_error(bb: BlackBox, mps: MPS, bits: np.ndarray) -> tuple[float, int]:
    err = np.abs(elements(mps, bits) - bb.sample(bits))
    worst = int(np.argmax(err))
    return float(err[worst]), worst


def cross_interpolate(bb: BlackBox, config: CrossConfig = CrossConfig(), check_nested: bool = False) -> tuple[MPS, CrossDiagnostics]:
    """Rank-adaptive cross interpolation of ``bb``.

    After every full sweep the interpolating state is assembled and its
    absolute error is measured on ``config.halt_samples`` fresh seeded random
    bit patterns.  The run stops when that error is at most ``halt_tol``, when
    neither the bonds nor the error change any more, or after ``max_sweeps``.
    Otherwise, with ``insert_pivots``, the worst sampled point joins every
    pivot set, which lets the sweeps discover features (jumps, narrow peaks)
    that the current fibers cannot see.
    """
    cfg = config
    N = bb.sites
    rng = np.random.default_rng(cfg.seed)
    state = CrossState.from_index(rng.integers(0, 2, N))
    diag = CrossDiagnostics()
    best = None
    if N == 1:
        mps = MPS([bb(np.array([[0], [1]])).reshape(1, 2, 1)], bb.domain)
        diag.fibers = [(state.left[0], state.right[1])]
        diag.halt_reason = HaltReason.CONVERGED
        diag.eval_count = bb.eval_count
        return mps, diag
    for sweep in range(1, cfg.max_sweeps + 1):
        _left_to_right(bb, state, cfg, True, rng)
        _right_to_left(bb, state, cfg, True, rng)
        if check_nested:
            state.check_nested()
        state.sweep = sweep
        mps, fibers = _assemble(bb, state, cfg, rng)
        probe = rng.integers(0, 2, (cfg.halt_samples, N))
        err, worst = _sampled_error(bb, mps, probe)
        diag.sweeps = sweep
        diag.bond_profile_per_sweep.append(mps.bonds)
        diag.sampled_error_per_sweep.append(err)
        improved = best is None or err < 0.5 * best[2]
        stuck = len(diag.bond_profile_per_sweep) > 1 and diag.bond_profile_per_sweep[-2] == mps.bonds
        if best is None or err <= best[2]:
            best = (mps, fibers, err)
        if err <= cfg.halt_tol:
            diag.halt_reason = HaltReason.CONVERGED
            break
        inserted = cfg.insert_pivots and state.insert(probe[worst], cfg.chi_thr)
        if stuck and not improved and not inserted:
            diag.halt_reason = HaltReason.STAGNATED
            break
    else:
        diag.halt_reason = HaltReason.MAX_SWEEPS
    mps, diag.fibers, _ = best
    if cfg.final_strategy is not None:
        mps = truncate(mps, cfg.final_strategy)
    diag.eval_count = bb.eval_count
    return mps, diag
