"""Closed-form MPS of simple functions on the uniform grid ``a + i (b - a) / 2**n``."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mps import MPS, DomainMeta, zero_mps

MAX_DEGREE = 30


def _meta(n: int, interval) -> DomainMeta:
    return DomainMeta.univariate(n, interval)


def _steps(n: int, interval) -> np.ndarray:
    """Coordinate increment carried by each bit, MSB first."""
    a, b = interval
    return (b - a) / 2.0 ** np.arange(1, n + 1)


def x_encoding(n: int, interval=(0.0, 1.0)) -> MPS:
    """The coordinate itself, bond dimension 2."""
    if n < 1:
        raise ValueError("need at least one qubit")
    a, _ = interval
    w = _steps(n, interval)
    meta = _meta(n, interval)
    if n == 1:
        return MPS([np.array([a, a + w[0]]).reshape(1, 2, 1)], meta)
    cores = []
    for k in range(n):
        if k == 0:
            core = np.array([[[1.0, a]], [[1.0, a + w[0]]]]).transpose(1, 0, 2)
        elif k == n - 1:
            core = np.array([[[0.0, w[k]]], [[1.0, 1.0]]]).transpose(0, 2, 1)
        else:
            core = np.zeros((2, 2, 2))
            core[0, :, 0] = 1.0
            core[1, :, 1] = 1.0
            core[0, 1, 1] = w[k]
        cores.append(core)
    return MPS(cores, meta)


def constant_encoding(n: int, value=1.0, interval=None, meta: DomainMeta | None = None) -> MPS:
    if meta is None and interval is not None:
        meta = _meta(n, interval)
    if value == 0:
        return zero_mps(n, meta)
    dtype = np.result_type(value, np.float64)
    cores = [np.ones((1, 2, 1), dtype=dtype) for _ in range(n)]
    cores[0] = cores[0] * value
    return MPS(cores, meta)


def exponential_encoding(n: int, interval=(0.0, 1.0), rate=1.0, prefactor=1.0) -> MPS:
    """``prefactor * exp(rate * x)`` as a product state; complex rates allowed."""
    a, _ = interval
    w = _steps(n, interval)
    cores = [np.exp(rate * np.array([0.0, wk])).reshape(1, 2, 1) for wk in w]
    cores[0] = cores[0] * (prefactor * np.exp(rate * a))
    return MPS(cores, _meta(n, interval))


class Trig(str, enum.Enum):
    SIN = "sin"
    COS = "cos"


def trig_encoding(n: int, interval=(0.0, 1.0), kind: Trig | str = Trig.COS, frequency=1.0, phase=0.0) -> MPS:
    """``sin`` or ``cos`` of ``frequency * x + phase`` with real bond-2 cores.

    The bond carries ``(cos, sin)`` of the partial phase; every bit applies a
    rotation by its share of the angle.
    """
    kind = Trig(kind)
    a, _ = interval
    w = _steps(n, interval)

    def rot(theta):
        c, s = np.cos(theta), np.sin(theta)
        return np.array([[c, s], [-s, c]])

    theta0 = frequency * a + phase
    head = np.array([np.cos(theta0), np.sin(theta0)])
    tail = np.array([1.0, 0.0]) if kind is Trig.COS else np.array([0.0, 1.0])
    mats = [np.stack([rot(0.0), rot(frequency * wk)], axis=1) for wk in w]  # (2, 2, 2)
    mats[0] = np.einsum("a,asb->sb", head, mats[0])[None]
    mats[-1] = np.einsum("asb,b->as", mats[-1], tail)[..., None]
    return MPS(mats, _meta(n, interval))


# --- polynomials ---------------------------------------------------------------


class PolyForm(str, enum.Enum):
    """Where the coefficient vector is contracted: last core or first core."""

    LEFT_COEFF = "left"
    RIGHT_COEFF = "right"


@dataclass(frozen=True)
class PolynomialSpec:
    coefficients: tuple[float, ...]
    interval: tuple[float, float] = (0.0, 1.0)
    qubits: int = 10

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if len(self.coefficients) == 0:
            raise ValueError("a polynomial needs at least one coefficient")
        if len(self.coefficients) - 1 > MAX_DEGREE:
            raise ValueError(f"degree above {MAX_DEGREE} is not supported")
        if self.qubits < 1:
            raise ValueError("need at least one qubit")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


def pascal(d: int) -> np.ndarray:
    """Binomial table ``C[k, r] = binom(k, r)`` as doubles, ``0 <= r, k <= d``."""
    C = np.zeros((d + 1, d + 1))
    C[:, 0] = 1.0
    for k in range(1, d + 1):
        C[k, 1:k + 1] = C[k - 1, :k] + C[k - 1, 1:k + 1]
    return C


def _unit_coefficients(coefficients, interval) -> np.ndarray:
    """Coefficients in ``t`` of ``p(a + (b - a) t)``."""
    p = np.asarray(coefficients, dtype=np.result_type(*coefficients, np.float64))
    a, b = interval
    d = len(p) - 1
    C = pascal(d)
    q = np.zeros_like(p)
    for j in range(d + 1):
        i = np.arange(j, d + 1)
        q[j] = np.sum(p[i] * C[i, j] * a ** (i - j)) * (b - a) ** j
    return q


def _shift_tensor(d: int, step: float, C: np.ndarray) -> np.ndarray:
    """``T[r, s, k] = C(k, r) (s * step)**(k - r)`` for ``k >= r``, else 0."""
    T = np.zeros((d + 1, 2, d + 1))
    for s in (0, 1):
        for k in range(d + 1):
            for r in range(k + 1):
                T[r, s, k] = C[k, r] * (s * step) ** (k - r)
    return T


def polynomial_encoding(spec: PolynomialSpec, form: PolyForm | str = PolyForm.LEFT_COEFF) -> MPS:
    """Exact MPS of ``sum_i p_i x**i``; every internal bond is ``degree + 1``.

    The coordinate is built bit by bit.  Appending bit ``s`` with step ``w``
    maps the monomial vector through ``(y + s w)**k = sum_r C(k, r) (s w)**(k - r) y**r``.
    ``LEFT_COEFF`` grows the coordinate from the most significant bit and
    contracts the coefficients into the last core; ``RIGHT_COEFF`` grows it
    from the least significant bit and contracts them into the first core.
    """
    form = PolyForm(form)
    n, d = spec.qubits, spec.degree
    q = _unit_coefficients(spec.coefficients, spec.interval)
    meta = _meta(n, spec.interval)
    steps = 2.0 ** -np.arange(1, n + 1)
    C = pascal(d)
    shifts = [_shift_tensor(d, w, C) for w in steps]
    if form is PolyForm.LEFT_COEFF:
        # rows: monomials of the coarser coordinate, columns: of the finer one
        cores = shifts
        cores[0] = cores[0][:1]
        cores[-1] = np.tensordot(cores[-1], q, axes=(2, 0))[..., None]
    else:
        # transposed shift: rows carry the monomial of the suffix coordinate
        cores = [T.transpose(2, 1, 0) for T in shifts]
        cores[0] = np.tensordot(q, cores[0], axes=(0, 0))[None]
        cores[-1] = cores[-1][..., :1]
    if n == 1:
        return MPS([cores[0]], meta)
    return MPS(cores, meta)


def monomial_values(coefficients: Sequence[float], x) -> np.ndarray:
    """Plain Horner evaluation, used as the dense reference."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x, dtype=np.result_type(*coefficients, np.float64))
    for p in reversed(list(coefficients)):
        out = out * x + p
    return out
