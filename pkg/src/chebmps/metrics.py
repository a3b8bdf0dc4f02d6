"""Error norms between functions on a grid, bond reports and rate fits."""
from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .mps import DENSE_LIMIT, MPS, _check_pair, _direct_sum, _right_qr_step, elements, inner, to_dense
from .tci import BlackBox

EXHAUSTIVE_LIMIT = DENSE_LIMIT


class Mode(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class SamplingConfig:
    batches: int = 10
    per_batch: int = 1000

    def __post_init__(self):
        if self.batches < 1 or self.per_batch < 1:
            raise ValueError("need at least one sample")

    @property
    def total(self) -> int:
        return self.batches * self.per_batch


@dataclass(frozen=True)
class ErrorEstimate:
    value: float
    std_dev: float | None
    mode: Mode
    samples: int
    p: float
    # mean of |difference|**p over all points used; unbiased for the p-th power of the norm
    power_mean: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["p"] = "inf" if math.isinf(self.p) else self.p
        return d


def _norm(diff: np.ndarray, p: float) -> float:
    a = np.abs(diff)
    if math.isinf(p):
        return float(a.max())
    return float(np.mean(a**p) ** (1.0 / p))


def _reference_values(reference, bits: np.ndarray) -> np.ndarray:
    if isinstance(reference, MPS):
        return elements(reference, bits)
    if isinstance(reference, BlackBox):
        return reference.sample(bits)
    raise TypeError("reference must be an MPS or a BlackBox")


def _all_bits(start: int, stop: int, N: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    return (idx[:, None] >> np.arange(N - 1, -1, -1)) & 1


def _exhaustive(reference, candidate: MPS, p: float) -> ErrorEstimate:
    N = len(candidate)
    if N > EXHAUSTIVE_LIMIT:
        raise OverflowError(f"exhaustive norm over {N} qubits exceeds the limit {EXHAUSTIVE_LIMIT}")
    cand = to_dense(candidate)
    if isinstance(reference, MPS):
        ref = to_dense(reference)
    else:
        chunk = 1 << 16
        ref = np.concatenate(
            [_reference_values(reference, _all_bits(i, min(i + chunk, cand.size), N)) for i in range(0, cand.size, chunk)]
        )
    diff = np.abs(ref - cand)
    power = None if math.isinf(p) else float(np.mean(diff**p))
    return ErrorEstimate(_norm(diff, p), None, Mode.EXHAUSTIVE, cand.size, p, power)


def sample_bits(N: int, config: SamplingConfig, seed) -> list[np.ndarray]:
    """One ``(per_batch, N)`` array of uniform bit patterns per batch.

    Every batch owns a child of ``SeedSequence(seed)``, so a run with more
    samples per batch extends the patterns of a run with fewer.
    """
    children = np.random.SeedSequence(seed).spawn(config.batches)
    return [(np.random.default_rng(c).random((config.per_batch, N)) < 0.5).astype(np.int64) for c in children]


def _sampled(reference, candidate: MPS, p: float, config: SamplingConfig, seed) -> ErrorEstimate:
    N = len(candidate)
    estimates, powers = [], []
    for bits in sample_bits(N, config, seed):
        diff = _reference_values(reference, bits) - elements(candidate, bits)
        estimates.append(_norm(diff, p))
        if not math.isinf(p):
            powers.append(float(np.mean(np.abs(diff) ** p)))
    estimates = np.array(estimates)
    std = float(estimates.std(ddof=1)) if estimates.size > 1 else 0.0
    power = float(np.mean(powers)) if powers else None
    return ErrorEstimate(float(estimates.mean()), std, Mode.SAMPLED, config.total, p, power)


def distance(
    reference,
    candidate: MPS,
    p: float = math.inf,
    mode: Mode | str = Mode.SAMPLED,
    samples: SamplingConfig = SamplingConfig(),
    seed=0,
) -> ErrorEstimate:
    """Discretised ``L^p`` distance ``(1/N sum |f - g|^p)^(1/p)`` or the max norm.

    ``reference`` is an MPS or a :class:`BlackBox`; the sampled mode returns
    the mean over batches and their standard deviation.
    """
    if not math.isinf(p) and p < 1:
        raise ValueError("p must be at least 1")
    if isinstance(reference, MPS):
        _check_pair(reference, candidate)
    elif isinstance(reference, BlackBox) and reference.sites != len(candidate):
        raise ValueError("black box and candidate disagree on the number of sites")
    mode = Mode(mode)
    if mode is Mode.EXHAUSTIVE:
        return _exhaustive(reference, candidate, p)
    return _sampled(reference, candidate, p, samples, seed)


def l2_distance_exact(u: MPS, v: MPS, normalized: bool = False) -> float:
    """``|u - v|_2`` by orthogonalising the difference state; no densification.

    With ``normalized`` the result is divided by ``sqrt(2**N)`` to match the
    discretised ``L^2`` norm of :func:`distance`.
    """
    _check_pair(u, v)
    cores = _direct_sum([(1.0, u), (-1.0, v)])
    for i in range(len(cores) - 1, 0, -1):
        _right_qr_step(cores, i)
    out = float(np.linalg.norm(cores[0]))
    if normalized:
        out /= 2.0 ** (len(u) / 2)
    return out


def l2_distance_inner(u: MPS, v: MPS) -> float:
    """Same quantity from ``<u,u> - 2 Re<u,v> + <v,v>``; loses digits on cancellation."""
    _check_pair(u, v)
    r = float(np.real(inner(u, u) - 2 * inner(u, v) + inner(v, v)))
    if r < 0:
        warnings.warn(f"negative squared distance {r:.3e} clamped to zero", RuntimeWarning, stacklevel=2)
        r = 0.0
    return math.sqrt(r)


def bond_report(mps: MPS) -> dict:
    params = int(sum(c.size for c in mps.cores))
    return {
        "chi_max": mps.max_bond,
        "bonds": mps.bonds,
        "parameters": params,
        "bytes": params * np.dtype(mps.dtype).itemsize,
    }


# --- rate fits ---------------------------------------------------------------------


class Model(str, enum.Enum):
    EXPONENTIAL = "exponential"  # error ~ C rho^-d
    ALGEBRAIC = "algebraic"  # error ~ C d^-nu


@dataclass(frozen=True)
class ConvergenceFit:
    model: Model
    rate: float  # rho or nu
    fit_range: tuple[float, float]
    residual: float
    prefactor: float
    points: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class InsufficientPoints(ValueError):
    pass


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), resid


def fit_convergence(
    series: Sequence[tuple[float, float]],
    model: Model | str,
    floor: float = 0.0,
    fit_range: tuple[float, float] | None = None,
    min_points: int = 4,
) -> ConvergenceFit:
    """Least squares in log space over points above ``floor`` inside ``fit_range``."""
    model = Model(model)
    pts = np.array([(d, e) for d, e in series if e > floor and e > 0], dtype=float).reshape(-1, 2)
    if fit_range is not None:
        lo, hi = fit_range
        pts = pts[(pts[:, 0] >= lo) & (pts[:, 0] <= hi)]
    if pts.shape[0] < min_points:
        raise InsufficientPoints(f"need {min_points} points above the floor, got {pts.shape[0]}")
    d, e = pts[:, 0], np.log(pts[:, 1])
    if model is Model.EXPONENTIAL:
        slope, icpt, resid = _linear_fit(d, e)
        rate = math.exp(-slope)
    else:
        slope, icpt, resid = _linear_fit(np.log(d), e)
        rate = -slope
    return ConvergenceFit(model, rate, (float(d.min()), float(d.max())), resid, math.exp(icpt), int(d.size))


def fit_growth(x: Sequence[float], y: Sequence[float], model: str = "power") -> tuple[float, float]:
    """Exponent ``c`` of ``y ~ x**c`` (``power``) or ``y ~ e^{c x}`` (``exponential``).

    Returns the exponent and the RMS residual in log space.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2:
        raise InsufficientPoints("need at least two points")
    if model == "power":
        slope, _, resid = _linear_fit(np.log(x), np.log(y))
    elif model == "exponential":
        slope, _, resid = _linear_fit(x, np.log(y))
    else:
        raise ValueError(f"unknown growth model {model!r}")
    return slope, resid
