"""Benchmark functions: four univariate shapes of decreasing smoothness plus
their multivariate relatives."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SIGMA = 1.0 / 3.0
OSC_EPS = 1e-2
# an offset grid point, so no node sits exactly on the kink / jump
X_C = 0.5 + 2.0**-5


class Smoothness(str, enum.Enum):
    ANALYTIC = "analytic"
    DIFFERENTIABLE = "differentiable"  # C^nu, finite nu
    DISCONTINUOUS = "discontinuous"


@dataclass(frozen=True)
class CorpusFunction:
    id: str
    evaluator: Callable
    interval: tuple[float, float] = (-1.0, 1.0)
    smoothness: Smoothness = Smoothness.ANALYTIC
    params: dict = field(default_factory=dict)
    dims: int = 1

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))


def gaussian(x, sigma: float = SIGMA):
    return np.exp(-((x / (2 * sigma)) ** 2)) / (sigma * np.sqrt(2 * np.pi))


def oscillating(x, eps: float = OSC_EPS):
    return np.cos(1.0 / (x**2 + eps))


def absolute(x, xc: float = X_C):
    return np.abs(x - xc)


def step(x, xc: float = X_C):
    return np.where(x - xc >= 0, 1.0, 0.0)


def _points(x):
    """``(B, m)`` view; a flat array is read as ``B`` points of one variable."""
    return x[:, None] if x.ndim == 1 else x


def _total(x):
    return np.sum(_points(x), axis=1)


def _squares(x):
    return np.sum(_points(x) ** 2, axis=1)


UNIVARIATE = {
    "gaussian": CorpusFunction("gaussian", gaussian, params={"sigma": SIGMA}),
    "oscillating": CorpusFunction("oscillating", oscillating, params={"eps": OSC_EPS}),
    "abs": CorpusFunction("abs", absolute, smoothness=Smoothness.DIFFERENTIABLE, params={"xc": X_C, "nu": 1}),
    "step": CorpusFunction("step", step, smoothness=Smoothness.DISCONTINUOUS, params={"xc": X_C}),
    "exp": CorpusFunction("exp", np.exp, interval=(0.0, 1.0)),
}

ALIASES = {"f_G": "gaussian", "f_O": "oscillating", "f_A": "abs", "f_S": "step"}

MULTIVARIATE = {
    "product_gaussian": (lambda x: np.exp(-_squares(x)), Smoothness.ANALYTIC),
    "squeezed_gaussian": (lambda x: np.exp(-_total(x) ** 2), Smoothness.ANALYTIC),
    "abs_m": (lambda x: np.abs(_total(x) - X_C), Smoothness.DIFFERENTIABLE),
    "step_m": (lambda x: np.where(_total(x) - X_C >= 0, 1.0, 0.0), Smoothness.DISCONTINUOUS),
}


def get_function(name: str, dims: int = 1) -> CorpusFunction:
    name = ALIASES.get(name, name)
    if name in UNIVARIATE:
        if dims != 1:
            raise ValueError(f"{name} is univariate")
        return UNIVARIATE[name]
    if name in MULTIVARIATE:
        fn, smooth = MULTIVARIATE[name]
        return CorpusFunction(name, fn, smoothness=smooth, params={"m": dims}, dims=dims)
    raise KeyError(f"unknown function {name!r}; known: {sorted(UNIVARIATE) + sorted(MULTIVARIATE)}")


def names() -> list[str]:
    return sorted(UNIVARIATE) + sorted(MULTIVARIATE)
