from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chebmps.algebra import hadamard
from chebmps.encodings import (
    MAX_DEGREE,
    PolyForm,
    PolynomialSpec,
    constant_encoding,
    exponential_encoding,
    monomial_values,
    pascal,
    polynomial_encoding,
    trig_encoding,
    x_encoding,
)
from chebmps.mps import SimplifyStrategy, to_dense

from conftest import grid


@pytest.mark.parametrize("n", [1, 2, 5, 10])
@pytest.mark.parametrize("interval", [(0, 1), (-1, 1), (-3.5, 2.0)])
def test_coordinate(n, interval):
    x = x_encoding(n, interval)
    assert np.allclose(to_dense(x), grid(n, interval), atol=1e-14)
    assert x.max_bond <= 2


def test_coordinate_small_case():
    # bits MSB first: x = 0.5 b1 + 0.25 b2 on [0, 1)
    assert np.allclose(to_dense(x_encoding(2)), [0.0, 0.25, 0.5, 0.75])


def test_constant_and_exponential():
    assert np.allclose(to_dense(constant_encoding(5, 3.0)), 3.0)
    e = exponential_encoding(8, (-1, 2), rate=-0.7, prefactor=2.0)
    assert e.max_bond == 1
    assert np.allclose(to_dense(e), 2.0 * np.exp(-0.7 * grid(8, (-1, 2))))
    z = exponential_encoding(6, (0, 1), rate=3j)
    assert np.allclose(to_dense(z), np.exp(3j * grid(6)))


@pytest.mark.parametrize("kind,fn", [("cos", np.cos), ("sin", np.sin)])
def test_trig(kind, fn):
    t = trig_encoding(9, (-1, 1), kind, frequency=7.0, phase=0.3)
    assert t.max_bond == 2
    assert np.allclose(to_dense(t), fn(7.0 * grid(9, (-1, 1)) + 0.3), atol=1e-13)


def test_pascal():
    assert pascal(4)[4].tolist() == [1, 4, 6, 4, 1]


def test_cubic_example():
    spec = PolynomialSpec((1.0, -2.0, 0.0, 3.0), (-1.0, 1.0), qubits=6)
    p = polynomial_encoding(spec)
    x = grid(6, (-1, 1))
    assert np.allclose(to_dense(p), 1 - 2 * x + 3 * x**3, atol=1e-13)
    assert p.bonds == [4] * 5


def test_degree_limit():
    with pytest.raises(ValueError):
        PolynomialSpec((1.0,) * (MAX_DEGREE + 2))
    with pytest.raises(ValueError):
        PolynomialSpec(())


@given(
    st.integers(0, 6),
    st.integers(1, 10),
    st.sampled_from([(0.0, 1.0), (-1.0, 1.0), (-2.0, 0.5)]),
    st.sampled_from(list(PolyForm)),
    st.integers(0, 10**6),
)
def test_polynomial_exact(d, n, interval, form, seed):
    coeffs = np.random.default_rng(seed).uniform(-1, 1, d + 1)
    p = polynomial_encoding(PolynomialSpec(coeffs, interval, n), form)
    ref = monomial_values(coeffs, grid(n, interval))
    assert np.max(np.abs(to_dense(p) - ref)) <= 1e-10 * max(np.abs(ref).max(), 1e-300) + 1e-300
    assert p.max_bond <= d + 1


@given(st.integers(0, 5), st.integers(2, 8), st.integers(0, 10**6))
def test_both_forms_agree(d, n, seed):
    coeffs = np.random.default_rng(seed).standard_normal(d + 1)
    spec = PolynomialSpec(coeffs, (-1.0, 1.0), n)
    left = to_dense(polynomial_encoding(spec, PolyForm.LEFT_COEFF))
    right = to_dense(polynomial_encoding(spec, PolyForm.RIGHT_COEFF))
    assert np.allclose(left, right, atol=1e-12 * np.abs(left).max())


def test_multiplying_by_x_raises_degree_by_one():
    coeffs = [0.5, -1.0, 2.0]
    p = polynomial_encoding(PolynomialSpec(coeffs, (-1, 1), 7))
    xp = hadamard(x_encoding(7, (-1, 1)), p, SimplifyStrategy(1e-14))
    ref = polynomial_encoding(PolynomialSpec([0.0] + coeffs, (-1, 1), 7))
    assert np.allclose(to_dense(xp), to_dense(ref), atol=1e-13)
    assert xp.max_bond <= len(coeffs) + 1


def test_complex_coefficients():
    coeffs = [1j, 2.0, -1j]
    p = polynomial_encoding(PolynomialSpec(coeffs, (0, 1), 5))
    assert np.allclose(to_dense(p), monomial_values(coeffs, grid(5)))
