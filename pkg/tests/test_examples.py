"""Small worked examples with hand-derived or dense-oracle answers."""
from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from chebmps.algebra import affine_rescale, combine, hadamard, tensor_product
from chebmps.bench import Composition, compose, load, natural_support, run_point
from chebmps.chebyshev import ChebyshevExpansion, clenshaw_evaluate, differentiate, direct_evaluate, interpolation_coefficients
from chebmps.corpus import get_function
from chebmps.encodings import (
    PolynomialSpec,
    constant_encoding,
    exponential_encoding,
    polynomial_encoding,
    trig_encoding,
    x_encoding,
)
from chebmps.metrics import Mode, SamplingConfig, distance, l2_distance_exact
from chebmps.mps import (
    DomainMeta,
    Order,
    SimplifyStrategy,
    element,
    from_dense,
    inner,
    is_zero,
    product_mps,
    random_mps,
    to_dense,
)
from chebmps.tci import BlackBox, CrossConfig, build_index_map, cross_interpolate, maxvol_rect, maxvol_square, skeleton

from conftest import all_bits, grid

EPS = 1e-14


class TestStates:
    def test_constant_vector_has_unit_bonds(self):
        assert from_dense(np.ones(16), SimplifyStrategy(EPS)).bonds == [1, 1, 1]

    def test_sampled_exponential_has_unit_bonds(self):
        assert from_dense(np.exp(grid(10)), SimplifyStrategy(EPS)).max_bond == 1

    def test_coordinate_element(self):
        bits = [1, 0, 1, 1, 0, 0, 1, 0]
        assert element(x_encoding(8), bits) == pytest.approx(sum(s * 2.0 ** -(i + 1) for i, s in enumerate(bits)))

    def test_basis_states_are_orthonormal(self):
        basis = [product_mps([np.eye(2)[b] for b in bits]) for bits in itertools.product((0, 1), repeat=3)]
        gram = np.array([[inner(u, v) for v in basis] for u in basis])
        assert np.array_equal(gram, np.eye(8))

    def test_coordinate_bond_profile(self):
        assert x_encoding(10).bonds == [2] * 9

    def test_coordinate_range(self):
        v = to_dense(x_encoding(10, (-1, 1)))
        assert v.min() == -1.0 and v.max() == pytest.approx(1 - 2.0**-9)
        s = np.linalg.svd(v.reshape(32, 32), compute_uv=False)
        assert np.sum(s > 1e-12 * s[0]) == 2

    def test_constants(self):
        assert np.array_equal(to_dense(constant_encoding(3, 1.0)), np.ones(8))
        assert is_zero(constant_encoding(4, 0.0))


class TestAlgebraExamples:
    def test_opposite_terms_cancel(self):
        psi = random_mps(8, 3, seed=0)
        out = combine([(2.5, psi), (-2.5, psi)], SimplifyStrategy(EPS))
        assert np.linalg.norm(to_dense(out)) <= 1e-12 * 2.5 * np.linalg.norm(to_dense(psi))

    def test_doubling_exponential(self):
        e = exponential_encoding(10)
        out = combine([(1.0, e), (1.0, e)], SimplifyStrategy(EPS))
        assert out.max_bond == 1 and np.allclose(to_dense(out), 2 * np.exp(grid(10)))

    def test_sin_plus_cos(self):
        s, c = trig_encoding(10, (0, 1), "sin", 3.0), trig_encoding(10, (0, 1), "cos", 3.0)
        out = combine([(1.0, s), (1.0, c)], SimplifyStrategy(EPS))
        ref = np.sin(3 * grid(10)) + np.cos(3 * grid(10))
        assert np.linalg.norm(to_dense(out) - ref) <= math.sqrt(EPS) * np.linalg.norm(ref)
        assert out.max_bond <= 2

    def test_square_of_coordinate(self):
        x = x_encoding(10)
        sq = hadamard(x, x, SimplifyStrategy(EPS))
        ref = polynomial_encoding(PolynomialSpec((0, 0, 1), (0, 1), 10))
        assert np.max(np.abs(to_dense(sq) - to_dense(ref))) <= 1e-12

    def test_product_of_exponentials(self):
        e = exponential_encoding(8, rate=1.5)
        out = hadamard(e, e, SimplifyStrategy(EPS))
        assert out.max_bond == 1 and np.allclose(to_dense(out), np.exp(3.0 * grid(8)))

    def test_hadamard_commutes(self):
        u, v = random_mps(8, 3, seed=1), random_mps(8, 2, seed=2)
        a, b = hadamard(u, v, SimplifyStrategy(1e-12)), hadamard(v, u, SimplifyStrategy(1e-12))
        assert np.linalg.norm(to_dense(a) - to_dense(b)) <= 2e-6 * np.linalg.norm(to_dense(a))

    def test_serial_constants(self):
        out = tensor_product([constant_encoding(3, 2.0), constant_encoding(3, -1.5)])
        assert np.allclose(to_dense(out), -3.0) and len(out) == 6

    def test_serial_sum_of_coordinates(self):
        x, one = x_encoding(5), constant_encoding(5, 1.0)
        out = combine([(1.0, tensor_product([x, one])), (1.0, tensor_product([one, x]))])
        g = grid(5)
        assert np.allclose(to_dense(out), (g[:, None] + g[None, :]).reshape(-1))

    def test_affine_identity_and_round_trip(self):
        psi = random_mps(8, 3, seed=4)
        same = affine_rescale(psi, (2, 5), (2, 5), SimplifyStrategy(1e-12))
        assert np.allclose(to_dense(same), to_dense(psi), atol=1e-5 * np.abs(to_dense(psi)).max())
        there = affine_rescale(psi, (2, 5), (-1, 1), SimplifyStrategy(1e-12))
        back = affine_rescale(there, (-1, 1), (2, 5), SimplifyStrategy(1e-12))
        ref = to_dense(psi)
        assert np.linalg.norm(to_dense(back) - ref) <= 2e-6 * np.linalg.norm(ref)

    def test_left_endpoint_maps_to_minus_one(self):
        out = affine_rescale(x_encoding(6), (0, 1), (-1, 1))
        assert element(out, [0] * 6) == pytest.approx(-1.0)


class TestEncodingExamples:
    def test_constant_polynomial(self):
        assert np.allclose(to_dense(polynomial_encoding(PolynomialSpec((4.0,), (0, 1), 6))), 4.0)

    def test_linear_polynomial_is_coordinate(self):
        p = polynomial_encoding(PolynomialSpec((0.0, 1.0), (0, 1), 8))
        assert np.max(np.abs(to_dense(p) - to_dense(x_encoding(8)))) <= 1e-13

    def test_square_of_one_minus_x(self):
        p = polynomial_encoding(PolynomialSpec((1.0, -2.0, 1.0), (0, 1), 8))
        assert np.allclose(to_dense(p), (1 - grid(8)) ** 2, atol=1e-13)
        assert p.max_bond == 3

    def test_zero_rate_exponential(self):
        assert np.allclose(to_dense(exponential_encoding(5, rate=0.0)), 1.0)

    def test_exponential_on_unit_interval(self):
        e = exponential_encoding(12)
        assert np.max(np.abs(to_dense(e) - np.exp(grid(12)))) <= 1e-13 and e.max_bond == 1

    def test_cosine_over_a_period(self):
        c = trig_encoding(12, (0, 2 * np.pi), "cos")
        assert np.max(np.abs(to_dense(c) - np.cos(grid(12, (0, 2 * np.pi))))) <= 1e-12 and c.max_bond == 2


class TestChebyshevExamples:
    def test_constant_function(self):
        c = interpolation_coefficients(lambda x: np.ones_like(x), 6).coefficients
        assert np.allclose(c, [1, 0, 0, 0, 0, 0, 0], atol=1e-15)

    def test_gauss_nodes_by_hand(self):
        from chebmps.chebyshev import gauss_nodes

        assert gauss_nodes(1) == pytest.approx([0.0], abs=1e-16)
        assert gauss_nodes(2) == pytest.approx([np.sqrt(0.5), -np.sqrt(0.5)])

    def test_constant_expansion_gives_constant(self):
        out = clenshaw_evaluate(ChebyshevExpansion(np.array([0.7])), x_encoding(6, (-1, 1)), (-1, 1))
        assert np.allclose(to_dense(out), 0.7)

    def test_first_polynomial_returns_argument(self):
        x = x_encoding(8, (-1, 1))
        out = clenshaw_evaluate(ChebyshevExpansion(np.array([0.0, 1.0])), x, (-1, 1))
        assert np.allclose(to_dense(out), to_dense(x), atol=1e-7)

    def test_direct_identity(self):
        out = direct_evaluate(ChebyshevExpansion(np.array([1.0])), x_encoding(5, (-1, 1)), (-1, 1))
        assert np.allclose(to_dense(out), 1.0)

    def test_clenshaw_and_direct_agree_on_random_argument(self):
        eps = 1e-14
        g = random_mps(8, 3, seed=9)
        values = to_dense(g)
        support = (values.min(), values.max())
        exp = ChebyshevExpansion(np.random.default_rng(3).standard_normal(12), support)
        a = clenshaw_evaluate(exp, g, support, SimplifyStrategy(eps))
        b = direct_evaluate(exp, g, support, SimplifyStrategy(eps))
        assert np.max(np.abs(to_dense(a) - to_dense(b))) <= 10 * math.sqrt(eps)
        assert np.allclose(to_dense(a), exp(values), atol=10 * math.sqrt(eps))

    def test_derivative_of_t2(self):
        d = differentiate(ChebyshevExpansion(np.array([0.0, 0.0, 1.0])))
        assert np.allclose(d.coefficients, [0.0, 4.0])
        x = np.linspace(-1, 1, 101)
        fd = np.gradient(2 * x**2 - 1, x)
        # central differences are exact for a quadratic away from the ends
        assert np.allclose(d(x)[1:-1], fd[1:-1], atol=1e-10)

    def test_derivative_of_constant(self):
        assert np.array_equal(differentiate(ChebyshevExpansion(np.array([3.0]))).coefficients, [0.0])

    @pytest.mark.parametrize("name", ["f_G", "f_O", "f_A", "f_S"])
    def test_interpolant_hits_nodes(self, name):
        from chebmps.chebyshev import nodes

        f = get_function(name)
        exp = interpolation_coefficients(f, 200)
        t = nodes(200)
        assert np.max(np.abs(exp(t) - f(t))) <= 1e-12 * np.abs(f(t)).max()

    def test_mps_matches_scalar_at_random_points(self):
        from chebmps.mps import elements

        eps = 1e-20
        f = get_function("f_G")
        exp = interpolation_coefficients(f, 30)
        out = clenshaw_evaluate(exp, x_encoding(16, (-1, 1)), (-1, 1), SimplifyStrategy(eps))
        bits = np.random.default_rng(0).integers(0, 2, (1000, 16))
        x = out.meta.coordinates(bits)[:, 0]
        assert np.max(np.abs(elements(out, bits) - exp(x))) <= 10 * math.sqrt(eps)

    def test_gaussian_composition_one_dimension(self):
        eps = 1e-14
        x = x_encoding(10, (-1, 1))
        g = hadamard(x, x, SimplifyStrategy(eps))
        exp = interpolation_coefficients(lambda t: np.exp(-t), 20, (0, 1))
        out = clenshaw_evaluate(exp, g, (0, 1), SimplifyStrategy(eps))
        assert np.max(np.abs(to_dense(out) - np.exp(-grid(10, (-1, 1)) ** 2))) <= 10 * math.sqrt(eps)


class TestCrossExamples:
    def test_identity_rows(self):
        assert sorted(maxvol_square(np.eye(3)).tolist()) == [0, 1, 2]

    def test_large_row_is_chosen(self):
        assert 2 in maxvol_square(np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]])).tolist()

    def test_volume_near_optimum(self):
        A = np.random.default_rng(42).standard_normal((12, 4))
        tol = 1e-2
        best = max(abs(np.linalg.det(A[list(s)])) for s in itertools.combinations(range(12), 4))
        got = abs(np.linalg.det(A[maxvol_square(A, tol)]))
        assert got * (1 + tol) ** 4 >= best

    def test_rect_without_growth_is_square(self):
        A = np.random.default_rng(1).standard_normal((10, 3))
        rows, gains = maxvol_rect(A, r_max=3)
        assert np.array_equal(rows, maxvol_square(A)) and gains.size == 0

    def test_rect_zero_gain_row(self):
        rows, gains = maxvol_rect(np.eye(5, 3), r_max=4, r_min=3, tol=1e-3)
        assert rows.size == 3
        rows, gains = maxvol_rect(np.eye(5, 3), r_min=4, r_max=4)
        assert gains[0] == pytest.approx(0.0)

    def test_rect_sixteen_by_three(self):
        A = np.random.default_rng(16).standard_normal((16, 3))
        rows, _ = maxvol_rect(A, r_min=4, r_max=4)
        base = rows[:3].tolist()
        vol = lambda S: np.linalg.det(A[S].T @ A[S])
        assert rows[3] == max((i for i in range(16) if i not in base), key=lambda i: vol(base + [i]))

    def test_skeleton_rank_one(self):
        u, v = np.arange(1.0, 6.0), np.arange(2.0, 6.0)
        A = np.outer(u, v)
        assert np.max(np.abs(skeleton(A, [2], [1]) - A)) <= 1e-12

    def test_skeleton_full_selection(self):
        A = np.random.default_rng(0).standard_normal((4, 4))
        assert np.allclose(skeleton(A, range(4), range(4)), A)

    def test_skeleton_rank_three(self):
        rng = np.random.default_rng(8)
        A = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 8))
        U, _, Vt = np.linalg.svd(A)
        rows, cols = maxvol_square(U[:, :3]), maxvol_square(Vt[:3].T)
        assert np.linalg.norm(skeleton(A, rows, cols) - A) <= 1e-10

    def test_univariate_index_map(self):
        assert build_index_map(DomainMeta.univariate(4)).matrix[:, 0].tolist() == [8, 4, 2, 1]

    def test_index_map_matrices(self):
        serial = build_index_map(DomainMeta((2, 2), ((0, 1), (0, 1)), Order.SERIAL)).matrix
        inter = build_index_map(DomainMeta((2, 2), ((0, 1), (0, 1)), Order.INTERLEAVED)).matrix
        assert serial.tolist() == [[2, 0], [1, 0], [0, 2], [0, 1]]
        assert inter.tolist() == [[2, 0], [0, 2], [1, 0], [0, 1]]

    def test_interleaved_needs_equal_qubits(self):
        with pytest.raises(ValueError):
            DomainMeta((2, 3), ((0, 1), (0, 1)), Order.INTERLEAVED)

    def test_exponential_black_box(self):
        meta = DomainMeta.univariate(10, (0, 1))
        mps, _ = cross_interpolate(BlackBox(np.exp, meta))
        err = distance(BlackBox(np.exp, meta), mps, math.inf, Mode.SAMPLED, SamplingConfig(10, 100)).value
        assert mps.max_bond == 1 and err <= 1e-12

    def test_step_black_box(self):
        f = get_function("f_S")
        meta = DomainMeta.univariate(16, f.interval)
        mps, _ = cross_interpolate(BlackBox(f, meta), CrossConfig(chi_thr=30))
        err = distance(BlackBox(f, meta), mps, math.inf, Mode.SAMPLED, SamplingConfig(10, 1000)).value
        assert err <= 1e-12 and mps.max_bond <= 30


class TestMetricExamples:
    def test_sampled_l2_of_random_states(self):
        u, v = random_mps(8, 3, seed=21), random_mps(8, 3, seed=22)
        ex = distance(u, v, 2, Mode.EXHAUSTIVE).value
        est = distance(u, v, 2, Mode.SAMPLED, SamplingConfig(10, 1000), seed=0)
        assert abs(est.value - ex) <= 3 * est.std_dev

    def test_exact_l2_of_random_states(self):
        u, v = random_mps(8, 3, seed=23), random_mps(8, 2, seed=24)
        assert abs(l2_distance_exact(u, v) - np.linalg.norm(to_dense(u) - to_dense(v))) <= 1e-11

    @pytest.mark.slow
    def test_two_hundred_qubit_product_gaussian(self):
        comp = Composition("exp_neg", "sum_of_squares", 10, 20, natural_support("sum_of_squares", 10), epsilon=1e-10)
        cheb, _ = compose(comp)
        one = from_dense(np.exp(-grid(20, (-1, 1)) ** 2), SimplifyStrategy(1e-14))
        svd = tensor_product([one] * 10).with_meta(cheb.meta)
        exact = l2_distance_exact(svd, cheb, normalized=True)
        sampled = distance(svd, cheb, 2, Mode.SAMPLED, SamplingConfig(10, 1000), seed=0)
        assert math.isfinite(exact)
        assert abs(sampled.value - exact) <= 3 * sampled.std_dev


class TestBenchExamples:
    def test_gaussian_record(self):
        # the tolerance bounds the squared relative error, so the 1e-10
        # pointwise target needs eps near 1e-24 rather than 1e-14
        rec = run_point("f_G", "chebyshev-clenshaw", 20, 50, 1e-24, 1, "serial", 0)
        assert rec.error <= 1e-10

    def test_exponential_cross_record(self):
        rec = run_point("exp", "tci", 10, 30, None, 1, "serial", 0)
        assert rec.chi_max == 1

    def test_step_records_are_flagged(self):
        for d in (32, 128, 512):
            rec = run_point("f_S", "chebyshev-clenshaw", 12, d, 1e-14, 1, "serial", 0)
            assert "unresolved_expansion" in rec.flags

    def test_squeezed_gaussian_five_variables(self):
        fn = get_function("squeezed_gaussian", 5)
        chis = []
        for m in (1, 3, 5):
            mps, _ = load(get_function("squeezed_gaussian", m), "chebyshev-clenshaw", 10, None, 1e-10, order="interleaved")
            chis.append(mps.max_bond)
        assert chis[2] / chis[0] < 5  # sublinear in m
        mps, _ = load(fn, "chebyshev-clenshaw", 10, None, 1e-16, order="interleaved")
        err = distance(BlackBox(fn, mps.meta), mps, math.inf, Mode.SAMPLED, SamplingConfig(10, 1000)).value
        assert err <= 1e-6

    def test_identity_outer_returns_inner(self):
        comp = Composition("identity", "sum", 2, 5, natural_support("sum", 2), epsilon=1e-14)
        out, _ = compose(comp)
        x = comp.meta().coordinates(all_bits(10))
        assert np.allclose(to_dense(out), x.sum(axis=1), atol=1e-6)
