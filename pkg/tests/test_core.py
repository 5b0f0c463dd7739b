"""CP tensor algebra against dense materialization oracles."""

import numpy as np
import pytest

from cptt import (
    CpTensor,
    DenseSizeError,
    Grid,
    GridMismatchError,
    PureTensor,
    TensorValueError,
    axpy,
    contract_mode,
    inner,
    norm,
    to_dense,
)
from helpers import dense_of, random_cp


class TestConstruction:
    def test_columns_normalized_magnitude_in_weights(self):
        rng = np.random.default_rng(0)
        a = random_cp((4, 5), 3, rng)
        for mat in a.factors:
            np.testing.assert_allclose(np.linalg.norm(mat, axis=0), 1.0, atol=1e-12)

    def test_normalization_preserves_tensor(self):
        rng = np.random.default_rng(1)
        grid = Grid((4, 5))
        weights = rng.standard_normal(3)
        factors = tuple(5.0 * rng.standard_normal((n, 3)) for n in grid.dims)
        a = CpTensor(grid, weights, factors)
        direct = np.zeros(grid.dims)
        for i in range(3):
            direct += weights[i] * np.outer(factors[0][:, i], factors[1][:, i])
        np.testing.assert_allclose(to_dense(a).values, direct, rtol=1e-13, atol=1e-13)

    def test_nan_rejected(self):
        grid = Grid((3, 3))
        bad = np.ones((3, 2))
        bad[1, 1] = np.nan
        with pytest.raises(TensorValueError):
            CpTensor(grid, np.ones(2), (np.ones((3, 2)), bad))

    def test_shape_mismatch_rejected(self):
        grid = Grid((3, 3))
        with pytest.raises(ValueError):
            CpTensor(grid, np.ones(2), (np.ones((3, 2)), np.ones((4, 2))))

    def test_zero_column_zeroes_weight(self):
        grid = Grid((3, 3))
        a = CpTensor(grid, np.array([2.0]), (np.zeros((3, 1)), np.ones((3, 1))))
        assert a.weights[0] == 0.0

    def test_arrays_immutable(self):
        rng = np.random.default_rng(2)
        a = random_cp((3, 4), 2, rng)
        with pytest.raises(ValueError):
            a.weights[0] = 1.0
        with pytest.raises(ValueError):
            a.factors[0][0, 0] = 1.0

    def test_pure_tensor_unit_modes(self):
        rng = np.random.default_rng(3)
        t = PureTensor(Grid((4, 5)), 2.0, (3 * rng.standard_normal(4),
                                           rng.standard_normal(5)))
        for v in t.modes:
            assert abs(np.linalg.norm(v) - 1.0) <= 1e-12


class TestInner:
    def test_scaled_unit_rank1(self):
        # <T, T> = 4 for a single term of weight 2 with unit modes.
        grid = Grid((4, 4))
        u = np.full(4, 0.5)
        t = CpTensor(grid, np.array([2.0]), (u[:, None], u[:, None]))
        assert inner(t, t) == pytest.approx(4.0, rel=1e-14)

    def test_zero_tensor(self):
        rng = np.random.default_rng(4)
        a = random_cp((3, 4, 5), 2, rng)
        z = CpTensor.zero(a.grid)
        assert inner(a, z) == 0.0
        assert inner(z, a) == 0.0

    def test_matches_dense_dot(self):
        rng = np.random.default_rng(5)
        a = random_cp((4, 5, 6), 3, rng)
        b = random_cp((4, 5, 6), 3, rng)
        expected = float(np.vdot(dense_of(a), dense_of(b)))
        assert inner(a, b) == pytest.approx(expected, rel=1e-12)

    def test_exact_symmetry(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            a = random_cp((5, 6, 7), 4, rng)
            b = random_cp((5, 6, 7), 3, rng)
            assert inner(a, b) == inner(b, a)

    def test_cauchy_schwarz(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = random_cp((4, 5), 3, rng)
            b = random_cp((4, 5), 4, rng)
            assert abs(inner(a, b)) <= norm(a) * norm(b) * (1 + 1e-10)

    def test_grid_mismatch(self):
        rng = np.random.default_rng(8)
        a = random_cp((3, 4), 2, rng)
        b = random_cp((4, 3), 2, rng)
        with pytest.raises(GridMismatchError):
            inner(a, b)


class TestNorm:
    def test_zero(self):
        assert norm(CpTensor.zero(Grid((3, 3, 3)))) == 0.0

    def test_sign_invariance(self):
        rng = np.random.default_rng(9)
        modes = []
        for n in (4, 5):
            v = rng.standard_normal(n)
            modes.append(v / np.linalg.norm(v))
        t = PureTensor(Grid((4, 5)), -3.0, tuple(modes))
        assert norm(t.as_cp()) == pytest.approx(3.0, rel=1e-12)

    def test_matches_dense_frobenius(self):
        rng = np.random.default_rng(10)
        a = random_cp((3, 4, 3, 4), 4, rng)
        assert norm(a) == pytest.approx(np.linalg.norm(dense_of(a)), rel=1e-12)


class TestAxpy:
    def test_identity(self):
        rng = np.random.default_rng(11)
        a = random_cp((3, 4), 3, rng)
        z = CpTensor.zero(a.grid)
        out = axpy(1.0, a, z)
        np.testing.assert_array_equal(out.weights, a.weights)

    def test_self_cancellation(self):
        rng = np.random.default_rng(12)
        a = random_cp((3, 4, 5), 3, rng)
        out = axpy(-1.0, a, a)
        assert out.rank == 6
        assert norm(out) <= 1e-12 * norm(a)

    def test_matches_dense(self):
        rng = np.random.default_rng(13)
        a = random_cp((3, 3, 3), 2, rng)
        b = random_cp((3, 3, 3), 3, rng)
        out = axpy(2.0, a, b)
        np.testing.assert_allclose(
            to_dense(out).values, 2.0 * dense_of(a) + dense_of(b),
            rtol=1e-12, atol=1e-12,
        )

    def test_norm_expansion_identity(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            x = random_cp((4, 5), 3, rng)
            y = random_cp((4, 5), 2, rng)
            alpha = float(rng.standard_normal())
            lhs = norm(axpy(alpha, x, y)) ** 2
            rhs = alpha**2 * norm(x) ** 2 + 2 * alpha * inner(x, y) + norm(y) ** 2
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10 * norm(y) ** 2)

    def test_grid_mismatch(self):
        rng = np.random.default_rng(15)
        with pytest.raises(GridMismatchError):
            axpy(1.0, random_cp((3, 4), 1, rng), random_cp((3, 5), 1, rng))


class TestContractMode:
    def test_orthonormal_projection(self):
        rng = np.random.default_rng(16)
        f, g, h = (rng.standard_normal(n) for n in (4, 5, 6))
        f /= np.linalg.norm(f)
        a = CpTensor(Grid((4, 5, 6)), np.ones(1),
                     (f[:, None], g[:, None], h[:, None]))
        out = contract_mode(a, 0, f)
        expected = np.outer(g, h)
        np.testing.assert_allclose(to_dense(out).values, expected, rtol=1e-12)

    def test_orthogonal_vector_gives_zero(self):
        rng = np.random.default_rng(17)
        fiber = rng.standard_normal(5)
        a = CpTensor(Grid((5, 4)), np.ones(1),
                     (fiber[:, None], rng.standard_normal((4, 1))))
        u = rng.standard_normal(5)
        u -= (u @ a.factors[0][:, 0]) * a.factors[0][:, 0]
        out = contract_mode(a, 0, u)
        assert norm(out) <= 1e-12 * norm(a)

    def test_matches_dense(self):
        rng = np.random.default_rng(18)
        a = random_cp((3, 4, 5, 3), 3, rng)
        u = rng.standard_normal(5)
        out = contract_mode(a, 2, u)
        expected = np.tensordot(dense_of(a), u, axes=([2], [0]))
        np.testing.assert_allclose(to_dense(out).values, expected,
                                   rtol=1e-12, atol=1e-12)

    def test_linearity(self):
        # Dense difference: the factored norm of a near-cancelling sum
        # cannot resolve differences this small.
        rng = np.random.default_rng(19)
        a = random_cp((4, 5, 6), 3, rng)
        u, v = rng.standard_normal(5), rng.standard_normal(5)
        al, be = 0.7, -1.3
        left = to_dense(contract_mode(a, 1, al * u + be * v)).values
        right = (al * to_dense(contract_mode(a, 1, u)).values
                 + be * to_dense(contract_mode(a, 1, v)).values)
        scale = max(np.linalg.norm(left), 1.0)
        assert np.linalg.norm(left - right) <= 1e-12 * scale

    def test_order2_contraction_gives_order1(self):
        rng = np.random.default_rng(20)
        a = random_cp((4, 5), 2, rng)
        u = rng.standard_normal(4)
        out = contract_mode(a, 0, u)
        assert out.order == 1
        np.testing.assert_allclose(to_dense(out).values, u @ dense_of(a),
                                   rtol=1e-12, atol=1e-12)

    def test_length_mismatch(self):
        rng = np.random.default_rng(21)
        a = random_cp((4, 5), 2, rng)
        with pytest.raises(ValueError):
            contract_mode(a, 0, np.ones(5))


class TestToDense:
    def test_zero(self):
        z = CpTensor.zero(Grid((3, 4)))
        np.testing.assert_array_equal(to_dense(z).values, np.zeros((3, 4)))

    def test_constant_rank1(self):
        n = 5
        u = np.ones(n) / np.sqrt(n)
        a = CpTensor(Grid((n, n)), np.array([2.0]), (u[:, None], u[:, None]))
        np.testing.assert_allclose(to_dense(a).values, 2.0 / n, rtol=1e-14)

    def test_inner_consistency(self):
        rng = np.random.default_rng(22)
        a = random_cp((4, 5, 4), 3, rng)
        dense = to_dense(a).values
        assert inner(a, a) == pytest.approx(float(np.vdot(dense, dense)), rel=1e-12)

    def test_cap(self):
        a = CpTensor.zero(Grid((100, 100, 100)))
        with pytest.raises(DenseSizeError):
            to_dense(a, cap=10_000)
