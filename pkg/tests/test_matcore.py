import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_matrix
from regularity.exceptions import (
    ConvergenceError,
    DegenerateDirectionError,
    DimensionError,
    ZeroMatrixError,
)
from regularity.matcore import (
    ParseError,
    f_top_k_norm,
    format_matrix,
    frobenius_inner,
    frobenius_norm,
    parse_matrix,
    project_onto_rank1,
    project_onto_span,
    read_matrix,
    top_singular_triple,
    write_matrix,
)
from regularity.oracle import exact_singular_values
from strategies import matrices


class TestFrobenius:
    def test_identity(self):
        assert frobenius_norm(np.eye(2)) == pytest.approx(math.sqrt(2))

    def test_three_four_five(self):
        assert frobenius_norm([[3, 4], [0, 0]]) == 5.0

    def test_zero(self):
        assert frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_inner_self(self):
        assert frobenius_inner(np.eye(2), np.eye(2)) == 2.0

    def test_inner_disjoint(self):
        assert frobenius_inner([[1, 0], [0, 0]], [[0, 0], [0, 1]]) == 0.0

    def test_inner_entry_sum(self):
        assert frobenius_inner([[1, 2], [3, 4]], np.ones((2, 2))) == 10.0

    def test_inner_shape_mismatch(self):
        with pytest.raises(DimensionError):
            frobenius_inner(np.ones((2, 2)), np.ones((2, 3)))

    @pytest.mark.parametrize("bad", [np.array([[np.nan]]), np.array([[np.inf, 1.0]]), np.zeros((0, 3)), np.zeros(3)])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValueError):
            frobenius_norm(bad)

    @given(matrices(), matrices())
    def test_inner_symmetric(self, a, b):
        if a.shape != b.shape:
            b = np.resize(b, a.shape)
        assert frobenius_inner(a, b) == pytest.approx(frobenius_inner(b, a))
        assert frobenius_inner(a, a) == pytest.approx(frobenius_norm(a) ** 2, rel=1e-12, abs=1e-12)


class TestRankOneProjection:
    def test_onto_itself(self):
        u = np.array([0.6, 0.8])
        v = np.array([1.0, 0.0, 0.0])
        r = np.outer(u, v)
        q, mag = project_onto_rank1(r, u, v)
        np.testing.assert_allclose(q, r)
        assert mag == pytest.approx(frobenius_norm(r))

    def test_orthogonal(self):
        q, mag = project_onto_rank1([[0, 1], [0, 0]], [1, 0], [1, 0])
        np.testing.assert_array_equal(q, np.zeros((2, 2)))
        assert mag == 0.0

    def test_hand_value(self):
        q, mag = project_onto_rank1(np.ones((2, 2)), [1, 0], [1, 1])
        np.testing.assert_allclose(q, [[1, 1], [0, 0]])
        assert mag == pytest.approx(math.sqrt(2))

    def test_zero_direction(self):
        with pytest.raises(DegenerateDirectionError):
            project_onto_rank1(np.ones((2, 2)), [0, 0], [1, 1])

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            project_onto_rank1(np.ones((2, 2)), [1, 0, 0], [1, 1])

    @given(matrices(5, 5), st.integers(0, 2**16))
    def test_pythagoras(self, r, seed):
        rng = np.random.default_rng(seed)
        u = rng.standard_normal(r.shape[0])
        v = rng.standard_normal(r.shape[1])
        q, mag = project_onto_rank1(r, u, v)
        total = frobenius_norm(r) ** 2
        gap = total - frobenius_norm(q) ** 2 - frobenius_norm(r - q) ** 2
        assert abs(gap) <= 1e-9 * max(total, 1.0)
        assert mag == pytest.approx(frobenius_norm(q), rel=1e-9, abs=1e-12)

    def test_span_projection_rank_deficient(self):
        r = random_matrix(0, 3, 3)
        b = np.outer([1.0, 0, 0], [1.0, 1, 0])
        q, coeffs = project_onto_span(r, [b, 2 * b])
        q1, _ = project_onto_rank1(r, [1.0, 0, 0], [1.0, 1, 0])
        np.testing.assert_allclose(q, q1, atol=1e-12)
        assert len(coeffs) == 2


class TestSingularValues:
    def test_diag(self):
        assert top_singular_triple(np.diag([3.0, 4.0])).sigma == pytest.approx(4.0, abs=1e-9)

    def test_all_ones(self):
        t = top_singular_triple(np.ones((3, 3)))
        assert t.sigma == pytest.approx(3.0, abs=1e-9)
        assert np.linalg.norm(t.left) == pytest.approx(1.0, abs=1e-9)
        assert np.linalg.norm(t.right) == pytest.approx(1.0, abs=1e-9)

    def test_against_oracle(self):
        a = random_matrix(6, 6, 6)
        assert top_singular_triple(a).sigma == pytest.approx(exact_singular_values(a)[0], rel=1e-8)

    @pytest.mark.parametrize("seed", range(12))
    def test_against_oracle_up_to_12(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(tuple(rng.integers(1, 13, size=2)))
        assert top_singular_triple(a, seed=seed).sigma == pytest.approx(exact_singular_values(a)[0], rel=1e-8)

    def test_zero_matrix(self):
        with pytest.raises(ZeroMatrixError):
            top_singular_triple(np.zeros((2, 3)))

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            top_singular_triple(np.eye(2), tol=0)

    def test_convergence_error_carries_best(self):
        # Nearly equal top singular values converge slowly; one iteration cannot finish.
        a = np.diag([1.0, 0.999999, 0.5])
        with pytest.raises(ConvergenceError) as info:
            top_singular_triple(a, max_iters=2)
        assert info.value.best is not None
        assert info.value.best.sigma <= 1.0 + 1e-12

    def test_deterministic(self):
        a = random_matrix(3, 7, 5)
        t1 = top_singular_triple(a, seed=4)
        t2 = top_singular_triple(a, seed=4)
        assert t1.sigma == t2.sigma
        np.testing.assert_array_equal(t1.left, t2.left)

    def test_fk_diag(self):
        a = np.diag([3.0, 4.0])
        assert f_top_k_norm(a, 1) == pytest.approx(4.0, abs=1e-9)
        assert f_top_k_norm(a, 2) == pytest.approx(5.0, abs=1e-12)

    def test_fk_full(self):
        a = random_matrix(5, 5, 5)
        assert f_top_k_norm(a, 5) == pytest.approx(frobenius_norm(a), abs=1e-8)

    def test_fk_bad_k(self):
        with pytest.raises(ValueError):
            f_top_k_norm(np.eye(2), 0)

    @given(matrices(6, 6), st.integers(1, 6))
    def test_norm_chain(self, a, k):
        fro = frobenius_norm(a)
        if fro == 0:
            assert f_top_k_norm(a, k) == 0.0
            return
        tol = 1e-8 * max(fro, 1.0) * k
        f1 = f_top_k_norm(a, 1)
        fk = f_top_k_norm(a, k)
        assert f1 <= fk + tol
        assert fk <= fro + tol
        assert fk <= math.sqrt(k) * f1 + 1e-8 * max(fro, 1.0)
        exact = exact_singular_values(a)
        assert fk == pytest.approx(math.sqrt(np.sum(exact[:k] ** 2)), rel=1e-7, abs=1e-7)


class TestMatrixText:
    def test_round_trip(self, tmp_path):
        a = random_matrix(1, 3, 4)
        path = tmp_path / "m.txt"
        write_matrix(a, path)
        np.testing.assert_array_equal(read_matrix(path), a)
        np.testing.assert_array_equal(read_matrix(io.StringIO(format_matrix(a))), a)

    def test_format(self):
        assert format_matrix([[1, 2]]) == "1 2\n1.0 2.0\n"

    @pytest.mark.parametrize(
        "text, line",
        [
            ("", 1),
            ("2\n1 2\n", 1),
            ("a b\n", 1),
            ("2 2\n1 2\n", 2),
            ("2 2\n1 2\n3\n", 3),
            ("1 2\n1 x\n", 2),
            ("1 1\nnan\n", 2),
            ("0 1\n", 1),
        ],
    )
    def test_parse_errors(self, text, line):
        with pytest.raises(ParseError) as info:
            parse_matrix(text)
        assert info.value.lineno == line
        assert str(info.value).startswith(f"line {line}:")

    def test_trailing_blank_lines(self):
        np.testing.assert_array_equal(parse_matrix("1 1\n5\n\n\n"), [[5.0]])


@pytest.mark.parametrize("scale", [1e-200, 1e-120, 1e120, 1e200])
def test_extreme_scales(scale):
    a = np.diag([3.0, 4.0]) * scale
    assert frobenius_norm(a) == pytest.approx(5.0 * scale)
    assert top_singular_triple(a).sigma == pytest.approx(4.0 * scale, rel=1e-9)
    assert exact_singular_values(a) == pytest.approx([4.0 * scale, 3.0 * scale])
