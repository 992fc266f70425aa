import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_matrix
from regularity.cutalg import (
    CutAtom,
    CutDecomposition,
    best_cut_pair,
    best_subset_ratio,
    black_square_norm_exact,
    classical_cut_norm,
    cut_gram,
    cut_norm_exact,
    cut_norm_heuristic,
    cut_value,
    mask_of,
    members,
    project_onto_cut_span,
    realize,
)
from regularity.exceptions import BudgetExceededError, DomainError
from regularity.matcore import f_top_k_norm, frobenius_norm, project_onto_rank1
from regularity.oracle import exhaustive_best_subset_ratio, exhaustive_cut_norms
from strategies import matrices, sign_matrices

CHECKERBOARD = np.array([[1.0, -1.0], [-1.0, 1.0]])


def test_mask_round_trip():
    assert mask_of((0, 2, 3)) == 0b1101
    assert members(0b1101) == (0, 2, 3)
    assert members(0) == ()


class TestAtoms:
    def test_atom_normalises(self):
        atom = CutAtom([2, 0, 2], (1,), 3)
        assert atom.row_set == (0, 2)
        assert atom.coeff == 3.0
        assert atom.row_mask == 0b101

    @pytest.mark.parametrize("rows, cols", [((), (0,)), ((0,), ()), ((-1,), (0,))])
    def test_atom_rejects(self, rows, cols):
        with pytest.raises(DomainError):
            CutAtom(rows, cols)

    def test_decomposition_bounds(self):
        with pytest.raises(DomainError):
            CutDecomposition((2, 2), (CutAtom((2,), (0,)),))

    def test_realize_empty(self):
        np.testing.assert_array_equal(realize(CutDecomposition((3, 3))), np.zeros((3, 3)))

    def test_realize_single(self):
        d = CutDecomposition((2, 2), (CutAtom((0, 1), (0,), 2.0),))
        np.testing.assert_array_equal(realize(d), [[2, 0], [2, 0]])

    def test_realize_overlap_adds(self):
        d = CutDecomposition((2, 2), (CutAtom((0, 1), (0, 1), 1.0), CutAtom((0,), (0,), 2.5)))
        np.testing.assert_array_equal(realize(d), [[3.5, 1], [1, 1]])
        assert d.cutrank_witness == 2


class TestSubsetRatio:
    def test_examples(self):
        assert best_subset_ratio([1, 0]) == (1.0, (0,))
        value, idx = best_subset_ratio([1, 1])
        assert value == pytest.approx(math.sqrt(2)) and idx == (0, 1)
        assert best_subset_ratio([3, -1]) == (3.0, (0,))

    def test_negative_side(self):
        value, idx = best_subset_ratio([-2, -2, 1])
        assert value == pytest.approx(4 / math.sqrt(2)) and idx == (0, 1)

    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=12))
    def test_prefix_optimality(self, w):
        value, idx = best_subset_ratio(w)
        ref, _ = exhaustive_best_subset_ratio(w)
        assert value == pytest.approx(ref, rel=1e-12, abs=1e-12)
        assert abs(sum(w[i] for i in idx)) / math.sqrt(len(idx)) == pytest.approx(value, rel=1e-12, abs=1e-12)


class TestCutNorm:
    @pytest.mark.parametrize("n", [1, 3, 5])
    def test_all_ones(self, n):
        value, (rows, cols) = cut_norm_exact(np.ones((n, n)))
        assert value == pytest.approx(n)
        assert rows == cols == tuple(range(n))

    def test_checkerboard(self):
        value, pair = cut_norm_exact(CHECKERBOARD)
        assert value == pytest.approx(1.0)
        assert pair == ((0,), (0,))

    def test_zero(self):
        assert cut_norm_exact(np.zeros((3, 2)))[0] == 0.0

    def test_budget(self):
        with pytest.raises(BudgetExceededError, match="cut_norm_heuristic"):
            cut_norm_exact(np.ones((15, 2)))

    @given(matrices(6, 6))
    def test_matches_full_enumeration(self, a):
        value, (rows, cols) = cut_norm_exact(a)
        normalised, _ = exhaustive_cut_norms(a)
        assert value == pytest.approx(normalised, rel=1e-12, abs=1e-12)
        assert cut_value(a, rows, cols) == pytest.approx(value, rel=1e-12, abs=1e-12)

    @given(sign_matrices(5, 5))
    def test_tie_break_is_smallest(self, a):
        value, (rows, cols) = cut_norm_exact(a)
        key = (mask_of(rows), mask_of(cols))
        m, n = a.shape
        tol = 1e-12 * max(1.0, value)
        for r in range(1, 1 << m):
            for c in range(1, 1 << n):
                if (r, c) >= key:
                    continue
                assert cut_value(a, members(r), members(c)) < value - tol

    @pytest.mark.parametrize("workers", [2, 3, 7])
    def test_worker_independence(self, workers):
        a = random_matrix(9, 10, 9, "sign")
        assert cut_norm_exact(a, workers=workers) == cut_norm_exact(a)
        assert classical_cut_norm(a, workers=workers) == classical_cut_norm(a)


class TestHeuristic:
    def test_all_ones(self):
        assert cut_norm_heuristic(np.ones((4, 4)))[0] == pytest.approx(4.0)

    def test_rank_one_cut(self):
        a = np.zeros((5, 6))
        a[np.ix_([1, 3], [0, 2, 5])] = -2.5
        value, (rows, cols) = cut_norm_heuristic(a, restarts=4)
        assert value == pytest.approx(2.5 * math.sqrt(6))
        assert (rows, cols) == ((1, 3), (0, 2, 5))

    def test_deterministic(self):
        a = random_matrix(2, 9, 9)
        assert cut_norm_heuristic(a, seed=5) == cut_norm_heuristic(a, seed=5)

    def test_restarts_validated(self):
        with pytest.raises(DomainError):
            cut_norm_heuristic(np.ones((2, 2)), restarts=0)

    @given(matrices(6, 6), st.integers(0, 100))
    def test_lower_bound(self, a, seed):
        value, (rows, cols) = cut_norm_heuristic(a, restarts=3, seed=seed)
        assert value <= cut_norm_exact(a)[0] + 1e-12
        assert cut_value(a, rows, cols) == pytest.approx(value, rel=1e-12, abs=1e-12)

    def test_matches_exact_on_most_sign_matrices(self):
        hits = 0
        for seed in range(100):
            a = random_matrix(seed, 12, 12, "sign")
            exact = cut_norm_exact(a)[0]
            heur = cut_norm_heuristic(a, seed=seed)[0]
            assert heur <= exact + 1e-12
            hits += heur >= exact - 1e-12
        assert hits >= 90


class TestSpans:
    def test_disjoint_blocks_add(self):
        r = random_matrix(3, 4, 4)
        atoms = [((0, 1), (0, 1)), ((2,), (1, 2, 3)), ((3,), (0,))]
        _, mag = project_onto_cut_span(r, atoms)
        singles = [project_onto_cut_span(r, [at])[1] for at in atoms]
        assert mag**2 == pytest.approx(sum(s**2 for s in singles))

    def test_single_matches_rank1(self):
        r = random_matrix(4, 3, 5)
        q, mag = project_onto_cut_span(r, [((0, 2), (1, 3, 4))])
        q1, mag1 = project_onto_rank1(r, [1, 0, 1], [0, 1, 0, 1, 1])
        np.testing.assert_allclose(q, q1, atol=1e-12)
        assert mag == pytest.approx(mag1)

    def test_full_span(self):
        r = random_matrix(5, 2, 2)
        atoms = [((i,), (j,)) for i in range(2) for j in range(2)]
        q, mag = project_onto_cut_span(r, atoms)
        np.testing.assert_allclose(q, r, atol=1e-12)
        assert mag == pytest.approx(frobenius_norm(r))

    def test_rank_deficient(self):
        r = random_matrix(6, 2, 2)
        atoms = [((0, 1), (0, 1)), ((0,), (0, 1)), ((1,), (0, 1))]
        q, _ = project_onto_cut_span(r, atoms)
        expected = np.repeat(r.mean(axis=1, keepdims=True), 2, axis=1)
        np.testing.assert_allclose(q, expected, atol=1e-12)

    def test_empty_atoms(self):
        with pytest.raises(DomainError):
            project_onto_cut_span(np.ones((2, 2)), [])

    def test_gram(self):
        g = cut_gram([((0, 1), (0,)), ((1, 2), (0, 1))])
        np.testing.assert_array_equal(g, [[2, 1], [1, 4]])

    @given(matrices(4, 4), st.data())
    def test_pythagoras(self, r, data):
        m, n = r.shape
        k = data.draw(st.integers(1, 4))
        atoms = [
            (
                data.draw(st.sets(st.integers(0, m - 1), min_size=1)),
                data.draw(st.sets(st.integers(0, n - 1), min_size=1)),
            )
            for _ in range(k)
        ]
        q, mag = project_onto_cut_span(r, atoms)
        total = frobenius_norm(r) ** 2
        assert abs(total - mag**2 - frobenius_norm(r - q) ** 2) <= 1e-9 * max(total, 1.0)


class TestBlackSquare:
    def test_k1_checkerboard(self):
        assert black_square_norm_exact(CHECKERBOARD, 1) == pytest.approx(1.0)

    def test_full_k(self):
        a = random_matrix(7, 3, 2)
        assert black_square_norm_exact(a, 6) == frobenius_norm(a)

    def test_zero(self):
        for k in (1, 2, 3):
            assert black_square_norm_exact(np.zeros((2, 3)), k) == 0.0

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            black_square_norm_exact(np.ones((8, 8)), 2)
        with pytest.raises(BudgetExceededError):
            black_square_norm_exact(np.ones((3, 3)), 3, budget=10)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            black_square_norm_exact(np.ones((2, 2)), 2, method="magic")

    @given(matrices(3, 3))
    def test_pair_kernel_matches_enumeration(self, a):
        fast = black_square_norm_exact(a, 2)
        slow = black_square_norm_exact(a, 2, method="enumerate")
        assert fast == pytest.approx(slow, rel=1e-9, abs=1e-9)

    @given(matrices(3, 3))
    def test_best_pair_witness(self, a):
        value, atoms = best_cut_pair(a)
        if not atoms:
            assert value == 0.0
            return
        assert 1 <= len(atoms) <= 2
        assert project_onto_cut_span(a, atoms)[1] == pytest.approx(value, rel=1e-9, abs=1e-9)

    @given(sign_matrices(3, 3))
    def test_chain(self, a):
        fro = frobenius_norm(a)
        values = [black_square_norm_exact(a, k) for k in (1, 2, 3)]
        assert values[0] <= values[1] + 1e-9 <= values[2] + 2e-9
        assert values[2] <= fro + 1e-9
        for k, v in zip((1, 2, 3), values):
            assert v <= f_top_k_norm(a, k) + 1e-8


class TestClassical:
    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_all_ones(self, n):
        assert classical_cut_norm(np.ones((n, n))) == n * n

    def test_checkerboard(self):
        assert classical_cut_norm(CHECKERBOARD) == 1.0

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            classical_cut_norm(np.ones((2, 15)))

    @given(matrices(6, 6))
    def test_matches_full_enumeration(self, a):
        assert classical_cut_norm(a) == pytest.approx(exhaustive_cut_norms(a)[1], rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("seed", range(50))
    def test_versus_normalised(self, seed):
        a = random_matrix(seed, 8, 8)
        assert classical_cut_norm(a) <= 8.0 * cut_norm_exact(a)[0] + 1e-9
