import math

import numpy as np
import pytest
from hypothesis import given

from conftest import random_matrix
from regularity.exceptions import BudgetExceededError, DomainError
from regularity.generators import complete_bipartite, gnp
from regularity.graphreg import CompressedGraph, Graph, Partition, compress, discrepancy_exact
from regularity.matcore import frobenius_norm
from regularity.oracle import (
    OracleBudget,
    exact_singular_values,
    exhaustive_best_subset_ratio,
    exhaustive_cut_norms,
    exhaustive_discrepancy,
    exhaustive_theorem5_error,
    gray_walk,
)
from strategies import matrices


def test_gray_walk_visits_every_subset_once():
    masks = [m for m, _, _ in gray_walk(5)]
    assert sorted(masks) == list(range(32))
    for (a, _, _), (b, bit, added) in zip(masks_steps := list(gray_walk(5)), masks_steps[1:]):
        assert bin(a ^ b).count("1") == 1
        assert bool(b >> bit & 1) == added


def test_budget_validation():
    with pytest.raises(DomainError):
        OracleBudget(max_evaluations=0)


class TestSingularValues:
    def test_diag(self):
        assert exact_singular_values(np.diag([3.0, 4.0])) == pytest.approx([4.0, 3.0])

    def test_ones(self):
        assert exact_singular_values(np.ones((2, 2))) == pytest.approx([2.0, 0.0], abs=1e-12)

    def test_frobenius_identity(self):
        a = random_matrix(0, 6, 6)
        s = exact_singular_values(a)
        assert np.sum(s**2) == pytest.approx(frobenius_norm(a) ** 2, rel=1e-9)
        assert list(s) == sorted(s, reverse=True)

    def test_wide(self):
        a = random_matrix(1, 3, 20)
        np.testing.assert_allclose(exact_singular_values(a), np.linalg.svd(a, compute_uv=False), rtol=1e-10)

    def test_too_large(self):
        with pytest.raises(BudgetExceededError):
            exact_singular_values(np.ones((17, 17)))

    @given(matrices(8, 8))
    def test_against_lapack(self, a):
        ref = np.linalg.svd(a, compute_uv=False)
        np.testing.assert_allclose(exact_singular_values(a), ref, rtol=1e-7, atol=1e-7 * max(ref[0], 1e-300))


class TestSubsetRatio:
    @pytest.mark.parametrize(
        "w, value, subset",
        [((1, 0), 1.0, (0,)), ((1, 1), math.sqrt(2), (0, 1)), ((3, -1), 3.0, (0,))],
    )
    def test_examples(self, w, value, subset):
        v, s = exhaustive_best_subset_ratio(w)
        assert v == pytest.approx(value)
        assert tuple(s) == subset

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            exhaustive_best_subset_ratio(np.ones(15))


def test_cut_norms_all_ones():
    normalised, classical = exhaustive_cut_norms(np.ones((3, 3)))
    assert normalised == pytest.approx(3.0)
    assert classical == pytest.approx(9.0)


class TestDiscrepancy:
    def test_complete(self):
        g = complete_bipartite(3, 3)
        assert exhaustive_discrepancy(g, [0, 1, 2], [3, 4, 5]) == pytest.approx(0.0, abs=1e-12)

    def test_single_edge(self):
        g = Graph.from_edges(4, [(0, 2)])
        assert exhaustive_discrepancy(g, [0, 1], [2, 3]) == pytest.approx(2 / 3, abs=1e-12)

    def test_budget(self):
        g = Graph(np.zeros((22, 22)))
        with pytest.raises(BudgetExceededError):
            exhaustive_discrepancy(g, range(11), range(11, 22))

    def test_agrees_on_random_blocks(self):
        rng = np.random.default_rng(11)
        for seed in range(40):
            g = gnp(14, rng.uniform(0.1, 0.9), seed=seed)
            perm = rng.permutation(14)
            a, b = rng.integers(1, 8, size=2)
            vi, vj = sorted(perm[:a]), sorted(perm[a : a + b])
            assert exhaustive_discrepancy(g, vi, vj) == pytest.approx(discrepancy_exact(g, vi, vj), abs=1e-9)


class TestTheorem5Error:
    def test_empty_graph(self):
        g = Graph(np.zeros((6, 6)))
        assert exhaustive_theorem5_error(g, compress(g, 0.5)) == 0.0

    def test_complete_bipartite(self):
        g = complete_bipartite(5, 5)
        assert exhaustive_theorem5_error(g, compress(g, 0.5)) == 0.0

    def test_one_part(self):
        g = gnp(9, 0.4, seed=6)
        n = g.n
        cg = CompressedGraph(Partition((0,) * n, 1), np.array([[g.adjacency.sum() / n**2]]))
        v = list(range(n))
        assert exhaustive_theorem5_error(g, cg) == pytest.approx(
            discrepancy_exact(g, v, v, c_mode="fixed-density"), abs=1e-9
        )

    def test_budget(self):
        g = Graph(np.zeros((13, 13)))
        cg = CompressedGraph(Partition((0,) * 13, 1), np.zeros((1, 1)))
        with pytest.raises(BudgetExceededError):
            exhaustive_theorem5_error(g, cg)
