"""scikit-learn style wrappers around the decomposition engine and the graph verifiers."""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .cutalg import DEFAULT_RESTARTS, span_projection
from .engine import (
    GrowthFunction,
    as_growth,
    strong_decompose_cut,
    strong_decompose_rank,
)
from .exceptions import DomainError
from .graphreg import (
    C_MODES,
    Graph,
    block_values,
    verify_exceptional,
    verify_irregularity,
    verify_szemeredi_disc,
    verify_weak_graph,
)
from .matcore import project_onto_span

ATOM_KINDS = ("rank", "cut")
THEOREMS = ("weak-graph", "disc", "irregular", "exceptional")


def _as_matrix(X):
    return check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True)


class RegularityDecomposition(TransformerMixin, BaseEstimator):
    """Greedy low-rank (``atoms="rank"``) or cut-matrix (``atoms="cut"``) approximation.

    ``f=None`` runs the weak lemma, i.e. one atom per round.

    Attributes after ``fit``: ``a_hat_``, ``decomposition_``, ``k_witness_``,
    ``trace_``, ``halting_certificate_``, ``n_rounds_``.

    ``transform(X)`` projects ``X`` onto the span of the fitted atoms, so it
    also works for new matrices of the same shape.
    """

    def __init__(self, atoms="rank", epsilon=0.5, f=None, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1):
        self.atoms = atoms
        self.epsilon = epsilon
        self.f = f
        self.mode = mode
        self.seed = seed
        self.restarts = restarts
        self.workers = workers

    def _growth(self):
        return GrowthFunction.constant(1) if self.f is None else as_growth(self.f)

    def fit(self, X, y=None):
        a = _as_matrix(X)
        if self.atoms not in ATOM_KINDS:
            raise DomainError(f"atoms must be one of {ATOM_KINDS}")
        f = self._growth()
        if self.atoms == "rank":
            result = strong_decompose_rank(a, self.epsilon, f, seed=self.seed)
        else:
            result = strong_decompose_cut(
                a, self.epsilon, f, mode=self.mode, seed=self.seed, restarts=self.restarts, workers=self.workers
            )
        self.a_hat_ = result.a_hat
        self.decomposition_ = result.decomposition
        self.k_witness_ = result.k_witness
        self.trace_ = result.trace
        self.halting_certificate_ = result.halting_certificate
        self.n_rounds_ = result.n_rounds
        self.shape_ = a.shape
        return self

    def transform(self, X):
        check_is_fitted(self, "a_hat_")
        a = _as_matrix(X)
        if a.shape != self.shape_:
            raise DomainError(f"expected shape {self.shape_}, got {a.shape}")
        if self.k_witness_ == 0:
            return np.zeros_like(a)
        if self.atoms == "rank":
            basis = [np.outer(t.left, t.right) for t in self.decomposition_]
            return project_onto_span(a, basis)[0]
        pairs = [(atom.row_set, atom.col_set) for atom in self.decomposition_.atoms]
        return span_projection(a, pairs)[0]


class RegularityPartition(ClusterMixin, BaseEstimator):
    """Vertex partition of a graph given as a 0/1 adjacency matrix.

    ``theorem`` picks the construction: ``"weak-graph"`` (compression with
    block densities), ``"disc"``, ``"irregular"`` or ``"exceptional"``.
    ``labels_`` uses ``-1`` for the exceptional set, as sklearn does for noise.
    ``checks_`` lists the bound checks, each with its measured value and bound.
    """

    def __init__(self, theorem="weak-graph", epsilon=0.5, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1, c_mode="free"):
        self.theorem = theorem
        self.epsilon = epsilon
        self.mode = mode
        self.seed = seed
        self.restarts = restarts
        self.workers = workers
        self.c_mode = c_mode

    def fit(self, X, y=None):
        g = X if isinstance(X, Graph) else Graph(_as_matrix(X))
        if self.theorem not in THEOREMS:
            raise DomainError(f"theorem must be one of {THEOREMS}")
        if self.c_mode not in C_MODES:
            raise DomainError(f"c_mode must be one of {C_MODES}")
        kw = dict(mode=self.mode, seed=self.seed, restarts=self.restarts, workers=self.workers)
        self.report_ = None
        if self.theorem == "weak-graph":
            cg, checks = verify_weak_graph(g, self.epsilon, **kw)
            partition, result = cg.partition, cg.result
            self.c_ = cg.c
        else:
            if self.theorem == "exceptional":
                partition, report = verify_exceptional(g, self.epsilon, c_mode=self.c_mode, **kw)
            else:
                verify = verify_szemeredi_disc if self.theorem == "disc" else verify_irregularity
                report = verify(g, self.epsilon, c_mode=self.c_mode, **kw)
                partition = report.partition
            checks, result = report.checks, report.result
            self.report_ = report
            self.c_ = None if partition.exceptional is not None else block_values(result.a_hat, partition)
        labels = np.asarray(partition.labels)
        if partition.exceptional is not None:
            labels = np.where(labels == partition.exceptional, -1, labels - (labels > partition.exceptional))
        self.labels_ = labels
        self.partition_ = partition
        self.checks_ = checks
        self.result_ = result
        self.passed_ = all(c.passed for c in checks)
        return self
