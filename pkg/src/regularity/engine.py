"""Greedy regularity engine.

One loop serves both atom families. Each round asks an atom family for up
to ``f(k)`` atoms of the current residual ``A - Â`` (``k`` is the atom count
so far), projects the residual onto their span to get ``Q`` and keeps ``Q``
only if ``||Q||_F > eps * ||A||_F``. The potential ``||A - Â||_F^2`` then
drops by ``||Q||_F^2`` per round, which bounds the number of rounds.
"""

from dataclasses import dataclass, field
import math
import re

import numpy as np

from ._validation import check_epsilon, check_matrix, check_mode
from .cutalg import (
    DEFAULT_RESTARTS,
    DEFAULT_SPAN_BUDGET,
    MAX_EXACT_DIM,
    CutAtom,
    CutDecomposition,
    _pair_cost,
    best_cut_pair,
    cut_norm_exact,
    cut_norm_heuristic,
    realize,
    span_projection,
)
from .exceptions import ConvergenceError, DomainError
from .matcore import (
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    frobenius_norm,
    project_onto_rank1,
    project_onto_span,
    singular_triples,
)

SATURATED = math.inf
INT64_MAX = 2**63 - 1
# Atoms whose projection magnitude is below this fraction of ||A||_F are noise.
ATOM_FLOOR = 1e-12


@dataclass(frozen=True)
class GrowthFunction:
    """Nondecreasing ``f: N -> N`` of the form ``c``, ``b**n`` or ``a * b**n``."""

    kind: str
    a: int = 1
    b: int = 0

    def __post_init__(self):
        if self.kind not in ("const", "exp", "scaledexp"):
            raise DomainError(f"unknown growth function kind {self.kind!r}")
        for name in ("a", "b"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 0:
                raise DomainError(f"growth parameter {name} must be a nonnegative integer")
            object.__setattr__(self, name, int(value))
        values = [self(n) for n in range(64)]
        if any(x > y for x, y in zip(values, values[1:])):
            raise DomainError(f"growth function {self.spec} is not nondecreasing")

    @classmethod
    def constant(cls, c):
        return cls("const", a=c)

    @classmethod
    def exponential(cls, b):
        return cls("exp", b=b)

    @classmethod
    def scaled_exponential(cls, a, b):
        return cls("scaledexp", a=a, b=b)

    @classmethod
    def parse(cls, text):
        """Parse ``const:c``, ``exp:b`` or ``scaledexp:a:b``."""
        m = re.fullmatch(r"(const|exp|scaledexp):(\d+)(?::(\d+))?", text.strip())
        if not m or (m.group(1) == "scaledexp") != (m.group(3) is not None):
            raise DomainError(f"cannot parse growth function {text!r}")
        kind, first, second = m.group(1), int(m.group(2)), m.group(3)
        if kind == "const":
            return cls.constant(first)
        if kind == "exp":
            return cls.exponential(first)
        return cls.scaled_exponential(first, int(second))

    @property
    def spec(self):
        if self.kind == "const":
            return f"const:{self.a}"
        if self.kind == "exp":
            return f"exp:{self.b}"
        return f"scaledexp:{self.a}:{self.b}"

    def __call__(self, n):
        """``f(n)``, or :data:`SATURATED` when the value exceeds int64."""
        n = int(n)
        if self.kind == "const":
            return self.a
        scale = 1 if self.kind == "exp" else self.a
        if scale == 0:
            return 0
        if self.b <= 1:
            power = 1 if (self.b == 1 or n == 0) else 0
        else:
            if n * math.log2(self.b) > 64:
                return SATURATED
            power = self.b**n
        value = scale * power
        return value if value <= INT64_MAX else SATURATED


def as_growth(f):
    if isinstance(f, GrowthFunction):
        return f
    if isinstance(f, str):
        return GrowthFunction.parse(f)
    raise DomainError(f"expected a GrowthFunction or spec string, got {f!r}")


def f_iterate(f, i):
    """``f^(i)``: ``f^(0) = 0`` and ``f^(i) = f^(i-1) + f(f^(i-1))``.

    Values beyond the int64 range come back as :data:`SATURATED`.
    """
    f = as_growth(f)
    if isinstance(i, bool) or int(i) != i or i < 0:
        raise DomainError("i must be a nonnegative integer")
    value = 0
    for _ in range(int(i)):
        step = f(value)
        if step == SATURATED:
            return SATURATED
        value += step
        if value > INT64_MAX:
            return SATURATED
    return value


@dataclass(frozen=True)
class RoundRecord:
    potential_before: float
    potential_after: float
    atoms_added: int
    rank_after: int
    q_magnitude: float

    def to_dict(self):
        return {
            "potential_before": self.potential_before,
            "potential_after": self.potential_after,
            "atoms_added": self.atoms_added,
            "rank_after": self.rank_after,
            "q_magnitude": self.q_magnitude,
        }


@dataclass
class DecompositionTrace:
    mode: str
    epsilon: float
    f_spec: str
    rounds: list = field(default_factory=list)
    k_witness: int = 0
    halting_certificate: str = "exact"

    def to_dict(self):
        return {
            "mode": self.mode,
            "epsilon": self.epsilon,
            "f_spec": self.f_spec,
            "rounds": [r.to_dict() for r in self.rounds],
            "k_witness": self.k_witness,
            "halting_certificate": self.halting_certificate,
        }


@dataclass
class RegularityResult:
    a_hat: np.ndarray
    decomposition: object
    k_witness: int
    trace: DecompositionTrace
    halting_certificate: str

    @property
    def n_rounds(self):
        return len(self.trace.rounds)


@dataclass(frozen=True)
class RankTerm:
    """One rank-1 piece ``coeff * left right^T`` of a rank decomposition."""

    coeff: float
    left: np.ndarray
    right: np.ndarray


class RankAtoms:
    """Rank-1 atoms found by power iteration with deflation.

    The top ``count`` triples give the best rank-``count`` projection, so
    every round's search is exact.
    """

    label = "rank"
    certificate = "exact"

    def __init__(self, seed=0, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
        self.seed = seed
        self.tol = tol
        self.max_iters = max_iters

    def capacity(self, shape):
        return min(shape)

    def gather(self, residual, count, floor, round_index):
        triples = singular_triples(
            residual,
            count,
            tol=self.tol,
            seed=self.seed + 1000 * round_index,
            max_iters=self.max_iters,
            floor=floor,
        )
        if not triples:
            return np.zeros_like(residual), [], True
        if len(triples) == 1:
            t = triples[0]
            q, _ = project_onto_rank1(residual, t.left, t.right)
            coeffs = [float(t.left @ residual @ t.right)]
        else:
            q, coeffs = project_onto_span(residual, [np.outer(t.left, t.right) for t in triples])
        return q, [RankTerm(float(c), t.left, t.right) for c, t in zip(coeffs, triples)], True

    def assemble(self, shape, terms):
        return list(terms)


class CutAtoms:
    """Cut-matrix atoms.

    Exact mode takes the best single cut for one atom and the best pair span
    for two when the pair search fits ``span_budget``. Otherwise atoms are
    picked greedily, each the best single cut of the intra-round residual.
    """

    def __init__(self, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1, max_dim=MAX_EXACT_DIM,
                 span_budget=DEFAULT_SPAN_BUDGET):
        self.mode = check_mode(mode)
        self.seed = seed
        self.restarts = restarts
        self.workers = workers
        self.max_dim = max_dim
        self.span_budget = span_budget
        self.label = f"cut-{mode}"
        self.certificate = "exact" if mode == "exact" else "greedy"

    def capacity(self, shape):
        return shape[0] * shape[1]

    def best_single(self, r, round_index, j):
        if self.mode == "exact":
            return cut_norm_exact(r, workers=self.workers, max_dim=self.max_dim)
        return cut_norm_heuristic(r, restarts=self.restarts, seed=[self.seed, round_index, j])

    def gather(self, residual, count, floor, round_index):
        exact = self.mode == "exact" and (
            count == 1 or (count == 2 and _pair_cost(*residual.shape) <= self.span_budget)
        )
        if exact and count == 2:
            value, pairs = best_cut_pair(residual, budget=self.span_budget)
            chosen = pairs if value > floor else []
        else:
            chosen = self._greedy(residual, count, floor, round_index)
        if not chosen:
            return np.zeros_like(residual), [], exact
        q, coeffs = span_projection(residual, chosen)
        return q, [CutAtom(rows, cols, c) for (rows, cols), c in zip(chosen, coeffs)], exact

    def _greedy(self, residual, count, floor, round_index):
        chosen = []
        intra = residual
        for j in range(count):
            value, pair = self.best_single(intra, round_index, j)
            if value <= floor or pair in chosen:
                break
            chosen.append(pair)
            if len(chosen) < count:
                q, _ = span_projection(residual, chosen)
                intra = residual - q
        return chosen

    def assemble(self, shape, atoms):
        return CutDecomposition(shape, tuple(atoms))


def run_engine(a, eps, f, atoms):
    """Greedy loop shared by every public decomposition routine.

    The halting certificate is ``"exact"`` when the search that ended the
    loop was exhaustive for its atom count (or the residual itself was
    already below the threshold), and ``"greedy"`` otherwise. Heuristic
    atom families always report ``"greedy"``.
    """
    a = check_matrix(a)
    eps = check_epsilon(eps)
    f = as_growth(f)
    a_fro = frobenius_norm(a)
    threshold = eps * a_fro
    floor = ATOM_FLOOR * a_fro
    cap = atoms.capacity(a.shape)
    trace = DecompositionTrace(atoms.label, eps, f.spec, halting_certificate=atoms.certificate)
    a_hat = np.zeros_like(a)
    pieces = []
    k = 0
    certified = True
    while True:
        residual = a - a_hat
        res_norm = frobenius_norm(residual)
        before = res_norm * res_norm
        # No projection of the residual can be longer than the residual itself.
        if res_norm <= threshold:
            certified = True
            break
        count = f(k)
        count = cap if count == SATURATED else min(count, cap)
        if count == 0:
            certified = True
            break
        try:
            q, new, certified = atoms.gather(residual, count, floor, len(trace.rounds))
        except ConvergenceError as exc:
            trace.k_witness = k
            exc.trace = trace
            raise
        q_mag = frobenius_norm(q)
        if not q_mag > threshold:
            break
        pieces.extend(new)
        k += len(new)
        if isinstance(atoms, CutAtoms):
            a_hat = realize(CutDecomposition(a.shape, tuple(pieces)))
        else:
            a_hat = a_hat + q
        after = frobenius_norm(a - a_hat)
        trace.rounds.append(RoundRecord(before, after * after, len(new), k, q_mag))
    trace.k_witness = k
    certificate = "exact" if certified and atoms.certificate == "exact" else "greedy"
    trace.halting_certificate = certificate
    return RegularityResult(a_hat, atoms.assemble(a.shape, pieces), k, trace, certificate)


def weak_decompose_rank(a, eps, seed=0, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Rank < eps^-2 approximation with top residual singular value <= eps ||a||_F."""
    return run_engine(a, eps, GrowthFunction.constant(1), RankAtoms(seed, tol, max_iters))


def strong_decompose_rank(a, eps, f, seed=0, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Each round projects onto the top ``f(rank so far)`` singular directions of the residual."""
    return run_engine(a, eps, f, RankAtoms(seed, tol, max_iters))


def weak_decompose_cut(a, eps, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1):
    """Cutrank < eps^-2 approximation; in exact mode the residual's ■[1] norm is certified."""
    return run_engine(a, eps, GrowthFunction.constant(1), CutAtoms(mode, seed, restarts, workers))


def strong_decompose_cut(a, eps, f, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1,
                         span_budget=DEFAULT_SPAN_BUDGET):
    """Each round projects onto up to ``f(cutrank so far)`` cut atoms of the residual.

    ``span_budget`` caps the exact two-atom search used in exact mode.
    """
    return run_engine(a, eps, f, CutAtoms(mode, seed, restarts, workers, span_budget=span_budget))
