"""Graph regularity partitions built on cut decompositions of the adjacency matrix.

Cut counts follow the quadratic-form convention ``e(S, T) = s^T A t``: an
edge with both endpoints in ``S & T`` is counted once per direction.
"""

from dataclasses import dataclass, field
import math
import os
from typing import Optional

import numpy as np

from ._validation import check_epsilon, check_index_set, check_matrix, indicator
from .cutalg import DEFAULT_RESTARTS, subset_table
from .engine import GrowthFunction, f_iterate, strong_decompose_cut, weak_decompose_cut
from .exceptions import BudgetExceededError, DomainError, RegularityError
from .matcore import ParseError

MAX_DISC_SIDE = 12
C_MODES = ("free", "fixed-density")


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph held as a dense 0/1 adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        adj = check_matrix(self.adjacency, "adjacency")
        if adj.shape[0] != adj.shape[1]:
            raise DomainError("adjacency must be square")
        if not np.array_equal(adj, adj.T):
            raise DomainError("adjacency must be symmetric")
        if not np.all((adj == 0) | (adj == 1)):
            raise DomainError("adjacency entries must be 0 or 1")
        if np.any(np.diag(adj)):
            raise DomainError("self-loops are not allowed")
        adj = adj.copy()
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @property
    def n(self):
        return self.adjacency.shape[0]

    @classmethod
    def from_edges(cls, n, edges):
        if n < 1:
            raise DomainError("graph needs at least one node")
        adj = np.zeros((n, n))
        for u, v in edges:
            if u == v:
                raise DomainError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u}, {v}) outside 0..{n - 1}")
            adj[u, v] = adj[v, u] = 1.0
        return cls(adj)

    def edges(self):
        us, vs = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(u), int(v)) for u, v in zip(us, vs)]


def format_edge_list(g):
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    return "\n".join(lines) + "\n"


def write_edge_list(g, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(g))


def parse_edge_list(text):
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty input", 1)
    head = lines[0].split()
    try:
        n, m = (int(x) for x in head)
    except ValueError:
        raise ParseError("header must be 'n m'", 1) from None
    if n < 1 or m < 0:
        raise ParseError("need n >= 1 and m >= 0", 1)
    if len(lines) - 1 != m:
        raise ParseError(f"expected {m} edge lines, found {len(lines) - 1}", len(lines))
    seen = set()
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError("edge line must be 'u v'", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError("endpoints must be integers", lineno) from None
        if u == v:
            raise ParseError("self-loop", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"endpoint outside 0..{n - 1}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError("duplicate edge", lineno)
        seen.add(key)
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def read_edge_list(path):
    with open(os.fspath(path), encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


@dataclass(frozen=True)
class Partition:
    """Node -> part assignment. ``exceptional`` names the V0 part, if any."""

    labels: tuple
    n_parts: int
    exceptional: Optional[int] = None

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        used = set(labels)
        if any(x < 0 or x >= self.n_parts for x in labels):
            raise DomainError("part label out of range")
        for p in range(self.n_parts):
            if p not in used and p != self.exceptional:
                raise DomainError(f"part {p} is empty")

    @property
    def n(self):
        return len(self.labels)

    @property
    def parts(self):
        out = [[] for _ in range(self.n_parts)]
        for node, p in enumerate(self.labels):
            out[p].append(node)
        return [tuple(p) for p in out]

    @property
    def regular_parts(self):
        """Indices of the non-exceptional parts."""
        return [p for p in range(self.n_parts) if p != self.exceptional]

    @classmethod
    def from_parts(cls, parts, exceptional=None):
        n = sum(len(p) for p in parts)
        labels = [-1] * n
        for i, part in enumerate(parts):
            for node in part:
                if not 0 <= node < n or labels[node] != -1:
                    raise DomainError("parts must partition 0..n-1")
                labels[node] = i
        return cls(tuple(labels), len(parts), exceptional)


def common_refinement(d, n):
    """Coarsest partition on which every atom's row and column sets are unions of parts.

    Parts are numbered by their smallest node.
    """
    if tuple(d.shape) != (n, n):
        raise DomainError(f"decomposition shape {d.shape} is not {(n, n)}")
    row_masks = [atom.row_mask for atom in d.atoms]
    col_masks = [atom.col_mask for atom in d.atoms]
    ids = {}
    labels = []
    for u in range(n):
        sig = tuple((r >> u) & 1 for r in row_masks) + tuple((c >> u) & 1 for c in col_masks)
        labels.append(ids.setdefault(sig, len(ids)))
    return Partition(tuple(labels), len(ids))


@dataclass(eq=False)
class CompressedGraph:
    partition: Partition
    c: np.ndarray
    a_hat: Optional[np.ndarray] = None
    result: object = None


def block_values(a_hat, partition):
    """The constant value of ``a_hat`` on each block; raises if a block is not constant."""
    parts = partition.parts
    k = len(parts)
    c = np.zeros((k, k))
    for i, pi in enumerate(parts):
        for j, pj in enumerate(parts):
            block = a_hat[np.ix_(pi, pj)]
            if block.size == 0:
                continue
            c[i, j] = block.flat[0]
            if not np.all(block == c[i, j]):
                raise RegularityError(f"approximation is not constant on block ({i}, {j})")
    return c


def compress(g, eps, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1):
    """Partition plus block densities whose cut estimates are within ``eps n^2``."""
    eps = check_epsilon(eps)
    result = weak_decompose_cut(g.adjacency, eps, mode=mode, seed=seed, restarts=restarts, workers=workers)
    partition = common_refinement(result.decomposition, g.n)
    c = block_values(result.a_hat, partition)
    return CompressedGraph(partition, c, result.a_hat, result)


def _counts(partition, nodes):
    counts = np.zeros(partition.n_parts)
    for u in nodes:
        counts[partition.labels[u]] += 1
    return counts


def estimate_cut(cg, s, t):
    """``sum_ij c_ij |V_i & S| |V_j & T|``."""
    n = cg.partition.n
    s = check_index_set(s, n, "s")
    t = check_index_set(t, n, "t")
    return float(_counts(cg.partition, s) @ cg.c @ _counts(cg.partition, t))


def exact_cut_count(g, s, t):
    s = check_index_set(s, g.n, "s")
    t = check_index_set(t, g.n, "t")
    return int(round(indicator(s, g.n) @ g.adjacency @ indicator(t, g.n)))


# -- discrepancy -------------------------------------------------------------


def cut_extremes(block):
    """Map ``p = |S||T|`` to the least and greatest ``e(S, T)`` over all sub-blocks.

    For a fixed ``S`` and ``|T| = b`` the extremes take the ``b`` largest or
    smallest entries of ``1_S^T block``. Returns arrays ``(p, e_min, e_max)``
    over ``p > 0``.
    """
    m, n = block.shape
    if m == 0 or n == 0:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    rows = subset_table(m)
    w = np.sort(rows @ block, axis=1)
    hi = np.cumsum(w[:, ::-1], axis=1)
    lo = np.cumsum(w, axis=1)
    p = (rows.sum(axis=1)[:, None] * np.arange(1, n + 1)).astype(np.int64).ravel()
    uniq, inv = np.unique(p, return_inverse=True)
    e_max = np.full(len(uniq), -np.inf)
    e_min = np.full(len(uniq), np.inf)
    np.maximum.at(e_max, inv, hi.ravel())
    np.minimum.at(e_min, inv, lo.ravel())
    return uniq.astype(np.float64), e_min, e_max


def worst_error(c, p, e_min, e_max):
    """``max |e - c p|`` over the extreme pairs (0 when there are none)."""
    if p.size == 0:
        return 0.0
    return float(max(np.max(e_max - c * p), np.max(c * p - e_min), 0.0))


def minimax_density(p, e_min, e_max):
    """Minimise ``c -> max |e - c p|`` exactly; returns ``(value, c)``.

    The objective is the upper envelope of the lines ``e_max - c p`` and
    ``c p - e_min``, so its minimum sits at a crossing of two of them.
    """
    if p.size == 0:
        return 0.0, 0.0
    slopes = np.concatenate([-p, p])
    icepts = np.concatenate([e_max, -e_min])
    dm = slopes[:, None] - slopes[None, :]
    di = icepts[None, :] - icepts[:, None]
    ok = dm != 0
    cand = np.concatenate([(di[ok] / dm[ok]), e_max / p, e_min / p])
    vals = np.maximum(
        np.max(e_max[None, :] - cand[:, None] * p[None, :], axis=1),
        np.max(cand[:, None] * p[None, :] - e_min[None, :], axis=1),
    )
    vals = np.maximum(vals, 0.0)
    i = int(np.argmin(vals))
    return float(vals[i]), float(cand[i])


def _check_pair(g, vi, vj, max_side):
    vi = check_index_set(vi, g.n, "vi")
    vj = check_index_set(vj, g.n, "vj")
    if len(vi) > max_side or len(vj) > max_side:
        raise BudgetExceededError(
            f"exact discrepancy limited to parts of size {max_side}, got {len(vi)} and {len(vj)}"
        )
    if vi != vj and set(vi) & set(vj):
        raise DomainError("vi and vj must be disjoint or identical")
    return vi, vj


def discrepancy_exact(g, vi, vj, c_mode="free", max_side=MAX_DISC_SIDE):
    """``min_c max_{S in vi, T in vj} |e(S, T) - c |S||T||``.

    ``c_mode="fixed-density"`` skips the minimisation and uses the block's
    edge density for ``c``. ``vi`` and ``vj`` must be disjoint, or the same
    set for a diagonal block.
    """
    if c_mode not in C_MODES:
        raise DomainError(f"c_mode must be one of {C_MODES}")
    vi, vj = _check_pair(g, vi, vj, max_side)
    block = g.adjacency[np.ix_(vi, vj)]
    p, e_min, e_max = cut_extremes(block)
    if c_mode == "free":
        return minimax_density(p, e_min, e_max)[0]
    if block.size == 0:
        return 0.0
    density = float(block.sum()) / block.size
    return worst_error(density, p, e_min, e_max)


@dataclass
class Check:
    name: str
    measured: float
    bound: float
    relation: str
    passed: bool

    def to_dict(self):
        return {
            "name": self.name,
            "measured": self.measured,
            "bound": self.bound,
            "relation": self.relation,
            "passed": self.passed,
        }


def _check(name, measured, relation, bound):
    ops = {"<=": measured <= bound, "<": measured < bound}
    return Check(name, measured, bound, relation, bool(ops[relation]))


@dataclass
class DiscrepancyReport:
    partition: Partition
    per_pair: dict
    irregular_pairs: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    epsilon: float = 0.0
    result: object = None

    @property
    def total_discrepancy(self):
        return float(sum(self.per_pair.values()))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def pair_discrepancies(g, partition, c_mode="free", max_side=MAX_DISC_SIDE):
    """Discrepancy of every ordered pair of non-exceptional parts, diagonal included."""
    parts = partition.parts
    idx = partition.regular_parts
    out = {}
    for i in idx:
        for j in idx:
            if j < i:
                out[(i, j)] = out[(j, i)]
                continue
            out[(i, j)] = discrepancy_exact(g, parts[i], parts[j], c_mode, max_side)
    return out


def _irregular(partition, per_pair, eps):
    parts = partition.parts
    return sorted(
        (i, j) for (i, j), d in per_pair.items() if d > eps * len(parts[i]) * len(parts[j])
    )


def ceil_inverse_square(eps):
    return max(1, math.ceil(eps**-2 - 1e-9))


def verify_szemeredi_disc(g, eps, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1, c_mode="free"):
    """Strong cut decomposition with ``f(n) = 16^n``, refined; checks ``sum disc <= eps n^2``."""
    eps = check_epsilon(eps)
    f = GrowthFunction.exponential(16)
    result = strong_decompose_cut(g.adjacency, eps, f, mode=mode, seed=seed, restarts=restarts, workers=workers)
    partition = common_refinement(result.decomposition, g.n)
    block_values(result.a_hat, partition)
    per_pair = pair_discrepancies(g, partition, c_mode)
    report = DiscrepancyReport(partition, per_pair, epsilon=eps, result=result)
    n = g.n
    k_prime = result.k_witness
    report.checks.append(_check("sum_disc", report.total_discrepancy, "<=", eps * n * n))
    report.checks.append(_check("parts_vs_cutrank", partition.n_parts, "<=", 4.0**k_prime if k_prime < 512 else math.inf))
    report.checks.append(_check("cutrank_vs_f_iterate", k_prime, "<=", f_iterate(f, result.n_rounds)))
    report.irregular_pairs = _irregular(partition, per_pair, eps)
    return report


def verify_irregularity(g, eps, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1, c_mode="free"):
    """Discrepancy version at ``eps^2``; irregular-pair mass must stay below ``eps n^2``."""
    eps = check_epsilon(eps)
    report = verify_szemeredi_disc(g, eps * eps, mode, seed, restarts, workers, c_mode)
    report.epsilon = eps
    parts = report.partition.parts
    report.irregular_pairs = _irregular(report.partition, report.per_pair, eps)
    mass = float(sum(len(parts[i]) * len(parts[j]) for i, j in report.irregular_pairs))
    report.checks.append(_check("irregular_mass", mass, "<", eps * g.n * g.n))
    return report


def chop_parts(parts, chunk):
    """Split each part into chunks of ``chunk`` nodes; remainders go to the exceptional set."""
    exceptional = []
    chunks = []
    for part in parts:
        full = len(part) // chunk * chunk
        chunks.extend(tuple(part[i : i + chunk]) for i in range(0, full, chunk))
        exceptional.extend(part[full:])
    return tuple(sorted(exceptional)), chunks


def verify_exceptional(g, eps, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1, c_mode="free"):
    """Equal-size parts plus an exceptional set ``V0``.

    Runs the strong cut decomposition at ``eps^2`` with
    ``f(n) = ceil(eps^-2) 16^n``, refines, then chops each refinement part
    into chunks of ``max(1, floor(eps n / k''))`` nodes. Returns
    ``(partition, report)``; part 0 of the partition is ``V0``.
    """
    eps = check_epsilon(eps)
    f = GrowthFunction.scaled_exponential(ceil_inverse_square(eps), 16)
    result = strong_decompose_cut(
        g.adjacency, eps * eps, f, mode=mode, seed=seed, restarts=restarts, workers=workers
    )
    refinement = common_refinement(result.decomposition, g.n)
    block_values(result.a_hat, refinement)
    n = g.n
    k2 = refinement.n_parts
    chunk = max(1, math.floor(eps * n / k2))
    v0, chunks = chop_parts(refinement.parts, chunk)
    partition = Partition.from_parts([v0] + chunks, exceptional=0)
    per_pair = pair_discrepancies(g, partition, c_mode)
    report = DiscrepancyReport(partition, per_pair, epsilon=eps, result=result)
    report.irregular_pairs = _irregular(partition, per_pair, eps)
    k = len(chunks)
    sizes = {len(c) for c in chunks}
    report.checks.append(_check("exceptional_size", float(len(v0)), "<", eps * n))
    report.checks.append(_check("distinct_part_sizes", float(len(sizes)), "<=", 1.0))
    report.checks.append(_check("irregular_pairs", float(len(report.irregular_pairs)), "<=", eps * k * k))
    return partition, report


WEAK_EXHAUSTIVE_MAX_N = 12
WEAK_SAMPLES = 10_000


def max_cut_error(g, cg, samples=WEAK_SAMPLES, seed=0):
    """Largest ``|e(S, T) - estimate(S, T)|``; returns ``(value, certificate)``.

    Exhaustive for ``n <= 12``; otherwise a lower estimate from seeded random pairs.
    """
    from .oracle import exhaustive_theorem5_error

    if g.n <= WEAK_EXHAUSTIVE_MAX_N:
        return exhaustive_theorem5_error(g, cg), "exhaustive"
    labels = np.asarray(cg.partition.labels)
    diff = g.adjacency - cg.c[np.ix_(labels, labels)]
    rng = np.random.default_rng(seed)
    s = (rng.random((samples, g.n)) < 0.5).astype(np.float64)
    t = (rng.random((samples, g.n)) < 0.5).astype(np.float64)
    return float(np.max(np.abs(np.einsum("ij,jk,ik->i", s, diff, t)))), "sampled"


def verify_weak_graph(g, eps, mode="exact", seed=0, restarts=DEFAULT_RESTARTS, workers=1):
    """Compress ``g`` and check the cut-estimate error and the partition size.

    Returns ``(compressed, checks)``.
    """
    eps = check_epsilon(eps)
    cg = compress(g, eps, mode=mode, seed=seed, restarts=restarts, workers=workers)
    n = g.n
    err, how = max_cut_error(g, cg, seed=seed)
    k_prime = cg.result.k_witness
    cap = ceil_inverse_square(eps)
    checks = [
        _check(f"max_cut_error_{how}", err, "<", eps * n * n),
        _check("parts_vs_cutrank", float(cg.partition.n_parts), "<=", 4.0**k_prime if k_prime < 512 else math.inf),
        _check("parts_vs_eps", float(cg.partition.n_parts), "<=", 4.0**cap if cap < 512 else math.inf),
    ]
    return cg, checks
