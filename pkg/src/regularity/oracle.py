"""Slow brute-force references used to cross-check the fast paths.

Nothing here shares search logic with the modules it checks: subsets are
walked in Gray-code order with incremental sums, and singular values come
from a cyclic Jacobi eigensolver rather than power iteration.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import check_index_set, check_matrix
from .exceptions import BudgetExceededError, ConvergenceError, DomainError


@dataclass(frozen=True)
class OracleBudget:
    max_evaluations: int = 10**7
    max_dim: int = 14

    def __post_init__(self):
        if self.max_evaluations < 1 or self.max_dim < 1:
            raise DomainError("oracle budgets must be positive")


DEFAULT_BUDGET = OracleBudget()


def gray_walk(n):
    """Yield ``(mask, bit, added)`` for each step of the reflected Gray code.

    The first step is the empty set with ``bit = None``.
    """
    yield 0, None, False
    prev = 0
    for i in range(1, 1 << n):
        cur = i ^ (i >> 1)
        bit = (cur ^ prev).bit_length() - 1
        yield cur, bit, bool(cur >> bit & 1)
        prev = cur


def _jacobi_eigenvalues(g, max_sweeps=100):
    g = g.copy()
    n = g.shape[0]
    scale = np.linalg.norm(g)
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(g - np.diag(np.diag(g))))
        if off <= 1e-14 * scale:
            return np.diag(g).copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(g[p, q]) <= 1e-18 * scale:
                    g[p, q] = g[q, p] = 0.0
                    continue
                theta = (g[q, q] - g[p, p]) / (2.0 * g[p, q])
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                gp = g[:, p].copy()
                gq = g[:, q].copy()
                g[:, p] = c * gp - s * gq
                g[:, q] = s * gp + c * gq
                rp = g[p, :].copy()
                rq = g[q, :].copy()
                g[p, :] = c * rp - s * rq
                g[q, :] = s * rp + c * rq
                g[p, q] = g[q, p] = 0.0
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def exact_singular_values(a, max_sweeps=100):
    """All ``min(rows, cols)`` singular values, descending, via Jacobi on the Gram matrix."""
    a = check_matrix(a)
    if min(a.shape) > 16:
        raise BudgetExceededError("exact_singular_values supports min(rows, cols) <= 16")
    top = float(np.max(np.abs(a)))
    if top == 0.0:
        return np.zeros(min(a.shape))
    a = a / top
    gram = a.T @ a if a.shape[1] <= a.shape[0] else a @ a.T
    eig = _jacobi_eigenvalues(gram, max_sweeps)
    sigma = np.sqrt(np.clip(eig, 0.0, None))
    sigma = np.sort(sigma)[::-1]
    fro2 = float(np.sum(a * a))
    if abs(float(np.sum(sigma**2)) - fro2) > 1e-9 * max(fro2, 1e-300):
        raise ConvergenceError("singular values fail the Frobenius reconstruction check")
    return sigma * top


def exhaustive_best_subset_ratio(w, budget=DEFAULT_BUDGET):
    """Max of ``|sum(w[s])| / sqrt(|s|)`` over every nonempty subset; ``(value, subset)``."""
    w = [float(x) for x in np.asarray(w, dtype=np.float64).ravel()]
    if not w or len(w) > budget.max_dim:
        raise BudgetExceededError(f"need 1 <= len(w) <= {budget.max_dim}")
    best = (-1.0, 0)
    total = 0.0
    size = 0
    for mask, bit, added in gray_walk(len(w)):
        if bit is not None:
            total += w[bit] if added else -w[bit]
            size += 1 if added else -1
        if size == 0:
            continue
        value = abs(total) / math.sqrt(size)
        if value > best[0] + 1e-12 or (abs(value - best[0]) <= 1e-12 and mask < best[1]):
            best = (value, mask)
    return best[0], tuple(i for i in range(len(w)) if best[1] >> i & 1)


def _all_subset_sums(a):
    """``a @ t`` for every column subset ``t`` (mask order), shape ``(rows, 2^cols)``."""
    cols = a.shape[1]
    out = np.zeros((a.shape[0], 1 << cols))
    for mask, bit, added in gray_walk(cols):
        if bit is None:
            continue
        prev = mask ^ (1 << bit)
        out[:, mask] = out[:, prev] + (a[:, bit] if added else -a[:, bit])
    return out


def exhaustive_cut_norms(a, budget=DEFAULT_BUDGET):
    """Normalised and classical cut norms by walking every ``(S, T)`` pair.

    Returns ``(normalised, classical)``.
    """
    a = check_matrix(a)
    m, n = a.shape
    if max(m, n) > budget.max_dim or (1 << m) * (1 << n) > budget.max_evaluations * 10:
        raise BudgetExceededError("matrix too large for the double enumeration oracle")
    sums = _all_subset_sums(a)
    col_sizes = np.array([bin(t).count("1") for t in range(1 << n)], dtype=np.float64)
    col_sizes[0] = np.inf
    row = np.zeros(1 << n)
    size = 0
    normalised = 0.0
    classical = 0.0
    for _, bit, added in gray_walk(m):
        if bit is None:
            continue
        row = row + sums[bit] if added else row - sums[bit]
        size += 1 if added else -1
        if size == 0:
            continue
        classical = max(classical, float(np.max(np.abs(row[1:]))))
        normalised = max(normalised, float(np.max(np.abs(row) / np.sqrt(size * col_sizes))))
    return normalised, classical


def _pair_table(block):
    """Every distinct ``(|S||T|, e(S, T))`` pair of the block."""
    m, n = block.shape
    sums = _all_subset_sums(block)
    col_sizes = np.array([bin(t).count("1") for t in range(1 << n)])
    seen = set()
    row = np.zeros(1 << n)
    size = 0
    for _, bit, added in gray_walk(m):
        if bit is not None:
            row = row + sums[bit] if added else row - sums[bit]
            size += 1 if added else -1
        p = size * col_sizes
        seen.update(zip(p.tolist(), np.round(row, 9).tolist()))
    pairs = np.array(sorted(seen), dtype=np.float64)
    return pairs[:, 0], pairs[:, 1]


def _objective(c, p, e):
    return float(np.max(np.abs(e - c * p)))


def exhaustive_discrepancy(g, vi, vj, budget=DEFAULT_BUDGET):
    """Discrepancy of a block by dense grid, golden-section search, then a local crossing solve."""
    vi = check_index_set(vi, g.n, "vi")
    vj = check_index_set(vj, g.n, "vj")
    if len(vi) + len(vj) > 20:
        raise BudgetExceededError("exhaustive_discrepancy needs |vi| + |vj| <= 20")
    block = g.adjacency[np.ix_(vi, vj)]
    if block.size == 0:
        return 0.0
    p, e = _pair_table(block)
    pos = p > 0
    ratios = e[pos] / p[pos]
    lo, hi = float(ratios.min()), float(ratios.max())
    if hi - lo <= 0:
        return _objective(lo, p, e)
    grid = np.linspace(lo, hi, 1001)
    vals = np.array([_objective(c, p, e) for c in grid])
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(200):
        if b - a <= 1e-15 * max(1.0, abs(a)):
            break
        x1 = b - phi * (b - a)
        x2 = a + phi * (b - a)
        if _objective(x1, p, e) <= _objective(x2, p, e):
            b = x2
        else:
            a = x1
    c_star = 0.5 * (a + b)
    best = _objective(c_star, p, e)
    # Lines that are (nearly) active at c_star; the true minimum is one of their crossings.
    down = e - c_star * p
    up = c_star * p - e
    near = 1e-6 * max(1.0, best)
    falling = np.flatnonzero(down >= down.max() - near)
    rising = np.flatnonzero(up >= up.max() - near)
    for d in falling:
        for r in rising:
            denom = p[d] + p[r]
            if denom > 0:
                best = min(best, _objective((e[d] + e[r]) / denom, p, e))
    return best


def _blocks_from_compression(cg):
    labels = np.asarray(cg.partition.labels)
    return cg.c[np.ix_(labels, labels)]


def exhaustive_theorem5_error(g, cg, budget=DEFAULT_BUDGET):
    """Max over every ``(S, T)`` of ``|e(S, T) - estimate(S, T)|``."""
    n = g.n
    if n > 12:
        raise BudgetExceededError("exhaustive_theorem5_error needs n <= 12")
    diff = g.adjacency - _blocks_from_compression(cg)
    sums = _all_subset_sums(diff)
    row = np.zeros(1 << n)
    worst = 0.0
    for _, bit, added in gray_walk(n):
        if bit is not None:
            row = row + sums[bit] if added else row - sums[bit]
        worst = max(worst, float(np.max(np.abs(row))))
    return worst
