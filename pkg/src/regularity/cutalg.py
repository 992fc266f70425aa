"""Cut matrices, cut decompositions, and the cut-norm family.

Index subsets are carried as sorted tuples; internally they are bitmask
integers with bit ``i`` standing for index ``i``. Ties between equally good
pairs are broken toward the smallest ``(row_mask, col_mask)``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
import math

import numba
import numpy as np

from ._validation import check_index_set, check_matrix, check_positive_int
from .exceptions import BudgetExceededError, DimensionError, DomainError
from .matcore import frobenius_norm, pseudo_solve

MAX_EXACT_DIM = 14
DEFAULT_SPAN_BUDGET = 10**7
DEFAULT_RESTARTS = 32
TIE_TOL = 1e-12


def mask_of(idx):
    m = 0
    for i in idx:
        m |= 1 << int(i)
    return m


def members(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@lru_cache(maxsize=32)
def subset_table(n):
    """0/1 matrix whose row ``r`` is the indicator of bitmask ``r + 1``."""
    masks = np.arange(1, 1 << n, dtype=np.int64)
    table = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class CutAtom:
    row_set: tuple
    col_set: tuple
    coeff: float = 1.0

    def __post_init__(self):
        rows = tuple(sorted({int(i) for i in self.row_set}))
        cols = tuple(sorted({int(i) for i in self.col_set}))
        if not rows or not cols:
            raise DomainError("cut atoms need nonempty row and column sets")
        if rows[0] < 0 or cols[0] < 0:
            raise DomainError("negative index in cut atom")
        object.__setattr__(self, "row_set", rows)
        object.__setattr__(self, "col_set", cols)
        object.__setattr__(self, "coeff", float(self.coeff))

    @property
    def row_mask(self):
        return mask_of(self.row_set)

    @property
    def col_mask(self):
        return mask_of(self.col_set)


@dataclass(frozen=True)
class CutDecomposition:
    shape: tuple
    atoms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        rows, cols = (int(x) for x in self.shape)
        if rows < 1 or cols < 1:
            raise DimensionError("decomposition shape must be positive")
        atoms = tuple(self.atoms)
        for atom in atoms:
            if atom.row_set[-1] >= rows or atom.col_set[-1] >= cols:
                raise DomainError(f"atom {atom} lies outside shape {(rows, cols)}")
        object.__setattr__(self, "shape", (rows, cols))
        object.__setattr__(self, "atoms", atoms)

    @property
    def cutrank_witness(self):
        return len(self.atoms)


def _add_blocks(out, atoms, coeffs):
    # Every entry receives its atoms' coefficients in atom order, so entries
    # with identical membership patterns get bit-identical sums.
    for (rows, cols), c in zip(atoms, coeffs):
        out[np.ix_(rows, cols)] += c
    return out


def realize(d):
    out = np.zeros(d.shape)
    return _add_blocks(out, [(a.row_set, a.col_set) for a in d.atoms], [a.coeff for a in d.atoms])


# -- single cut: the normalised cut norm ----------------------------------


def best_subset_ratio(w):
    """Max of ``|sum(w[s])| / sqrt(|s|)`` over nonempty ``s``.

    For a fixed size the best subset takes the largest (or most negative)
    entries, so only sorted prefixes need checking. Returns
    ``(value, indices)``.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise DimensionError("w must be a nonempty vector")
    root = np.sqrt(np.arange(1, w.size + 1))
    best = None
    for sign in (1.0, -1.0):
        order = np.argsort(-sign * w, kind="stable")
        ratios = np.cumsum(sign * w[order]) / root
        j = int(np.argmax(ratios))
        if best is None or ratios[j] > best[0]:
            best = (float(ratios[j]), order[: j + 1])
    value, idx = best
    return abs(value), tuple(sorted(int(i) for i in idx))


def _check_exact_dims(a, max_dim):
    if a.shape[0] > max_dim or a.shape[1] > max_dim:
        raise BudgetExceededError(
            f"exact enumeration limited to {max_dim}x{max_dim}, got {a.shape[0]}x{a.shape[1]}; "
            "use cut_norm_heuristic for larger matrices"
        )


def _chunks(total, workers):
    workers = max(1, min(int(workers), total))
    bounds = np.linspace(0, total, workers + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _parallel_map(fn, ranges, workers):
    if workers <= 1 or len(ranges) == 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def _row_best_ratios(a, workers=1):
    """For every nonempty row mask, the best normalised value over column sets."""
    m, n = a.shape
    table = subset_table(m)
    sizes = table.sum(axis=1)
    root_cols = np.sqrt(np.arange(1, n + 1))

    def block(lo, hi):
        w = table[lo:hi] @ a
        w_sorted = np.sort(w, axis=1)
        pos = np.cumsum(w_sorted[:, ::-1], axis=1) / root_cols
        neg = -np.cumsum(w_sorted, axis=1) / root_cols
        best = np.maximum(pos.max(axis=1), neg.max(axis=1))
        return best / np.sqrt(sizes[lo:hi])

    parts = _parallel_map(block, _chunks(len(table), workers), workers)
    return np.concatenate(parts)


def cut_norm_exact(a, workers=1, max_dim=MAX_EXACT_DIM):
    """Exact normalised cut norm ``max |s^T a t| / (|s| |t|)^(1/2)``.

    Every row subset is enumerated; for each, the optimal column subset is a
    sorted prefix of ``s^T a``. Returns ``(value, (row_set, col_set))`` with
    the lexicographically smallest maximiser by bitmask.
    """
    a = check_matrix(a)
    _check_exact_dims(a, max_dim)
    m, n = a.shape
    best_rows = _row_best_ratios(a, workers)
    top = float(best_rows.max())
    tol = TIE_TOL * max(1.0, top)
    r = int(np.flatnonzero(best_rows >= top - tol)[0])
    s_mask = r + 1
    w = subset_table(m)[r] @ a
    cols = subset_table(n)
    vals = np.abs(cols @ w) / np.sqrt(cols.sum(axis=1) * bin(s_mask).count("1"))
    hits = np.flatnonzero(vals >= top - tol)
    c = int(hits[0]) if hits.size else int(np.argmax(vals))
    return top, (members(s_mask), members(c + 1))


def cut_value(a, row_set, col_set):
    """``|s^T a t| / sqrt(|s| |t|)`` for the given index sets."""
    a = check_matrix(a)
    rows = list(row_set)
    cols = list(col_set)
    return abs(float(a[np.ix_(rows, cols)].sum())) / math.sqrt(len(rows) * len(cols))


def cut_norm_heuristic(a, restarts=DEFAULT_RESTARTS, seed=0, max_sweeps=100):
    """Certified lower bound on the normalised cut norm by alternating maximisation.

    With one side fixed the other side's optimum is found exactly by
    :func:`best_subset_ratio`; sides alternate until the objective stops
    improving. Restart 0 starts from the full column set, the rest from
    random column subsets. Returns ``(value, (row_set, col_set))``.
    """
    a = check_matrix(a)
    restarts = check_positive_int(restarts, "restarts")
    m, n = a.shape
    rng = np.random.default_rng(seed)
    best = None
    for r in range(restarts):
        if r == 0:
            cols = tuple(range(n))
        else:
            pick = rng.random(n) < 0.5
            if not pick.any():
                pick[rng.integers(n)] = True
            cols = tuple(int(i) for i in np.flatnonzero(pick))
        value = -1.0
        rows = None
        for _ in range(max_sweeps):
            _, new_rows = best_subset_ratio(a[:, list(cols)].sum(axis=1))
            _, new_cols = best_subset_ratio(a[list(new_rows), :].sum(axis=0))
            new_value = cut_value(a, new_rows, new_cols)
            if new_value <= value:
                break
            value, rows, cols = new_value, new_rows, new_cols
        key = (mask_of(rows), mask_of(cols))
        if best is None or value > best[0] or (value == best[0] and key < best[2]):
            best = (value, (rows, cols), key)
    return best[0], best[1]


# -- spans of several cut matrices ----------------------------------------


def _normalise_atoms(atoms, shape):
    out = []
    for rows, cols in atoms:
        rows = check_index_set(rows, shape[0], "row_set", allow_empty=False)
        cols = check_index_set(cols, shape[1], "col_set", allow_empty=False)
        out.append((rows, cols))
    return out


def cut_gram(atoms):
    """Frobenius Gram matrix of indicator blocks: ``|S_i & S_j| * |T_i & T_j|``."""
    rm = [mask_of(r) for r, _ in atoms]
    cm = [mask_of(c) for _, c in atoms]
    k = len(atoms)
    g = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            g[i, j] = g[j, i] = bin(rm[i] & rm[j]).count("1") * bin(cm[i] & cm[j]).count("1")
    return g


def span_projection(r, atoms, gram=None):
    """Projection of ``r`` onto span of indicator blocks; returns ``(q, coeffs)``."""
    if gram is None:
        gram = cut_gram(atoms)
    rhs = np.array([r[np.ix_(rows, cols)].sum() for rows, cols in atoms])
    coeffs = pseudo_solve(gram, rhs)
    q = _add_blocks(np.zeros(r.shape), atoms, coeffs)
    return q, coeffs


def project_onto_cut_span(r, atoms):
    """Frobenius projection of ``r`` onto the span of the atoms' indicator matrices.

    ``atoms`` is a nonempty sequence of ``(row_set, col_set)``. Rank-deficient
    spans are handled by pseudo-solving the Gram system. Returns
    ``(q, magnitude)`` with ``magnitude = ||q||_F``.
    """
    r = check_matrix(r, "r")
    if len(atoms) == 0:
        raise DomainError("atoms must be nonempty")
    atoms = _normalise_atoms(atoms, r.shape)
    q, _ = span_projection(r, atoms)
    return q, frobenius_norm(q)


# -- higher-order normalised cut norms ------------------------------------


@numba.njit(cache=True)
def _sorted_prefix(vals, count, desc, out):
    buf = np.empty(count)
    for i in range(count):
        buf[i] = vals[i]
    # insertion sort; count <= 14
    for i in range(1, count):
        x = buf[i]
        j = i - 1
        while j >= 0 and ((buf[j] < x) if desc else (buf[j] > x)):
            buf[j + 1] = buf[j]
            j -= 1
        buf[j + 1] = x
    out[0] = 0.0
    for i in range(count):
        out[i + 1] = out[i] + buf[i]


@numba.njit(cache=True)
def _pair_kernel(w_all, x_raw, row_masks, row_sizes, col_masks, col_sizes, n, arg):
    """Max over pairs (X, Y) of ||proj_{span(X, Y)} R||_F^2.

    ``w_all[s]`` is ``1_S^T R`` and ``x_raw[s, t] = 1_S^T R 1_T``. For fixed
    X = (S0, T0) and row set S, the objective depends on T only through
    ``|T & T0|``, ``|T - T0|`` and ``y = 1_S^T R 1_T``; it is convex in ``y``
    so the extreme sums of each size class suffice.

    ``arg`` receives ``(s0, t0, s, b0, b1, high)``; ``s = -1`` means the
    best span is a single atom.
    """
    n_rows = row_masks.shape[0]
    n_cols = col_masks.shape[0]
    best = 0.0
    arg[:] = -1
    for s0 in range(n_rows):
        for t0 in range(n_cols):
            nx = row_sizes[s0] * col_sizes[t0]
            v = x_raw[s0, t0] * x_raw[s0, t0] / nx
            if v > best:
                best = v
                arg[0] = s0
                arg[1] = t0
    inside = np.empty(n)
    outside = np.empty(n)
    top_in = np.empty(n + 1)
    bot_in = np.empty(n + 1)
    top_out = np.empty(n + 1)
    bot_out = np.empty(n + 1)
    for t0 in range(n_cols):
        tmask = col_masks[t0]
        b0_max = col_sizes[t0]
        b1_max = n - b0_max
        for s in range(n_rows):
            ni = 0
            no = 0
            for j in range(n):
                if (tmask >> j) & 1:
                    inside[ni] = w_all[s, j]
                    ni += 1
                else:
                    outside[no] = w_all[s, j]
                    no += 1
            _sorted_prefix(inside, ni, True, top_in)
            _sorted_prefix(inside, ni, False, bot_in)
            _sorted_prefix(outside, no, True, top_out)
            _sorted_prefix(outside, no, False, bot_out)
            a = row_sizes[s]
            smask = row_masks[s]
            # Classes with no overlap with X do not depend on S0.
            free = 0.0
            fb0 = 0
            fb1 = 0
            fhi = 1
            for b0 in range(b0_max + 1):
                for b1 in range(b1_max + 1):
                    b = b0 + b1
                    if b == 0:
                        continue
                    hi = top_in[b0] + top_out[b1]
                    lo = bot_in[b0] + bot_out[b1]
                    num = max(hi * hi, lo * lo) / (a * b)
                    if num > free:
                        free = num
                        fb0 = b0
                        fb1 = b1
                        fhi = 1 if hi * hi >= lo * lo else 0
            # Unordered pairs: let X carry the larger row mask.
            for s0 in range(s, n_rows):
                nx = row_sizes[s0] * b0_max
                xr = x_raw[s0, t0]
                base = xr * xr / nx
                inter = smask & row_masks[s0]
                if inter == 0:
                    v = base + free
                    if v > best:
                        best = v
                        arg[0] = s0
                        arg[1] = t0
                        arg[2] = s
                        arg[3] = fb0
                        arg[4] = fb1
                        arg[5] = fhi
                    continue
                a0 = 0
                while inter:
                    a0 += inter & 1
                    inter >>= 1
                ratio = xr / nx
                local = 0.0
                lb0 = 0
                lb1 = 0
                lhi = 1
                for b0 in range(b0_max + 1):
                    overlap = a0 * b0
                    center = overlap * ratio
                    sq = overlap * overlap
                    for b1 in range(b1_max + 1):
                        b = b0 + b1
                        if b == 0:
                            continue
                        d_int = a * b * nx - sq
                        if d_int <= 0:
                            continue
                        hi = top_in[b0] + top_out[b1] - center
                        lo = bot_in[b0] + bot_out[b1] - center
                        v = max(hi * hi, lo * lo) / d_int
                        if v > local:
                            local = v
                            lb0 = b0
                            lb1 = b1
                            lhi = 1 if hi * hi >= lo * lo else 0
                v = base + local * nx
                if v > best:
                    best = v
                    arg[0] = s0
                    arg[1] = t0
                    arg[2] = s
                    arg[3] = lb0
                    arg[4] = lb1
                    arg[5] = lhi
    return best


def _pair_cost(m, n):
    return ((1 << m) - 1) ** 2 * ((1 << n) - 1) * ((n + 2) ** 2 // 4)


def _black_square_pairs(a):
    """``(value, atoms)`` for the best span of at most two cut atoms."""
    m, n = a.shape
    rows = subset_table(m)
    cols = subset_table(n)
    w_all = rows @ a
    x_raw = w_all @ cols.T
    arg = np.full(6, -1, dtype=np.int64)
    best = _pair_kernel(
        w_all,
        x_raw,
        np.arange(1, 1 << m, dtype=np.int64),
        rows.sum(axis=1).astype(np.int64),
        np.arange(1, 1 << n, dtype=np.int64),
        cols.sum(axis=1).astype(np.int64),
        n,
        arg,
    )
    s0, t0, s, b0, b1, high = (int(x) for x in arg)
    if s0 < 0:
        return 0.0, []
    atoms = [(members(s0 + 1), members(t0 + 1))]
    if s >= 0:
        w = w_all[s] if high else -w_all[s]
        order = np.argsort(-w, kind="stable")
        in_t0 = cols[t0].astype(bool)
        inside = [int(j) for j in order if in_t0[j]][:b0]
        outside = [int(j) for j in order if not in_t0[j]][:b1]
        atoms.append((members(s + 1), tuple(sorted(inside + outside))))
    return math.sqrt(best), atoms


def best_cut_pair(a, budget=DEFAULT_SPAN_BUDGET):
    """Best span of at most two cut matrices; returns ``(magnitude, atoms)``.

    ``atoms`` holds one or two ``(row_set, col_set)`` pairs; one means no
    second atom adds anything. Raises :class:`BudgetExceededError` when the
    kernel's work exceeds ``budget``.
    """
    a = check_matrix(a)
    m, n = a.shape
    _check_exact_dims(a, MAX_EXACT_DIM)
    cost = _pair_cost(m, n)
    if cost > budget:
        raise BudgetExceededError(f"pair search cost {cost} exceeds budget {budget}")
    if not np.any(a):
        return 0.0, []
    return _black_square_pairs(a)


def _all_atoms(shape):
    m, n = shape
    return [(members(r), members(c)) for r in range(1, 1 << m) for c in range(1, 1 << n)]


def _black_square_enumerate(a, k, batch=4096):
    atoms = _all_atoms(a.shape)
    n_atoms = len(atoms)
    rows = subset_table(a.shape[0])
    cols = subset_table(a.shape[1])
    ri = np.repeat(np.arange(rows.shape[0]), cols.shape[0])
    ci = np.tile(np.arange(cols.shape[0]), rows.shape[0])
    rhs_all = (rows @ a @ cols.T).ravel()
    row_ov = rows @ rows.T
    col_ov = cols @ cols.T
    k = min(k, n_atoms)
    best = 0.0
    combos = combinations(range(n_atoms), k)
    while True:
        chunk = np.array(list(_take(combos, batch)), dtype=np.int64)
        if chunk.size == 0:
            break
        r_idx = ri[chunk]
        c_idx = ci[chunk]
        gram = row_ov[r_idx[:, :, None], r_idx[:, None, :]] * col_ov[c_idx[:, :, None], c_idx[:, None, :]]
        rhs = rhs_all[chunk]
        w, vecs = np.linalg.eigh(gram)
        scale = np.max(np.diagonal(gram, axis1=1, axis2=2), axis=1)
        keep = w > TIE_TOL * scale[:, None]
        proj = np.einsum("bij,bi->bj", vecs, rhs)
        safe_w = np.where(keep, w, 1.0)
        mags = np.where(keep, proj * proj / safe_w, 0.0).sum(axis=1)
        best = max(best, float(mags.max()))
    return math.sqrt(best)


def _take(it, count):
    for _, item in zip(range(count), it):
        yield item


def black_square_norm_exact(a, k, budget=DEFAULT_SPAN_BUDGET, method="auto"):
    """Exact ``||a||_{■[k]}``: largest projection onto a span of ``k`` cut matrices.

    ``k >= rows*cols`` returns the Frobenius norm (single-entry blocks span
    everything). ``k = 1`` delegates to :func:`cut_norm_exact`. ``k = 2`` uses
    a size-class kernel whose work is ``(2^m-1)^2 (2^n-1) ((n+2)^2 // 4)``;
    other ``k`` enumerate all ``C(N, k)`` spans of the ``N`` cut atoms.
    The relevant count is checked against ``budget`` before any work starts.
    Pass ``method="enumerate"`` to force plain span enumeration.
    """
    a = check_matrix(a)
    k = check_positive_int(k, "k")
    m, n = a.shape
    if k >= m * n:
        return frobenius_norm(a)
    if not np.any(a):
        return 0.0
    n_atoms = ((1 << m) - 1) * ((1 << n) - 1) if max(m, n) <= 62 else math.inf
    if method == "auto" and k == 1:
        if n_atoms > budget:
            raise BudgetExceededError(f"{n_atoms} single-cut evaluations exceed budget {budget}")
        return cut_norm_exact(a, max_dim=max(m, n))[0]
    if method == "auto" and k == 2:
        cost = _pair_cost(m, n)
        if cost > budget:
            raise BudgetExceededError(f"pair search cost {cost} exceeds budget {budget}")
        return _black_square_pairs(a)[0]
    if method not in ("auto", "enumerate"):
        raise ValueError(f"unknown method {method!r}")
    count = math.comb(n_atoms, k) if n_atoms != math.inf else math.inf
    if count > budget:
        raise BudgetExceededError(f"C({n_atoms}, {k}) = {count} span evaluations exceed budget {budget}")
    return _black_square_enumerate(a, k)


def classical_cut_norm(a, workers=1, max_dim=MAX_EXACT_DIM):
    """Exact ``max |s^T a t|`` over nonempty cut vectors.

    Rows are enumerated; for each, the optimal column set collects all
    positive (or all negative) entries of ``s^T a``.
    """
    a = check_matrix(a)
    _check_exact_dims(a, max_dim)
    table = subset_table(a.shape[0])

    def block(lo, hi):
        w = table[lo:hi] @ a
        pos = np.where(w > 0, w, 0.0).sum(axis=1)
        neg = -np.where(w < 0, w, 0.0).sum(axis=1)
        return float(np.maximum(pos, neg).max())

    return max(_parallel_map(block, _chunks(len(table), workers), workers))
