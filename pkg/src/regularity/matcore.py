"""Dense matrix primitives: Frobenius geometry, rank-1 projections, F[k] norms.

Matrices are plain 2-D ``float64`` numpy arrays; every public function
validates its inputs with :func:`regularity._validation.check_matrix`.
"""

from dataclasses import dataclass
import io
import math
import os

import numpy as np

from ._validation import check_matrix, check_same_shape, check_vector
from .exceptions import (
    ConvergenceError,
    DegenerateDirectionError,
    RegularityError,
    ZeroMatrixError,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 10_000
_RESTARTS = 3


class ParseError(RegularityError, ValueError):
    """Malformed matrix or edge-list text. ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class SingularTriple:
    sigma: float
    left: np.ndarray
    right: np.ndarray


def frobenius_norm(a):
    a = check_matrix(a)
    with np.errstate(over="ignore", under="ignore"):
        value = float(math.sqrt(np.sum(a * a)))
    if 1e-150 < value < 1e150:
        return value
    # Squares under- or overflowed: rescale by the largest entry.
    top = float(np.max(np.abs(a)))
    if top == 0.0:
        return 0.0
    return top * float(math.sqrt(np.sum((a / top) ** 2)))


def frobenius_inner(a, b):
    a = check_matrix(a, "a")
    b = check_matrix(b, "b")
    check_same_shape(a, b)
    return float(np.sum(a * b))


def project_onto_rank1(r, u, v):
    """Project ``r`` onto the line spanned by ``u v^T``.

    Returns ``(q, magnitude)`` where ``magnitude = |u^T r v| / (|u| |v|)``.
    """
    r = check_matrix(r, "r")
    u = check_vector(u, r.shape[0], "u")
    v = check_vector(v, r.shape[1], "v")
    uu = float(u @ u)
    vv = float(v @ v)
    if uu == 0.0 or vv == 0.0:
        raise DegenerateDirectionError("projection direction has a zero factor")
    inner = float(u @ r @ v)
    q = (inner / (uu * vv)) * np.outer(u, v)
    return q, abs(inner) / math.sqrt(uu * vv)


def pseudo_solve(gram, rhs, drop=1e-12):
    """Solve a symmetric PSD system, discarding directions with tiny eigenvalues.

    Eigenvalues below ``drop * max(diag(gram))`` are treated as zero, so
    rank-deficient systems yield the minimum-norm least-squares solution.
    """
    gram = np.asarray(gram, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    scale = float(np.max(np.diag(gram))) if gram.size else 0.0
    if scale <= 0.0:
        return np.zeros_like(rhs)
    w, vecs = np.linalg.eigh(gram)
    keep = w > drop * scale
    proj = vecs[:, keep].T @ rhs
    return vecs[:, keep] @ (proj / w[keep])


def project_onto_span(r, basis):
    """Frobenius-orthogonal projection of ``r`` onto the span of ``basis`` matrices.

    Returns ``(q, coefficients)`` with ``q = sum(c_i * basis_i)``.
    """
    r = check_matrix(r, "r")
    mats = np.stack([check_matrix(b, "basis element") for b in basis])
    if mats.shape[1:] != r.shape:
        raise DegenerateDirectionError("basis shape does not match r")
    flat = mats.reshape(len(mats), -1)
    gram = flat @ flat.T
    coeffs = pseudo_solve(gram, flat @ r.ravel())
    q = (coeffs @ flat).reshape(r.shape)
    return q, coeffs


def _power_attempt(m, rng, tol_abs, max_iters):
    """Power iteration on ``m^T m`` for the right singular vector of ``m``."""
    x = rng.standard_normal(m.shape[1])
    x /= np.linalg.norm(x)
    sigma_prev = None
    change_prev = None
    best = None
    for it in range(max_iters):
        y = m @ x
        sigma = float(np.linalg.norm(y))
        if sigma == 0.0:
            return best, False
        if best is None or sigma >= best[0]:
            best = (sigma, x)
        z = m.T @ y
        z_norm = float(np.linalg.norm(z))
        if z_norm == 0.0:
            return best, False
        if sigma_prev is not None:
            change = abs(sigma - sigma_prev)
            # Geometric tail estimate: remaining error ~ change * rho / (1 - rho).
            rho = 0.0
            if change_prev:
                rho = min(change / change_prev, 0.999)
            if it >= 2 and change <= tol_abs * (1.0 - rho):
                return (sigma, x), True
            change_prev = change
        sigma_prev = sigma
        x = z / z_norm
    return best, False


def _as_triple(unit, x, transposed, scale):
    y = unit @ x
    s = float(np.linalg.norm(y))
    u = y / s
    if transposed:
        return SingularTriple(s * scale, x.copy(), u)
    return SingularTriple(s * scale, u, x.copy())


def top_singular_triple(a, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS, seed=0):
    """Largest singular value and vectors of ``a`` by power iteration.

    Iterates on the Gram form of the smaller side; ``sigma`` is accurate
    to ``tol * ||a||_F``. Restarts with fresh seeds up to three times when
    an attempt stalls. Raises :class:`ZeroMatrixError` for ``a = 0`` and
    :class:`ConvergenceError` (carrying the best iterate) otherwise.
    """
    a = check_matrix(a)
    if not tol > 0:
        raise ValueError("tol must be positive")
    fro = frobenius_norm(a)
    if fro == 0.0:
        raise ZeroMatrixError("top singular triple of a zero matrix")
    transposed = a.shape[1] > a.shape[0]
    m = a.T if transposed else a
    # Unit scale keeps the Gram products clear of underflow and overflow.
    unit = m / fro
    best = None
    for attempt in range(_RESTARTS + 1):
        rng = np.random.default_rng([seed, attempt])
        found, converged = _power_attempt(unit, rng, tol, max_iters)
        if converged:
            return _as_triple(unit, found[1], transposed, fro)
        if found is not None and (best is None or found[0] > best[0]):
            best = found
    best_triple = _as_triple(unit, best[1], transposed, fro) if best is not None else None
    raise ConvergenceError(
        f"power iteration did not converge in {max_iters} iterations "
        f"after {_RESTARTS} restarts",
        best=best_triple,
    )


def f_top_k_norm(a, k, tol=DEFAULT_TOL, seed=0, max_iters=DEFAULT_MAX_ITERS):
    """Root of the sum of squares of the top ``k`` singular values."""
    a = check_matrix(a)
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    if k >= min(a.shape):
        return frobenius_norm(a)
    residual = a.copy()
    total = 0.0
    for i in range(int(k)):
        try:
            t = top_singular_triple(residual, tol=tol, max_iters=max_iters, seed=seed + i)
        except ZeroMatrixError:
            break
        total += t.sigma**2
        residual -= t.sigma * np.outer(t.left, t.right)
    return math.sqrt(total)


def singular_triples(a, count, tol=DEFAULT_TOL, seed=0, max_iters=DEFAULT_MAX_ITERS, floor=0.0):
    """Up to ``count`` leading triples by deflation; stops once sigma <= ``floor``."""
    residual = check_matrix(a).copy()
    out = []
    for i in range(count):
        if frobenius_norm(residual) <= floor:
            break
        try:
            t = top_singular_triple(residual, tol=tol, max_iters=max_iters, seed=seed + i)
        except ZeroMatrixError:
            break
        if t.sigma <= floor:
            break
        out.append(t)
        residual -= t.sigma * np.outer(t.left, t.right)
    return out


# -- text format -----------------------------------------------------------


def format_matrix(a):
    a = check_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines.extend(" ".join(repr(float(x)) for x in row) for row in a)
    return "\n".join(lines) + "\n"


def write_matrix(a, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrix(a))


def parse_matrix(text):
    """Parse the ``rows cols`` header format. Blank trailing lines are ignored."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty input", 1)
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError("header must be 'rows cols'", 1)
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("header must contain two integers", 1) from None
    if rows < 1 or cols < 1:
        raise ParseError("rows and cols must be positive", 1)
    if len(lines) - 1 != rows:
        raise ParseError(f"expected {rows} data rows, found {len(lines) - 1}", len(lines))
    out = np.empty((rows, cols))
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != cols:
            raise ParseError(f"expected {cols} values, found {len(tokens)}", i + 2)
        try:
            out[i] = [float(t) for t in tokens]
        except ValueError:
            raise ParseError("non-numeric value", i + 2) from None
        if not np.all(np.isfinite(out[i])):
            raise ParseError("non-finite value", i + 2)
    return out


def read_matrix(source):
    """Read a matrix from a path or a text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return parse_matrix(fh.read())
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return parse_matrix(source.read())
    raise TypeError("source must be a path or a text stream")
