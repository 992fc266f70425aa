"""Input validation helpers shared by the functional core and the estimators."""

import numbers

import numpy as np

from .exceptions import DimensionError, DomainError


def check_matrix(a, name="a"):
    """Return ``a`` as a finite 2-D float64 array with positive dimensions."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or infinite entries")
    return arr


def check_vector(v, length, name="v"):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise DimensionError(f"{name} must be a vector of length {length}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or infinite entries")
    return arr


def check_same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def check_epsilon(eps):
    if isinstance(eps, bool) or not isinstance(eps, numbers.Real):
        raise DomainError(f"epsilon must be a real number, got {eps!r}")
    eps = float(eps)
    if not (eps > 0 and np.isfinite(eps)):
        raise DomainError(f"epsilon must be positive and finite, got {eps}")
    return eps


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_mode(mode):
    if mode not in ("exact", "heuristic"):
        raise DomainError(f"mode must be 'exact' or 'heuristic', got {mode!r}")
    return mode


def check_index_set(s, size, name="set", allow_empty=True):
    """Normalise an iterable of indices (or a boolean mask) to a sorted tuple."""
    if isinstance(s, (set, frozenset)):
        s = sorted(s)
    arr = np.asarray(s)
    if arr.dtype == bool:
        if arr.shape != (size,):
            raise DimensionError(f"{name} mask must have length {size}")
        idx = tuple(int(i) for i in np.flatnonzero(arr))
    else:
        idx = tuple(sorted({int(i) for i in np.atleast_1d(arr).tolist()})) if arr.size else ()
    if idx and (idx[0] < 0 or idx[-1] >= size):
        raise DomainError(f"{name} has indices outside 0..{size - 1}")
    if not allow_empty and not idx:
        raise DomainError(f"{name} must be nonempty")
    return idx


def indicator(idx, size):
    v = np.zeros(size)
    v[list(idx)] = 1.0
    return v
