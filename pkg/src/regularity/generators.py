"""Seeded random and structured test graphs."""

import numpy as np

from .exceptions import DomainError
from .graphreg import Graph


def _check_prob(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {p}")
    return float(p)


def gnp(n, p, seed=0):
    """Erdos-Renyi graph; one uniform draw per pair in row-major upper-triangle order."""
    if n < 1:
        raise DomainError("n must be at least 1")
    p = _check_prob(p)
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    keep = rng.random(len(iu[0])) < p
    adj = np.zeros((n, n))
    adj[iu[0][keep], iu[1][keep]] = 1.0
    return Graph(adj + adj.T)


def complete_bipartite(a, b):
    """``K_{a,b}`` with sides ``0..a-1`` and ``a..a+b-1``."""
    if a < 1 or b < 1:
        raise DomainError("both sides need at least one node")
    n = a + b
    adj = np.zeros((n, n))
    adj[:a, a:] = 1.0
    adj[a:, :a] = 1.0
    return Graph(adj)


def planted_partition(sizes, p_in, p_out, seed=0):
    """Consecutive blocks of the given sizes; edge probability ``p_in`` inside a block."""
    sizes = [int(s) for s in sizes]
    if not sizes or min(sizes) < 1:
        raise DomainError("block sizes must be positive")
    p_in = _check_prob(p_in, "p_in")
    p_out = _check_prob(p_out, "p_out")
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = len(labels)
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    prob = np.where(labels[iu[0]] == labels[iu[1]], p_in, p_out)
    keep = rng.random(len(iu[0])) < prob
    adj = np.zeros((n, n))
    adj[iu[0][keep], iu[1][keep]] = 1.0
    return Graph(adj + adj.T)
