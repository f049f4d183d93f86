"""Deterministic graph generators driven by :class:`SplitMix64`.

A generator is named by ``kind`` plus keyword parameters; the same
``(kind, n, seed, params)`` always yields the same edge list.
"""
import math

from .errors import InvalidSpec
from .graph import Graph
from .rng import SplitMix64

KINDS = ("path", "cycle", "star", "grid", "two-cliques", "random-gnp", "random-weighted", "complete")


def path(n, weight=1):
    return Graph(n, [(i, i + 1, weight) for i in range(n - 1)])


def cycle(n, weight=1):
    if n < 3:
        raise InvalidSpec("a cycle needs at least 3 nodes")
    return Graph(n, [(i, i + 1, weight) for i in range(n - 1)] + [(0, n - 1, weight)])


def star(n, weight=1):
    return Graph(n, [(0, i, weight) for i in range(1, n)])


def complete(n, weight=1):
    return Graph(n, [(u, v, weight) for u in range(n) for v in range(u + 1, n)])


def grid(n):
    """Row-major grid with ``floor(sqrt(n))`` rows; the last row may be partial."""
    rows = max(1, math.isqrt(n))
    cols = -(-n // rows)
    edges = []
    for v in range(n):
        r, c = divmod(v, cols)
        if c + 1 < cols and v + 1 < n:
            edges.append((v, v + 1, 1))
        if v + cols < n:
            edges.append((v, v + cols, 1))
    return Graph(n, edges)


def two_cliques(n):
    """Cliques on the two halves joined by the edge (h-1, h)."""
    if n < 2:
        raise InvalidSpec("two-cliques needs at least 2 nodes")
    h = n // 2
    edges = [(u, v, 1) for u in range(h) for v in range(u + 1, h)]
    edges += [(u, v, 1) for u in range(h, n) for v in range(u + 1, n)]
    edges.append((h - 1, h, 1))
    return Graph(n, edges)


def random_graph(n, p, seed, max_weight=1, connected=False):
    """G(n, p) with weights uniform in [1, max_weight].

    With ``connected`` a random spanning tree (each node v > 0 attached to a
    uniformly chosen earlier node) is laid down first.
    """
    if not 0 <= p <= 1:
        raise InvalidSpec(f"edge probability {p} outside [0, 1]")
    if max_weight < 1:
        raise InvalidSpec("max weight must be at least 1")
    rng = SplitMix64(seed)
    best = {}
    if connected:
        for v in range(1, n):
            u = rng.below(v)
            best[(u, v)] = rng.randint(1, max_weight)
    for u in range(n):
        for v in range(u + 1, n):
            hit = rng.random() < p
            w = rng.randint(1, max_weight)
            if hit and (u, v) not in best:
                best[(u, v)] = w
    return Graph(n, [(u, v, w) for (u, v), w in sorted(best.items())])


def generate(kind, n, seed=0, p=None, max_weight=None, connected=False) -> Graph:
    """Build the graph named by ``kind``; raises :class:`InvalidSpec` on bad parameters."""
    if not isinstance(n, int) or n < 1:
        raise InvalidSpec(f"n must be a positive integer, got {n!r}")
    if kind == "path":
        return path(n)
    if kind == "cycle":
        return cycle(n)
    if kind == "star":
        return star(n)
    if kind == "complete":
        return complete(n)
    if kind == "grid":
        return grid(n)
    if kind == "two-cliques":
        return two_cliques(n)
    if kind == "random-gnp":
        return random_graph(n, 0.5 if p is None else p, seed, 1, connected)
    if kind == "random-weighted":
        return random_graph(n, 0.5 if p is None else p, seed, 10 if max_weight is None else max_weight, connected)
    raise InvalidSpec(f"unknown generator {kind!r}; expected one of {', '.join(KINDS)}")
