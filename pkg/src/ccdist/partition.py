"""Deterministic partitions of weighted index sets into balanced parts.

Every function is canonical: the same weights always give the same parts,
which is what lets all clique nodes compute identical partitions locally.
Consecutive parts are returned as half-open ``(start, end)`` ranges.
"""
from .errors import PreconditionError


def partition_even(weights, k):
    """Split ``range(len(weights))`` into ``k`` parts of equal size.

    Each part's weight is at most ``sum/k + max``. Items are dealt round-robin
    in order of decreasing weight (ties by index), so every item after the
    first in a part is no heavier than the average of the previous block of
    ``k`` items. When ``k`` does not divide ``n`` the input is padded with
    zero-weight dummies that are dropped from the output.
    """
    n = len(weights)
    if k < 1:
        raise PreconditionError("k must be positive")
    padded = -(-n // k) * k
    order = sorted(range(padded), key=lambda i: (-(weights[i] if i < n else 0), i))
    parts = [[] for _ in range(k)]
    for rank, i in enumerate(order):
        if i < n:
            parts[rank % k].append(i)
    for p in parts:
        p.sort()
    return parts


def partition_consecutive(weights, k):
    """Greedy sweep into at most ``k`` runs of consecutive indices.

    A run is closed once its weight reaches ``sum/k``; each run then weighs at
    most ``sum/k + max``. Trailing items after the k-th closed run (necessarily
    zero weight) join the last run.
    """
    n = len(weights)
    if k < 1:
        raise PreconditionError("k must be positive")
    if n == 0:
        return []
    total = sum(weights)
    parts = []
    start = 0
    acc = 0
    for i, w in enumerate(weights):
        acc += w
        if acc * k >= total and len(parts) < k - 1:
            parts.append((start, i + 1))
            start = i + 1
            acc = 0
    if start < n:
        parts.append((start, n))
    elif not parts:
        parts.append((0, n))
    return parts


def partition_consecutive_2(weights_a, weights_b, k):
    """Consecutive runs balanced for two weight vectors at once.

    Builds the greedy partitions for both vectors, merges their 2k fenceposts
    in order and keeps every other one. Each run then overlaps at most two
    runs of either partition, giving weight at most ``2(sum/k + max)`` on both
    sides. Empty runs are dropped, so at most ``k`` runs come back.
    """
    n = len(weights_a)
    if len(weights_b) != n:
        raise PreconditionError("weight vectors differ in length")
    if n == 0:
        return []
    fence = []
    for weights in (weights_a, weights_b):
        ends = [e for _, e in partition_consecutive(weights, k)]
        ends += [n] * (k - len(ends))
        fence += ends
    fence.sort()
    parts = []
    prev = 0
    for j in range(1, k + 1):
        end = fence[2 * j - 1]
        if end > prev:
            parts.append((prev, end))
        prev = max(prev, end)
    return parts


def pad_ranges(parts, k, n):
    """Pad a list of ranges with empty ranges at ``n`` up to length ``k``."""
    return list(parts) + [(n, n)] * (k - len(parts))
