"""Distance tools built on the sparse product engine.

* ``k_nearest``: every node learns its k closest nodes with exact distances.
* ``source_detection``: every node learns its k closest sources within d hops.
* ``distance_through_sets``: min over shared intermediate nodes of two-leg estimates.

Distances are augmented (weight, hops) pairs; ties are broken by node id.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .clique import Clique, log2ceil
from .errors import EmptySources, PreconditionError
from .graph import Graph
from .matmul import filtered_mm, sparse_mm
from .matrix import SparseMatrix, weight_matrix
from .semiring import AUGMENTED, INF, MIN_PLUS, AugWeight


class NearestSet(NamedTuple):
    owner: int
    members: list  # [(node, AugWeight)] in (weight, hops, id) order

    def nodes(self) -> list:
        return [u for u, _ in self.members]

    def dist(self, u):
        for x, d in self.members:
            if x == u:
                return d
        return None


class SourceTable(NamedTuple):
    owner: int
    sources: list  # [(source, AugWeight)] in (weight, hops, id) order

    def as_dict(self) -> dict:
        return dict(self.sources)


@dataclass
class ThroughSet:
    owner: int
    out: dict = field(default_factory=dict)  # w -> delta(owner, w)
    back: dict = field(default_factory=dict)  # w -> delta(w, owner)

    @property
    def members(self) -> set:
        return set(self.out)


def _top(row, k) -> dict:
    """The k smallest entries of an augmented row under ((w, t), col) order."""
    if len(row) <= k:
        return dict(row)
    return dict(sorted(sorted(row.items(), key=lambda cv: (cv[1], cv[0]))[:k]))


def _aug_matrix(g) -> SparseMatrix:
    if isinstance(g, SparseMatrix):
        if g.semiring is not AUGMENTED:
            raise PreconditionError("expected an augmented weight matrix")
        return g
    if isinstance(g, Graph):
        return weight_matrix(g)
    raise PreconditionError("expected a Graph or an augmented SparseMatrix")


def _rows_changed(clique, old, new) -> bool:
    """Each node reports whether its row moved; one broadcast round of one-word flags."""
    flags = [(1,) if old.rows[v] != new.rows[v] else None for v in range(clique.n)]
    clique.broadcast(flags)
    return any(flags)


class KNearest:
    """Per-node nearest sets plus the witness levels needed to rebuild paths."""

    def __init__(self, k, levels, witnesses, ledger):
        self.k = k
        self.levels = levels  # level 0 is W filtered to k, level i its i-th squaring
        self.witnesses = witnesses  # witnesses[i] belongs to levels[i], i >= 1
        self.ledger = ledger
        last = levels[-1]
        self.sets = [
            NearestSet(v, [(u, AugWeight(*d)) for u, d in sorted(last.rows[v].items(), key=lambda cv: (cv[1], cv[0]))])
            for v in range(last.n)
        ]

    def __getitem__(self, v) -> NearestSet:
        return self.sets[v]

    def __len__(self):
        return len(self.sets)

    def path(self, v, u) -> list:
        """Node sequence of the shortest v-u path recovered from the witnesses."""
        top = len(self.levels) - 1
        if u not in self.levels[top].rows[v]:
            raise PreconditionError(f"{u} is not among the {self.k} nearest of {v}")
        return self._expand(top, v, u)

    def _expand(self, level, v, u):
        if v == u:
            return [v]
        if level == 0:
            return [v, u]
        w = self.witnesses[level][v][u]
        left = self._expand(level - 1, v, w)
        right = self._expand(level - 1, w, u)
        return left + right[1:]


def k_nearest(g, k, clique=None) -> KNearest:
    """Exact distances from every node to its k nearest nodes.

    Squares W filtered to k entries ceil(log2 k) times; a row settles once
    its k nearest are all within 2^i hops, which happens by i = ceil(log2 k).
    """
    if k < 1:
        raise PreconditionError("k must be positive")
    W = _aug_matrix(g)
    n = W.n
    clique = clique or Clique(n)
    k = min(k, n)
    cur = SparseMatrix(n, [_top(r, k) for r in W.rows], AUGMENTED, check=False)
    levels = [cur]
    witnesses = [None]
    for _ in range(math.ceil(math.log2(k)) if k > 1 else 0):
        res = filtered_mm(cur, cur, k, clique)
        nxt = res.product
        levels.append(nxt)
        witnesses.append(res.witnesses)
        if not _rows_changed(clique, cur, nxt):
            break
        cur = nxt
    return KNearest(k, levels, witnesses, clique.ledger)


class SourceDetection(NamedTuple):
    tables: list  # SourceTable per node
    variant: int
    iterations: int
    ledger: object

    def __getitem__(self, v):
        return self.tables[v]


def predicted_cost(variant, m, n, k, s, d) -> float:
    """Round model of the two source-detection variants (constants dropped)."""
    if variant == 1:
        return d * (m ** (1 / 3) * k ** (2 / 3) / n + log2ceil(n))
    return d * (m ** (1 / 3) * s ** (2 / 3) / n + 1)


def choose_variant(m, n, k, s, d) -> int:
    if k > s:
        return 2
    return 1 if predicted_cost(1, m, n, k, s, d) < predicted_cost(2, m, n, k, s, d) else 2


def source_detection(g, sources, d, k, variant=None, clique=None) -> SourceDetection:
    """Distances from every node to its k nearest sources over paths of at most d hops."""
    sources = sorted(set(sources))
    if not sources:
        raise EmptySources("source set is empty")
    if d < 1:
        raise PreconditionError("hop bound d must be at least 1")
    if k < 1:
        raise PreconditionError("k must be positive")
    W = _aug_matrix(g)
    n = W.n
    if not all(0 <= s < n for s in sources):
        raise PreconditionError("source out of range")
    clique = clique or Clique(n)
    s_count = len(sources)
    if variant is None:
        variant = choose_variant(W.nz, n, k, s_count, d)
    if variant not in (1, 2):
        raise PreconditionError(f"unknown variant {variant}")
    if variant == 1 and k > s_count:
        raise PreconditionError("variant 1 needs k <= |S|")
    in_s = set(sources)
    # One hop: every node keeps its direct entries towards sources.
    first = [{c: x for c, x in row.items() if c in in_s} for row in W.rows]
    if variant == 1:
        cur = SparseMatrix(n, [_top(r, k) for r in first], AUGMENTED, check=False)
    else:
        cur = SparseMatrix(n, first, AUGMENTED, check=False)
    it = 1
    while it < d:
        if variant == 1:
            nxt = filtered_mm(W, cur, k, clique).product
        else:
            nxt = sparse_mm(W, cur, rho_hat=min(n, s_count), clique=clique).product
        it += 1
        changed = _rows_changed(clique, cur, nxt)
        cur = nxt
        if not changed:
            break
    tables = []
    for v in range(n):
        row = _top(cur.rows[v], k)
        items = sorted(row.items(), key=lambda cv: (cv[1], cv[0]))
        tables.append(SourceTable(v, [(s, AugWeight(*x)) for s, x in items]))
    return SourceDetection(tables, variant, it, clique.ledger)


class ThroughResult(NamedTuple):
    estimates: SparseMatrix  # min-plus; absent entries are infinite
    witnesses: list  # witnesses[v][u] = the shared node achieving the minimum
    ledger: object

    def get(self, v, u) -> int:
        return self.estimates.rows[v].get(u, INF)


def distance_through_sets(sets, n=None, clique=None) -> ThroughResult:
    """``delta(v, u) = min over w in W_v and W_u of delta(v, w) + delta(w, u)``.

    ``sets[v]`` is a :class:`ThroughSet`: ``out[w]`` is delta(v, w) and
    ``back[w]`` is delta(w, v), both held by v.
    """
    n = n if n is not None else len(sets)
    if len(sets) != n:
        raise PreconditionError("one set per node expected")
    clique = clique or Clique(n)
    left = []
    msgs = []
    for v, ts in enumerate(sets):
        if set(ts.out) != set(ts.back):
            raise PreconditionError(f"node {v}: out and back estimates cover different nodes")
        left.append({w: x for w, x in ts.out.items() if x < INF})
        for w, x in ts.back.items():
            if x < INF:
                msgs.append((v, w, (v, x)))
    # The second factor is held by columns; ship each entry to its row owner.
    inbox = clique.route_bulk(msgs)
    right = [{} for _ in range(n)]
    for w in range(n):
        for _, (v, x) in inbox[w]:
            right[w][v] = x
    W1 = SparseMatrix(n, left, MIN_PLUS, check=False)
    W2 = SparseMatrix(n, right, MIN_PLUS, check=False)
    res = sparse_mm(W1, W2, rho_hat=n, clique=clique)
    return ThroughResult(res.product, res.witnesses, clique.ledger)
