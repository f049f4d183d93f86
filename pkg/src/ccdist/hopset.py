"""Deterministic (beta, eps)-hopsets with O(n^{3/2} log n) edges.

Construction:

1. every node finds its k nearest nodes, k = ceil(sqrt(n) * log n);
2. a hitting set A_1 of those neighbourhoods is chosen;
3. bunch edges H_0 connect each v outside A_1 to the nodes strictly closer
   than A_1, and to its pivot;
4. for log n levels, source detection from A_1 with depth 4*beta in
   G + H^{l-1} yields weighted A_1 x A_1 edges; H^l = H_0 + those edges.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .clique import Clique, log2ceil
from .disttools import KNearest, k_nearest, source_detection
from .errors import FamilyTooSmall, GraphFormatError, HitFailure, InvariantViolation, PreconditionError
from .graph import Graph
from .matrix import weight_matrix

SIZE_CONST = 4


class HittingSet(NamedTuple):
    members: list  # sorted node ids
    k: int
    family: str  # what the hit sets are, e.g. "N_k"

    def __contains__(self, v):
        return v in set(self.members)

    def __len__(self):
        return len(self.members)


class Bunch(NamedTuple):
    owner: int
    pivot: int  # -1 when the owner's component has fewer than k nodes
    members: dict  # node -> exact distance (weight only)


@dataclass
class Hopset:
    n: int
    edges: list  # (u, v, weight, level) with u < v
    beta: int
    eps: float
    eps0: float
    delta: float
    k: int
    hitting: list = field(default_factory=list)
    depth: int = 0
    history: list = field(default_factory=list)  # per level: list of (u, v, weight)

    def __len__(self):
        return len(self.edges)

    def weighted_edges(self) -> list:
        return [(u, v, w) for u, v, w, _ in self.edges]

    def union(self, g) -> Graph:
        """G + H with parallel edges collapsed to the lightest."""
        return g.union(self.weighted_edges())

    def dumps(self) -> str:
        lines = [f"{self.n} {len(self.edges)} 0"]
        lines += [f"{u} {v} {w} {lvl}" for u, v, w, lvl in self.edges]
        return "\n".join(lines) + "\n"

    @staticmethod
    def loads_edges(text) -> list:
        """Parse the edge list written by :meth:`dumps` into ``(u, v, w, level)``."""
        out = []
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows:
            raise GraphFormatError(1, "empty hopset file")
        for i, parts in enumerate(rows[1:], start=2):
            if len(parts) != 4:
                raise GraphFormatError(i, "expected 'u v w level'")
            try:
                out.append(tuple(int(p) for p in parts))
            except ValueError:
                raise GraphFormatError(i, "non-integer field") from None
        return out


def hitting_set(families, k, clique=None, n=None, family="N_k") -> HittingSet:
    """Greedy hitting set of a family of node sets, each of size at least k.

    ``families`` maps owners to sets (a list is indexed by owner). Charged as
    one hitting-set primitive plus one round in which members announce
    themselves.
    """
    if isinstance(families, dict):
        fams = [set(s) for _, s in sorted(families.items())]
    else:
        fams = [set(s) for s in families]
    if n is None:
        n = clique.n if clique is not None else max((max(s) for s in fams if s), default=0) + 1
    if k < 1:
        raise PreconditionError("k must be positive")
    for i, s in enumerate(fams):
        if len(s) < k:
            raise FamilyTooSmall(f"family {i} has {len(s)} < {k} members")
    open_sets = list(range(len(fams)))
    chosen = []
    while open_sets:
        cover = {}
        for i in open_sets:
            for u in fams[i]:
                cover[u] = cover.get(u, 0) + 1
        best = min(cover, key=lambda u: (-cover[u], u))
        chosen.append(best)
        open_sets = [i for i in open_sets if best not in fams[i]]
    chosen.sort()
    bound = SIZE_CONST * (n / k) * log2ceil(n)
    if len(chosen) > max(1, bound):
        raise InvariantViolation(f"hitting set of size {len(chosen)} exceeds {bound:.1f}")
    if clique is not None:
        clique.charge("hit")
        members = set(chosen)
        clique.broadcast([(1,) if v in members else None for v in range(clique.n)])
    return HittingSet(chosen, k, family)


def pivot_of(nearest, members) -> int:
    """First node of the (weight, hops, id)-ordered nearest list that lies in ``members``; -1 if none."""
    for u, _ in nearest.members:
        if u in members:
            return u
    return -1


def compute_bunches(knn: KNearest, A1, k=None):
    """Bunches from the k-nearest output, and the bunch edges H_0.

    Returns ``(bunches, h0)`` with ``h0`` a list of ``(u, v, weight)``, u < v.
    A node whose component has fewer than k nodes has no pivot; its bunch
    is the whole component.
    """
    k = k if k is not None else knn.k
    members = set(A1)
    bunches = []
    h0 = {}
    for near in knn.sets:
        v = near.owner
        if v in members:
            bunches.append(Bunch(v, v, {v: 0}))
            continue
        p = pivot_of(near, members)
        if p < 0:
            if len(near.members) >= k:
                raise HitFailure(f"N_k({v}) misses the hitting set")
            b = {u: d[0] for u, d in near.members}
        else:
            radius = near.dist(p)[0]
            b = {u: d[0] for u, d in near.members if d[0] < radius}
            b[p] = radius
        bunches.append(Bunch(v, p, b))
        for u, w in b.items():
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key not in h0 or w < h0[key]:
                h0[key] = w
    return bunches, [(u, v, w) for (u, v), w in sorted(h0.items())]


def hopset_params(n, eps) -> dict:
    L = log2ceil(n)
    eps0 = eps / L
    delta = eps0 / 4
    beta = math.ceil(3 / delta - 1e-9)
    return {"levels": L, "eps0": eps0, "delta": delta, "beta": beta, "depth": 4 * beta}


def default_k(n) -> int:
    return min(n, math.ceil(math.sqrt(n) * log2ceil(n)))


def build_hopset(g: Graph, eps, clique=None, k=None, keep_history=False, variant=2):
    """Build a (beta, eps)-hopset of ``g``; returns ``(Hopset, ledger)``."""
    if g.directed:
        raise PreconditionError("hopsets need an undirected graph")
    if not 0 < eps < 1:
        raise PreconditionError("eps must lie in (0, 1)")
    n = g.n
    clique = clique or Clique(n)
    prm = hopset_params(n, eps)
    k = min(n, k or default_k(n))

    knn = k_nearest(g, k, clique)
    fams = {near.owner: set(near.nodes()) for near in knn.sets if len(near.members) >= k}
    A1 = hitting_set(fams, k, clique, n).members if fams else []
    bunches, h0 = compute_bunches(knn, A1, k)
    # Bunch owners tell the other endpoints about their edges.
    clique.route_bulk([(v, u, (w,)) for v, b in enumerate(bunches) for u, w in b.members.items() if u != v])

    best = {}  # (u, v) -> (weight, level)
    for u, v, w in h0:
        best[(u, v)] = (w, 0)
    history = [list(h0)] if keep_history else []
    current = list(h0)
    if len(A1) > 1:
        for level in range(1, prm["levels"] + 1):
            Wm = weight_matrix(g.union(current))
            sd = source_detection(Wm, A1, prm["depth"], len(A1), variant=variant, clique=clique)
            a_edges = {}
            for v in A1:
                for u, dist in sd[v].sources:
                    if u > v:
                        a_edges[(v, u)] = dist[0]
            for key, w in a_edges.items():
                old = best.get(key)
                if old is None or w < old[0]:
                    best[key] = (w, level)
            current = list(h0) + [(u, v, w) for (u, v), w in sorted(a_edges.items())]
            if keep_history:
                history.append(list(current))
    final = {(u, v): w for u, v, w in Graph.from_edges(n, current).edges}
    # Level weights only shrink, so the recorded minimum is the final weight.
    edges = [(u, v, w, best[(u, v)][1]) for (u, v), w in sorted(final.items())]
    cap = SIZE_CONST * n ** 1.5 * log2ceil(n)
    if len(edges) > cap:
        raise InvariantViolation(f"hopset has {len(edges)} edges, above {cap:.0f}")
    hs = Hopset(n, edges, prm["beta"], eps, prm["eps0"], prm["delta"], k, list(A1), prm["depth"], history)
    return hs, clique.ledger
