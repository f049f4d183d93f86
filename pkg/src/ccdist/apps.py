"""Shortest-path applications: MSSP, approximate APSP, exact SSSP, diameter.

All estimates are plain integer weights with INF for "unknown". Pipelines
that approximate with a user eps run their inner MSSP with eps / 2, since
the stretch analysis pays the MSSP error twice.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .clique import Clique, NodeProgram, log2ceil
from .disttools import ThroughSet, distance_through_sets, k_nearest, source_detection
from .errors import Disconnected, EmptySources, InvariantViolation, PreconditionError, WeightedInput
from .graph import Graph
from .hopset import build_hopset, hitting_set, pivot_of
from .matmul import sparse_mm
from .matrix import SparseMatrix, weight_matrix
from .semiring import INF, MIN_PLUS


def _check_eps(eps):
    if not 0 < eps < 1:
        raise PreconditionError("eps must lie in (0, 1)")


def _check_undirected(g):
    if g.directed:
        raise PreconditionError("this algorithm needs an undirected graph")


@dataclass
class DistanceEstimates:
    """Symmetric n x n table of estimates with the step that last improved each entry."""
    n: int
    table: list = None
    provenance: list = None
    ledger: object = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.table is None:
            self.table = [[INF] * self.n for _ in range(self.n)]
            self.provenance = [[None] * self.n for _ in range(self.n)]
            for v in range(self.n):
                self.table[v][v] = 0
                self.provenance[v][v] = "self"

    def __getitem__(self, uv):
        u, v = uv
        return self.table[u][v]

    def offer(self, u, v, val, tag) -> bool:
        """Keep ``val`` for the pair if it improves the estimate; both directions are updated."""
        if val < self.table[u][v]:
            self.table[u][v] = self.table[v][u] = val
            self.provenance[u][v] = self.provenance[v][u] = tag
            return True
        return False

    def is_symmetric(self) -> bool:
        t = self.table
        return all(t[u][v] == t[v][u] for u in range(self.n) for v in range(u))


def _symmetrize(clique):
    """Estimate echo to the other endpoint after a pipeline step; one round."""
    clique.charge("symmetrize", cost=1)


class MSSPResult(NamedTuple):
    sources: list
    dist: dict  # source -> list of estimates to every node
    hopset: object
    ledger: object

    def __getitem__(self, s):
        return self.dist[s]


def mssp(g: Graph, sources, eps, clique=None, hopset=None) -> MSSPResult:
    """(1 + eps)-approximate distances from every source to every node.

    Source detection with depth beta and k = |S| runs in G + H for a
    (beta, eps)-hopset H, built here unless one is passed in.
    """
    sources = sorted(set(sources))
    if not sources:
        raise EmptySources("source set is empty")
    _check_eps(eps)
    _check_undirected(g)
    n = g.n
    clique = clique or Clique(n)
    if hopset is None:
        hopset, _ = build_hopset(g, eps, clique)
    gh = hopset.union(g)
    dist = {s: [INF] * n for s in sources}
    sd = source_detection(weight_matrix(gh), sources, hopset.beta, len(sources), variant=2, clique=clique)
    for v in range(n):
        for s, d in sd[v].sources:
            dist[s][v] = d[0]
    return MSSPResult(sources, dist, hopset, clique.ledger)


def _pivot_exchange(clique, est, pivot):
    """Every u sends every v the pair (delta(u, p(u)), delta(u, p(v))); one round of 2-word messages."""
    n = est.n
    clique.broadcast([(p,) if p >= 0 else None for p in pivot])
    t = est.table
    msgs = []
    for u in range(n):
        pu = pivot[u]
        for v in range(n):
            if u != v:
                pv = pivot[v]
                msgs.append((u, v, (t[u][pu] if pu >= 0 else INF, t[u][pv] if pv >= 0 else INF)))
    inbox = clique.exchange(msgs)
    cands = []
    for v in range(n):
        pv = pivot[v]
        for u, (d_up_u, d_u_pv) in inbox[v]:
            # through p(v): delta(v, p(v)) + delta(p(v), u)
            if pv >= 0:
                cands.append((u, v, t[v][pv] + d_u_pv))
            pu = pivot[u]
            if pu >= 0:
                cands.append((u, v, d_up_u + t[pu][v]))
    changed = 0
    for u, v, val in cands:
        if val < INF and est.offer(u, v, val, "pivot"):
            changed += 1
    return changed


def _apply_nearest(est, knn, tag):
    for near in knn.sets:
        for u, d in near.members:
            est.offer(near.owner, u, d[0], tag)


def _apply_through(est, res, tag):
    for v, row in enumerate(res.estimates.rows):
        for u, val in row.items():
            est.offer(v, u, val, tag)


def _nearest_through(knn):
    return [ThroughSet(near.owner, {u: d[0] for u, d in near.members}, {u: d[0] for u, d in near.members})
            for near in knn.sets]


def apsp_weighted(g: Graph, eps, clique=None, k=None, sketch3=False) -> DistanceEstimates:
    """Estimates with d <= delta <= (2 + eps) d + (1 + eps) W on weighted undirected graphs.

    ``sketch3`` skips the through-N_k step, which leaves the plain
    (3 + eps)-approximation.
    """
    _check_eps(eps)
    _check_undirected(g)
    n = g.n
    clique = clique or Clique(n)
    inner = eps / 2
    k = min(n, k or math.ceil(math.sqrt(n)))
    est = DistanceEstimates(n, ledger=clique.ledger)
    for u, v, w in g.edges:
        est.offer(u, v, w, "edge")

    knn = k_nearest(g, k, clique)
    _apply_nearest(est, knn, "nearest")
    _symmetrize(clique)

    if not sketch3:
        _apply_through(est, distance_through_sets(_nearest_through(knn), n, clique), "through")
        _symmetrize(clique)

    fams = {near.owner: set(near.nodes()) for near in knn.sets if len(near.members) >= k}
    A = hitting_set(fams, k, clique, n).members if fams else []
    pivot = [-1] * n
    if A:
        res = mssp(g, A, inner, clique)
        for a in A:
            for v, d in enumerate(res[a]):
                if d < INF:
                    est.offer(v, a, d, "mssp")
        _symmetrize(clique)
        members = set(A)
        pivot = [pivot_of(near, members) for near in knn.sets]
        _pivot_exchange(clique, est, pivot)
        _symmetrize(clique)
    est.info.update({"k": k, "hitting_set": A, "pivots": pivot, "eps_inner": inner,
                     "nearest": [near.nodes() for near in knn.sets], "sketch3": sketch3})
    return est


def apsp_unweighted(g: Graph, eps, clique=None, k=None, k2=None) -> DistanceEstimates:
    """Estimates with d <= delta <= (2 + eps) d on unweighted undirected graphs."""
    _check_eps(eps)
    _check_undirected(g)
    if not g.is_unweighted():
        raise WeightedInput("graph has non-unit edge weights")
    n = g.n
    clique = clique or Clique(n)
    inner = eps / 2
    k = min(n, k or math.ceil(math.sqrt(n)))
    k2 = min(n, k2 or math.ceil(n ** 0.25))
    est = DistanceEstimates(n, ledger=clique.ledger)
    for u, v, w in g.edges:
        est.offer(u, v, w, "edge")

    # Phase 1: shortest paths through a high-degree node.
    adj = g.adjacency()
    nbhd = [set(adj[v]) | {v} for v in range(n)]
    high = [v for v in range(n) if len(nbhd[v]) >= k]
    A = hitting_set({v: nbhd[v] for v in high}, k, clique, n).members if high else []
    if A:
        res = mssp(g, A, inner, clique)
        sets = [ThroughSet(v) for v in range(n)]
        for a in A:
            for v, d in enumerate(res[a]):
                if d < INF:
                    est.offer(v, a, d, "mssp")
                    sets[v].out[a] = d
                    sets[v].back[a] = d
        _symmetrize(clique)
        _apply_through(est, distance_through_sets(sets, n, clique), "through-A")
        _symmetrize(clique)

    # Phase 2: the graph induced on low-degree nodes.
    high_set = set(high)
    low = [v for v in range(n) if v not in high_set]
    g2 = g.induced(low)
    knn = k_nearest(g2, k2, clique)
    _apply_nearest(est, knn, "nearest")
    _symmetrize(clique)
    _apply_through(est, distance_through_sets(_nearest_through(knn), n, clique), "through")
    _symmetrize(clique)

    fams = {near.owner: set(near.nodes()) for near in knn.sets if len(near.members) >= k2}
    A2 = hitting_set(fams, k2, clique, n, family="N_k'").members if fams else []
    pivot = [-1] * n
    if A2:
        res2 = mssp(g2, A2, inner, clique)
        for a in A2:
            for v, d in enumerate(res2[a]):
                if d < INF:
                    est.offer(v, a, d, "mssp'")
        _symmetrize(clique)
        members = set(A2)
        pivot = [pivot_of(near, members) for near in knn.sets]
        _pivot_exchange(clique, est, pivot)
        _symmetrize(clique)

    # Length-3 paths u ~ u' - v' ~ v with u' in N_k'(u), v' in N_k'(v).
    m1 = [{u: d[0] for u, d in near.members} for near in knn.sets]
    M1 = SparseMatrix(n, m1, MIN_PLUS, check=False)
    M2 = SparseMatrix(n, [dict(row) for row in g2.adjacency()], MIN_PLUS, check=False)
    M3 = M1.transpose()
    M12 = sparse_mm(M1, M2, clique=clique).product
    M123 = sparse_mm(M12, M3, rho_hat=n, clique=clique).product
    for u, row in enumerate(M123.rows):
        for v, val in row.items():
            est.offer(u, v, val, "3path")
    _symmetrize(clique)
    est.info.update({"k": k, "k2": k2, "high": high, "hitting_set": A, "hitting_set_low": A2,
                     "pivots": pivot, "eps_inner": inner})
    return est


@dataclass
class ShortcutGraph:
    graph: Graph
    k: int

    @classmethod
    def build(cls, g, knn):
        extra = [(near.owner, u, d[0]) for near in knn.sets for u, d in near.members if u != near.owner]
        return cls(g.union(extra), knn.k)


class _BellmanFord(NodeProgram):
    """Synchronous Bellman-Ford: a node forwards its distance whenever it improves."""

    def __init__(self, adj, source):
        self.adj = adj
        self.source = source

    def setup(self, n):
        super().setup(n)
        self.dist = [INF] * n
        self.parent = [-1] * n
        self.dist[self.source] = 0
        self.dirty = [False] * n
        self.dirty[self.source] = True
        self.improving_rounds = 0
        self._last_round = -1

    def step(self, v, rnd, inbox):
        for src, (d,) in inbox:
            w = self.adj[v][src]
            cand = d + w
            if cand < self.dist[v] or (cand == self.dist[v] and 0 <= src < self.parent[v]):
                if cand < self.dist[v]:
                    self.dirty[v] = True
                    if self._last_round != rnd:
                        self._last_round = rnd
                        self.improving_rounds += 1
                self.dist[v] = cand
                self.parent[v] = src
        if not self.dirty[v]:
            return []
        self.dirty[v] = False
        return [(u, (self.dist[v],)) for u in self.adj[v]]

    def halted(self, v):
        return not self.dirty[v]

    def output(self, v):
        return self.dist[v], self.parent[v]


class SSSPResult(NamedTuple):
    source: int
    dist: list
    parent: list
    iterations: int
    k: int
    ledger: object


def sssp_exact(g: Graph, source, k=None, clique=None) -> SSSPResult:
    """Exact distances from ``source``: k-nearest shortcuts, then Bellman-Ford to a fixpoint."""
    _check_undirected(g)
    n = g.n
    if not 0 <= source < n:
        raise PreconditionError(f"source {source} out of range")
    clique = clique or Clique(n)
    k = min(n, k or math.ceil(n ** (5 / 6)))
    if n == 1:
        return SSSPResult(source, [0], [-1], 0, k, clique.ledger)
    knn = k_nearest(g, k, clique)
    sc = ShortcutGraph.build(g, knn)
    prog = _BellmanFord(sc.graph.adjacency(), source)
    outs, _ = clique.run(prog)
    dist = [d for d, _ in outs]
    parent = [p for _, p in outs]
    bound = math.ceil(4 * n / k)
    if prog.improving_rounds >= bound:
        raise InvariantViolation(f"Bellman-Ford needed {prog.improving_rounds} rounds, bound {bound}")
    return SSSPResult(source, dist, parent, prog.improving_rounds, k, clique.ledger)


class DiameterEstimate(NamedTuple):
    value: int
    certificate: tuple  # (source, target, step)
    w: int
    ledger: object


def diameter_approx(g: Graph, eps, clique=None, k=None) -> DiameterEstimate:
    """Estimate D' with 2h + z <= D' <= (1 + eps) D, writing D = 3h + z (unweighted)."""
    _check_eps(eps)
    _check_undirected(g)
    n = g.n
    clique = clique or Clique(n)
    if n == 1:
        return DiameterEstimate(0, (0, 0, "trivial"), 0, clique.ledger)
    k = min(n, k or math.ceil(math.sqrt(n)))
    knn = k_nearest(g, k, clique)
    if any(len(near.members) < k for near in knn.sets):
        raise Disconnected("graph is disconnected")
    S = hitting_set({near.owner: set(near.nodes()) for near in knn.sets}, k, clique, n).members
    H, _ = build_hopset(g, eps, clique)
    res = mssp(g, S, eps, clique, hopset=H)
    members = set(S)
    radius = []
    for near in knn.sets:
        p = pivot_of(near, members)
        radius.append(near.dist(p)[0])
    clique.broadcast([(r,) for r in radius])
    w = min(range(n), key=lambda v: (-radius[v], v))
    near_w = knn.sets[w].nodes()
    clique.broadcast([(1,) if v in set(near_w) else None for v in range(n)])
    res_w = mssp(g, near_w, eps, clique, hopset=H)
    best = (-1, None)
    for step, r in (("hitting", res), ("near-w", res_w)):
        for s in r.sources:
            for v, d in enumerate(r[s]):
                if d >= INF:
                    raise Disconnected("graph is disconnected")
                if d > best[0]:
                    best = (d, (s, v, step))
    clique.broadcast([(best[0],)] + [None] * (n - 1))
    return DiameterEstimate(best[0], best[1], w, clique.ledger)
