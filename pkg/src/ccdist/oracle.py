"""Sequential reference implementations used to check the clique algorithms.

Nothing here touches the simulator. Ties between equal (weight, hops) values
are broken by node id, the same rule the distributed code uses.
"""
import heapq
from typing import NamedTuple

from .errors import Disconnected, PreconditionError
from .matrix import SparseMatrix
from .semiring import AUG_ZERO, BOOLEAN, INF, AugWeight, order_key


class OracleResult(NamedTuple):
    source: int
    dist: list  # AugWeight per node; AUG_ZERO when unreachable
    pred: list  # predecessor on the lexicographically minimal path, or -1
    heaviest: list  # heaviest edge on that path (0 at the source, -1 unreachable)

    def weight(self, v) -> int:
        return self.dist[v][0]


class BruteProduct(NamedTuple):
    product: SparseMatrix
    witnesses: list
    rho_hat: int


def dijkstra(g, s) -> OracleResult:
    """Lexicographically minimal (weight, hops) distances from ``s``.

    Among equal (weight, hops) predecessors the smallest id wins.
    """
    n = g.n
    if not 0 <= s < n:
        raise PreconditionError(f"source {s} out of range")
    adj = g.adjacency()
    dist = [AUG_ZERO] * n
    dist[s] = AugWeight(0, 0)
    done = [False] * n
    heap = [(0, 0, s)]
    while heap:
        w, t, u = heapq.heappop(heap)
        if done[u] or (w, t) != tuple(dist[u]):
            continue
        done[u] = True
        for v, ew in adj[u].items():
            cand = (w + ew, t + 1)
            if cand < tuple(dist[v]):
                dist[v] = AugWeight(*cand)
                heapq.heappush(heap, (cand[0], cand[1], v))
    pred = [-1] * n
    for v in range(n):
        if v == s or dist[v].is_inf():
            continue
        # Predecessors live on the reverse adjacency for directed graphs.
        for u in range(n):
            ew = adj[u].get(v)
            if ew is None or dist[u].is_inf():
                continue
            if (dist[u][0] + ew, dist[u][1] + 1) == tuple(dist[v]):
                pred[v] = u
                break
    heaviest = [-1] * n
    heaviest[s] = 0
    for v in sorted(range(n), key=lambda x: tuple(dist[x])):
        if v != s and pred[v] >= 0:
            heaviest[v] = max(heaviest[pred[v]], adj[pred[v]][v])
    return OracleResult(s, dist, pred, heaviest)


def dijkstra_all(g) -> list:
    return [dijkstra(g, s) for s in range(g.n)]


def distances(g) -> list:
    """Plain shortest-path weights, INF when unreachable."""
    return [[d[0] for d in dijkstra(g, s).dist] for s in range(g.n)]


def path_to(res: OracleResult, v) -> list:
    """Node sequence of the recorded path from the source to ``v``."""
    if res.dist[v].is_inf():
        return []
    out = [v]
    while out[-1] != res.source:
        out.append(res.pred[out[-1]])
    return out[::-1]


def floyd_warshall(g) -> list:
    n = g.n
    d = [[INF] * n for _ in range(n)]
    for v in range(n):
        d[v][v] = 0
    for u, v, w in g.edges:
        d[u][v] = min(d[u][v], w)
        if not g.directed:
            d[v][u] = min(d[v][u], w)
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik >= INF:
                continue
            di = d[i]
            for j in range(n):
                if dk[j] < INF and dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d


def bounded_hop_bellman_ford(g, sources, d) -> dict:
    """``{s: [AugWeight]}``: lexicographically minimal (weight, hops) over paths of at most d hops from s."""
    if d < 0:
        raise PreconditionError("hop bound must be non-negative")
    n = g.n
    arcs = [(u, v, w) for u, v, w in g.edges]
    if not g.directed:
        arcs += [(v, u, w) for u, v, w in g.edges]
    out = {}
    for s in sources:
        cur = [AUG_ZERO] * n
        cur[s] = AugWeight(0, 0)
        for _ in range(d):
            nxt = list(cur)
            changed = False
            for u, v, w in arcs:
                if cur[u][0] >= INF:
                    continue
                cand = (cur[u][0] + w, cur[u][1] + 1)
                if cand < tuple(nxt[v]):
                    nxt[v] = AugWeight(*cand)
                    changed = True
            cur = nxt
            if not changed:
                break
        out[s] = cur
    return out


def brute_distance_product(S, T) -> BruteProduct:
    """Triple-loop product with smallest-index witnesses and the Boolean output density."""
    if S.n != T.n or S.semiring is not T.semiring:
        raise PreconditionError("incompatible operands")
    n = S.n
    sr = S.semiring
    rows = []
    wits = []
    for r in range(n):
        best = {}
        for m in sorted(S.rows[r]):
            sv = S.rows[r][m]
            for col, tv in T.rows[m].items():
                val = sr.mul(sv, tv)
                if val == sr.zero:
                    continue
                cur = best.get(col)
                if cur is None or sr.key(val) < sr.key(cur[0]):
                    best[col] = (val, m)
        rows.append({c: vw[0] for c, vw in sorted(best.items())})
        wits.append({c: vw[1] for c, vw in sorted(best.items())})
    # Output density ignores cancellations: count positions of the Boolean product.
    pat_s, pat_t = S.pattern(), T.pattern()
    nz = 0
    for r in range(n):
        cols = set()
        for m in pat_s.rows[r]:
            cols.update(pat_t.rows[m])
        nz += len(cols)
    rho_hat = max(1, -(-nz // n))
    return BruteProduct(SparseMatrix(n, rows, sr, check=False), wits, rho_hat)


def brute_filter(P, rho) -> SparseMatrix:
    """Keep the rho smallest entries of every row under (value, column) order."""
    if rho < 1:
        raise PreconditionError("filter size must be a positive integer")
    key = P.semiring.key
    rows = []
    for row in P.rows:
        items = sorted(row.items(), key=lambda cv: (key(cv[1]), cv[0]))
        rows.append(dict(items[:rho]))
    return SparseMatrix(P.n, rows, P.semiring, check=False)


def brute_k_nearest(g, k) -> list:
    """Per node, its k nearest nodes as ``[(u, AugWeight)]`` in (weight, hops, id) order."""
    if k < 1:
        raise PreconditionError("k must be positive")
    out = []
    for v in range(g.n):
        dist = dijkstra(g, v).dist
        reach = [u for u in range(g.n) if not dist[u].is_inf()]
        reach.sort(key=lambda u: order_key(dist[u], u))
        out.append([(u, dist[u]) for u in reach[:k]])
    return out


def bfs(g, s) -> list:
    """Hop distances from ``s`` (INF when unreachable)."""
    adj = g.adjacency()
    dist = [INF] * g.n
    dist[s] = 0
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if dist[v] == INF:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def brute_diameter(g) -> int:
    """Largest shortest-path weight; raises :class:`Disconnected` when some pair is unreachable."""
    best = 0
    for row in distances(g):
        m = max(row)
        if m >= INF:
            raise Disconnected("graph is disconnected")
        best = max(best, m)
    return best


def bottleneck_table(g) -> list:
    """``B[u][v]``: the smallest possible heaviest edge over all shortest u-v paths.

    A minimax search restricted to edges that lie on some shortest path.
    """
    n = g.n
    dist = distances(g)
    adj = g.adjacency()
    table = []
    for s in range(n):
        ds = dist[s]
        best = [INF] * n
        best[s] = 0
        heap = [(0, s)]
        while heap:
            b, u = heapq.heappop(heap)
            if b != best[u]:
                continue
            for v, w in adj[u].items():
                if ds[u] < INF and ds[u] + w == ds[v]:
                    cand = max(b, w)
                    if cand < best[v]:
                        best[v] = cand
                        heapq.heappush(heap, (cand, v))
        table.append(best)
    return table


def boolean_pattern_density(S, T) -> int:
    return brute_distance_product(S.pattern() if S.semiring is not BOOLEAN else S,
                                  T.pattern() if T.semiring is not BOOLEAN else T).rho_hat
