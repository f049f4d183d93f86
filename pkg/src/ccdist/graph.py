"""Weighted graphs and the plain-text edge-list format.

File format::

    n m directed
    u v w
    ...

``directed`` is ``0``/``1`` (``true``/``false`` and ``directed``/``undirected``
are accepted too). Blank lines and ``#`` comments are skipped.
"""
from dataclasses import dataclass, field
from pathlib import Path

from .errors import GraphFormatError, PreconditionError
from .semiring import INF


@dataclass
class Graph:
    n: int
    edges: list = field(default_factory=list)  # (u, v, weight)
    directed: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("graph needs at least one node")
        seen = set()
        norm = []
        for e in self.edges:
            u, v, w = int(e[0]), int(e[1]), int(e[2])
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise PreconditionError(f"edge ({u},{v}) out of range for n={self.n}")
            if u == v:
                raise PreconditionError(f"self-loop at {u}")
            if w < 0 or w >= INF:
                raise PreconditionError(f"weight {w} outside [0, INF)")
            pair = (u, v) if self.directed else (min(u, v), max(u, v))
            if pair in seen:
                raise PreconditionError(f"duplicate edge {pair}")
            seen.add(pair)
            norm.append((pair[0], pair[1], w))
        self.edges = norm

    @classmethod
    def from_edges(cls, n, edges, directed=False):
        """Build a graph, keeping the lightest copy of parallel edges."""
        best = {}
        for u, v, w in edges:
            if u == v:
                continue
            pair = (u, v) if directed else (min(u, v), max(u, v))
            if pair not in best or w < best[pair]:
                best[pair] = w
        return cls(n, [(u, v, w) for (u, v), w in sorted(best.items())], directed)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def max_weight(self) -> int:
        return max((w for _, _, w in self.edges), default=0)

    def is_unweighted(self) -> bool:
        return all(w == 1 for _, _, w in self.edges)

    def adjacency(self) -> list:
        """Out-neighbour maps ``adj[u][v] = w`` (both directions when undirected)."""
        adj = [dict() for _ in range(self.n)]
        for u, v, w in self.edges:
            adj[u][v] = w
            if not self.directed:
                adj[v][u] = w
        return adj

    def union(self, extra_edges) -> "Graph":
        """This graph plus ``extra_edges``; parallel edges collapse to the lightest."""
        return Graph.from_edges(self.n, list(self.edges) + list(extra_edges), self.directed)

    def induced(self, nodes) -> "Graph":
        """Subgraph on ``nodes``; other ids stay as isolated nodes."""
        keep = set(nodes)
        return Graph(self.n, [e for e in self.edges if e[0] in keep and e[1] in keep], self.directed)

    def write(self, path) -> None:
        Path(path).write_text(self.dumps())

    def dumps(self) -> str:
        lines = [f"{self.n} {self.m} {1 if self.directed else 0}"]
        lines += [f"{u} {v} {w}" for u, v, w in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def read(cls, path) -> "Graph":
        return cls.loads(Path(path).read_text())

    @classmethod
    def loads(cls, text: str) -> "Graph":
        header = None
        edges = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if header is None:
                if len(parts) not in (2, 3):
                    raise GraphFormatError(lineno, "header must be 'n m [directed]'")
                n, m = _ints(parts[:2], lineno)
                directed = _flag(parts[2], lineno) if len(parts) == 3 else False
                header = (n, m, directed)
                continue
            if len(parts) != 3:
                raise GraphFormatError(lineno, "edge line must be 'u v w'")
            u, v, w = _ints(parts, lineno)
            if not (0 <= u < header[0] and 0 <= v < header[0]):
                raise GraphFormatError(lineno, f"node id out of range [0, {header[0]})")
            if u == v:
                raise GraphFormatError(lineno, "self-loop")
            if w < 0:
                raise GraphFormatError(lineno, "negative weight")
            edges.append((u, v, w))
        if header is None:
            raise GraphFormatError(0, "empty file")
        n, m, directed = header
        if len(edges) != m:
            raise GraphFormatError(0, f"header declares {m} edges, found {len(edges)}")
        try:
            return cls(n, edges, directed)
        except PreconditionError as exc:
            raise GraphFormatError(0, str(exc)) from None


def _ints(parts, lineno):
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise GraphFormatError(lineno, f"expected integers, got {' '.join(parts)!r}") from None


def _flag(tok, lineno):
    t = tok.lower()
    if t in ("1", "true", "directed"):
        return True
    if t in ("0", "false", "undirected"):
        return False
    raise GraphFormatError(lineno, f"bad directed flag {tok!r}")
