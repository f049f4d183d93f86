"""Row-sparse square matrices over a semiring, plus the matrix text format.

Matrix file format::

    n nz
    row col value [hops]

A fourth column marks an augmented (weight, hops) matrix; otherwise values are
min-plus integers (or 0/1 for the Boolean semiring when requested).
"""
from pathlib import Path

from .errors import GraphFormatError, PreconditionError
from .semiring import AUGMENTED, BOOLEAN, MIN_PLUS, Semiring


class SparseMatrix:
    """n x n matrix storing only non-zero entries, one ``{col: value}`` dict per row."""

    __slots__ = ("n", "rows", "semiring")

    def __init__(self, n: int, rows=None, semiring: Semiring = MIN_PLUS, check=True):
        self.n = n
        self.semiring = semiring
        if rows is None:
            rows = [dict() for _ in range(n)]
        if len(rows) != n:
            raise PreconditionError(f"expected {n} rows, got {len(rows)}")
        if check:
            zero = semiring.zero
            cleaned = []
            for r in rows:
                if isinstance(r, dict):
                    items = r.items()
                else:
                    items = r
                d = {}
                for c, val in items:
                    if not 0 <= c < n:
                        raise PreconditionError(f"column {c} out of range")
                    if val != zero:
                        d[c] = val
                cleaned.append(d)
            rows = cleaned
        self.rows = rows

    @classmethod
    def from_entries(cls, n, entries, semiring=MIN_PLUS):
        """Build from ``(row, col, value)`` triples; repeated positions are added."""
        rows = [dict() for _ in range(n)]
        add = semiring.add
        for r, c, val in entries:
            if val == semiring.zero:
                continue
            cur = rows[r].get(c)
            rows[r][c] = val if cur is None else add(cur, val)
        return cls(n, rows, semiring)

    @classmethod
    def from_dense(cls, dense, semiring=MIN_PLUS):
        n = len(dense)
        return cls(n, [{c: v for c, v in enumerate(row) if v != semiring.zero} for row in dense], semiring)

    @classmethod
    def identity(cls, n, semiring=MIN_PLUS):
        return cls(n, [{i: semiring.one} for i in range(n)], semiring, check=False)

    def to_dense(self) -> list:
        zero = self.semiring.zero
        out = [[zero] * self.n for _ in range(self.n)]
        for r, row in enumerate(self.rows):
            for c, v in row.items():
                out[r][c] = v
        return out

    def get(self, r, c):
        return self.rows[r].get(c, self.semiring.zero)

    @property
    def nz(self) -> int:
        return sum(len(r) for r in self.rows)

    def density(self) -> int:
        return density(self)

    def row_items(self, r) -> list:
        """Row ``r`` as ``(col, value)`` pairs with strictly increasing columns."""
        return sorted(self.rows[r].items())

    def entries(self):
        for r, row in enumerate(self.rows):
            for c in sorted(row):
                yield r, c, row[c]

    def transpose(self) -> "SparseMatrix":
        rows = [dict() for _ in range(self.n)]
        for r, row in enumerate(self.rows):
            for c, v in row.items():
                rows[c][r] = v
        return SparseMatrix(self.n, rows, self.semiring, check=False)

    def pattern(self) -> "SparseMatrix":
        """Boolean matrix with ones exactly at the non-zero positions."""
        return SparseMatrix(self.n, [{c: True for c in row} for row in self.rows], BOOLEAN, check=False)

    def filtered(self, rho: int) -> "SparseMatrix":
        """Keep the ``rho`` smallest entries of every row under (value, column) order."""
        if rho < 1:
            raise PreconditionError("filter size must be a positive integer")
        key = self.semiring.key
        rows = []
        for row in self.rows:
            if len(row) <= rho:
                rows.append(dict(row))
            else:
                best = sorted(row.items(), key=lambda cv: (key(cv[1]), cv[0]))[:rho]
                rows.append(dict(best))
        return SparseMatrix(self.n, rows, self.semiring, check=False)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.n == other.n and self.semiring is other.semiring and self.rows == other.rows

    def __repr__(self):
        return f"SparseMatrix(n={self.n}, nz={self.nz}, semiring={self.semiring.name})"

    # text format

    def dumps(self) -> str:
        lines = [f"{self.n} {self.nz}"]
        for r, c, v in self.entries():
            if self.semiring is AUGMENTED:
                lines.append(f"{r} {c} {v[0]} {v[1]}")
            elif self.semiring is BOOLEAN:
                lines.append(f"{r} {c} 1")
            else:
                lines.append(f"{r} {c} {v}")
        return "\n".join(lines) + "\n"

    def write(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text, semiring=None) -> "SparseMatrix":
        header = None
        entries = []
        width = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                nums = [int(p) for p in parts]
            except ValueError:
                raise GraphFormatError(lineno, f"expected integers, got {line!r}") from None
            if header is None:
                if len(nums) != 2:
                    raise GraphFormatError(lineno, "header must be 'n nz'")
                header = nums
                continue
            if len(nums) not in (3, 4):
                raise GraphFormatError(lineno, "entry line must be 'row col value [hops]'")
            if width is None:
                width = len(nums)
            elif width != len(nums):
                raise GraphFormatError(lineno, "mixed entry widths")
            r, c = nums[0], nums[1]
            if not (0 <= r < header[0] and 0 <= c < header[0]):
                raise GraphFormatError(lineno, "index out of range")
            entries.append(nums)
        if header is None:
            raise GraphFormatError(0, "empty file")
        if len(entries) != header[1]:
            raise GraphFormatError(0, f"header declares {header[1]} entries, found {len(entries)}")
        if semiring is None:
            semiring = AUGMENTED if width == 4 else MIN_PLUS
        if semiring is AUGMENTED:
            if width not in (None, 4):
                raise GraphFormatError(0, "augmented matrices need a hops column")
            triples = [(r, c, (w, t)) for r, c, w, t in entries]
        elif semiring is BOOLEAN:
            triples = [(e[0], e[1], bool(e[2])) for e in entries]
        else:
            triples = [(e[0], e[1], e[2]) for e in entries]
        return cls.from_entries(header[0], triples, semiring)

    @classmethod
    def read(cls, path, semiring=None):
        return cls.loads(Path(path).read_text(), semiring)


def density(m: SparseMatrix) -> int:
    """Smallest positive integer rho with nz(m) <= rho * n."""
    return max(1, -(-m.nz // m.n))


def weight_matrix(g) -> SparseMatrix:
    """Augmented weight matrix: (0,0) on the diagonal, (w,1) per edge, zero elsewhere."""
    rows = [{v: (0, 0)} for v in range(g.n)]
    for u, v, w in g.edges:
        rows[u][v] = (w, 1)
        if not g.directed:
            rows[v][u] = (w, 1)
    return SparseMatrix(g.n, rows, AUGMENTED, check=False)


def minplus_weight_matrix(g) -> SparseMatrix:
    rows = [{v: 0} for v in range(g.n)]
    for u, v, w in g.edges:
        rows[u][v] = w
        if not g.directed:
            rows[v][u] = w
    return SparseMatrix(g.n, rows, MIN_PLUS, check=False)
