import math

from ccdist.graph import Graph
from ccdist.matrix import SparseMatrix
from ccdist.rng import SplitMix64
from ccdist.semiring import AUGMENTED, BOOLEAN, MIN_PLUS


def rand_graph(n, p, seed, max_weight=10, connected=False, min_weight=1):
    rng = SplitMix64(seed)
    best = {}
    if connected:
        for v in range(1, n):
            best[(rng.below(v), v)] = rng.randint(min_weight, max_weight)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p and (u, v) not in best:
                best[(u, v)] = rng.randint(min_weight, max_weight)
    return Graph(n, [(u, v, w) for (u, v), w in sorted(best.items())])


def rand_matrix(n, dens, semiring, rng):
    """``dens`` entries per row on average ('dense' fills every position)."""
    nz = n * n if dens == "dense" else min(n * n, dens * n)
    rows = [dict() for _ in range(n)]
    for pos in rng.sample(range(n * n), nz):
        r, c = divmod(pos, n)
        if semiring is MIN_PLUS:
            val = rng.randint(0, 20)
        elif semiring is AUGMENTED:
            val = (rng.randint(0, 20), rng.randint(0, 3))
        else:
            val = True
        rows[r][c] = val
    return SparseMatrix(n, rows, semiring)


SEMIRING_LIST = [MIN_PLUS, AUGMENTED, BOOLEAN]


def isqrt_up(n):
    return math.ceil(math.sqrt(n))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
