"""Sparse and filtered semiring matrix multiplication on the simulated clique.

Node ``v`` starts with row ``v`` of both inputs and ends with row ``v`` of the
product. The pipeline is the 3D one:

1. learn row/column counts and pick the parameters ``a, b, c``;
2. cut ``V^3`` into at most n subcubes (``cube_partition``);
3. ship every node the two input slices of its subcube (``distribute_products``);
4. duplicate subcubes whose local product is dense (``balance_intermediate``);
5. add the intermediate values up, one output row per node (``sum_intermediate``).

``filtered_mm`` inserts a distributed binary search (``cutoff_search``) after
step 3 that drops everything outside the per-row top-rho of every block
product, and finishes with a local filter.

Node-local computations run sequentially; every transfer between nodes goes
through the :class:`Clique` and is charged there. Per-node load bounds are
checked as the pipeline runs and raise :class:`InvariantViolation`.
"""
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

from .clique import Clique, RoundLedger
from .errors import DensityUnderestimate, InvariantViolation, PreconditionError, WeightViolation
from .matrix import SparseMatrix, density
from .partition import pad_ranges, partition_consecutive_2, partition_even
from .semiring import INF

__all__ = [
    "density", "mm_params", "CubePartition", "cube_partition", "balance_load",
    "distribute_products", "balance_intermediate", "sum_intermediate", "sparse_mm",
    "CutoffValue", "cutoff_search", "filtered_mm", "MMResult", "local_product",
]

# Explicit constant behind every O(.) per-node load bound checked below.
LOAD_CONST = 4
# Constant for the round bound of one product distribution (S and T together).
ROUND_CONST = 64


def _cbrt_ceil(num, den):
    """Smallest positive integer x with x**3 * den >= num."""
    if num <= den:
        return 1
    x = max(1, int(round((num / den) ** (1.0 / 3.0))))
    while x ** 3 * den < num:
        x += 1
    while x > 1 and (x - 1) ** 3 * den >= num:
        x -= 1
    return x


def mm_params(rho_s, rho_t, rho_p, n):
    """Subcube counts (a, b, c) for densities rho_s, rho_t and output estimate rho_p.

    Each value is the ceiling of its formula, clamped to [1, n]. ``a*b`` is then
    trimmed to at most n and ``c = n // (a*b)``, so the ``a*b*c <= n`` subcubes
    map one-to-one onto nodes.
    """
    if n < 1:
        raise PreconditionError("n must be positive")
    if min(rho_s, rho_t, rho_p) < 1:
        raise PreconditionError("densities must be positive integers")
    a = min(n, _cbrt_ceil(rho_t * rho_p * n, rho_s * rho_s))
    b = min(n, _cbrt_ceil(rho_s * rho_p * n, rho_t * rho_t))
    c = min(n, _cbrt_ceil(rho_s * rho_t * n, rho_p * rho_p))
    while a * b > n:
        if a >= b:
            a -= 1
        else:
            b -= 1
    c = max(1, min(c, n // (a * b)))
    return a, b, c


@dataclass
class CubePartition:
    """Subcubes ``C^S_i x C^{ij}_k x C^T_j`` indexed by ``(i, j, k)`` in ``[b] x [a] x [c]``.

    Subcube ``(i, j, k)`` is handled by node ``(i*a + j)*c + k``.
    """

    n: int
    a: int
    b: int
    c: int
    row_blocks: list  # b lists of rows, C^S_i
    col_blocks: list  # a lists of columns, C^T_j
    mid: list  # mid[i][j] = c half-open ranges C^{ij}_k
    row_block_of: list = field(default_factory=list)
    col_block_of: list = field(default_factory=list)
    mid_of: list = field(default_factory=list)  # mid_of[i][j][m] = k
    s_columns: list = field(default_factory=list)  # node v: column v of S as (row, v, value)

    def __post_init__(self):
        n = self.n
        if not self.row_block_of:
            self.row_block_of = [0] * n
            for i, blk in enumerate(self.row_blocks):
                for r in blk:
                    self.row_block_of[r] = i
            self.col_block_of = [0] * n
            for j, blk in enumerate(self.col_blocks):
                for col in blk:
                    self.col_block_of[col] = j
            self.mid_of = []
            for i in range(self.b):
                per_j = []
                for j in range(self.a):
                    arr = [0] * n
                    for k, (s, e) in enumerate(self.mid[i][j]):
                        for m in range(s, e):
                            arr[m] = k
                    per_j.append(arr)
                self.mid_of.append(per_j)

    @property
    def tasks(self) -> int:
        return self.a * self.b * self.c

    def node(self, i, j, k) -> int:
        return (i * self.a + j) * self.c + k

    def triple(self, t):
        ij, k = divmod(t, self.c)
        i, j = divmod(ij, self.a)
        return i, j, k

    def subcube(self, t):
        """(rows, (mid_start, mid_end), cols) of subcube ``t``."""
        i, j, k = self.triple(t)
        return self.row_blocks[i], self.mid[i][j][k], self.col_blocks[j]

    def s_tasks(self, r, m):
        """Subcubes whose S-slice contains position (r, m)."""
        i = self.row_block_of[r]
        mids = self.mid_of[i]
        return [self.node(i, j, mids[j][m]) for j in range(self.a)]

    def t_tasks(self, m, col):
        """Subcubes whose T-slice contains position (m, col)."""
        j = self.col_block_of[col]
        return [self.node(i, j, self.mid_of[i][j][m]) for i in range(self.b)]


class MMResult(NamedTuple):
    product: SparseMatrix
    witnesses: list  # witnesses[r][c] = w with P[r,c] = S[r,w] * T[w,c]
    ledger: RoundLedger
    params: dict
    restarts: int


class CutoffValue(NamedTuple):
    """rho-th smallest (value, column) on one row of a block product."""

    r: object
    s: int


# shared helpers


def _check_inputs(S, T):
    if S.n != T.n:
        raise PreconditionError(f"dimension mismatch: {S.n} vs {T.n}")
    if S.semiring is not T.semiring:
        raise PreconditionError("operands use different semirings")


def _learn_counts(clique, S, T):
    """Two rounds: column indicators of T, then everyone broadcasts (row nz of S, column nz of T)."""
    n = clique.n
    msgs = [(v, u, (1,)) for v in range(n) for u in T.rows[v] if u != v]
    inbox = clique.exchange(msgs)
    col_t = [len(inbox[u]) + (1 if u in T.rows[u] else 0) for u in range(n)]
    row_s = [len(S.rows[v]) for v in range(n)]
    clique.broadcast([(row_s[v], col_t[v]) for v in range(n)])
    return row_s, col_t


def _learn_max_components(clique, S, T):
    """One broadcast round: component-wise maxima over the nonzeros each node holds."""
    sr = S.semiring
    width = len(sr.components(sr.one))
    payloads = []
    for v in range(clique.n):
        best = [0] * width
        for row in (S.rows[v], T.rows[v]):
            for val in row.values():
                for idx, x in enumerate(sr.components(val)):
                    if x > best[idx]:
                        best[idx] = x
        payloads.append(tuple(best) if width else None)
    clique.broadcast(payloads)
    hi = [0] * width
    for p in payloads:
        if p:
            hi = [max(x, y) for x, y in zip(hi, p)]
    return hi


def cube_partition(S, T, a, b, c, clique=None, counts=None) -> CubePartition:
    """Cut V^3 into a*b*c subcubes with bounded nonzeros in every slice.

    Rows are split into b blocks by S row counts and columns into a blocks by T
    column counts. Each block pair (i, j) then cuts the middle index range into
    c consecutive runs, balanced for S and T at once.
    """
    _check_inputs(S, T)
    n = S.n
    if a * b * c > n or min(a, b, c) < 1:
        raise PreconditionError(f"need 1 <= a*b*c <= n, got {a}*{b}*{c} with n={n}")
    clique = clique or Clique(n)
    if counts is None:
        counts = _learn_counts(clique, S, T)
    row_s, col_t = counts
    row_blocks = partition_even(row_s, b)
    col_blocks = partition_even(col_t, a)

    # S to column layout: node v holds column v of S.
    inbox = clique.route([(r, m, (r * n + m,) + S.semiring.encode(val))
                          for r in range(n) for m, val in S.rows[r].items()])
    s_columns = [[(w[0] // n, v, S.semiring.decode(w[1:])) for _, w in inbox[v]] for v in range(n)]

    # Node v tells every node of B_ij its counts in S[C^S_i, v] and T[v, C^T_j].
    row_block_of = [0] * n
    for i, blk in enumerate(row_blocks):
        for r in blk:
            row_block_of[r] = i
    col_block_of = [0] * n
    for j, blk in enumerate(col_blocks):
        for col in blk:
            col_block_of[col] = j
    s_cnt = [[0] * n for _ in range(b)]  # s_cnt[i][v]
    t_cnt = [[0] * n for _ in range(a)]
    for v in range(n):
        for r, _, _ in s_columns[v]:
            s_cnt[row_block_of[r]][v] += 1
        for col in T.rows[v]:
            t_cnt[col_block_of[col]][v] += 1
    msgs = []
    for v in range(n):
        for i in range(b):
            for j in range(a):
                base = (i * a + j) * c
                for u in range(base, base + c):
                    msgs.append((v, u, (s_cnt[i][v], t_cnt[j][v])))
    clique.exchange(msgs)

    # Every node of B_ij computes the same runs; its k-th node announces run k.
    mid = []
    msgs = []
    for i in range(b):
        per_j = []
        for j in range(a):
            runs = pad_ranges(partition_consecutive_2(s_cnt[i], t_cnt[j], c), c, n)
            per_j.append(runs)
            base = (i * a + j) * c
            for k, (s, e) in enumerate(runs):
                msgs.extend((base + k, u, (s, e)) for u in range(n))
        mid.append(per_j)
    clique.exchange(msgs)

    part = CubePartition(n, a, b, c, row_blocks, col_blocks, mid, s_columns=s_columns)
    _check_partition(part, S, T)
    return part


def _check_partition(part, S, T):
    n, a, b, c = part.n, part.a, part.b, part.c
    rho_s, rho_t = density(S), density(T)
    max_rows = -(-n // b)
    max_cols = -(-n // a)
    for blk in part.row_blocks:
        if len(blk) > max_rows:
            raise InvariantViolation(f"row block of size {len(blk)} > ceil(n/b)={max_rows}")
    for blk in part.col_blocks:
        if len(blk) > max_cols:
            raise InvariantViolation(f"column block of size {len(blk)} > ceil(n/a)={max_cols}")
    s_load = Counter()
    for r in range(n):
        for m in S.rows[r]:
            for t in part.s_tasks(r, m):
                s_load[t] += 1
    t_load = Counter()
    for m in range(n):
        for col in T.rows[m]:
            for t in part.t_tasks(m, col):
                t_load[t] += 1
    s_cap = LOAD_CONST * (rho_s * a + n)
    t_cap = LOAD_CONST * (rho_t * b + n)
    for t in range(part.tasks):
        if s_load[t] > s_cap:
            raise InvariantViolation(f"S-slice of subcube {t} has {s_load[t]} > {s_cap} nonzeros")
        if t_load[t] > t_cap:
            raise InvariantViolation(f"T-slice of subcube {t} has {t_load[t]} > {t_cap} nonzeros")


# balancing and product distribution


def balance_load(clique, entries, total=None):
    """Redistribute weighted entries so every node's weight is at most 2(W/n + n).

    ``entries[v]`` holds at most n items ``(weight, index, words)`` with
    ``0 <= weight <= n``, ``0 <= index < n*n`` and ``words`` a tuple of at most
    B-1 data words. Returns the new per-node lists in the same form.
    """
    n = clique.n
    n2 = n * n
    if len(entries) != n:
        raise PreconditionError(f"expected {n} entry lists, got {len(entries)}")
    W = 0
    for v, items in enumerate(entries):
        if len(items) > n:
            raise WeightViolation(f"node {v} holds {len(items)} > n entries")
        for w, idx, _ in items:
            if not 0 <= w <= n:
                raise WeightViolation(f"entry weight {w} outside [0, n]")
            if not 0 <= idx < n2:
                raise PreconditionError(f"entry index {idx} outside [0, n^2)")
            W += w
    if total is not None and W > total:
        raise WeightViolation(f"total weight {W} exceeds declared {total}")

    # Weight histogram: weight x is counted at node max(0, x-1); node 0 takes 0 and 1.
    msgs = []
    for v, items in enumerate(entries):
        hist = Counter(w for w, _, _ in items)
        hist[0] += n - len(items)
        low = (hist.pop(0, 0), hist.pop(1, 0))
        if any(low):
            msgs.append((v, 0, low))
        for x, cnt in hist.items():
            msgs.append((v, x - 1, (cnt,)))
    inbox = clique.exchange(msgs)
    totals = []
    for u in range(n):
        if u == 0:
            totals.append((sum(p[0] for _, p in inbox[0]), sum(p[1] for _, p in inbox[0])))
        else:
            s = sum(p[0] for _, p in inbox[u])
            totals.append((s,) if s else None)
    clique.broadcast(totals)

    # Global sort by decreasing weight, then deal ranks round-robin.
    dummy = ((n + 1) * n2,)
    keyed = []
    for items in entries:
        batch = [((n - w) * n2 + idx,) + tuple(words) for w, idx, words in items]
        batch.extend([dummy] * (n - len(batch)))
        keyed.append(batch)
    batches = clique.sort(keyed)
    msgs = [(p, t, e) for p, batch in enumerate(batches) for t, e in enumerate(batch) if e[0] < dummy[0]]
    inbox = clique.route(msgs)
    out = []
    for v in range(n):
        mine = []
        for _, e in inbox[v]:
            hi, idx = divmod(e[0], n2)
            mine.append((n - hi, idx, e[1:]))
        load = sum(w for w, _, _ in mine)
        if n * load > 2 * (W + n2):
            raise InvariantViolation(f"balanced load {load} at node {v} exceeds 2(W/n + n)")
        out.append(mine)
    return out


def _ship(clique, held, dests_of, encode_words):
    """Balance ``held`` entries by duplication count and deliver each copy.

    ``held[v]`` lists ``(index, value)``; ``dests_of(index)`` gives receiving nodes.
    Returns per-node lists of ``(index, words)``.
    """
    n = clique.n
    memo = {}
    items = []
    for v in range(n):
        mine = []
        for idx, val in held[v]:
            memo[idx] = d = dests_of(idx)
            w = len(d)
            if w:
                mine.append((w, idx, encode_words(val)))
        items.append(mine)
    balanced = balance_load(clique, items)
    msgs = []
    for v in range(n):
        for _, idx, words in balanced[v]:
            payload = (idx,) + tuple(words)
            for u in memo[idx]:
                msgs.append((v, u, payload))
    inbox = clique.route_bulk(msgs)
    return [[(p[0], p[1:]) for _, p in inbox[v]] for v in range(n)]


def distribute_products(clique, part, S, T, sigma, cache=None):
    """Every node ``v`` with ``sigma[v] is not None`` computes the product of subcube ``sigma[v]``.

    Returns ``{task: {pos: (value, witness)}}`` for the assigned subcubes, with
    ``pos = row*n + col``. ``cache`` memoizes products across calls; nodes that
    receive identical slices compute identical results.
    """
    n = clique.n
    sr = S.semiring
    owners = {}
    for v, t in enumerate(sigma):
        if t is not None:
            if not 0 <= t < part.tasks:
                raise PreconditionError(f"sigma({v}) = {t} is not a subcube")
            owners.setdefault(t, []).append(v)
    before = clique.ledger.steps()
    none = ()

    def s_dests(idx):
        r, m = divmod(idx, n)
        out = []
        for t in part.s_tasks(r, m):
            out.extend(owners.get(t, none))
        return out

    def t_dests(idx):
        m, col = divmod(idx, n)
        out = []
        for t in part.t_tasks(m, col):
            out.extend(owners.get(t, none))
        return out

    s_held = [[(r * n + m, val) for r, m, val in part.s_columns[v]] for v in range(n)]
    t_held = [[(v * n + col, val) for col, val in T.rows[v].items()] for v in range(n)]
    s_recv = _ship(clique, s_held, s_dests, sr.encode)
    t_recv = _ship(clique, t_held, t_dests, sr.encode)

    rho_s, rho_t = density(S), density(T)
    steps = clique.ledger.steps() - before
    bound = ROUND_CONST * (rho_s * part.a / n + rho_t * part.b / n + 1)
    if steps > bound:
        raise InvariantViolation(f"product distribution took {steps} steps > {bound:.1f}")

    cache = {} if cache is None else cache
    out = {}
    for t, nodes in owners.items():
        if t not in cache:
            v = nodes[0]
            s_by_mid = {}
            for idx, words in s_recv[v]:
                r, m = divmod(idx, n)
                s_by_mid.setdefault(m, []).append((r, sr.decode(words)))
            t_by_mid = {}
            for idx, words in t_recv[v]:
                m, col = divmod(idx, n)
                t_by_mid.setdefault(m, []).append((col, sr.decode(words)))
            cache[t] = local_product(n, s_by_mid, t_by_mid, sr)
        out[t] = cache[t]
    return out


def local_product(n, s_by_mid, t_by_mid, semiring):
    """Sequential product of two slices keyed by middle index.

    Returns ``{row*n + col: (value, witness)}`` where the witness is the smallest
    middle index attaining the minimum.
    """
    out = {}
    get = out.get
    name = semiring.name
    for m in sorted(s_by_mid):
        t_list = t_by_mid.get(m)
        if not t_list:
            continue
        # Specialized inner loops; ascending m keeps the smallest witness on ties.
        for r, sv in s_by_mid[m]:
            base = r * n
            if name == "min-plus":
                for col, tv in t_list:
                    val = sv + tv
                    if val >= INF:
                        continue
                    p = base + col
                    cur = get(p)
                    if cur is None or val < cur[0]:
                        out[p] = (val, m)
            elif name == "augmented":
                sw, st = sv
                for col, tv in t_list:
                    w = sw + tv[0]
                    if w >= INF:
                        continue
                    val = (w, st + tv[1])
                    p = base + col
                    cur = get(p)
                    if cur is None or val < cur[0]:
                        out[p] = (val, m)
            elif name == "boolean":
                for col, _ in t_list:
                    p = base + col
                    if p not in out:
                        out[p] = (True, m)
            else:
                mul, key, zero = semiring.mul, semiring.key, semiring.zero
                for col, tv in t_list:
                    val = mul(sv, tv)
                    if val == zero:
                        continue
                    p = base + col
                    cur = get(p)
                    if cur is None or key(val) < key(cur[0]):
                        out[p] = (val, m)
    return out


def _chunks(entries, size, responsible):
    """Split position-sorted ``entries`` into parts of ``size`` and hand part i to responsible[i]."""
    parts = -(-len(entries) // size) if entries else 0
    if parts > len(responsible):
        raise InvariantViolation(f"{parts} parts but only {len(responsible)} responsible nodes")
    return [(responsible[i], entries[i * size:(i + 1) * size]) for i in range(parts)]


def balance_intermediate(clique, part, S, T, products, rho_hat, cache=None):
    """Duplicate dense subcube products until every node holds at most 2*rho_hat*c values.

    ``products`` are the subcube products under the identity assignment. Raises
    :class:`DensityUnderestimate` if more than n duplicate slots are needed.
    Returns per-node lists of ``(pos, value, witness)``.
    """
    n = clique.n
    q = rho_hat * part.c
    nz = [len(products.get(t, ())) for t in range(n)]
    clique.broadcast([(x,) for x in nz])
    dup = [x // q for x in nz]
    if sum(dup) > n:
        raise DensityUnderestimate(f"need {sum(dup)} duplicate slots with rho_hat={rho_hat}")
    sigma2 = [None] * n
    responsible = {t: [t] for t in range(part.tasks)}
    slot = 0
    for t in range(n):
        for _ in range(dup[t]):
            sigma2[slot] = t
            responsible[t].append(slot)
            slot += 1
    if slot:
        distribute_products(clique, part, S, T, sigma2, cache)
    values = [[] for _ in range(n)]
    for t in range(part.tasks):
        prod = products.get(t)
        if not prod:
            continue
        entries = [(p,) + prod[p] for p in sorted(prod)]
        for v, chunk in _chunks(entries, q, responsible[t]):
            values[v].extend(chunk)
    cap = LOAD_CONST * q
    for v in range(n):
        if len(values[v]) > cap:
            raise InvariantViolation(f"node {v} holds {len(values[v])} > {cap} intermediate values")
    return values


def sum_intermediate(clique, values, semiring):
    """Add up intermediate values so node v ends with row v of the output.

    ``values[v]`` lists ``(pos, value, witness)``. Each repetition sorts one batch
    of n values per node by position, adds locally, merges positions split
    across node boundaries into the smallest holder and routes sums to their row.
    Returns per-row ``{col: (value, witness)}``.
    """
    n = clique.n
    n3 = n * n * n
    key, enc, dec = semiring.key, semiring.encode, semiring.decode
    rows = [dict() for _ in range(n)]
    reps = max((-(-len(vals) // n) for vals in values), default=0)
    dummy = (n3,)

    def absorb(d, pos, val, wit):
        cand = (key(val), wit)
        cur = d.get(pos)
        if cur is None or cand < cur[0]:
            d[pos] = (cand, val, wit)

    for rep in range(reps):
        batch = []
        for vals in values:
            mine = [(pos * n + wit,) + enc(val) for pos, val, wit in vals[rep * n:(rep + 1) * n]]
            mine.extend([dummy] * (n - len(mine)))
            batch.append(mine)
        batches = clique.sort(batch)
        held = []
        for b in batches:
            d = {}
            for e in b:
                if e[0] >= n3:
                    continue
                pos, wit = divmod(e[0], n)
                absorb(d, pos, dec(e[1:]), wit)
            held.append(d)
        ranges = [(min(d), max(d)) if d else None for d in held]
        clique.broadcast(ranges)
        msgs = []
        for p, d in enumerate(held):
            if not d:
                continue
            lo = ranges[p][0]
            owner = next(q for q in range(p + 1) if ranges[q] and ranges[q][0] <= lo <= ranges[q][1])
            if owner != p:
                _, val, wit = d.pop(lo)
                msgs.append((p, owner, (lo * n + wit,) + enc(val)))
        inbox = clique.exchange(msgs)
        for p in range(n):
            for _, e in inbox[p]:
                pos, wit = divmod(e[0], n)
                absorb(held[p], pos, dec(e[1:]), wit)
        msgs = [(p, pos // n, (pos * n + wit,) + enc(val))
                for p, d in enumerate(held) for pos, (_, val, wit) in d.items()]
        inbox = clique.route(msgs)
        for v in range(n):
            for _, e in inbox[v]:
                pos, wit = divmod(e[0], n)
                absorb(rows[v], pos % n, dec(e[1:]), wit)
    return [{col: (val, wit) for col, (_, val, wit) in sorted(r.items())} for r in rows]


def _assemble(n, rows, semiring):
    product = SparseMatrix(n, [{c: vw[0] for c, vw in r.items()} for r in rows], semiring, check=False)
    witnesses = [{c: vw[1] for c, vw in r.items()} for r in rows]
    return product, witnesses


# top-level products


def sparse_mm(S, T, rho_hat=None, clique=None) -> MMResult:
    """Exact product S*T with witnesses.

    ``rho_hat`` is an estimate of the output density. Without it the
    estimate starts at 1 and doubles whenever balancing runs out of slots;
    restarts are charged to the same ledger.
    """
    _check_inputs(S, T)
    n = S.n
    sr = S.semiring
    clique = clique or Clique(n)
    if clique.n != n:
        raise PreconditionError("clique size differs from matrix size")
    est = max(1, min(n, rho_hat)) if rho_hat else 1
    counts = _learn_counts(clique, S, T)
    rho_s, rho_t = max(1, -(-sum(counts[0]) // n)), max(1, -(-sum(counts[1]) // n))
    restarts = 0
    while True:
        a, b, c = mm_params(rho_s, rho_t, est, n)
        part = cube_partition(S, T, a, b, c, clique, counts)
        cache = {}
        products = distribute_products(clique, part, S, T, list(range(part.tasks)) + [None] * (n - part.tasks), cache)
        try:
            values = balance_intermediate(clique, part, S, T, products, est, cache)
        except DensityUnderestimate:
            if est >= n:
                raise
            est = min(n, 2 * est)
            restarts += 1
            continue
        break
    rows = sum_intermediate(clique, values, sr)
    product, witnesses = _assemble(n, rows, sr)
    params = {"a": a, "b": b, "c": c, "rho_s": rho_s, "rho_t": rho_t, "rho_hat": est}
    return MMResult(product, witnesses, clique.ledger, params, restarts)


def _order_key(semiring, val, col):
    return tuple(semiring.components(val)) + (col,)


def cutoff_search(clique, part, products, rho, domain_hi, semiring):
    """Find, for every row of every block product P_k, the rho-th smallest (value, column).

    Rows with at most rho nonzeros get the sentinel ``(zero, n-1)``, which keeps
    everything. Otherwise the coordinator of the row binary-searches each value
    component over ``[0, domain_hi[i]]`` and then the column. Each iteration is
    one probe route and one reply route. Returns ``{(row, k): CutoffValue}``.
    """
    n = clique.n
    a, b, c = part.a, part.b, part.c
    ncomp = len(domain_hi)
    sentinel_key = _order_key(semiring, semiring.zero, n - 1)

    # Participant view: node t holds sorted order keys per row of its block.
    held = {}
    for t, prod in products.items():
        per_row = {}
        for pos, (val, _) in prod.items():
            r, col = divmod(pos, n)
            per_row.setdefault(r, []).append(_order_key(semiring, val, col))
        for lst in per_row.values():
            lst.sort()
        held[t] = per_row

    coord = {}
    for i, blk in enumerate(part.row_blocks):
        for idx, r in enumerate(blk):
            for k in range(c):
                coord[(r, k)] = part.node(i, idx % a, k)

    # Round 1: nonzero counts to coordinators.
    msgs = []
    for t, per_row in held.items():
        k = part.triple(t)[2]
        for r, lst in per_row.items():
            msgs.append((t, coord[(r, k)], (r, len(lst))))
    inbox = clique.route_bulk(msgs)
    totals = Counter()
    members = {}
    for u in range(n):
        for src, (r, cnt) in inbox[u]:
            k = part.triple(src)[2]
            totals[(r, k)] += cnt
            members.setdefault((r, k), []).append(src)

    result = {}
    for i, blk in enumerate(part.row_blocks):
        for r in blk:
            for k in range(c):
                result[(r, k)] = CutoffValue(semiring.zero, n - 1)
    active = {rk: [] for rk, tot in totals.items() if tot > rho}

    for stage in range(ncomp + 1):
        hi_dom = domain_hi[stage] if stage < ncomp else n - 1
        bounds = {rk: [0, hi_dom] for rk in active}
        while any(lo < hi for lo, hi in bounds.values()):
            probes = {}
            msgs = []
            for rk, (lo, hi) in bounds.items():
                if lo >= hi:
                    continue
                mid = (lo + hi) // 2
                prefix = tuple(active[rk]) + (mid,)
                if stage < ncomp:
                    probe = prefix + (INF,) * (ncomp - stage - 1) + (n - 1,)
                else:
                    probe = prefix
                probes[rk] = probe
                r = rk[0]
                for t in members[rk]:
                    msgs.append((coord[rk], t, probe[:-1] + (r * n + probe[-1],)))
            inbox = clique.route_bulk(msgs)
            replies = []
            for t in range(n):
                for src, p in inbox[t]:
                    r, _ = divmod(p[-1], n)
                    lst = held[t][r]
                    replies.append((t, src, (r, bisect_right(lst, p[:-1] + (p[-1] % n,)))))
            inbox = clique.route_bulk(replies)
            counts = Counter()
            for u in range(n):
                for src, (r, cnt) in inbox[u]:
                    counts[(r, part.triple(src)[2])] += cnt
            for rk, probe in probes.items():
                mid = probe[stage]
                if counts[rk] >= rho:
                    bounds[rk][1] = mid
                else:
                    bounds[rk][0] = mid + 1
        for rk, (lo, _) in bounds.items():
            active[rk].append(lo)

    # Coordinators announce the cutoff of every row they own to its holders.
    msgs = []
    for rk, mem in members.items():
        if rk in active:
            key = tuple(active[rk])
        else:
            key = sentinel_key
        r = rk[0]
        for t in mem:
            msgs.append((coord[rk], t, key[:-1] + (r * n + key[-1],)))
        if rk in active:
            comps = key[:-1]
            val = semiring.decode(comps) if ncomp else semiring.one
            result[rk] = CutoffValue(val, key[-1])
    clique.route_bulk(msgs)
    return result


def filtered_mm(S, T, rho, clique=None) -> MMResult:
    """Rows of S*T cut down to their rho smallest entries under (value, column) order."""
    _check_inputs(S, T)
    if not isinstance(rho, int) or rho < 1:
        raise PreconditionError("rho must be a positive integer")
    n = S.n
    sr = S.semiring
    clique = clique or Clique(n)
    if clique.n != n:
        raise PreconditionError("clique size differs from matrix size")
    rho_eff = min(rho, n)
    counts = _learn_counts(clique, S, T)
    rho_s, rho_t = max(1, -(-sum(counts[0]) // n)), max(1, -(-sum(counts[1]) // n))
    a, b, c = mm_params(rho_s, rho_t, rho_eff, n)
    part = cube_partition(S, T, a, b, c, clique, counts)
    cache = {}
    sigma1 = list(range(part.tasks)) + [None] * (n - part.tasks)
    products = distribute_products(clique, part, S, T, sigma1, cache)

    domain_hi = [2 * x for x in _learn_max_components(clique, S, T)]
    cutoffs = cutoff_search(clique, part, products, rho_eff, domain_hi, sr)

    # Drop everything past the cutoff of its row.
    kept = {}
    for t, prod in products.items():
        k = part.triple(t)[2]
        mine = []
        for pos in sorted(prod):
            val, wit = prod[pos]
            r, col = divmod(pos, n)
            cut = cutoffs[(r, k)]
            if _order_key(sr, val, col) <= _order_key(sr, cut.r, cut.s):
                mine.append((pos, val, wit))
        kept[t] = mine
    values = _balance_filtered(clique, part, S, T, kept, rho_eff, cache)
    rows = sum_intermediate(clique, values, sr)
    key = sr.key
    out = []
    for r in rows:
        if len(r) > rho_eff:
            best = sorted(r.items(), key=lambda cv: (key(cv[1][0]), cv[0]))[:rho_eff]
            r = dict(sorted(best))
        out.append(r)
    product, witnesses = _assemble(n, out, sr)
    params = {"a": a, "b": b, "c": c, "rho_s": rho_s, "rho_t": rho_t, "rho": rho}
    return MMResult(product, witnesses, clique.ledger, params, 0)


def _balance_filtered(clique, part, S, T, kept, rho, cache):
    """Spread the surviving block entries so each node holds O(rho * c) of them.

    Duplicates for a node of B_ik come from B_ik itself, which already knows the
    cutoffs of those rows.
    """
    n = clique.n
    a = part.a
    w = [len(kept.get(t, ())) for t in range(n)]
    clique.broadcast([(x,) for x in w])
    sigma = [None] * n
    responsible = {t: [t] for t in range(part.tasks)}
    sizes = {}
    for i, blk in enumerate(part.row_blocks):
        D = max(1, -(-rho * len(blk) // a))
        alpha = -(-len(blk) * part.b // n)
        cap = LOAD_CONST * rho * alpha * -(-n // (a * part.b))
        for k in range(part.c):
            group = [part.node(i, j, k) for j in range(a)]
            free = iter(group)
            for t in group:
                sizes[t] = (D, cap)
                for _ in range(w[t] // D):
                    u = next(free, None)
                    if u is None:
                        raise InvariantViolation(f"group ({i},{k}) ran out of duplicate slots")
                    sigma[u] = t
                    responsible[t].append(u)
    if any(s is not None for s in sigma):
        distribute_products(clique, part, S, T, sigma, cache)
    values = [[] for _ in range(n)]
    caps = [None] * n
    for t in range(part.tasks):
        D, cap = sizes[t]
        for v, chunk in _chunks(kept.get(t, []), D, responsible[t]):
            values[v].extend(chunk)
            caps[v] = cap if caps[v] is None else max(caps[v], cap)
    for v in range(n):
        if caps[v] is not None and len(values[v]) > caps[v]:
            raise InvariantViolation(f"node {v} holds {len(values[v])} > {caps[v]} filtered values")
    return values
