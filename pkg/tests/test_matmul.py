import pytest

from conftest import SEMIRING_LIST, rand_graph, rand_matrix
from ccdist.clique import Clique
from ccdist.errors import DensityUnderestimate, PreconditionError, WeightViolation
from ccdist.graph import Graph
from ccdist.matmul import (balance_intermediate, balance_load, cube_partition, distribute_products,
                           filtered_mm, local_product, mm_params, sparse_mm, sum_intermediate)
from ccdist.matrix import SparseMatrix, minplus_weight_matrix, weight_matrix
from ccdist.oracle import brute_distance_product, brute_filter
from ccdist.rng import SplitMix64
from ccdist.semiring import AUGMENTED, MIN_PLUS


def test_mm_params_dense():
    for n in (8, 27, 64):
        a, b, c = mm_params(n, n, n, n)
        root = round(n ** (1 / 3))
        assert (a, b, c) == (root, root, root)


def test_mm_params_sparse_n8():
    assert mm_params(1, 1, 1, 8) == (2, 2, 2)


def test_mm_params_n1():
    assert mm_params(1, 1, 1, 1) == (1, 1, 1)


def test_mm_params_fit_clique():
    for n in (5, 12, 30):
        for rs in (1, 3, n):
            for rt in (1, 2, n):
                for rp in (1, n):
                    a, b, c = mm_params(rs, rt, rp, n)
                    assert 1 <= a * b * c <= n


def test_cube_partition_identity_slices():
    eye = SparseMatrix.identity(8, MIN_PLUS)
    part = cube_partition(eye, eye, 2, 2, 2)
    for t in range(part.tasks):
        rows, (s, e), _ = part.subcube(t)
        nz = sum(1 for r in rows for m in range(s, e) if m in eye.rows[r])
        assert nz <= 4


def test_cube_partition_dense_covers_cube():
    dense = SparseMatrix(8, [{c: (1, 1) for c in range(8)} for _ in range(8)], AUGMENTED)
    part = cube_partition(dense, dense, 2, 2, 2)
    seen = set()
    for t in range(part.tasks):
        rows, (s, e), cols = part.subcube(t)
        for r in rows:
            for m in range(s, e):
                for col in cols:
                    assert (r, m, col) not in seen
                    seen.add((r, m, col))
    assert len(seen) == 8 ** 3
    assert all(len(b) == 4 for b in part.row_blocks + part.col_blocks)


def test_cube_partition_zero_s():
    zero = SparseMatrix(8, None, MIN_PLUS)
    part = cube_partition(zero, SparseMatrix.identity(8), 2, 2, 2)
    assert all(len(col) == 0 for col in part.s_columns)


def test_balance_load_concentrated():
    n = 8
    cl = Clique(n)
    entries = [[(n, i, (i,)) for i in range(n)]] + [[] for _ in range(n - 1)]
    out = balance_load(cl, entries, total=n * n)
    assert sorted(idx for items in out for _, idx, _ in items) == list(range(n))
    assert all(sum(w for w, _, _ in items) <= 2 * (n + n) for items in out)


def test_balance_load_zero_weights():
    n = 4
    out = balance_load(Clique(n), [[(0, v, ())] for v in range(n)])
    assert sorted(idx for items in out for _, idx, _ in items) == list(range(n))


def test_balance_load_rejects_heavy():
    with pytest.raises(WeightViolation):
        balance_load(Clique(3), [[(4, 0, ())], [], []])
    with pytest.raises(WeightViolation):
        balance_load(Clique(3), [[(3, 0, ())], [], []], total=2)


def test_distribute_products_matches_slices():
    rng = SplitMix64(5)
    n = 8
    S = rand_matrix(n, 2, MIN_PLUS, rng)
    T = rand_matrix(n, 2, MIN_PLUS, rng)
    a, b, c = mm_params(S.density(), T.density(), n, n)
    cl = Clique(n)
    part = cube_partition(S, T, a, b, c, cl)
    prods = distribute_products(cl, part, S, T, list(range(part.tasks)) + [None] * (n - part.tasks))
    for t, prod in prods.items():
        rows, (s, e), cols = part.subcube(t)
        exp = {}
        for r in rows:
            for m in range(s, e):
                if m not in S.rows[r]:
                    continue
                for col in cols:
                    if col in T.rows[m]:
                        val = S.rows[r][m] + T.rows[m][col]
                        pos = r * n + col
                        if pos not in exp or val < exp[pos][0]:
                            exp[pos] = (val, m)
        assert prod == exp


def test_distribute_products_constant_sigma():
    n = 8
    eye = SparseMatrix.identity(n, MIN_PLUS)
    cl = Clique(n)
    part = cube_partition(eye, eye, 2, 2, 2, cl)
    prods = distribute_products(cl, part, eye, eye, [3] * n)
    assert list(prods) == [3]


def test_local_product_smallest_witness():
    prod = local_product(4, {1: [(0, 2)], 2: [(0, 1)]}, {1: [(3, 1)], 2: [(3, 2)]}, MIN_PLUS)
    assert prod == {3: (3, 1)}


def test_balance_intermediate_underestimate():
    n = 8
    star = Graph(n, [(0, v, 1) for v in range(1, n)])
    W = minplus_weight_matrix(star)
    cl = Clique(n)
    a, b, c = mm_params(W.density(), W.density(), 1, n)
    part = cube_partition(W, W, a, b, c, cl)
    prods = distribute_products(cl, part, W, W, list(range(part.tasks)) + [None] * (n - part.tasks))
    with pytest.raises(DensityUnderestimate):
        balance_intermediate(cl, part, W, W, prods, 1)


def test_star_square_duplicates_dense_task():
    n = 16
    star = Graph(n, [(0, v, 1) for v in range(1, n)])
    W = minplus_weight_matrix(star)
    res = sparse_mm(W, W)
    assert res.restarts >= 1
    assert res.product == brute_distance_product(W, W).product


def test_sum_intermediate_min():
    n = 4
    cl = Clique(n)
    values = [[(1, 5, 2)], [(1, 3, 0)], [], []]
    rows = sum_intermediate(cl, values, MIN_PLUS)
    assert rows[0] == {1: (3, 0)}
    assert all(r == {} for r in rows[1:])


def test_sum_intermediate_scatter():
    n = 4
    values = [[(v * n + v, v, v)] for v in range(n)]
    rows = sum_intermediate(Clique(n), values, MIN_PLUS)
    assert rows == [{v: (v, v)} for v in range(n)]


def test_identity_times_a():
    rng = SplitMix64(1)
    A = rand_matrix(8, 3, AUGMENTED, rng)
    eye = SparseMatrix.identity(8, AUGMENTED)
    res = sparse_mm(eye, A)
    assert res.product == A
    assert res.witnesses == [{c: r for c in A.rows[r]} for r in range(8)]


def test_path_square_witness():
    W = weight_matrix(Graph(3, [(0, 1, 1), (1, 2, 2)]))
    res = sparse_mm(W, W)
    assert res.product.get(0, 2) == (3, 2)
    assert res.witnesses[0][2] == 1


def test_mismatched_inputs():
    with pytest.raises(PreconditionError):
        sparse_mm(SparseMatrix(3), SparseMatrix(4))
    with pytest.raises(PreconditionError):
        sparse_mm(SparseMatrix(3, None, MIN_PLUS), SparseMatrix(3, None, AUGMENTED))


@pytest.mark.parametrize("semiring", SEMIRING_LIST, ids=lambda s: s.name)
def test_sparse_mm_random_16(semiring):
    rng = SplitMix64(77)
    for _ in range(5):
        S = rand_matrix(16, 2, semiring, rng)
        T = rand_matrix(16, 2, semiring, rng)
        res = sparse_mm(S, T)
        exp = brute_distance_product(S, T)
        assert res.product == exp.product
        assert res.witnesses == exp.witnesses
        for r in range(16):
            for c, w in res.witnesses[r].items():
                assert semiring.mul(S.get(r, w), T.get(w, c)) == res.product.get(r, c)


def test_filtered_rho_n_equals_product():
    rng = SplitMix64(2)
    S = rand_matrix(8, 3, MIN_PLUS, rng)
    T = rand_matrix(8, 3, MIN_PLUS, rng)
    assert filtered_mm(S, T, 8).product == sparse_mm(S, T).product


def test_filtered_rho_1_keeps_diagonal():
    W = weight_matrix(rand_graph(12, 0.3, 4))
    out = filtered_mm(W, W, 1).product
    assert out.rows == [{v: (0, 0)} for v in range(12)]


def test_filtered_random_rho3():
    rng = SplitMix64(9)
    for _ in range(5):
        S = rand_matrix(16, 3, AUGMENTED, rng)
        T = rand_matrix(16, 3, AUGMENTED, rng)
        exp = brute_filter(brute_distance_product(S, T).product, 3)
        assert filtered_mm(S, T, 3).product == exp


def test_filtered_empty_and_small_rows():
    n = 6
    S = SparseMatrix(n, [{0: 1, 1: 2, 2: 3}] + [{} for _ in range(n - 1)], MIN_PLUS)
    T = SparseMatrix.identity(n, MIN_PLUS)
    out = filtered_mm(S, T, 2).product
    assert out.rows[0] == {0: 1, 1: 2}
    assert all(r == {} for r in out.rows[1:])


def test_filtered_rejects_zero_rho():
    with pytest.raises(PreconditionError):
        filtered_mm(SparseMatrix(3), SparseMatrix(3), 0)
