import math

import pytest

from conftest import rand_graph
from ccdist.apps import apsp_unweighted, apsp_weighted, diameter_approx, mssp, sssp_exact
from ccdist.errors import Disconnected, EmptySources, PreconditionError, WeightedInput
from ccdist.generators import complete, cycle, path, star, two_cliques
from ccdist.graph import Graph
from ccdist.oracle import bfs, bottleneck_table, brute_diameter, distances
from ccdist.semiring import INF


def diameter_lower(D):
    h, z = divmod(D, 3)
    return 2 * h + z if z < 2 else 2 * h + 1


def test_mssp_path_single_source():
    g = path(12)
    r = mssp(g, [0], 0.5)
    assert all(v <= r[0][v] <= 1.5 * v for v in range(12))


def test_mssp_complete_all_sources():
    g = complete(8)
    r = mssp(g, list(range(8)), 0.5)
    for s in range(8):
        assert r[s] == [0 if v == s else 1 for v in range(8)]


def test_mssp_disconnected():
    g = Graph(4, [(0, 1, 1), (2, 3, 1)])
    r = mssp(g, [0], 0.5)
    assert r[0][2] >= INF and r[0][1] == 1


def test_mssp_random_and_errors():
    g = rand_graph(20, 0.15, 6)
    D = distances(g)
    S = [1, 4, 9, 13, 17]
    r = mssp(g, S, 0.25)
    for s in S:
        for v in range(20):
            if D[s][v] >= INF:
                assert r[s][v] >= INF
            else:
                assert D[s][v] <= r[s][v] <= 1.25 * D[s][v]
    with pytest.raises(EmptySources):
        mssp(g, [], 0.5)
    with pytest.raises(PreconditionError):
        mssp(g, [0], 0)


def test_apsp_w_star_exact():
    g = star(9, weight=3)
    est = apsp_weighted(g, 0.5)
    D = distances(g)
    assert all(est[u, v] == D[u][v] for u in range(9) for v in range(9))


def test_apsp_w_adjacent_exact():
    g = rand_graph(16, 0.2, 2)
    D = distances(g)
    est = apsp_weighted(g, 0.25)
    for u, v, w in g.edges:
        if D[u][v] == w:
            assert est[u, v] == w


@pytest.mark.parametrize("sketch3", [False, True])
def test_apsp_w_bound(sketch3):
    g = rand_graph(24, 0.12, 5, max_weight=12)
    D = distances(g)
    W = bottleneck_table(g)
    est = apsp_weighted(g, 0.25, sketch3=sketch3)
    assert est.is_symmetric()
    for u in range(24):
        for v in range(24):
            d = D[u][v]
            if d >= INF:
                assert est[u, v] >= INF
            else:
                assert d <= est[u, v] <= 2.25 * d + 1.25 * W[u][v]


def test_apsp_u_complete_exact():
    est = apsp_unweighted(complete(9), 0.5)
    assert all(est[u, v] == (u != v) for u in range(9) for v in range(9))


@pytest.mark.parametrize("g", [cycle(9), two_cliques(16), rand_graph(30, 0.1, 1, max_weight=1, connected=True)],
                         ids=["cycle9", "two-cliques16", "random30"])
def test_apsp_u_bound(g):
    est = apsp_unweighted(g, 0.5)
    for u in range(g.n):
        d = bfs(g, u)
        for v in range(g.n):
            assert d[v] <= est[u, v] <= 2.5 * d[v]
    for u, v, _ in g.edges:
        assert est[u, v] == 1


def test_apsp_u_rejects_weights():
    with pytest.raises(WeightedInput):
        apsp_unweighted(Graph(3, [(0, 1, 2)]), 0.5)


def test_sssp_singleton_component():
    g = Graph(4, [(1, 2, 1), (2, 3, 1)])
    r = sssp_exact(g, 0)
    assert r.dist[0] == 0 and all(d >= INF for d in r.dist[1:])


@pytest.mark.parametrize("k", [1, 2, 5, 16])
def test_sssp_path(k):
    r = sssp_exact(path(16), 0, k=k)
    assert r.dist == list(range(16))
    assert r.iterations <= math.ceil(4 * 16 / k)


def test_sssp_random():
    g = rand_graph(40, 0.08, 13, max_weight=25)
    D = distances(g)
    for s in (0, 17):
        r = sssp_exact(g, s)
        assert r.dist == D[s]
        assert r.iterations < math.ceil(4 * 40 / r.k)


def test_diameter_complete():
    assert diameter_approx(complete(8), 0.5).value == 1


def test_diameter_path7():
    de = diameter_approx(path(7), 0.5)
    assert 4 <= de.value <= 9


def test_diameter_random():
    g = rand_graph(32, 0.08, 3, max_weight=1, connected=True)
    D = brute_diameter(g)
    de = diameter_approx(g, 0.25)
    assert diameter_lower(D) <= de.value <= 1.25 * D


def test_diameter_weighted_relaxation():
    g = rand_graph(24, 0.1, 4, max_weight=6, connected=True)
    D = brute_diameter(g)
    de = diameter_approx(g, 0.25)
    assert math.floor(2 * D / 3 - g.max_weight) <= de.value <= 1.25 * D


def test_diameter_disconnected():
    with pytest.raises(Disconnected):
        diameter_approx(Graph(6, [(0, 1, 1), (2, 3, 1), (4, 5, 1)]), 0.5)
