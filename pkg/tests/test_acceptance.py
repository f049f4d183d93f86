"""Acceptance criteria 1-12.

Each test records one ``PASS``/``FAIL`` line, shown in the pytest terminal
summary and printed directly when this file is run as a script.
"""
import math
import time

import pytest

from conftest import ACCEPTANCE_LINES, rand_graph, rand_matrix
from ccdist import clique as clique_mod
from ccdist.apps import apsp_unweighted, apsp_weighted, diameter_approx, mssp, sssp_exact
from ccdist.clique import Clique, log2ceil
from ccdist.disttools import k_nearest, source_detection
from ccdist.errors import BandwidthViolation, DemandViolation
from ccdist.generators import cycle, path, two_cliques
from ccdist.harness import ALGORITHMS, ExperimentConfig, run_experiment, scaling_sweep
from ccdist.hopset import build_hopset
from ccdist.matmul import filtered_mm, sparse_mm
from ccdist.oracle import (bfs, bottleneck_table, bounded_hop_bellman_ford, brute_diameter,
                           brute_distance_product, brute_filter, brute_k_nearest, distances)
from ccdist.rng import SplitMix64
from ccdist.semiring import AUGMENTED, BOOLEAN, INF, MIN_PLUS


def report(num, title, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    line = f"{status} criterion {num:>2}: {title}"
    if detail:
        line += f" ({detail})"
    if failures:
        line += f"; first failure: {failures[0]}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


def test_criterion_01_sparse_mm_exact():
    t0 = time.perf_counter()
    failures = []
    runs = 0
    for sr in (MIN_PLUS, AUGMENTED, BOOLEAN):
        for n in (4, 8, 16, 32):
            for dens in (1, 2, 4, "dense"):
                for seed in range(100):
                    rng = SplitMix64(seed * 7919 + n * 31 + (0 if dens == "dense" else dens))
                    S, T = rand_matrix(n, dens, sr, rng), rand_matrix(n, dens, sr, rng)
                    exp = brute_distance_product(S, T)
                    # odd seeds get the exact density hint, even seeds run the doubling search
                    hint = exp.rho_hat if seed % 2 else None
                    res = sparse_mm(S, T, rho_hat=hint)
                    runs += 1
                    if res.product != exp.product or res.witnesses != exp.witnesses:
                        failures.append((sr.name, n, dens, seed))
    elapsed = time.perf_counter() - t0
    if elapsed >= 120:
        failures.append(f"runtime {elapsed:.1f}s >= 120s")
    report(1, "sparse_mm equals the brute-force product", failures, f"{runs} runs, {elapsed:.1f}s")


def test_criterion_02_filtered_mm():
    failures = []
    runs = 0
    for seed in range(100):
        n = (4, 8, 16, 32)[seed % 4]
        sr = (MIN_PLUS, AUGMENTED)[seed % 2]
        rng = SplitMix64(1000 + seed)
        S, T = rand_matrix(n, 3, sr, rng), rand_matrix(n, 3, sr, rng)
        full = brute_distance_product(S, T).product
        for rho in (1, 3, n):
            runs += 1
            if filtered_mm(S, T, rho).product != brute_filter(full, rho):
                failures.append((seed, n, rho))
    report(2, "filtered_mm keeps the rho smallest per row", failures, f"{runs} runs")


def test_criterion_03_k_nearest():
    failures = []
    runs = 0
    for seed in range(100):
        n = (4, 8, 16, 32)[seed % 4]
        g = rand_graph(n, 3 / n, seed, max_weight=(1, 5, 20)[seed % 3], min_weight=0)
        for k in sorted({1, 2, math.ceil(math.sqrt(n)), n // 2 or 1, n}):
            runs += 1
            kn = k_nearest(g, k)
            exp = brute_k_nearest(g, k)
            for v in range(n):
                if kn[v].members != exp[v]:
                    failures.append(("set", seed, k, v))
                    continue
                members = set(kn[v].nodes())
                for u in members:
                    p = kn.path(v, u)
                    if p[0] != v or p[-1] != u or not set(p) <= members or len(p) - 1 != kn[v].dist(u).t:
                        failures.append(("path", seed, k, v, u))
    report(3, "k-nearest sets and prefix-closed witness paths", failures, f"{runs} runs")


def test_criterion_04_source_detection():
    failures = []
    runs = 0
    for seed in range(100):
        n = (4, 8, 16, 32)[seed % 4]
        rng = SplitMix64(2000 + seed)
        g = rand_graph(n, 3 / n, seed, max_weight=10)
        S = sorted(rng.sample(list(range(n)), max(1, n // 3)))
        for d in (1, 2, n):
            bf = bounded_hop_bellman_ford(g, S, d)
            for k in sorted({1, min(2, len(S)), len(S)}):
                runs += 1
                r1 = source_detection(g, S, d, k, variant=1)
                r2 = source_detection(g, S, d, k, variant=2)
                if r1.tables != r2.tables:
                    failures.append(("variants differ", seed, d, k))
                for v in range(n):
                    exp = sorted(((s, bf[s][v]) for s in S if not bf[s][v].is_inf()),
                                 key=lambda x: (x[1], x[0]))[:k]
                    if r1[v].sources != exp:
                        failures.append(("table", seed, d, k, v))
    report(4, "source detection variants match bounded-hop Bellman-Ford", failures, f"{runs} runs")


def _hopset_violations(g, eps, k=None):
    hs, _ = build_hopset(g, eps, k=k)
    n = g.n
    bad = []
    beta = math.ceil(12 * log2ceil(n) / eps)
    if hs.beta != beta:
        bad.append(("beta", hs.beta, beta))
    cap = 4 * n ** 1.5 * log2ceil(n)
    if len(hs) > cap:
        bad.append(("edges", len(hs), cap))
    D = distances(g)
    bf = bounded_hop_bellman_ford(hs.union(g), list(range(n)), beta)
    for u in range(n):
        for v in range(n):
            d, e = D[u][v], bf[u][v]
            if d >= INF:
                if not e.is_inf():
                    bad.append(("unreachable", u, v))
            elif not d <= e.w <= (1 + eps) * d:
                bad.append(("stretch", u, v, d, e.w))
    return bad


def test_criterion_05_hopset():
    t0 = time.perf_counter()
    failures = []
    runs = 0
    for n in (16, 32, 64):
        for eps in (0.25, 0.5):
            graphs = [path(n)] + [rand_graph(n, 2.5 / n, 100 * n + s, max_weight=30, connected=s % 2 == 0)
                                  for s in range(4)]
            for i, g in enumerate(graphs):
                # the default k and a small k, which yields a multi-node hitting set
                for k in (None, 4):
                    runs += 1
                    for bad in _hopset_violations(g, eps, k):
                        failures.append((n, eps, i, k) + bad)
    elapsed = time.perf_counter() - t0
    if elapsed >= 300:
        failures.append(f"runtime {elapsed:.1f}s >= 300s")
    report(5, "hopset stretch and size", failures, f"{runs} builds, {elapsed:.1f}s")


def test_criterion_06_mssp():
    failures = []
    runs = 0
    for seed in range(50):
        n = (8, 16, 32, 64)[seed % 4]
        rng = SplitMix64(3000 + seed)
        g = rand_graph(n, 2.5 / n, 3000 + seed, max_weight=20)
        D = distances(g)
        eps = (0.25, 0.5)[seed % 2]
        for count in (1, math.ceil(math.sqrt(n))):
            runs += 1
            S = rng.sample(list(range(n)), count)
            r = mssp(g, S, eps)
            for s in S:
                for v in range(n):
                    d = D[s][v]
                    if d >= INF:
                        if r[s][v] < INF:
                            failures.append((seed, s, v, "finite on unreachable"))
                    elif not d <= r[s][v] <= (1 + eps) * d:
                        failures.append((seed, s, v, d, r[s][v]))
    report(6, "MSSP within (1+eps)", failures, f"{runs} runs")


def test_criterion_07_apsp_weighted():
    failures = []
    shared_pairs = 0
    for seed in range(50):
        n = (8, 16, 24, 32)[seed % 4]
        eps = (0.25, 0.5)[seed % 2]
        g = rand_graph(n, 2.5 / n, 4000 + seed, max_weight=15, connected=seed % 3 != 0)
        D = distances(g)
        W = bottleneck_table(g)
        est = apsp_weighted(g, eps)
        near = [dict((u, d.w) for u, d in row) for row in brute_k_nearest(g, est.info["k"])]
        for u in range(n):
            for v in range(n):
                d, e = D[u][v], est[u, v]
                if d >= INF:
                    if e < INF:
                        failures.append((seed, u, v, "finite on unreachable"))
                    continue
                if not d <= e <= (2 + eps) * d + (1 + eps) * W[u][v]:
                    failures.append((seed, u, v, d, e, W[u][v]))
                shared = any(x in near[v] and near[u][x] + near[v][x] == d for x in near[u])
                if shared or v in near[u] or u in near[v]:
                    shared_pairs += 1
                    if e != d:
                        failures.append(("shared-nearest pair not exact", seed, u, v, d, e))
    report(7, "weighted APSP (2+eps, (1+eps)W) with exact shared-nearest pairs", failures, f"{shared_pairs} shared-nearest pairs")


def _apsp_u_check(g, eps, tag, failures):
    est = apsp_unweighted(g, eps)
    for u in range(g.n):
        d = bfs(g, u)
        for v in range(g.n):
            if d[v] >= INF:
                if est[u, v] < INF:
                    failures.append((tag, u, v, "finite on unreachable"))
            elif not d[v] <= est[u, v] <= (2 + eps) * d[v]:
                failures.append((tag, u, v, d[v], est[u, v]))
    for u, v, _ in g.edges:
        if est[u, v] != 1:
            failures.append((tag, "adjacent", u, v, est[u, v]))


def test_criterion_08_apsp_unweighted():
    failures = []
    runs = 0
    for seed in range(50):
        n = (16, 32, 48, 64)[seed % 4]
        g = rand_graph(n, 3 / n, 5000 + seed, max_weight=1, connected=seed % 2 == 0)
        for eps in (0.25, 0.5):
            runs += 1
            _apsp_u_check(g, eps, ("random", seed, eps), failures)
    for n in (9, 16, 33, 64):
        for eps in (0.25, 0.5):
            runs += 2
            _apsp_u_check(cycle(n), eps, ("cycle", n, eps), failures)
            _apsp_u_check(two_cliques(n), eps, ("two-cliques", n, eps), failures)
    report(8, "unweighted APSP (2+eps) with exact adjacency", failures, f"{runs} runs")


def test_criterion_09_sssp():
    failures = []
    worst = 0.0
    for seed in range(50):
        n = (8, 16, 32, 64)[seed % 4]
        g = rand_graph(n, 2.5 / n, 6000 + seed, max_weight=30)
        D = distances(g)
        src = seed % n
        for k in (None, max(1, n // 8)):
            r = sssp_exact(g, src, k=k)
            if r.dist != D[src]:
                failures.append((seed, k, "distances"))
            bound = math.ceil(4 * n / r.k)
            worst = max(worst, r.iterations / bound)
            if not r.iterations < bound:
                failures.append((seed, k, r.iterations, bound))
    report(9, "exact SSSP with iterations below ceil(4n/k)", failures, f"max iterations/bound {worst:.2f}")


def _lower(D):
    h, z = divmod(D, 3)
    return 2 * h + z if z < 2 else 2 * h + 1


def test_criterion_10_diameter():
    failures = []
    for seed in range(50):
        n = (8, 16, 32, 64)[seed % 4]
        eps = (0.25, 0.5)[seed % 2]
        g = rand_graph(n, 2 / n, 7000 + seed, max_weight=1, connected=True)
        D = brute_diameter(g)
        de = diameter_approx(g, eps)
        if not _lower(D) <= de.value <= (1 + eps) * D:
            failures.append(("unweighted", seed, D, de.value))
    for seed in range(20):
        n = (16, 32)[seed % 2]
        g = rand_graph(n, 2 / n, 7500 + seed, max_weight=8, connected=True)
        D = brute_diameter(g)
        de = diameter_approx(g, 0.25)
        if not math.floor(2 * D / 3 - g.max_weight) <= de.value <= 1.25 * D:
            failures.append(("weighted", seed, D, de.value))
    report(10, "diameter bounds", failures)


class _Auditor:
    """Independent check of every lockstep round: one message per ordered pair, payload <= B."""

    def __init__(self):
        self.rounds = 0
        self.violations = []

    def wrap(self, original):
        auditor = self

        def exchange(self, messages):
            messages = list(messages)
            pairs = set()
            for src, dst, payload in messages:
                if len(payload) > self.bandwidth:
                    auditor.violations.append(("payload", src, dst, len(payload)))
                if src != dst:
                    if (src, dst) in pairs:
                        auditor.violations.append(("pair", src, dst))
                    pairs.add((src, dst))
            auditor.rounds += 1
            return original(self, messages)

        return exchange


def test_criterion_11_ledger_discipline(monkeypatch):
    failures = []
    auditor = _Auditor()
    monkeypatch.setattr(clique_mod.Clique, "exchange", auditor.wrap(clique_mod.Clique.exchange))
    for algorithm in ALGORITHMS:
        for seed in range(3):
            unweighted = algorithm in ("apsp-u", "diameter")
            cfg = ExperimentConfig(algorithm, n=(12, 16, 24)[seed], seed=seed, connected=True,
                                   generator="random-gnp" if unweighted else "random-weighted")
            rep = run_experiment(cfg)
            if rep.error or rep.exit_code:
                failures.append((algorithm, seed, rep.error))
            elif rep.ledger["peak_pair_load"] > 1:
                failures.append((algorithm, seed, "peak pair load"))
    failures += auditor.violations
    # the simulator itself must refuse both kinds of violation
    cl = Clique(4)
    for bad in ([(0, 1, (1,)), (0, 1, (2,))], [(0, 1, (1, 2, 3, 4))]):
        try:
            cl.exchange(bad)
            failures.append(("accepted", bad))
        except BandwidthViolation:
            pass
    try:
        cl.route([(0, 1, (0,))] * 5)
        failures.append("route accepted an overloaded sender")
    except DemandViolation:
        pass
    report(11, "ledger discipline", failures, f"{auditor.rounds} audited rounds")


@pytest.mark.parametrize("algorithm,generator", [("mm", "complete"), ("hopset", "random-weighted"),
                                                 ("mssp", "random-weighted")])
def test_criterion_12_scaling(algorithm, generator):
    base = ExperimentConfig(algorithm, generator=generator)
    res = scaling_sweep(algorithm, [16, 32, 64], [0, 1, 2], base)
    failures = [v for v in res.verdicts if not v[3]]
    detail = ", ".join(f"n={n}: {m} <= {a:.0f}" for n, m, a, _ in res.verdicts)
    report(12, f"{algorithm} charged rounds under the fitted formula", failures, detail)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
