"""Experiment orchestration: run one algorithm on one graph, check its bounds, report.

Reports are plain dicts following ``docs/report.schema.json``. Bound checks
use the sequential oracles when ``n <= oracle_cap`` and are marked
``unchecked`` otherwise.
"""
import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field

from . import oracle
from .apps import apsp_unweighted, apsp_weighted, diameter_approx, mssp, sssp_exact
from .clique import Clique, NodeProgram, log2ceil
from .disttools import ThroughSet, distance_through_sets, k_nearest, source_detection
from .errors import CliqueError, InvariantViolation, PreconditionError
from .generators import generate
from .graph import Graph
from .hopset import build_hopset
from .matmul import filtered_mm, sparse_mm
from .matrix import minplus_weight_matrix
from .rng import SplitMix64
from .semiring import INF

SCHEMA_VERSION = "1.0"
ALGORITHMS = ("mm", "filtered-mm", "knearest", "srcdetect", "through", "hopset", "mssp",
              "apsp-w", "apsp-u", "sssp", "diameter", "oracle", "noop")

EXIT_OK, EXIT_BOUND, EXIT_PRECONDITION, EXIT_INVARIANT = 0, 2, 3, 4


@dataclass
class ExperimentConfig:
    algorithm: str
    n: int = 16
    seed: int = 0
    generator: str = "random-weighted"
    p: float = None  # edge probability; defaults to 3/n
    max_weight: int = 10
    connected: bool = False
    graph_file: str = None
    eps: float = 0.5
    k: int = None
    sources: int = None  # number of sources, drawn with the seed
    d: int = None  # hop bound for source detection
    cost_route: int = None
    cost_sort: int = None
    cost_hit: int = None
    oracle_cap: int = 128
    csv: bool = False

    def clique(self, n) -> Clique:
        return Clique(n, cost_route=self.cost_route, cost_sort=self.cost_sort, cost_hit=self.cost_hit)

    def graph(self) -> Graph:
        if self.graph_file:
            return Graph.read(self.graph_file)
        p = self.p if self.p is not None else min(1.0, 3 / max(1, self.n))
        return generate(self.generator, self.n, self.seed, p=p, max_weight=self.max_weight,
                        connected=self.connected)

    def source_list(self, n) -> list:
        count = self.sources if self.sources is not None else math.ceil(math.sqrt(n))
        if count <= 0:
            return []
        return sorted(SplitMix64(self.seed ^ 0x5EED).sample(list(range(n)), min(count, n)))


@dataclass
class ExperimentReport:
    config: dict
    outputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    ledger: dict = None
    wall_time_s: float = 0.0
    error: dict = None
    pairs: list = field(default_factory=list)  # (u, v, true, estimate) for CSV output

    def check(self, name, bound, realized, ok):
        self.checks.append({"name": name, "bound": bound, "realized": realized,
                            "status": "pass" if ok else "fail"})

    def unchecked(self, name, bound):
        self.checks.append({"name": name, "bound": bound, "realized": None, "status": "unchecked"})

    @property
    def exit_code(self) -> int:
        if self.error:
            return EXIT_PRECONDITION if self.error["kind"] == "precondition" else EXIT_INVARIANT
        if any(c["status"] == "fail" for c in self.checks):
            return EXIT_BOUND
        return EXIT_OK

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "outputs": self.outputs,
            "checks": self.checks,
            "ledger": self.ledger,
            "wall_time_s": round(self.wall_time_s, 6),
            "error": self.error,
            "exit_code": self.exit_code,
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["u", "v", "true", "estimate", "ratio"])
        for u, v, d, e in self.pairs:
            ratio = "" if d in (0, INF) or e >= INF else f"{e / d:.6f}"
            w.writerow([u, v, "inf" if d >= INF else d, "inf" if e >= INF else e, ratio])
        return buf.getvalue()


def _fmt(x):
    return "inf" if x >= INF else x


# per-algorithm runners: (cfg, g, clique, report, checked) -> None


def _run_mm(cfg, g, cl, rep, checked):
    M = minplus_weight_matrix(g)
    res = sparse_mm(M, M, clique=cl)
    rep.outputs.update({"nz": res.product.nz, "params": res.params, "restarts": res.restarts})
    if checked:
        bp = oracle.brute_distance_product(M, M)
        ok = res.product == bp.product and res.witnesses == bp.witnesses
        rep.check("product equals brute-force product", "exact", "equal" if ok else "differs", ok)


def _run_filtered(cfg, g, cl, rep, checked):
    M = minplus_weight_matrix(g)
    rho = cfg.k or math.ceil(math.sqrt(g.n))
    res = filtered_mm(M, M, rho, clique=cl)
    rep.outputs.update({"nz": res.product.nz, "rho": rho, "params": res.params})
    if checked:
        exp = oracle.brute_filter(oracle.brute_distance_product(M, M).product, rho)
        ok = res.product == exp
        rep.check("rows equal the rho smallest of the brute product", "exact", "equal" if ok else "differs", ok)


def _run_knearest(cfg, g, cl, rep, checked):
    k = cfg.k or math.ceil(math.sqrt(g.n))
    knn = k_nearest(g, k, cl)
    rep.outputs.update({"k": k, "sizes": [len(s.members) for s in knn.sets]})
    if checked:
        exp = oracle.brute_k_nearest(g, k)
        bad = sum(1 for v in range(g.n) if knn[v].members != exp[v])
        rep.check("nearest sets equal the lexicographic oracle", "0 mismatches", bad, bad == 0)
        bad = 0
        for near in knn.sets:
            mem = set(near.nodes())
            bad += sum(1 for u in mem if not set(knn.path(near.owner, u)) <= mem)
        rep.check("witness paths stay inside the nearest set", "0 violations", bad, bad == 0)


def _run_srcdetect(cfg, g, cl, rep, checked):
    S = cfg.source_list(g.n)
    d = cfg.d or g.n
    k = cfg.k or len(S)
    res = source_detection(g, S, d, k, clique=cl)
    rep.outputs.update({"sources": S, "d": d, "k": k, "variant": res.variant, "iterations": res.iterations})
    if checked:
        bf = oracle.bounded_hop_bellman_ford(g, S, d)
        bad = 0
        for v in range(g.n):
            exp = sorted(((s, bf[s][v]) for s in S if not bf[s][v].is_inf()), key=lambda x: (x[1], x[0]))[:k]
            bad += res[v].sources != exp
        rep.check("tables equal bounded-hop Bellman-Ford", "0 mismatches", bad, bad == 0)


def _run_through(cfg, g, cl, rep, checked):
    n = g.n
    rng = SplitMix64(cfg.seed)
    dist = oracle.distances(g)
    size = cfg.k or math.ceil(math.sqrt(n))
    sets = []
    for v in range(n):
        W = [w for w in rng.sample(list(range(n)), min(n, size)) if dist[v][w] < INF]
        sets.append(ThroughSet(v, {w: dist[v][w] for w in W}, {w: dist[w][v] for w in W}))
    res = distance_through_sets(sets, n, cl)
    rep.outputs.update({"set_size": size, "finite": res.estimates.nz})
    if checked:
        bad = 0
        for v in range(n):
            for u in range(n):
                c = [sets[v].out[w] + sets[u].back[w] for w in sets[v].out if w in sets[u].back]
                bad += res.get(v, u) != (min(c) if c else INF)
        rep.check("estimates equal min over shared members", "0 mismatches", bad, bad == 0)


def _stretch_pairs(D, est_of, n):
    for u in range(n):
        for v in range(n):
            yield u, v, D[u][v], est_of(u, v)


def _run_hopset(cfg, g, cl, rep, checked):
    H, _ = build_hopset(g, cfg.eps, cl, k=cfg.k)
    n = g.n
    cap = 4 * n ** 1.5 * log2ceil(n)
    rep.outputs.update({"edges": len(H), "beta": H.beta, "k": H.k, "hitting_set": H.hitting,
                        "eps0": H.eps0, "delta": H.delta})
    rep.check("edge count", f"<= 4 n^1.5 log n = {cap:.0f}", len(H), len(H) <= cap)
    if checked:
        D = oracle.distances(g)
        bad = sum(1 for u, v, w, _ in H.edges if w < D[u][v])
        rep.check("hopset edges never underestimate", "0 violations", bad, bad == 0)
        bf = oracle.bounded_hop_bellman_ford(H.union(g), range(n), H.beta)
        worst, bad = 1.0, 0
        for u in range(n):
            for v in range(n):
                d, e = D[u][v], bf[u][v][0]
                if d >= INF:
                    bad += e < INF
                    continue
                if e < d or e > (1 + cfg.eps) * d:
                    bad += 1
                if d > 0:
                    worst = max(worst, e / d)
        rep.check("beta-hop stretch in G + H", f"<= 1 + eps = {1 + cfg.eps}", round(worst, 6), bad == 0)


def _run_mssp(cfg, g, cl, rep, checked):
    S = cfg.source_list(g.n)
    res = mssp(g, S, cfg.eps, cl)
    rep.outputs.update({"sources": S, "hopset_edges": len(res.hopset), "beta": res.hopset.beta})
    if checked:
        D = oracle.distances(g)
        worst, bad = 1.0, 0
        for s in S:
            for v in range(g.n):
                d, e = D[s][v], res[s][v]
                rep.pairs.append((s, v, d, e))
                if d >= INF:
                    bad += e < INF
                    continue
                bad += not d <= e <= (1 + cfg.eps) * d
                if d:
                    worst = max(worst, e / d)
        rep.check("(1+eps)-approximate source distances", f"<= {1 + cfg.eps}", round(worst, 6), bad == 0)


def _run_apsp_w(cfg, g, cl, rep, checked):
    est = apsp_weighted(g, cfg.eps, cl, k=cfg.k)
    rep.outputs.update({"k": est.info["k"], "hitting_set": est.info["hitting_set"]})
    rep.check("estimates symmetric", "delta(u,v) = delta(v,u)", est.is_symmetric(), est.is_symmetric())
    if checked:
        D = oracle.distances(g)
        B = oracle.bottleneck_table(g)
        bad, worst = 0, 0.0
        for u, v, d, e in _stretch_pairs(D, lambda a, b: est[a, b], g.n):
            rep.pairs.append((u, v, d, e))
            if d >= INF:
                bad += e < INF
                continue
            bound = (2 + cfg.eps) * d + (1 + cfg.eps) * B[u][v]
            bad += not d <= e <= bound
            if d:
                worst = max(worst, e / d)
        rep.check("(2+eps, (1+eps)W) bound", "d <= delta <= (2+eps)d + (1+eps)W", round(worst, 6), bad == 0)


def _run_apsp_u(cfg, g, cl, rep, checked):
    est = apsp_unweighted(g, cfg.eps, cl, k=cfg.k)
    rep.outputs.update({"k": est.info["k"], "k2": est.info["k2"], "high": len(est.info["high"]),
                        "hitting_set": est.info["hitting_set"], "hitting_set_low": est.info["hitting_set_low"]})
    rep.check("estimates symmetric", "delta(u,v) = delta(v,u)", est.is_symmetric(), est.is_symmetric())
    if checked:
        D = oracle.distances(g)
        bad, worst = 0, 0.0
        for u, v, d, e in _stretch_pairs(D, lambda a, b: est[a, b], g.n):
            rep.pairs.append((u, v, d, e))
            if d >= INF:
                bad += e < INF
                continue
            bad += not d <= e <= (2 + cfg.eps) * d
            if d:
                worst = max(worst, e / d)
        rep.check("(2+eps) stretch", f"<= {2 + cfg.eps}", round(worst, 6), bad == 0)


def _run_sssp(cfg, g, cl, rep, checked):
    src = cfg.seed % g.n
    res = sssp_exact(g, src, k=cfg.k, clique=cl)
    bound = math.ceil(4 * g.n / res.k)
    rep.outputs.update({"source": src, "k": res.k, "iterations": res.iterations,
                        "dist": [_fmt(x) for x in res.dist]})
    rep.check("Bellman-Ford iterations", f"< ceil(4n/k) = {bound}", res.iterations, res.iterations < bound)
    if checked:
        exp = oracle.distances(g)[src]
        ok = res.dist == exp
        rep.check("distances equal Dijkstra", "exact", "equal" if ok else "differs", ok)


def _run_diameter(cfg, g, cl, rep, checked):
    res = diameter_approx(g, cfg.eps, cl, k=cfg.k)
    rep.outputs.update({"estimate": res.value, "certificate": list(res.certificate), "w": res.w})
    if checked:
        D = oracle.brute_diameter(g)
        if g.is_unweighted():
            h, z = divmod(D, 3)
            lo = 2 * h + z if z < 2 else 2 * h + 1
        else:
            lo = math.floor(2 * D / 3 - g.max_weight)
        hi = (1 + cfg.eps) * D
        rep.check("diameter bounds", f"{lo} <= D' <= {hi:g}", res.value, lo <= res.value <= hi)


def _run_oracle(cfg, g, cl, rep, checked):
    rep.outputs["distances"] = [[_fmt(x) for x in row] for row in oracle.distances(g)]


class _Pings(NodeProgram):
    """Fixed three-round program: every node pings its successor."""

    def setup(self, n):
        super().setup(n)
        self.left = [3] * n

    def step(self, v, rnd, inbox):
        if self.left[v] == 0:
            return []
        self.left[v] -= 1
        return [((v + 1) % self.n, (rnd,))]

    def halted(self, v):
        return self.left[v] == 0


def _run_noop(cfg, g, cl, rep, checked):
    if g.n >= 2:
        cl.run(_Pings())


RUNNERS = {
    "mm": _run_mm, "filtered-mm": _run_filtered, "knearest": _run_knearest, "srcdetect": _run_srcdetect,
    "through": _run_through, "hopset": _run_hopset, "mssp": _run_mssp, "apsp-w": _run_apsp_w,
    "apsp-u": _run_apsp_u, "sssp": _run_sssp, "diameter": _run_diameter, "oracle": _run_oracle,
    "noop": _run_noop,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run ``cfg.algorithm``; errors from the algorithms become a structured ``error`` entry."""
    rep = ExperimentReport(config=asdict(cfg))
    t0 = time.perf_counter()
    cl = None
    try:
        if cfg.algorithm not in RUNNERS:
            raise PreconditionError(f"unknown algorithm {cfg.algorithm!r}")
        g = cfg.graph()
        rep.outputs["graph"] = {"n": g.n, "m": g.m, "max_weight": g.max_weight}
        cl = cfg.clique(g.n)
        checked = g.n <= cfg.oracle_cap
        RUNNERS[cfg.algorithm](cfg, g, cl, rep, checked)
        if not checked:
            rep.unchecked("oracle comparison", f"n > oracle cap {cfg.oracle_cap}")
    except PreconditionError as exc:
        rep.error = {"kind": "precondition", "type": type(exc).__name__, "message": str(exc)}
    except (InvariantViolation, CliqueError) as exc:
        rep.error = {"kind": "invariant", "type": type(exc).__name__, "message": str(exc)}
    rep.wall_time_s = time.perf_counter() - t0
    rep.ledger = cl.ledger.to_json() if cl is not None else None
    return rep


# scaling


def formula(algorithm, n, eps=0.5, sources=None, k=None) -> float:
    """Declared round-complexity shape of each algorithm, constants dropped."""
    L = log2ceil(n)
    if algorithm == "mm":
        return n ** (1 / 3) + 1  # dense inputs: rho_S = rho_T = rho_hat = n
    if algorithm == "filtered-mm":
        return n ** (1 / 3) + L
    if algorithm == "knearest":
        kk = k or math.ceil(math.sqrt(n))
        return (kk / n ** (2 / 3) + L) * log2ceil(kk)
    if algorithm == "hopset":
        beta = math.ceil(12 * L / eps)
        return beta * L + L * L
    if algorithm == "mssp":
        s = sources or math.ceil(math.sqrt(n))
        return (s ** (2 / 3) / n ** (1 / 3) + L) * L / eps
    if algorithm in ("apsp-w", "apsp-u", "diameter"):
        return L * L / eps
    if algorithm == "sssp":
        return (n ** (1 / 6) + L) * L
    return 1.0


@dataclass
class SweepResult:
    algorithm: str
    rows: list  # (n, seed, charged_rounds, formula)
    constant: float
    verdicts: list  # (n, max_charged, allowed, pass)

    @property
    def passed(self) -> bool:
        return all(v[3] for v in self.verdicts)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["n", "seed", "charged_rounds", "formula"])
        for row in self.rows:
            w.writerow([row[0], row[1], row[2], f"{row[3]:.6f}"])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "algorithm": self.algorithm, "constant": self.constant,
                "rows": [list(r) for r in self.rows],
                "verdicts": [{"n": n, "max_charged": m, "allowed": a, "pass": ok} for n, m, a, ok in self.verdicts]}


def scaling_sweep(algorithm, ns, seeds, base: ExperimentConfig = None) -> SweepResult:
    """Charged rounds over ``ns``; the constant is fitted on ``ns[0]`` and must hold for the rest."""
    ns = list(ns)
    if ns != sorted(ns):
        raise PreconditionError("n-list must be sorted")
    base = base or ExperimentConfig(algorithm)
    rows = []
    for n in ns:
        for seed in seeds:
            cfg = ExperimentConfig(**{**asdict(base), "algorithm": algorithm, "n": n, "seed": seed,
                                      "oracle_cap": 0})
            rep = run_experiment(cfg)
            if rep.error:
                raise InvariantViolation(f"sweep run n={n} seed={seed} failed: {rep.error['message']}")
            f = formula(algorithm, n, cfg.eps, cfg.sources, cfg.k)
            rows.append((n, seed, rep.ledger["charged_rounds"], f))
    first = [r for r in rows if r[0] == ns[0]]
    constant = max(r[2] / r[3] for r in first)
    verdicts = []
    for n in ns:
        mine = [r for r in rows if r[0] == n]
        allowed = constant * mine[0][3]
        worst = max(r[2] for r in mine)
        verdicts.append((n, worst, allowed, worst <= allowed + 1e-9))
    return SweepResult(algorithm, rows, constant, verdicts)
