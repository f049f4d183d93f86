import pytest

from ccdist.clique import Clique, NodeProgram, RoundLedger, log2ceil, run
from ccdist.errors import ArityViolation, BandwidthViolation, DemandViolation, NonTermination
from ccdist.matmul import sparse_mm
from ccdist.matrix import SparseMatrix
from ccdist.rng import SplitMix64
from ccdist.semiring import AUGMENTED


class Silent(NodeProgram):
    pass


class OneBroadcast(NodeProgram):
    def setup(self, n):
        super().setup(n)
        self.got = [None] * n
        self.sent = False

    def step(self, v, rnd, inbox):
        for src, payload in inbox:
            self.got[v] = payload[0]
        if v == 0 and not self.sent:
            self.sent = True
            return [(u, (42,)) for u in range(1, self.n)]
        return []

    def output(self, v):
        return self.got[v]


class Chatty(NodeProgram):
    def step(self, v, rnd, inbox):
        return [((v + 1) % self.n, (1,))]

    def halted(self, v):
        return False


class Doubler(NodeProgram):
    def step(self, v, rnd, inbox):
        if rnd == 0 and v == 0:
            return [(1, (1,)), (1, (2,))]
        return []


def test_halt_immediately_zero_rounds():
    outs, led = run(Silent(), 4)
    assert led.rounds == 0
    assert outs == [None] * 4


def test_single_broadcast():
    outs, led = run(OneBroadcast(), 5)
    assert led.rounds == 1
    assert led.messages == 4
    assert outs[1:] == [42] * 4


def test_run_needs_two_nodes():
    with pytest.raises(ValueError):
        run(Silent(), 1)


def test_round_cap():
    with pytest.raises(NonTermination):
        run(Chatty(), 3, round_cap=5)


def test_default_round_cap():
    assert Clique(7).round_cap == 490


def test_two_messages_one_pair_rejected():
    with pytest.raises(BandwidthViolation):
        run(Doubler(), 3)


def test_payload_too_wide():
    cl = Clique(3)
    with pytest.raises(BandwidthViolation):
        cl.exchange([(0, 1, (1, 2, 3, 4))])


def test_self_messages_are_free():
    cl = Clique(3)
    inbox = cl.exchange([(0, 0, (1,)), (0, 0, (2,))])
    assert len(inbox[0]) == 2
    assert cl.ledger.messages == 0


def test_route_empty_still_charged():
    cl = Clique(4)
    cl.route([])
    assert cl.ledger.charged_rounds == 2
    assert cl.ledger.primitives["route"] == 1


def test_route_permutation():
    n = 6
    cl = Clique(n)
    inbox = cl.route([(i, (i + 1) % n, (i,)) for i in range(n)])
    for v in range(n):
        assert inbox[v] == [((v - 1) % n, ((v - 1) % n,))]


def test_route_one_to_all():
    n = 8
    cl = Clique(n)
    demand = [(0, u, (100 + u,)) for u in range(1, n)]
    inbox = cl.route(demand)
    delivered = sorted((src, v, p) for v in range(n) for src, p in inbox[v])
    assert delivered == sorted((s, d, p) for s, d, p in demand)


def test_route_demand_violation():
    cl = Clique(3)
    with pytest.raises(DemandViolation):
        cl.route([(0, 1, (i,)) for i in range(4)])


def test_route_bulk_splits():
    n = 4
    cl = Clique(n)
    msgs = [(0, 1, (i,)) for i in range(10)]
    inbox = cl.route_bulk(msgs)
    assert sorted(p[0] for _, p in inbox[1]) == list(range(10))
    assert cl.ledger.primitives["route"] == 3


def test_sort_reverse():
    n = 4
    cl = Clique(n)
    keys = list(range(n * n))[::-1]
    out = cl.sort([keys[i * n:(i + 1) * n] for i in range(n)])
    for i in range(n):
        assert out[i] == list(range(i * n, (i + 1) * n))


def test_sort_already_sorted():
    n = 3
    cl = Clique(n)
    batches = [[i * n + j for j in range(n)] for i in range(n)]
    assert cl.sort(batches) == batches


def test_sort_random_with_duplicates():
    n = 8
    rng = SplitMix64(3)
    batches = [[rng.below(10) for _ in range(n)] for _ in range(n)]
    out = Clique(n).sort(batches)
    flat = [x for b in out for x in b]
    assert flat == sorted(x for b in batches for x in b)


def test_sort_arity():
    with pytest.raises(ArityViolation):
        Clique(3).sort([[1, 2, 3], [1, 2], [1, 2, 3]])


def test_costs_configurable():
    cl = Clique(4, cost_route=5, cost_sort=7, cost_hit=1)
    cl.route([])
    cl.sort([[0] * 4] * 4)
    cl.charge("hit")
    assert cl.ledger.charged_rounds == 13


def test_ledger_json_roundtrip():
    cl = Clique(4)
    cl.exchange([(0, 1, (1,))])
    cl.route([])
    led = cl.ledger
    back = RoundLedger.from_json(led.to_json())
    assert back.to_json() == led.to_json()
    assert led.to_json()["peak_pair_load"] == 1


def test_replay_identical_ledger():
    eye = SparseMatrix.identity(8, AUGMENTED)
    first = sparse_mm(eye, eye)
    second = sparse_mm(eye, eye)
    assert first.ledger.dumps() == second.ledger.dumps()
    assert first.product == second.product == eye


def test_log2ceil():
    assert [log2ceil(x) for x in (1, 2, 3, 4, 5, 64, 65)] == [1, 1, 2, 2, 3, 6, 7]
