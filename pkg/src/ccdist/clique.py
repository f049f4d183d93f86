"""Round-synchronous Congested Clique simulator with bandwidth accounting.

Two kinds of communication are offered:

* ``exchange`` runs one real lockstep round. Every ordered pair carries at
  most one message of at most ``bandwidth`` words; anything else raises
  :class:`BandwidthViolation`.
* ``route`` and ``sort`` are the standard O(1)-round routing and sorting
  primitives. They are not re-implemented message by message; their
  preconditions are validated and a configurable number of rounds is
  charged per invocation.

``route_bulk`` delivers demands heavier than n per node by splitting them
into batches that each satisfy the routing precondition.
"""
import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import ArityViolation, BandwidthViolation, DemandViolation, NonTermination

DEFAULT_BANDWIDTH = 3
DEFAULT_COSTS = {"route": 2, "sort": 2, "hit": 3}


@dataclass
class RoundLedger:
    rounds: int = 0  # lockstep rounds actually executed
    charged_rounds: int = 0  # rounds + charged primitive costs
    primitives: Counter = field(default_factory=Counter)
    peak_pair_load: int = 0
    messages: int = 0

    def to_json(self) -> dict:
        return {
            "rounds": self.rounds,
            "charged_rounds": self.charged_rounds,
            "primitives": dict(sorted(self.primitives.items())),
            "peak_pair_load": self.peak_pair_load,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj) -> "RoundLedger":
        return cls(
            rounds=obj["rounds"],
            charged_rounds=obj["charged_rounds"],
            primitives=Counter(obj["primitives"]),
            peak_pair_load=obj["peak_pair_load"],
        )

    def steps(self) -> int:
        """Communication steps, each lockstep round or primitive call counting once."""
        return self.rounds + self.primitives["route"] + self.primitives["sort"]

    def snapshot(self) -> tuple:
        return (self.rounds, self.charged_rounds, self.steps())


class Clique:
    """n fully connected nodes sharing one :class:`RoundLedger`."""

    def __init__(self, n, bandwidth=DEFAULT_BANDWIDTH, cost_route=None, cost_sort=None,
                 cost_hit=None, round_cap=None):
        if n < 1:
            raise ValueError("clique needs at least one node")
        self.n = n
        self.bandwidth = bandwidth
        self.costs = dict(DEFAULT_COSTS)
        for name, val in (("route", cost_route), ("sort", cost_sort), ("hit", cost_hit)):
            if val is not None:
                self.costs[name] = val
        self.round_cap = round_cap if round_cap is not None else 10 * n * n
        self.ledger = RoundLedger()

    def fork(self, n=None) -> "Clique":
        """A fresh clique with the same configuration and an empty ledger."""
        return Clique(n or self.n, self.bandwidth, self.costs["route"], self.costs["sort"],
                      self.costs["hit"], self.round_cap)

    # charging

    def charge(self, name, cost=None, times=1):
        """Record ``times`` invocations of a black-box primitive."""
        if cost is None:
            cost = self.costs[name]
        self.ledger.primitives[name] += times
        self.ledger.charged_rounds += cost * times

    def _check_payload(self, payload):
        if len(payload) > self.bandwidth:
            raise BandwidthViolation(f"payload of {len(payload)} words exceeds B={self.bandwidth}")

    # lockstep round

    def exchange(self, messages):
        """Deliver one round of ``(src, dst, payload)`` messages.

        Returns per-node inboxes, lists of ``(src, payload)`` in sender order.
        Messages a node sends to itself are local and free.
        """
        n = self.n
        inbox = [[] for _ in range(n)]
        seen = set()
        count = 0
        bw = self.bandwidth
        for src, dst, payload in messages:
            if len(payload) > bw:
                raise BandwidthViolation(f"payload of {len(payload)} words exceeds B={bw}")
            if src != dst:
                pair = src * n + dst
                if pair in seen:
                    raise BandwidthViolation(f"second message on pair ({src},{dst}) in one round")
                seen.add(pair)
                count += 1
            inbox[dst].append((src, payload))
        led = self.ledger
        led.rounds += 1
        led.charged_rounds += 1
        led.messages += count
        if count and led.peak_pair_load < 1:
            led.peak_pair_load = 1
        for box in inbox:
            box.sort(key=lambda m: m[0])
        return inbox

    def broadcast(self, values):
        """Every node ``v`` with ``values[v] is not None`` sends that payload to all peers.

        One lockstep round. Returns the list of values, as now known everywhere.
        """
        n = self.n
        msgs = [(v, u, p) for v, p in enumerate(values) if p is not None for u in range(n)]
        self.exchange(msgs)
        return list(values)

    # black-box primitives

    def route(self, messages):
        """Routing primitive: each node sends and receives at most n messages."""
        n = self.n
        sent = [0] * n
        recv = [0] * n
        inbox = [[] for _ in range(n)]
        bw = self.bandwidth
        count = 0
        for src, dst, payload in messages:
            if len(payload) > bw:
                raise BandwidthViolation(f"payload of {len(payload)} words exceeds B={bw}")
            if src != dst:
                sent[src] += 1
                recv[dst] += 1
                count += 1
            inbox[dst].append((src, payload))
        if max(sent) > n or max(recv) > n:
            raise DemandViolation(
                f"routing demand exceeds n={n}: max sent {max(sent)}, max received {max(recv)}")
        self.charge("route")
        self.ledger.messages += count
        return inbox

    def route_bulk(self, messages):
        """Route arbitrary demands as ceil-balanced batches of legal routing instances.

        With at most L messages sent and received per node the first-fit
        split uses at most ``2 * ceil(L / n) - 1`` batches.
        """
        n = self.n
        messages = list(messages)
        sent = Counter()
        recv = Counter()
        for src, dst, _ in messages:
            if src != dst:
                sent[src] += 1
                recv[dst] += 1
        load = max(max(sent.values(), default=0), max(recv.values(), default=0))
        if load <= n:
            return self.route(messages)
        batches = []  # (sent counts, recv counts, messages)
        local = []
        for msg in messages:
            src, dst, _ = msg
            if src == dst:
                local.append(msg)
                continue
            for s_cnt, r_cnt, bucket in batches:
                if s_cnt[src] < n and r_cnt[dst] < n:
                    break
            else:
                s_cnt, r_cnt, bucket = [0] * n, [0] * n, []
                batches.append((s_cnt, r_cnt, bucket))
            s_cnt[src] += 1
            r_cnt[dst] += 1
            bucket.append(msg)
        inbox = [[] for _ in range(n)]
        batches[0][2].extend(local)
        for _, _, bucket in batches:
            part = self.route(bucket)
            for v in range(n):
                inbox[v].extend(part[v])
        return inbox

    def sort(self, entries):
        """Sorting primitive: node i ends with the i-th batch of n entries in global order."""
        n = self.n
        if len(entries) != n:
            raise ArityViolation(f"expected {n} nodes' entries, got {len(entries)}")
        flat = []
        bw = self.bandwidth
        for v, batch in enumerate(entries):
            if len(batch) != n:
                raise ArityViolation(f"node {v} holds {len(batch)} entries, expected {n}")
            for e in batch:
                if isinstance(e, tuple) and len(e) > bw:
                    raise BandwidthViolation(f"sort entry of {len(e)} words exceeds B={bw}")
            flat.extend(batch)
        flat.sort()
        self.charge("sort")
        return [flat[i * n:(i + 1) * n] for i in range(n)]

    # node programs

    def run(self, program, n=None):
        """Execute ``program`` in lockstep until every node has halted and nothing is in flight.

        ``program.step(v, rnd, inbox)`` returns a list of ``(dst, payload)``;
        ``program.halted(v)`` reports whether ``v`` is idle; halted nodes are
        woken when a message arrives. Returns ``(outputs, ledger)``.
        """
        n = n or self.n
        if n != self.n:
            raise ValueError("program size differs from clique size")
        if n < 2:
            raise ValueError("run needs n >= 2")
        program.setup(n)
        inbox = [[] for _ in range(n)]
        rnd = 0
        while True:
            msgs = []
            for v in range(n):
                if inbox[v] or not program.halted(v) or rnd == 0:
                    for dst, payload in program.step(v, rnd, inbox[v]) or ():
                        msgs.append((v, dst, tuple(payload)))
            if not msgs and all(program.halted(v) for v in range(n)):
                break
            if self.ledger.rounds >= self.round_cap:
                raise NonTermination(f"round cap {self.round_cap} exceeded")
            inbox = self.exchange(msgs)
            rnd += 1
        return [program.output(v) for v in range(n)], self.ledger


class NodeProgram:
    """Base class for per-node programs run by :meth:`Clique.run`."""

    def setup(self, n):
        self.n = n

    def step(self, v, rnd, inbox):
        return []

    def halted(self, v) -> bool:
        return True

    def output(self, v):
        return None


def run(program, n, **clique_kwargs):
    """Run ``program`` on a fresh n-node clique."""
    return Clique(n, **clique_kwargs).run(program, n)


def log2ceil(x) -> int:
    """ceil(log2(x)) with a floor of 1; the package-wide meaning of ``log n``."""
    return max(1, math.ceil(math.log2(x))) if x > 1 else 1
