"""Semirings used by the matrix engine.

All three semirings here have an addition that is ``min`` under a total
order (Boolean OR is ``min`` once ``True`` is ordered before ``False``), so
every semiring exposes ``key`` and the engine can track witnesses and filter
rows uniformly.
"""
from typing import NamedTuple

# Reserved maximal word. Arithmetic saturates at it.
INF = (1 << 62) - 1


class AugWeight(NamedTuple):
    """(path weight, hop count); compared lexicographically."""

    w: int
    t: int

    def is_inf(self) -> bool:
        return self.w >= INF


AUG_ZERO = AugWeight(INF, INF)
AUG_ONE = AugWeight(0, 0)


def aug_combine(x, y) -> AugWeight:
    """Semiring addition: the lexicographically smaller of the two."""
    return AugWeight(*(x if x <= y else y))


def aug_extend(x, y) -> AugWeight:
    """Semiring multiplication: componentwise sum, absorbing at infinity."""
    w = x[0] + y[0]
    if w >= INF:
        return AUG_ZERO
    return AugWeight(w, x[1] + y[1])


def order_key(dist, node: int) -> tuple:
    """The (weight, hops, id) comparator shared by the pipelines and the oracles."""
    return (dist[0], dist[1], node)


class Semiring:
    name = "abstract"
    zero = None
    one = None
    width = 1  # machine words per element on the wire

    def add(self, x, y):
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def key(self, x):
        """Total-order key under which ``add`` is ``min``."""
        raise NotImplementedError

    def encode(self, x) -> tuple:
        raise NotImplementedError

    def decode(self, words):
        raise NotImplementedError

    # Integer components a distributed binary search walks through, in
    # lexicographic order. Empty for semirings with a single nonzero value.
    def components(self, x) -> tuple:
        raise NotImplementedError

    def __repr__(self):
        return f"<semiring {self.name}>"


class MinPlus(Semiring):
    name = "min-plus"
    zero = INF
    one = 0
    width = 1

    def add(self, x, y):
        return x if x <= y else y

    def mul(self, x, y):
        s = x + y
        return INF if s >= INF else s

    def key(self, x):
        return x

    def encode(self, x):
        return (x,)

    def decode(self, words):
        return words[0]

    def components(self, x):
        return (x,)


class Augmented(Semiring):
    name = "augmented"
    zero = (INF, INF)
    one = (0, 0)
    width = 2

    def add(self, x, y):
        return x if x <= y else y

    def mul(self, x, y):
        w = x[0] + y[0]
        if w >= INF:
            return (INF, INF)
        return (w, x[1] + y[1])

    def key(self, x):
        return x

    def encode(self, x):
        return (x[0], x[1])

    def decode(self, words):
        return (words[0], words[1])

    def components(self, x):
        return x


class Boolean(Semiring):
    name = "boolean"
    zero = False
    one = True
    width = 1

    def add(self, x, y):
        return x or y

    def mul(self, x, y):
        return x and y

    def key(self, x):
        return 0 if x else 1

    def encode(self, x):
        return (1 if x else 0,)

    def decode(self, words):
        return bool(words[0])

    def components(self, x):
        return ()


MIN_PLUS = MinPlus()
AUGMENTED = Augmented()
BOOLEAN = Boolean()

SEMIRINGS = {s.name: s for s in (MIN_PLUS, AUGMENTED, BOOLEAN)}
