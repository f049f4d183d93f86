"""Exception hierarchy shared by the simulator and the algorithms."""


class CliqueError(Exception):
    """Base class for every error raised by this package."""


class PreconditionError(CliqueError, ValueError):
    """Caller supplied input that violates an operation's precondition."""


class InvariantViolation(CliqueError, AssertionError):
    """An internal bound or invariant failed while an algorithm was running."""


# clique simulator


class BandwidthViolation(InvariantViolation):
    """A node sent more than one message to a peer in one round, or an oversized payload."""


class NonTermination(InvariantViolation):
    """A node program exceeded the configured round cap."""


class DemandViolation(PreconditionError):
    """A routing demand has some node sending or receiving more than n messages."""


class ArityViolation(PreconditionError):
    """A sorting input does not hold exactly n entries per node."""


# matrix multiplication


class WeightViolation(PreconditionError):
    """A balancing input has an entry heavier than n or exceeds its declared total."""


class DensityUnderestimate(CliqueError):
    """The output density estimate was too small to balance the intermediate products."""


# distance tools / hopsets / applications


class EmptySources(PreconditionError):
    pass


class FamilyTooSmall(PreconditionError):
    pass


class HitFailure(InvariantViolation):
    pass


class WeightedInput(PreconditionError):
    pass


class Disconnected(PreconditionError):
    pass


class GraphFormatError(PreconditionError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class InvalidSpec(PreconditionError):
    pass
