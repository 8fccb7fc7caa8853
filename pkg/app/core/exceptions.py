"""Exception hierarchy shared by engine, harness and routers"""


class PragueLabError(Exception):
    """Base class for all errors raised by the lab"""


class InvalidParameterError(PragueLabError, ValueError):
    """A precondition on an operation's inputs does not hold"""


class DegenerateScheduleError(InvalidParameterError):
    """The schedule would use cliques of size < 2; use the trivial partition"""


class ScheduleInfeasibleError(PragueLabError):
    """q_i exceeds 1 before clamping: n too small for the chosen constants"""

    def __init__(self, round_index: int, raw_q: float):
        self.round_index = round_index
        self.raw_q = raw_q
        super().__init__(f"round {round_index}: inclusion probability {raw_q:.6g} > 1")


class EdgeListFormatError(PragueLabError, ValueError):
    """Malformed edge-list text"""


class HypergraphFormatError(PragueLabError, ValueError):
    """Malformed hypergraph text"""


class InvariantViolationError(PragueLabError):
    """An internal invariant check failed; indicates a bug upstream"""


class ColoringFailedError(PragueLabError):
    """Greedy coloring still failed after all palette retries"""


class VerificationError(PragueLabError):
    """A produced certificate did not verify"""

    def __init__(self, message: str, violations=None):
        self.violations = list(violations or [])
        super().__init__(message)
