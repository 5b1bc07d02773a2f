"""Exception types shared across the package."""


class AgentRoutingError(Exception):
    """Base class for all package-specific errors."""


class InvalidMetric(AgentRoutingError):
    """A cost divisor (capability or model sophistication) is not strictly positive."""


class UnknownNode(AgentRoutingError):
    """A referenced node id does not exist in the graph."""


class BrokenChain(AgentRoutingError):
    """A predecessor walk failed to reach the source; indicates internal corruption."""


class InvalidK(AgentRoutingError):
    """Requested cluster count is outside [1, node count]."""


class EmptyWindow(AgentRoutingError):
    """A learning window contains no completed tasks; the update cycle is skipped."""


class InvalidParams(AgentRoutingError):
    """Workload or instance-generator parameters are out of range."""


class TooLarge(AgentRoutingError):
    """Instance exceeds the exhaustive-search node guard."""


class ScenarioError(AgentRoutingError):
    """Scenario file failed to parse or validate.

    ``line`` is the 1-based line number of the offending construct when the
    parser can attribute one, else None.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
