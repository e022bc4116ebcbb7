"""Exception types shared across the package."""


class NavloopError(Exception):
    """Base class for all package errors."""


class OutOfBounds(NavloopError):
    """A pose or cell index lies outside the grid extent."""


class DimensionMismatch(NavloopError):
    """Array dimensions of two paired structures disagree."""


class UnknownPhrase(NavloopError):
    """The embedding vocabulary has no entry for a phrase."""

    def __init__(self, phrase: str):
        super().__init__(f"phrase not in vocabulary: {phrase!r}")
        self.phrase = phrase


class TooFewSamples(NavloopError):
    """Fewer score samples than mixture components."""


class NoMatch(NavloopError):
    """A description matched no usable map region."""


class NegativeWeight(NavloopError):
    """Shortest-path input contains a negative edge weight."""


class NoFeasibleRoute(NavloopError):
    """No terminal waypoint is reachable through the layered graph."""


class DegenerateTrajectory(NavloopError):
    """A multi-point trajectory has zero total arc length."""


class EmptyInput(NavloopError):
    """An aggregate was requested over an empty collection."""


class FeedbackExhausted(NavloopError):
    """A scripted feedback source has no responses left."""


class ScenarioError(NavloopError):
    """A scenario file is missing, malformed, or inconsistent."""
