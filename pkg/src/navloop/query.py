"""Deviation-triggered query decision.

Successive global-plan lengths are compared against a sliding reference:
relative absolute deviation beyond the threshold tau (default 25%) means
the robot should stop and ask the human. A lost plan (NoPath) counts as
infinite deviation. After a query fires, the reference resets and the
first plan seen afterwards is adopted without triggering.
"""

from __future__ import annotations

import enum

from .planner import PlannedPath


class Decision(enum.Enum):
    CONTINUE = "continue"
    QUERY = "query"


class DeviationMonitor:
    """Single-writer state machine over plan lengths."""

    def __init__(self, tau: float = 0.25):
        if tau <= 0:
            raise ValueError(f"tau must be > 0, got {tau}")
        self.tau = tau
        self.reference_length: float | None = None
        self.last_deviation: float | None = None

    def reset(self) -> None:
        """Forget the reference (new leg, or feedback just applied)."""
        self.reference_length = None

    def adopt(self, length: float) -> None:
        """Slide the reference without assessing.

        Executors use this where relative deviation is meaningless: plan
        lengths quantized to cell centers shrink in resolution-sized jumps
        as the robot closes on its goal, and a jump against a short
        reference always clears tau.
        """
        if length > 0:
            self.reference_length = length
        else:
            self.reference_length = None

    def assess(self, new_plan: PlannedPath | None) -> Decision:
        """Compare the new plan against the reference and decide.

        The reference slides: every accepted plan becomes the next
        reference. A query resets the reference, so no query can fire on
        the first plan after (re)initialization.
        """
        if self.reference_length is None:
            self.last_deviation = None
            if new_plan is not None and new_plan.length > 0:
                self.reference_length = new_plan.length
            return Decision.CONTINUE
        if new_plan is None:
            self.last_deviation = None
            self.reset()
            return Decision.QUERY
        ref = self.reference_length
        deviation = abs(new_plan.length - ref) / ref
        self.last_deviation = deviation
        if deviation > self.tau:
            self.reset()
            return Decision.QUERY
        self.reference_length = new_plan.length
        return Decision.CONTINUE
