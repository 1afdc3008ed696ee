"""
Decision engine models: run configuration and step trace.
"""

from enum import Enum
from typing import Any, List, Optional

from pydantic import BaseModel, Field

from app.core.config import settings


class GoalSelection(str, Enum):
    """Intermediate-goal ranking heuristics."""

    SMALLEST = "smallest"  # goal-equivalent first, then (size, rank, key)
    GOAL_FIRST = "goal-first"  # the goal itself while it is a candidate


class EngineConfig(BaseModel):
    """Knobs of one decision run."""

    worker_count: int = Field(1, ge=1, description="Parallel workers")
    extension_batch: int = Field(8, ge=1, description="Extension classes pulled per exhaustion visit")
    goal_selection: GoalSelection = GoalSelection.SMALLEST
    deterministic_seed: int = Field(0, description="Seed for worker tie-breaking in parallel runs")
    max_iterations: int = Field(500, ge=1, description="Engine step budget")
    time_limit_seconds: float = Field(300.0, gt=0)
    max_extension_size: int = Field(7, ge=0, description="Largest extension size enumerated")

    @classmethod
    def from_settings(cls, **overrides: Any) -> "EngineConfig":
        values = settings.get_engine_defaults()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class TraceStep(BaseModel):
    """One executed step."""

    step: int = Field(..., ge=1, le=13)
    goal_key: Optional[str] = Field(None, description="Hex key of the intermediate goal")
    outcome: str
    delta: str = Field("", description="Summary of the tableau change")
    worker: int = 0

    def line(self) -> str:
        key = self.goal_key[:16] if self.goal_key else "-"
        text = f"step {self.step:>2} worker {self.worker} goal {key} {self.outcome}"
        return f"{text} [{self.delta}]" if self.delta else text


class Trace(BaseModel):
    steps: List[TraceStep] = Field(default_factory=list)

    def add(self, step: int, goal_key: Optional[str], outcome: str, delta: str = "", worker: int = 0) -> TraceStep:
        entry = TraceStep(step=step, goal_key=goal_key, outcome=outcome, delta=delta, worker=worker)
        self.steps.append(entry)
        return entry

    def lines(self) -> List[str]:
        return [s.line() for s in self.steps]

    def outcomes(self, step: int) -> List[str]:
        return [s.outcome for s in self.steps if s.step == step]
