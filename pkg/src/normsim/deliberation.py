"""Action scoring and greedy action choice.

An action's score sums, category by category, the expected satisfaction of
each need weighted by that need's urgency, and scales each category's sum by
the agent's importance weight for the category.  The agent takes the
highest-scoring available action.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .core import AgentState, ContractViolation, NeedCatalog, NeedsState


class NoAvailableActionError(ContractViolation):
    """Raised when an agent is asked to choose from an empty action set."""


class SatMatrix:
    """Sparse expected-satisfaction lookup; missing (need, action) pairs read as 0."""

    def __init__(self, entries: Optional[Mapping[Tuple[str, str], float]] = None):
        self._sat: Dict[Tuple[str, str], float] = {}
        self._by_action: Dict[str, Dict[str, float]] = {}
        for (need, action), value in (entries or {}).items():
            self.set(need, action, value)

    @classmethod
    def from_nested(cls, table: Mapping[str, Mapping[str, float]]) -> "SatMatrix":
        """Build from ``{action: {need: value}}``."""
        return cls({(need, action): v for action, row in table.items() for need, v in row.items()})

    def set(self, need: str, action: str, value: float) -> None:
        if not 0.0 <= value <= 1.0:
            raise ContractViolation(f"Sat({need}, {action}) must lie in [0, 1], got {value!r}")
        self._sat[(need, action)] = float(value)
        self._by_action.setdefault(action, {})[need] = float(value)

    def get(self, need: str, action: str) -> float:
        return self._sat.get((need, action), 0.0)

    def row(self, action: str) -> Mapping[str, float]:
        return self._by_action.get(action, {})

    def items(self) -> Iterable[Tuple[Tuple[str, str], float]]:
        return self._sat.items()

    def scaled(self, factor: float) -> "SatMatrix":
        return SatMatrix({key: v * factor for key, v in self._sat.items()})

    def __len__(self) -> int:
        return len(self._sat)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SatMatrix) and self._sat == other._sat


@dataclass(frozen=True)
class ActionScore:
    action: str
    score: float


def score_action(needs: NeedsState, catalog: NeedCatalog, sat: SatMatrix, action: str) -> float:
    row = sat.row(action)
    total = 0.0
    if not row:
        return total
    for category in catalog.categories:
        inner = 0.0
        for need in catalog.needs_by_category[category]:
            inner += row.get(need, 0.0) * (1.0 - needs.nsl[need])
        total += inner * needs.importance[category]
    return total


def score_actions(
    needs: NeedsState, catalog: NeedCatalog, sat: SatMatrix, actions: Sequence[str]
) -> List[ActionScore]:
    return [ActionScore(a, score_action(needs, catalog, sat, a)) for a in actions]


def select_action(
    agent: AgentState, available: Sequence[str], catalog: NeedCatalog, sat: SatMatrix
) -> str:
    """Greedy argmax over ``available``; ties go to the lexicographically smallest id."""
    if not available:
        raise NoAvailableActionError(f"agent {agent.id} has no available action")
    best: Optional[ActionScore] = None
    for candidate in score_actions(agent.needs, catalog, sat, available):
        if (
            best is None
            or candidate.score > best.score
            or (candidate.score == best.score and candidate.action < best.action)
        ):
            best = candidate
    assert best is not None
    return best.action
