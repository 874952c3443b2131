"""Evaluating norms against agents: predicate truth, action gating, sanctions.

Everything here is read-only with respect to agents and the world; state
changes happen only in the settlement phase.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Any, Iterable, List, Optional, Sequence

from ..core import AgentState
from .model import And, Compare, Consequence, Not, NormStatement, Or, Performed, Predicate, TruePred

_OPS = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def _field_value(agent: AgentState, name: str) -> Any:
    if name == "wealth":
        return agent.wealth
    return getattr(agent.profile, name)


def evaluate_predicate(expr: Predicate, agent: AgentState, performed: Optional[str] = None) -> bool:
    if isinstance(expr, TruePred):
        return True
    if isinstance(expr, Compare):
        return _OPS[expr.op](_field_value(agent, expr.field), expr.value)
    if isinstance(expr, Performed):
        return performed == expr.action
    if isinstance(expr, Not):
        return not evaluate_predicate(expr.operand, agent, performed)
    if isinstance(expr, And):
        return all(evaluate_predicate(op, agent, performed) for op in expr.operands)
    if isinstance(expr, Or):
        return any(evaluate_predicate(op, agent, performed) for op in expr.operands)
    raise TypeError(f"not a predicate: {expr!r}")


def applies(norm: NormStatement, agent: AgentState, performed: Optional[str]) -> bool:
    """Active, and both attribute and condition hold for this agent."""
    return (
        norm.active
        and evaluate_predicate(norm.attribute, agent, performed)
        and evaluate_predicate(norm.condition, agent, performed)
    )


def gate_actions(
    base: Iterable[str],
    norms: Sequence[NormStatement],
    agent: AgentState,
    world: Any = None,
) -> List[str]:
    """Add actions granted by permissions, drop those removed by prohibitions.

    Condition atoms about performed actions look at the agent's last executed
    action. ``world`` is accepted for symmetry with the environment API; the
    current atom vocabulary only reads agent state.
    """
    allowed = set(base)
    removed = set()
    for norm in norms:
        if norm.deontic == "obligation" or not applies(norm, agent, agent.last_action):
            continue
        if norm.deontic == "permission":
            allowed.add(norm.aim.action)
        elif norm.enforcement == "removal":
            removed.add(norm.aim.action)
    return sorted(allowed - removed)


@dataclass(frozen=True)
class AppliedConsequence:
    norm_id: str
    kind: str  # "fine" or "transfer"
    amount: int


def instantiate_fine(minimum: int, maximum: int, rng_draw: float) -> int:
    """Map a uniform draw in [0, 1) onto a whole amount in [minimum, maximum]."""
    if not 0.0 <= rng_draw < 1.0:
        raise ValueError(f"rng_draw must lie in [0, 1), got {rng_draw!r}")
    amount = math.floor(minimum + rng_draw * (maximum - minimum) + 0.5)
    return min(maximum, max(minimum, amount))


def _instantiate(norm_id: str, spec: Consequence, rng_draw: float) -> Optional[AppliedConsequence]:
    if spec.kind == "fine":
        return AppliedConsequence(norm_id, "fine", instantiate_fine(spec.minimum, spec.maximum, rng_draw))
    if spec.kind == "transfer":
        return AppliedConsequence(norm_id, "transfer", spec.amount)
    return None


def consequences_for(
    norms: Sequence[NormStatement],
    agent: AgentState,
    performed: str,
    rng_draw: float,
) -> List[AppliedConsequence]:
    """Consequences triggered by ``performed``; detection is certain.

    Obligations apply their aim whenever they hold.  Sanction-mode prohibitions
    apply their or-else when the prohibited action was performed.
    """
    out: List[AppliedConsequence] = []
    for norm in norms:
        if norm.deontic == "permission" or not applies(norm, agent, performed):
            continue
        if norm.deontic == "obligation":
            spec = norm.aim
        elif norm.enforcement == "sanction" and performed == norm.aim.action:
            spec = norm.or_else
        else:
            continue
        applied = _instantiate(norm.id, spec, rng_draw)
        if applied is not None:
            out.append(applied)
    return out
