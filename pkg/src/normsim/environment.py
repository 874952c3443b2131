"""Physical environment and the synchronized settlement phase."""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set

from .core import (
    FINANCIAL_SECURITY,
    STATUSES,
    AgentState,
    ContractViolation,
    NeedCatalog,
    financial_security_nsl,
    update_need,
)
from .deliberation import SatMatrix
from .norms import ALWAYS, NormStatement, consequences_for, evaluate_predicate, gate_actions
from .norms.model import Predicate

LOCATION_KINDS = ("home", "workplace", "school", "shelter", "shop", "clinic", "public_space")
EVENT_KINDS = ("moved", "paid", "earned", "fined", "unpaid_fine", "transfer", "granted", "denied", "action")

IDLE = "idle"
HOME = "home"


@dataclass(frozen=True)
class Location:
    id: str
    kind: str
    capacity: Optional[int] = None  # None means unbounded

    def __post_init__(self) -> None:
        if self.kind not in LOCATION_KINDS:
            raise ContractViolation(f"location {self.id}: unknown kind {self.kind!r}")
        if self.capacity is not None and self.capacity < 1:
            raise ContractViolation(f"location {self.id}: capacity must be positive")
        if self.kind == "shelter" and self.capacity is None:
            raise ContractViolation(f"location {self.id}: shelters need a finite capacity")


@dataclass(frozen=True)
class ActionDef:
    id: str
    required_location: Optional[str] = None
    required_status: Optional[FrozenSet[str]] = None
    cost: int = 0
    wage: int = 0
    benefit: int = 0
    refills: Mapping[str, float] = field(default_factory=dict)
    capacity_limited: bool = False
    moves_to: Optional[str] = None
    requires: Predicate = ALWAYS
    requires_permission: bool = False

    def __post_init__(self) -> None:
        if self.cost < 0 or self.wage < 0 or self.benefit < 0:
            raise ContractViolation(f"action {self.id}: cost, wage and benefit must be >= 0")
        if self.cost > 0 and (self.wage > 0 or self.benefit > 0):
            raise ContractViolation(f"action {self.id}: cannot both cost and pay")
        for need, amount in self.refills.items():
            if not 0.0 <= amount <= 1.0:
                raise ContractViolation(f"action {self.id}: refill for {need} must lie in [0, 1]")
        if self.required_location is not None and self.required_location not in LOCATION_KINDS:
            raise ContractViolation(f"action {self.id}: unknown location kind {self.required_location!r}")
        if self.moves_to is not None and self.moves_to not in LOCATION_KINDS:
            raise ContractViolation(f"action {self.id}: unknown destination kind {self.moves_to!r}")
        if self.required_status is not None and not set(self.required_status) <= set(STATUSES):
            raise ContractViolation(f"action {self.id}: unknown status in {sorted(self.required_status)}")


IDLE_ACTION = ActionDef(IDLE)


@dataclass(frozen=True)
class Event:
    step: int
    agent_id: str
    kind: str
    detail: str


@dataclass
class WorldState:
    step: int
    agents: List[AgentState]
    locations: Dict[str, Location]
    actions: Dict[str, ActionDef]
    norms: Sequence[NormStatement]
    catalog: NeedCatalog
    sat: SatMatrix
    rng: random.Random
    financial_buffer: float = 900.0
    event_log: List[Event] = field(default_factory=list)
    # per settled step: agent id -> wages + transfers received that step
    inflows: List[Dict[str, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if IDLE not in self.actions:
            self.actions = {**self.actions, IDLE: IDLE_ACTION}
        self._by_id = {a.id: a for a in self.agents}
        self.active_norms = [n for n in self.norms if n.active]
        for agent in self.agents:
            if agent.location not in self.locations:
                raise ContractViolation(f"agent {agent.id}: unknown location {agent.location!r}")

    def agent(self, agent_id: str) -> AgentState:
        return self._by_id[agent_id]

    def first_location(self, kind: str) -> Optional[str]:
        ids = sorted(lid for lid, loc in self.locations.items() if loc.kind == kind)
        return ids[0] if ids else None

    def destination(self, agent: AgentState, action: ActionDef) -> Optional[str]:
        if action.moves_to is None:
            return None
        if action.moves_to == HOME:
            return agent.profile.address
        return self.first_location(action.moves_to)

    def log(self, agent_id: str, kind: str, detail: str) -> None:
        self.event_log.append(Event(self.step, agent_id, kind, detail))


def _base_ok(agent: AgentState, action: ActionDef, world: WorldState) -> bool:
    if action.requires_permission:
        return False
    if action.required_status is not None and agent.profile.status not in action.required_status:
        return False
    if action.required_location is not None:
        if world.locations[agent.location].kind != action.required_location:
            return False
    if action.cost > agent.wealth:
        return False
    if action.moves_to is not None:
        dest = world.destination(agent, action)
        if dest is None or dest not in world.locations:
            return False
    return evaluate_predicate(action.requires, agent, agent.last_action)


def available_actions(agent: AgentState, world: WorldState) -> List[str]:
    base = [a.id for a in world.actions.values() if _base_ok(agent, a, world)]
    gated = gate_actions(base, world.active_norms, agent, world)
    if IDLE not in gated:
        gated.append(IDLE)
        gated.sort()
    return gated


def resolve_capacity(requests: Sequence[str], capacity: int, rng: random.Random) -> Set[str]:
    """Grant at most ``capacity`` requests, picked by a seeded uniform permutation."""
    if capacity < 1:
        raise ContractViolation(f"capacity must be >= 1, got {capacity}")
    if len(requests) <= capacity:
        return set(requests)
    order = list(requests)
    rng.shuffle(order)
    return set(order[:capacity])


@dataclass
class SettlementSummary:
    step: int
    wages: int = 0
    transfers: int = 0
    costs: int = 0
    fines_assessed: int = 0
    fines_collected: int = 0
    granted: Dict[str, int] = field(default_factory=dict)
    denied: Dict[str, int] = field(default_factory=dict)

    @property
    def net_flow(self) -> int:
        return self.wages + self.transfers - self.costs - self.fines_collected


def _pay(world: WorldState, agent: AgentState, action: ActionDef, summary: SettlementSummary,
         inflow: Dict[str, int]) -> None:
    if action.cost:
        agent.wealth -= action.cost
        summary.costs += action.cost
        world.log(agent.id, "paid", f"amount={action.cost};action={action.id}")
    if action.wage:
        agent.wealth += action.wage
        summary.wages += action.wage
        inflow[agent.id] = inflow.get(agent.id, 0) + action.wage
        world.log(agent.id, "earned", f"amount={action.wage};action={action.id}")
    if action.benefit:
        agent.wealth += action.benefit
        summary.transfers += action.benefit
        inflow[agent.id] = inflow.get(agent.id, 0) + action.benefit
        world.log(agent.id, "transfer", f"amount={action.benefit};source=action:{action.id}")


def _move(world: WorldState, agent: AgentState, dest: Optional[str]) -> None:
    if dest is not None and dest != agent.location:
        world.log(agent.id, "moved", f"{agent.location}->{dest}")
        agent.location = dest


def settle(
    world: WorldState,
    chosen: Mapping[str, str],
    available: Optional[Mapping[str, Iterable[str]]] = None,
) -> SettlementSummary:
    """Execute every agent's chosen action and advance the world by one step.

    ``available`` may carry the action sets the choices were made from; when
    omitted they are recomputed. The world is mutated in place.
    """
    agents = world.agents
    for agent in agents:
        if agent.id not in chosen:
            raise ContractViolation(f"step {world.step}: agent {agent.id} has no chosen action")
        allowed = available[agent.id] if available is not None else available_actions(agent, world)
        if chosen[agent.id] not in allowed:
            raise ContractViolation(
                f"step {world.step}: agent {agent.id} chose {chosen[agent.id]!r}, "
                f"which is not in its available set"
            )
    extra = set(chosen) - {a.id for a in agents}
    if extra:
        raise ContractViolation(f"step {world.step}: choices for unknown agents {sorted(extra)}")

    summary = SettlementSummary(step=world.step)
    inflow: Dict[str, int] = {}
    order = list(agents)
    world.rng.shuffle(order)

    # 1. execute in a fresh random order; capacity-limited actions wait for phase 2
    realized: Dict[str, Optional[ActionDef]] = {}
    requests: Dict[str, List[str]] = defaultdict(list)
    for agent in order:
        action = world.actions[chosen[agent.id]]
        world.log(agent.id, "action", action.id)
        agent.last_action = action.id
        if action.capacity_limited:
            site = world.destination(agent, action) or agent.location
            requests[site].append(agent.id)
            realized[agent.id] = None
            continue
        _move(world, agent, world.destination(agent, action))
        _pay(world, agent, action, summary, inflow)
        realized[agent.id] = action

    # 2. contention for capacity-limited sites
    for site in sorted(requests):
        queue = requests[site]
        capacity = world.locations[site].capacity
        granted = set(queue) if capacity is None else resolve_capacity(queue, capacity, world.rng)
        for agent_id in queue:
            agent = world.agent(agent_id)
            action = world.actions[chosen[agent_id]]
            if agent_id in granted:
                world.log(agent_id, "granted", f"action={action.id};location={site}")
                _move(world, agent, world.destination(agent, action))
                _pay(world, agent, action, summary, inflow)
                realized[agent_id] = action
                summary.granted[site] = summary.granted.get(site, 0) + 1
            else:
                world.log(agent_id, "denied", f"action={action.id};location={site}")
                summary.denied[site] = summary.denied.get(site, 0) + 1

    # 3. norm consequences, with certain detection
    for agent in order:
        draw = world.rng.random()
        for applied in consequences_for(world.active_norms, agent, chosen[agent.id], draw):
            if applied.kind == "fine":
                collected = min(applied.amount, agent.wealth)
                agent.wealth -= collected
                summary.fines_assessed += applied.amount
                summary.fines_collected += collected
                world.log(
                    agent.id,
                    "fined",
                    f"norm={applied.norm_id};amount={applied.amount};collected={collected}",
                )
                if collected < applied.amount:
                    world.log(agent.id, "unpaid_fine",
                              f"norm={applied.norm_id};amount={applied.amount - collected}")
            elif applied.kind == "transfer":
                agent.wealth += applied.amount
                summary.transfers += applied.amount
                inflow[agent.id] = inflow.get(agent.id, 0) + applied.amount
                world.log(agent.id, "transfer", f"amount={applied.amount};source=norm:{applied.norm_id}")

    # 4. needs at t+1 from the new state
    catalog = world.catalog
    needs = catalog.needs
    for agent in agents:
        action = realized[agent.id]
        refills = action.refills if action is not None else {}
        nsl = agent.needs.nsl
        for need in needs:
            if need == FINANCIAL_SECURITY:
                nsl[need] = financial_security_nsl(agent.wealth, world.financial_buffer)
            else:
                nsl[need] = update_need(nsl[need], catalog.decay.get(need, 0.0), refills.get(need, 0.0))

    world.inflows.append(inflow)
    world.step += 1
    return summary
