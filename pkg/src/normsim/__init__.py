"""Needs-driven agent simulation under an ADICO-encoded regulatory environment."""

from .core import (
    AgentState,
    ContractViolation,
    NeedCatalog,
    NeedsState,
    Profile,
    financial_security_nsl,
    update_need,
    urgency,
)
from .deliberation import ActionScore, NoAvailableActionError, SatMatrix, score_action, select_action
from .environment import (
    ActionDef,
    Event,
    Location,
    WorldState,
    available_actions,
    resolve_capacity,
    settle,
)
from .metrics import StepMetrics, deprivation_index, gini, poverty_headcount, record_step
from .population import IncomeBracket, PopulationSpec, generate_population, quota_counts
from .scenario import ScenarioConfig, Simulation, compare, load_scenario, run

__version__ = "0.1.0"

__all__ = [
    "ActionDef",
    "ActionScore",
    "AgentState",
    "ContractViolation",
    "Event",
    "IncomeBracket",
    "Location",
    "NeedCatalog",
    "NeedsState",
    "NoAvailableActionError",
    "PopulationSpec",
    "Profile",
    "SatMatrix",
    "ScenarioConfig",
    "Simulation",
    "StepMetrics",
    "WorldState",
    "available_actions",
    "compare",
    "deprivation_index",
    "financial_security_nsl",
    "generate_population",
    "gini",
    "load_scenario",
    "poverty_headcount",
    "quota_counts",
    "record_step",
    "resolve_capacity",
    "run",
    "score_action",
    "select_action",
    "settle",
    "update_need",
    "urgency",
]
