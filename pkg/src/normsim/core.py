"""Agents, needs and the per-step need dynamics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

STATUSES = ("student", "employed", "unemployed", "retired")

BASIC_NEEDS = ("food", "financial_security", "shelter", "clothing", "health", "education")
SOCIAL_NEEDS = ("recognition", "belonging")

FINANCIAL_SECURITY = "financial_security"

DEFAULT_IMPORTANCE = {"basic": 1.0, "social": 0.6}


class ContractViolation(ValueError):
    """An operation was called outside its preconditions."""


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ContractViolation(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class Profile:
    age: int
    gender: str
    address: Optional[str]
    income: int
    status: str
    residency: bool = True
    has_bank_account: bool = True

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ContractViolation(f"unknown status {self.status!r}")
        if self.age < 0:
            raise ContractViolation(f"age must be >= 0, got {self.age}")
        if self.income < 0:
            raise ContractViolation(f"income must be >= 0, got {self.income}")

    @property
    def homeless(self) -> bool:
        return self.address is None


@dataclass(frozen=True)
class NeedCatalog:
    """Need categories, their needs in evaluation order, and per-need decay."""

    categories: tuple
    needs_by_category: Mapping[str, tuple]
    decay: Mapping[str, float]
    deprivation_threshold: float = 0.3

    def __post_init__(self) -> None:
        seen: Dict[str, str] = {}
        for cat in self.categories:
            if cat not in self.needs_by_category:
                raise ContractViolation(f"category {cat!r} has no need list")
            for need in self.needs_by_category[cat]:
                if need in seen:
                    raise ContractViolation(
                        f"need {need!r} listed under both {seen[need]!r} and {cat!r}"
                    )
                seen[need] = cat
        extra = set(self.needs_by_category) - set(self.categories)
        if extra:
            raise ContractViolation(f"need lists for undeclared categories: {sorted(extra)}")
        for need in seen:
            _check_unit(f"decay[{need}]", self.decay.get(need, 0.0))
        _check_unit("deprivation_threshold", self.deprivation_threshold)

    @classmethod
    def default(cls, decay: float = 0.05) -> "NeedCatalog":
        needs = {"basic": BASIC_NEEDS, "social": SOCIAL_NEEDS}
        return cls(
            categories=("basic", "social"),
            needs_by_category=needs,
            decay={n: decay for group in needs.values() for n in group},
        )

    @property
    def needs(self) -> List[str]:
        return [n for c in self.categories for n in self.needs_by_category[c]]

    def category_of(self, need: str) -> str:
        for cat in self.categories:
            if need in self.needs_by_category[cat]:
                return cat
        raise KeyError(need)


@dataclass
class NeedsState:
    nsl: Dict[str, float]
    importance: Dict[str, float]

    def __post_init__(self) -> None:
        for need, value in self.nsl.items():
            _check_unit(f"nsl[{need}]", value)
        for cat, value in self.importance.items():
            _check_unit(f"importance[{cat}]", value)

    def urgency(self, need: str) -> float:
        return urgency(self.nsl[need])


@dataclass
class AgentState:
    id: str
    profile: Profile
    wealth: int
    needs: NeedsState
    location: str
    last_action: Optional[str] = None

    def __post_init__(self) -> None:
        if self.wealth < 0:
            raise ContractViolation(f"agent {self.id}: wealth must be >= 0, got {self.wealth}")


def urgency(nsl_value: float) -> float:
    _check_unit("nsl_value", nsl_value)
    return 1.0 - nsl_value


def update_need(nsl_value: float, decay_rate: float, realized_refill: float) -> float:
    """One step of decay plus refill, clamped to [0, 1]."""
    _check_unit("nsl_value", nsl_value)
    _check_unit("decay_rate", decay_rate)
    if realized_refill < 0:
        raise ContractViolation(f"realized_refill must be >= 0, got {realized_refill!r}")
    return min(1.0, max(0.0, nsl_value - decay_rate + realized_refill))


def financial_security_nsl(wealth: float, reference_buffer: float) -> float:
    if reference_buffer <= 0:
        raise ContractViolation(f"reference_buffer must be > 0, got {reference_buffer!r}")
    if wealth < 0:
        raise ContractViolation(f"wealth must be >= 0, got {wealth!r}")
    return min(1.0, wealth / reference_buffer)


def importance_for(
    profile: Profile,
    defaults: Mapping[str, float],
    by_status: Optional[Mapping[str, Mapping[str, float]]] = None,
) -> Dict[str, float]:
    """Category weights for one agent: defaults overlaid with its status group."""
    weights = dict(defaults)
    if by_status and profile.status in by_status:
        weights.update(by_status[profile.status])
    return weights


def mean_nsl(agents: Sequence[AgentState], needs: Sequence[str]) -> Dict[str, float]:
    if not agents:
        return {n: 0.0 for n in needs}
    count = len(agents)
    return {n: sum(a.needs.nsl[n] for a in agents) / count for n in needs}


__all__ = [
    "STATUSES",
    "BASIC_NEEDS",
    "SOCIAL_NEEDS",
    "FINANCIAL_SECURITY",
    "DEFAULT_IMPORTANCE",
    "ContractViolation",
    "Profile",
    "NeedCatalog",
    "NeedsState",
    "AgentState",
    "urgency",
    "update_need",
    "financial_security_nsl",
    "importance_for",
    "mean_nsl",
]
