"""Quota-based synthetic populations."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .core import (
    DEFAULT_IMPORTANCE,
    FINANCIAL_SECURITY,
    STATUSES,
    AgentState,
    ContractViolation,
    NeedCatalog,
    NeedsState,
    Profile,
    financial_security_nsl,
    importance_for,
)

SHARE_TOLERANCE = 1e-9
DEFAULT_NSL_RANGE = (0.5, 0.9)


class PopulationError(ContractViolation):
    pass


@dataclass(frozen=True)
class IncomeBracket:
    share: float
    minimum: int
    maximum: int

    def __post_init__(self) -> None:
        if not 0 <= self.minimum <= self.maximum:
            raise PopulationError(f"income bracket needs 0 <= min <= max, got {self.minimum}..{self.maximum}")


@dataclass(frozen=True)
class PopulationSpec:
    size: int
    status_shares: Mapping[str, float]
    homeless_share: float = 0.0
    income_brackets: Sequence[IncomeBracket] = (IncomeBracket(1.0, 0, 0),)
    age_range: Tuple[int, int] = (18, 80)
    gender_shares: Mapping[str, float] = field(default_factory=lambda: {"female": 0.5, "male": 0.5})
    residency_share: float = 1.0
    bank_account_share: float = 1.0
    homeless_never_employed: bool = True

    def __post_init__(self) -> None:
        validate_spec(self)


def _check_shares(name: str, shares: Sequence[float]) -> None:
    for s in shares:
        if not 0.0 <= s <= 1.0:
            raise PopulationError(f"{name}: share {s!r} outside [0, 1]")
    if abs(sum(shares) - 1.0) > SHARE_TOLERANCE:
        raise PopulationError(f"{name}: shares sum to {sum(shares)!r}, not 1")


def validate_spec(spec: PopulationSpec) -> None:
    if spec.size < 1:
        raise PopulationError(f"population size must be positive, got {spec.size}")
    unknown = set(spec.status_shares) - set(STATUSES)
    if unknown:
        raise PopulationError(f"status_shares: unknown statuses {sorted(unknown)}")
    _check_shares("status_shares", list(spec.status_shares.values()))
    _check_shares("gender_shares", list(spec.gender_shares.values()))
    _check_shares("income_brackets", [b.share for b in spec.income_brackets])
    for name in ("homeless_share", "residency_share", "bank_account_share"):
        value = getattr(spec, name)
        if not 0.0 <= value <= 1.0:
            raise PopulationError(f"{name} must lie in [0, 1], got {value!r}")
    lo, hi = spec.age_range
    if not 0 <= lo <= hi:
        raise PopulationError(f"age_range must satisfy 0 <= min <= max, got {spec.age_range}")


def quota_counts(size: int, shares: Mapping[str, float]) -> Dict[str, int]:
    """Largest-remainder apportionment of ``size`` over ``shares``.

    Remainder ties go to the key declared first.  Shares are read as the
    decimals they print as, so 0.65 * 10 is exactly 6.5.
    """
    exact = {k: _as_fraction(v) * size for k, v in shares.items()}
    counts = {k: int(q) for k, q in exact.items()}  # floor, shares are non-negative
    short = size - sum(counts.values())
    keys = list(shares)
    by_remainder = sorted(keys, key=lambda k: (-(exact[k] - counts[k]), keys.index(k)))
    for k in by_remainder[:short]:
        counts[k] += 1
    return counts


def _as_fraction(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(repr(float(value)))


def _quota_column(size: int, shares: Mapping, rng: random.Random) -> List:
    values: List = []
    for key, count in quota_counts(size, shares).items():
        values.extend([key] * count)
    rng.shuffle(values)
    return values


def _binary_column(size: int, share: float, rng: random.Random) -> List[bool]:
    yes = _as_fraction(share)
    return _quota_column(size, {True: yes, False: 1 - yes}, rng)


def generate_population(
    spec: PopulationSpec,
    seed: int,
    *,
    catalog: Optional[NeedCatalog] = None,
    initial_nsl: Optional[Mapping[str, Tuple[float, float]]] = None,
    importance: Optional[Mapping[str, float]] = None,
    importance_by_status: Optional[Mapping[str, Mapping[str, float]]] = None,
    home_ids: Sequence[str] = ("home",),
    street_location: str = "street",
    financial_buffer: float = 900.0,
) -> List[AgentState]:
    """Build ``spec.size`` agents deterministically from ``seed``.

    Housed agents are spread round-robin over ``home_ids`` and start there;
    homeless agents have no address and start at ``street_location``.
    """
    validate_spec(spec)
    if not home_ids:
        raise PopulationError("at least one home location is needed")
    catalog = catalog or NeedCatalog.default()
    initial_nsl = dict(initial_nsl or {})
    importance = dict(importance or DEFAULT_IMPORTANCE)
    rng = random.Random(f"population:{seed}")
    n = spec.size

    statuses = _quota_column(n, spec.status_shares, rng)
    homeless = _binary_column(n, spec.homeless_share, rng)
    genders = _quota_column(n, spec.gender_shares, rng)
    brackets = _quota_column(n, {i: b.share for i, b in enumerate(spec.income_brackets)}, rng)
    residency = _binary_column(n, spec.residency_share, rng)
    banked = _binary_column(n, spec.bank_account_share, rng)

    if spec.homeless_never_employed:
        _reassign_homeless_employed(statuses, homeless, rng)

    width = max(3, len(str(n - 1)))
    agents: List[AgentState] = []
    housed_seen = 0
    for i in range(n):
        bracket = spec.income_brackets[brackets[i]]
        income = rng.randint(bracket.minimum, bracket.maximum)
        age = rng.randint(*spec.age_range)
        if homeless[i]:
            address = None
            wealth = bracket.minimum
        else:
            address = home_ids[housed_seen % len(home_ids)]
            housed_seen += 1
            wealth = income
        profile = Profile(
            age=age,
            gender=genders[i],
            address=address,
            income=income,
            status=statuses[i],
            residency=residency[i],
            has_bank_account=banked[i],
        )
        nsl = {}
        for need in catalog.needs:
            lo, hi = initial_nsl.get(need, initial_nsl.get("default", DEFAULT_NSL_RANGE))
            nsl[need] = rng.uniform(lo, hi)
        if FINANCIAL_SECURITY in nsl:
            nsl[FINANCIAL_SECURITY] = financial_security_nsl(wealth, financial_buffer)
        agents.append(
            AgentState(
                id=f"a{i:0{width}d}",
                profile=profile,
                wealth=wealth,
                needs=NeedsState(nsl, importance_for(profile, importance, importance_by_status)),
                location=address if address is not None else street_location,
            )
        )
    return agents


def _reassign_homeless_employed(statuses: List[str], homeless: List[bool], rng: random.Random) -> None:
    """Swap statuses so no homeless agent is employed; status counts are unchanged."""
    offenders = [i for i, s in enumerate(statuses) if s == "employed" and homeless[i]]
    if not offenders:
        return
    donors = [i for i, s in enumerate(statuses) if s != "employed" and not homeless[i]]
    if len(donors) < len(offenders):
        raise PopulationError(
            f"cannot keep {len(offenders)} homeless agents out of employment: "
            f"only {len(donors)} housed non-employed agents to swap with"
        )
    rng.shuffle(donors)
    for i, j in zip(offenders, donors):
        statuses[i], statuses[j] = statuses[j], statuses[i]
