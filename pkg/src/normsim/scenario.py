"""Scenario configuration, the deliberate/settle loop, output files, comparisons.

Scenario files are YAML.  A file may start from another one with
``extends: other.yaml``; mappings are merged key by key and everything else
is replaced.  Paths inside a scenario are relative to the file that names
them.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import random
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import yaml

from .core import DEFAULT_IMPORTANCE, STATUSES, ContractViolation, NeedCatalog
from .deliberation import SatMatrix, select_action
from .environment import (
    HOME,
    IDLE,
    IDLE_ACTION,
    ActionDef,
    Event,
    Location,
    SettlementSummary,
    WorldState,
    available_actions,
    settle,
)
from .metrics import (
    DEFAULT_INCOME_WINDOW,
    DEFAULT_LINE_FRACTION,
    METRIC_FIELDS,
    StepMetrics,
    as_dict,
    metrics_csv,
    record_step,
)
from .norms import NormError, NormStatement, canonicalize, parse_norms, parse_predicate, with_active
from .population import DEFAULT_NSL_RANGE, IncomeBracket, PopulationError, PopulationSpec, generate_population

log = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1


# -- errors -------------------------------------------------------------------


class ScenarioError(ValueError):
    def __init__(self, path: Any, field_path: str, message: str):
        where = f"{path}: {field_path}" if field_path else f"{path}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.field_path = field_path


class ScenarioFileError(ScenarioError):
    """The scenario (or a file it names) is missing or unreadable."""


class SchemaError(ScenarioError):
    """A field is missing, mistyped, or out of range."""


class DanglingReferenceError(ScenarioError):
    """A field names a need, action, location or norm that is not declared."""


class ComparisonError(ValueError):
    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


# -- config -------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    steps: int
    seed: int
    population: PopulationSpec
    catalog: NeedCatalog
    locations: Dict[str, Location]
    actions: Dict[str, ActionDef]
    sat: SatMatrix
    norms_file: Optional[Path]
    norms: Tuple[NormStatement, ...]
    active_norms: Optional[Tuple[str, ...]] = None
    initial_nsl: Mapping[str, Tuple[float, float]] = field(default_factory=dict)
    importance: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_IMPORTANCE))
    importance_by_status: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    financial_buffer: float = 900.0
    line_fraction: float = DEFAULT_LINE_FRACTION
    income_window: int = DEFAULT_INCOME_WINDOW
    source: Optional[Path] = None

    @property
    def effective_norms(self) -> List[NormStatement]:
        """Norms with ``active_norms`` (when given) overriding their own flags."""
        if self.active_norms is None:
            return list(self.norms)
        wanted = set(self.active_norms)
        return [with_active(n, n.id in wanted) for n in self.norms]

    @property
    def home_ids(self) -> List[str]:
        return sorted(lid for lid, loc in self.locations.items() if loc.kind == "home")

    @property
    def street_location(self) -> str:
        public = sorted(lid for lid, loc in self.locations.items() if loc.kind == "public_space")
        return public[0] if public else sorted(self.locations)[0]

    def with_overrides(self, seed: Optional[int] = None, steps: Optional[int] = None) -> "ScenarioConfig":
        cfg = self
        if seed is not None:
            _check_seed(seed, cfg.source, "seed")
            cfg = replace(cfg, seed=seed)
        if steps is not None:
            if steps < 1:
                raise SchemaError(cfg.source, "steps", f"must be a positive integer, got {steps}")
            cfg = replace(cfg, steps=steps)
        return cfg

    def comparable(self) -> Dict[str, Any]:
        """Everything a comparison requires to be equal between two runs."""
        return {
            "steps": self.steps,
            "seed": self.seed,
            "population": _plain(self.population),
            "needs": {
                "categories": {c: list(self.catalog.needs_by_category[c]) for c in self.catalog.categories},
                "decay": dict(self.catalog.decay),
                "deprivation_threshold": self.catalog.deprivation_threshold,
                "initial_nsl": {k: list(v) for k, v in self.initial_nsl.items()},
                "importance": dict(self.importance),
                "importance_by_status": {k: dict(v) for k, v in self.importance_by_status.items()},
                "financial_buffer": self.financial_buffer,
            },
            "locations": {k: _plain(v) for k, v in self.locations.items()},
            "actions": {k: _plain(v) for k, v in self.actions.items()},
            "sat_matrix": {f"{a}.{n}": v for (n, a), v in sorted(self.sat.items())},
            "norms": canonicalize([with_active(n, True) for n in self.norms]),
            "metrics": {"line_fraction": self.line_fraction, "income_window": self.income_window},
        }


def _plain(obj: Any) -> Any:
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _plain(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    return obj


def _check_seed(seed: Any, path: Any, where: str) -> None:
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MAX_SEED:
        raise SchemaError(path, where, f"must be an unsigned 64-bit integer, got {seed!r}")


BUNDLED = ("barcelona_mini", "barcelona_baseline", "shelter_contention")


def bundled_path(name: str) -> Path:
    """Path of a scenario or norm file shipped with the package."""
    return Path(str(resources.files("normsim") / "data" / name))


def resolve_scenario_path(arg: str) -> Path:
    path = Path(arg)
    if not path.exists() and arg in BUNDLED:
        return bundled_path(f"{arg}.yaml")
    return path


def _merge(base: Dict[str, Any], over: Mapping[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in over.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _merge(dict(out[key]), value)
        else:
            out[key] = value
    return out


def _read_raw(path: Path, chain: Tuple[Path, ...] = ()) -> Tuple[Dict[str, Any], Path]:
    """Load YAML, following ``extends``; returns the merged mapping and the dir for relative paths."""
    path = path.resolve()
    if path in chain:
        raise SchemaError(path, "extends", "circular extends chain")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ScenarioFileError(path, "", "file not found") from None
    except OSError as exc:
        raise ScenarioFileError(path, "", f"cannot read: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(path, "", f"not valid YAML: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise SchemaError(path, "", "top level must be a mapping")
    base_dir = path.parent
    if "extends" in raw:
        parent_ref = raw.pop("extends")
        if not isinstance(parent_ref, str):
            raise SchemaError(path, "extends", "must be a file path")
        parent, parent_dir = _read_raw(base_dir / parent_ref, chain + (path,))
        if "norms_file" not in raw and "norms_file" in parent:
            parent["norms_file"] = str((parent_dir / parent["norms_file"]).resolve())
        raw = _merge(parent, raw)
    return raw, base_dir


class _Fields:
    """Typed accessors over one mapping that report the full field path on failure."""

    def __init__(self, path: Path, data: Any, prefix: str = ""):
        self.path = path
        self.prefix = prefix
        if not isinstance(data, Mapping):
            raise SchemaError(path, prefix or "<root>", "must be a mapping")
        self.data = data

    def where(self, key: str) -> str:
        return f"{self.prefix}.{key}" if self.prefix else key

    def fail(self, key: str, message: str) -> SchemaError:
        return SchemaError(self.path, self.where(key), message)

    def get(self, key: str, default: Any = ..., kind: Any = None) -> Any:
        if key not in self.data:
            if default is ...:
                raise self.fail(key, "required field is missing")
            return default
        value = self.data[key]
        if kind is not None and not _isinstance(value, kind):
            raise self.fail(key, f"expected {_kind_name(kind)}, got {type(value).__name__}")
        return value

    def number(self, key: str, default: Any = ..., lo: float = float("-inf"), hi: float = float("inf")) -> float:
        value = self.get(key, default, kind=float)
        if not lo <= value <= hi:
            raise self.fail(key, f"must lie in [{lo}, {hi}], got {value!r}")
        return float(value)

    def integer(self, key: str, default: Any = ..., lo: int = 0) -> int:
        value = self.get(key, default, kind=int)
        if value < lo:
            raise self.fail(key, f"must be >= {lo}, got {value!r}")
        return value

    def sub(self, key: str, default: Any = ...) -> "_Fields":
        return _Fields(self.path, self.get(key, default), self.where(key))

    def unknown(self, allowed: Sequence[str]) -> None:
        extra = sorted(set(self.data) - set(allowed))
        if extra:
            raise self.fail(extra[0], f"unknown field (allowed: {', '.join(allowed)})")


def _isinstance(value: Any, kind: Any) -> bool:
    if isinstance(value, bool):
        return kind is bool
    if kind is float:
        return isinstance(value, (int, float))
    return isinstance(value, kind)


def _kind_name(kind: Any) -> str:
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return {float: "number", int: "integer", str: "string", bool: "boolean", list: "list", dict: "mapping"}.get(
        kind, kind.__name__
    )


def _unit_range(f: _Fields, key: str) -> Tuple[float, float]:
    value = f.get(key, kind=list)
    if (
        len(value) != 2
        or not all(_isinstance(v, float) for v in value)
        or not 0.0 <= value[0] <= value[1] <= 1.0
    ):
        raise f.fail(key, f"must be [lo, hi] with 0 <= lo <= hi <= 1, got {value!r}")
    return float(value[0]), float(value[1])


def _population(f: _Fields) -> PopulationSpec:
    f.unknown(
        ("size", "status_shares", "homeless_share", "income_brackets", "age_range", "gender_shares",
         "residency_share", "bank_account_share", "homeless_never_employed")
    )
    statuses = f.get("status_shares", kind=dict)
    for status in statuses:
        if status not in STATUSES:
            raise SchemaError(f.path, f.where(f"status_shares.{status}"), f"unknown status (one of {STATUSES})")
    brackets = []
    for i, row in enumerate(f.get("income_brackets", [{"share": 1.0, "min": 0, "max": 0}], kind=list)):
        b = _Fields(f.path, row, f.where(f"income_brackets[{i}]"))
        b.unknown(("share", "min", "max"))
        brackets.append(IncomeBracket(b.number("share", lo=0, hi=1), b.integer("min"), b.integer("max")))
    age = f.get("age_range", [18, 80], kind=list)
    if len(age) != 2 or not all(_isinstance(a, int) for a in age):
        raise f.fail("age_range", f"must be [min, max] integers, got {age!r}")
    try:
        return PopulationSpec(
            size=f.integer("size", lo=1),
            status_shares={k: float(v) for k, v in statuses.items()},
            homeless_share=f.number("homeless_share", 0.0, 0, 1),
            income_brackets=tuple(brackets),
            age_range=(age[0], age[1]),
            gender_shares={str(k): float(v) for k, v in f.get("gender_shares", {"female": 0.5, "male": 0.5}, kind=dict).items()},
            residency_share=f.number("residency_share", 1.0, 0, 1),
            bank_account_share=f.number("bank_account_share", 1.0, 0, 1),
            homeless_never_employed=f.get("homeless_never_employed", True, kind=bool),
        )
    except PopulationError as exc:
        raise SchemaError(f.path, f.prefix, str(exc)) from None


def _needs(f: _Fields):
    f.unknown(("categories", "decay", "initial_nsl", "importance", "importance_by_status",
               "deprivation_threshold", "financial_buffer"))
    cats = f.get("categories", kind=dict)
    if not cats:
        raise f.fail("categories", "at least one category is required")
    needs_by_cat = {}
    for cat, needs in cats.items():
        if not isinstance(needs, list) or not all(isinstance(n, str) for n in needs):
            raise f.fail(f"categories.{cat}", "must be a list of need names")
        needs_by_cat[str(cat)] = tuple(needs)
    all_needs = [n for ns in needs_by_cat.values() for n in ns]
    dup = sorted({n for n in all_needs if all_needs.count(n) > 1})
    if dup:
        raise f.fail("categories", f"need {dup[0]!r} appears more than once")
    decay_f = f.sub("decay", {})
    decay = {}
    for need in decay_f.data:
        if need not in all_needs:
            raise DanglingReferenceError(f.path, decay_f.where(need), "decay for an undeclared need")
        decay[need] = decay_f.number(need, lo=0, hi=1)
    for need in all_needs:
        decay.setdefault(need, 0.0)
    init_f = f.sub("initial_nsl", {})
    initial = {}
    for need in init_f.data:
        if need != "default" and need not in all_needs:
            raise DanglingReferenceError(f.path, init_f.where(need), "initial range for an undeclared need")
        initial[need] = _unit_range(init_f, need)
    imp_f = f.sub("importance", {})
    importance = {c: DEFAULT_IMPORTANCE.get(c, 1.0) for c in needs_by_cat}
    for cat in imp_f.data:
        if cat not in needs_by_cat:
            raise DanglingReferenceError(f.path, imp_f.where(cat), "importance for an undeclared category")
        importance[cat] = imp_f.number(cat, lo=0, hi=1)
    by_status_f = f.sub("importance_by_status", {})
    by_status: Dict[str, Dict[str, float]] = {}
    for status in by_status_f.data:
        if status not in STATUSES:
            raise SchemaError(f.path, by_status_f.where(status), f"unknown status (one of {STATUSES})")
        sf = by_status_f.sub(status)
        for cat in sf.data:
            if cat not in needs_by_cat:
                raise DanglingReferenceError(f.path, sf.where(cat), "importance for an undeclared category")
        by_status[status] = {cat: sf.number(cat, lo=0, hi=1) for cat in sf.data}
    catalog = NeedCatalog(
        categories=tuple(needs_by_cat),
        needs_by_category=needs_by_cat,
        decay=decay,
        deprivation_threshold=f.number("deprivation_threshold", 0.3, 0, 1),
    )
    buffer = f.number("financial_buffer", 900.0)
    if buffer <= 0:
        raise f.fail("financial_buffer", f"must be > 0, got {buffer!r}")
    return catalog, initial, importance, by_status, buffer


def _locations(path: Path, rows: Any) -> Dict[str, Location]:
    if not isinstance(rows, list) or not rows:
        raise SchemaError(path, "locations", "must be a non-empty list")
    out: Dict[str, Location] = {}
    for i, row in enumerate(rows):
        f = _Fields(path, row, f"locations[{i}]")
        f.unknown(("id", "kind", "capacity"))
        lid = f.get("id", kind=str)
        if lid in out:
            raise f.fail("id", f"duplicate location id {lid!r}")
        capacity = f.get("capacity", None)
        if capacity is not None and (not _isinstance(capacity, int) or capacity < 1):
            raise f.fail("capacity", f"must be a positive integer or omitted, got {capacity!r}")
        try:
            out[lid] = Location(lid, f.get("kind", kind=str), capacity)
        except ContractViolation as exc:
            raise SchemaError(path, f.prefix, str(exc)) from None
    return out


ACTION_KEYS = ("id", "required_location", "required_status", "requires", "moves_to", "cost", "wage",
               "benefit", "refills", "capacity_limited", "requires_permission")


def _actions(path: Path, rows: Any, needs: Sequence[str]) -> Dict[str, ActionDef]:
    if not isinstance(rows, list):
        raise SchemaError(path, "actions", "must be a list")
    out: Dict[str, ActionDef] = {IDLE: IDLE_ACTION}
    for i, row in enumerate(rows):
        f = _Fields(path, row, f"actions[{i}]")
        f.unknown(ACTION_KEYS)
        aid = f.get("id", kind=str)
        if aid in out:
            raise f.fail("id", f"duplicate action id {aid!r}")
        refills_f = f.sub("refills", {})
        for need in refills_f.data:
            if need not in needs:
                raise DanglingReferenceError(path, refills_f.where(need), "refill for an undeclared need")
        statuses = f.get("required_status", None)
        if statuses is not None:
            if isinstance(statuses, str):
                statuses = [statuses]
            if not isinstance(statuses, list) or not set(statuses) <= set(STATUSES):
                raise f.fail("required_status", f"must list statuses from {STATUSES}")
            statuses = frozenset(statuses)
        requires_text = f.get("requires", None, kind=str)
        try:
            requires = parse_predicate(requires_text) if requires_text else None
        except NormError as exc:
            raise f.fail("requires", str(exc)) from None
        kwargs = dict(
            id=aid,
            required_location=f.get("required_location", None, kind=str),
            required_status=statuses,
            cost=f.integer("cost", 0),
            wage=f.integer("wage", 0),
            benefit=f.integer("benefit", 0),
            refills={n: refills_f.number(n, lo=0, hi=1) for n in refills_f.data},
            capacity_limited=f.get("capacity_limited", False, kind=bool),
            moves_to=f.get("moves_to", None, kind=str),
            requires_permission=f.get("requires_permission", False, kind=bool),
        )
        if requires is not None:
            kwargs["requires"] = requires
        try:
            out[aid] = ActionDef(**kwargs)
        except ContractViolation as exc:
            raise SchemaError(path, f.prefix, str(exc)) from None
    return out


def _sat(path: Path, table: Any, needs: Sequence[str], actions: Mapping[str, ActionDef]) -> SatMatrix:
    f = _Fields(path, table if table is not None else {}, "sat_matrix")
    sat = SatMatrix()
    for action in f.data:
        if action not in actions:
            raise DanglingReferenceError(path, f.where(str(action)), f"undeclared action {action!r}")
        row = f.sub(str(action))
        for need in row.data:
            if need not in needs:
                raise DanglingReferenceError(path, row.where(str(need)), f"undeclared need {need!r}")
            sat.set(need, action, row.number(need, lo=0, hi=1))
    return sat


def _load_norms(path: Path, norms_path: Path) -> Tuple[NormStatement, ...]:
    try:
        text = norms_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ScenarioFileError(path, "norms_file", f"{norms_path} not found") from None
    try:
        return tuple(parse_norms(text))
    except NormError as exc:
        raise SchemaError(path, "norms_file", f"{norms_path}: {exc}") from None


TOP_KEYS = ("name", "steps", "seed", "norms_file", "active_norms", "population", "needs", "locations",
            "actions", "sat_matrix", "metrics")


def load_scenario(path: Any) -> ScenarioConfig:
    """Read, validate and cross-link a scenario file."""
    path = Path(path)
    raw, base_dir = _read_raw(path)
    path = path.resolve()
    f = _Fields(path, raw)
    f.unknown(TOP_KEYS)
    steps = f.get("steps", kind=int)
    if steps < 1:
        raise f.fail("steps", f"must be a positive integer, got {steps}")
    seed = f.get("seed", 0)
    _check_seed(seed, path, "seed")

    population = _population(f.sub("population"))
    catalog, initial, importance, by_status, buffer = _needs(f.sub("needs"))
    locations = _locations(path, f.get("locations"))
    actions = _actions(path, f.get("actions", []), catalog.needs)
    for aid, action in actions.items():
        if action.moves_to not in (None, HOME) and not any(l.kind == action.moves_to for l in locations.values()):
            raise DanglingReferenceError(path, f"actions.{aid}.moves_to", f"no location of kind {action.moves_to!r}")
        if action.required_location is not None and not any(
            l.kind == action.required_location for l in locations.values()
        ):
            raise DanglingReferenceError(
                path, f"actions.{aid}.required_location", f"no location of kind {action.required_location!r}"
            )
    sat = _sat(path, f.get("sat_matrix", {}), catalog.needs, actions)

    norms: Tuple[NormStatement, ...] = ()
    norms_file = None
    if "norms_file" in raw:
        norms_file = (base_dir / f.get("norms_file", kind=str)).resolve()
        norms = _load_norms(path, norms_file)
    ids = [n.id for n in norms]
    for norm in norms:
        if norm.aim_action is not None and norm.aim_action not in actions:
            raise DanglingReferenceError(path, f"norms[{norm.id}].aim", f"undeclared action {norm.aim_action!r}")
    active = f.get("active_norms", None, kind=list)
    if active is not None:
        for i, nid in enumerate(active):
            if nid not in ids:
                raise DanglingReferenceError(path, f"active_norms[{i}]", f"no norm {nid!r} in the norms file")
        active = tuple(active)

    metrics_f = f.sub("metrics", {})
    metrics_f.unknown(("line_fraction", "income_window"))
    line_fraction = metrics_f.number("line_fraction", DEFAULT_LINE_FRACTION, 0, 1)
    if line_fraction == 0:
        raise metrics_f.fail("line_fraction", "must be > 0")

    if population.homeless_share < 1 and not any(l.kind == "home" for l in locations.values()):
        raise DanglingReferenceError(path, "locations", "housed agents need at least one location of kind 'home'")

    return ScenarioConfig(
        name=f.get("name", kind=str),
        steps=steps,
        seed=seed,
        population=population,
        catalog=catalog,
        locations=locations,
        actions=actions,
        sat=sat,
        norms_file=norms_file,
        norms=norms,
        active_norms=active,
        initial_nsl=initial,
        importance=importance,
        importance_by_status=by_status,
        financial_buffer=buffer,
        line_fraction=line_fraction,
        income_window=metrics_f.integer("income_window", DEFAULT_INCOME_WINDOW, lo=1),
        source=path,
    )


# -- running ------------------------------------------------------------------


@dataclass
class RunResult:
    config: ScenarioConfig
    world: WorldState
    metrics: List[StepMetrics]
    summaries: List[SettlementSummary]
    available_log: List[Tuple[int, str, List[str]]]

    @property
    def events(self) -> List[Event]:
        return self.world.event_log


class StepError(ContractViolation):
    pass


class Simulation:
    """One run: population, world, and the per-step deliberate/settle cycle."""

    def __init__(self, config: ScenarioConfig, log_available: bool = False):
        self.config = config
        self.log_available = log_available
        agents = generate_population(
            config.population,
            config.seed,
            catalog=config.catalog,
            initial_nsl=config.initial_nsl or {"default": DEFAULT_NSL_RANGE},
            importance=config.importance,
            importance_by_status=config.importance_by_status,
            home_ids=config.home_ids or ("home",),
            street_location=config.street_location,
            financial_buffer=config.financial_buffer,
        )
        self.world = WorldState(
            step=0,
            agents=agents,
            locations=dict(config.locations),
            actions=dict(config.actions),
            norms=tuple(config.effective_norms),
            catalog=config.catalog,
            sat=config.sat,
            rng=random.Random(f"world:{config.seed}"),
            financial_buffer=config.financial_buffer,
        )
        self.metrics: List[StepMetrics] = []
        self.summaries: List[SettlementSummary] = []
        self.available_log: List[Tuple[int, str, List[str]]] = []

    def deliberate(self) -> Tuple[Dict[str, List[str]], Dict[str, str]]:
        """Every agent picks an action from the frozen step-t world."""
        world = self.world
        available: Dict[str, List[str]] = {}
        chosen: Dict[str, str] = {}
        for agent in world.agents:
            try:
                options = available_actions(agent, world)
                chosen[agent.id] = select_action(agent, options, world.catalog, world.sat)
            except ContractViolation as exc:
                raise StepError(f"step {world.step}, agent {agent.id}: {exc}") from exc
            available[agent.id] = options
        return available, chosen

    def step(self) -> SettlementSummary:
        cfg = self.config
        record_step(self.world, cfg.line_fraction, cfg.income_window, series=self.metrics)
        available, chosen = self.deliberate()
        if self.log_available:
            step = self.world.step
            self.available_log.extend((step, aid, acts) for aid, acts in available.items())
        summary = settle(self.world, chosen, available)
        self.summaries.append(summary)
        return summary

    def run(self) -> RunResult:
        for _ in range(self.config.steps - self.world.step):
            self.step()
        log.info("%s: %d steps, %d events", self.config.name, self.world.step, len(self.world.event_log))
        return RunResult(self.config, self.world, self.metrics, self.summaries, self.available_log)


def run(config: ScenarioConfig, log_available: bool = False) -> RunResult:
    return Simulation(config, log_available=log_available).run()


# -- output files ---------------------------------------------------------------


def events_csv(events: Sequence[Event]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "agent_id", "event_kind", "detail"])
    writer.writerows((e.step, e.agent_id, e.kind, e.detail) for e in events)
    return buf.getvalue()


def available_csv(rows: Sequence[Tuple[int, str, List[str]]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "agent_id", "actions"])
    writer.writerows((step, aid, ";".join(acts)) for step, aid, acts in rows)
    return buf.getvalue()


def final_state(result: RunResult) -> Dict[str, Any]:
    world = result.world
    return {
        "scenario": result.config.name,
        "seed": result.config.seed,
        "step": world.step,
        "active_norms": [n.id for n in world.active_norms],
        "agents": [
            {
                "id": a.id,
                "profile": _plain(a.profile),
                "wealth": a.wealth,
                "location": a.location,
                "last_action": a.last_action,
                "nsl": dict(a.needs.nsl),
                "importance": dict(a.needs.importance),
            }
            for a in world.agents
        ],
    }


def write_outputs(result: RunResult, out_dir: Any) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    needs = result.config.catalog.needs
    (out / "metrics.csv").write_text(metrics_csv(result.metrics, needs), encoding="utf-8")
    (out / "events.csv").write_text(events_csv(result.events), encoding="utf-8")
    (out / "final_state.json").write_text(json.dumps(final_state(result), indent=2) + "\n", encoding="utf-8")
    if result.available_log:
        (out / "available.csv").write_text(available_csv(result.available_log), encoding="utf-8")
    return out


# -- comparison ---------------------------------------------------------------


def _first_difference(a: Any, b: Any, prefix: str = "") -> Optional[str]:
    if isinstance(a, dict) and isinstance(b, dict):
        for key in list(a) + [k for k in b if k not in a]:
            where = f"{prefix}.{key}" if prefix else str(key)
            if key not in a or key not in b:
                return where
            found = _first_difference(a[key], b[key], where)
            if found:
                return found
        return None
    if isinstance(a, list) and isinstance(b, list) and len(a) == len(b):
        for i, (x, y) in enumerate(zip(a, b)):
            found = _first_difference(x, y, f"{prefix}[{i}]")
            if found:
                return found
        return None
    return None if a == b else (prefix or "<root>")


def check_comparable(baseline: ScenarioConfig, variant: ScenarioConfig) -> None:
    diff = _first_difference(baseline.comparable(), variant.comparable())
    if diff is not None:
        raise ComparisonError(diff, "baseline and variant may differ only in active_norms")


@dataclass
class ComparisonReport:
    baseline: str
    variant: str
    seed: int
    steps: int
    norm_diff: List[Dict[str, Any]]
    final_metrics: Dict[str, Dict[str, float]]
    metric_deltas: Dict[str, float]
    series: Dict[str, List[Dict[str, float]]]
    runs: Tuple[RunResult, RunResult] = field(repr=False, compare=False, default=None)  # type: ignore[assignment]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "baseline": self.baseline,
            "variant": self.variant,
            "seed": self.seed,
            "steps": self.steps,
            "norm_diff": self.norm_diff,
            "final_metrics": self.final_metrics,
            "metric_deltas": self.metric_deltas,
            "series": self.series,
        }


def compare(baseline: ScenarioConfig, variant: ScenarioConfig, log_available: bool = False) -> ComparisonReport:
    """Run both configurations under their shared seed and report the policy effect."""
    check_comparable(baseline, variant)
    base_run = run(baseline, log_available)
    var_run = run(variant, log_available)
    base_norms = {n.id: n for n in baseline.effective_norms}
    norm_diff = []
    for norm in variant.effective_norms:
        if base_norms[norm.id].active == norm.active:
            continue
        norm_diff.append(
            {
                "id": norm.id,
                "change": "activated" if norm.active else "deactivated",
                "deontic": norm.deontic,
                "jurisdiction": norm.jurisdiction,
                "character": norm.character,
                "degree": norm.degree,
                "source": norm.source,
            }
        )
    base_final = as_dict(base_run.metrics[-1])
    var_final = as_dict(var_run.metrics[-1])
    return ComparisonReport(
        baseline=baseline.name,
        variant=variant.name,
        seed=baseline.seed,
        steps=baseline.steps,
        norm_diff=norm_diff,
        final_metrics={"baseline": base_final, "variant": var_final},
        metric_deltas={k: var_final[k] - base_final[k] for k in base_final if k != "step"},
        series={
            "baseline": [as_dict(m) for m in base_run.metrics],
            "variant": [as_dict(m) for m in var_run.metrics],
        },
        runs=(base_run, var_run),
    )


def write_report(report: ComparisonReport, out_dir: Any) -> Path:
    """Write report.json plus each run's own output files under baseline/ and variant/."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if report.runs:
        write_outputs(report.runs[0], out / "baseline")
        write_outputs(report.runs[1], out / "variant")
    target = out / "report.json"
    target.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return target


__all__ = [
    "METRIC_FIELDS",
    "ComparisonError",
    "ComparisonReport",
    "DanglingReferenceError",
    "RunResult",
    "ScenarioConfig",
    "ScenarioError",
    "ScenarioFileError",
    "SchemaError",
    "Simulation",
    "StepError",
    "bundled_path",
    "check_comparable",
    "compare",
    "load_scenario",
    "resolve_scenario_path",
    "run",
    "write_outputs",
    "write_report",
]
