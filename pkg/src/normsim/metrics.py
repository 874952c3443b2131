"""Poverty and inequality indicators computed between settlement steps."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .core import AgentState, mean_nsl

DEFAULT_LINE_FRACTION = 0.6
DEFAULT_INCOME_WINDOW = 30


def gini(values: Sequence[float]) -> float:
    """Gini coefficient, sum_ij |x_i - x_j| / (2 n^2 mean).

    Evaluated through the sorted-rank identity, which is O(n log n).
    An all-zero input returns 0.
    """
    if len(values) == 0:
        raise ValueError("gini of an empty sequence")
    if any(v < 0 for v in values):
        raise ValueError("gini needs non-negative values")
    xs = sorted(values)
    n = len(xs)
    total = math.fsum(xs)
    if total == 0:
        return 0.0
    weighted = math.fsum((2 * i - n - 1) * x for i, x in enumerate(xs, start=1))
    return weighted / (n * total)


def lower_median(values: Sequence[float]) -> float:
    xs = sorted(values)
    return xs[(len(xs) - 1) // 2]


def poverty_headcount(incomes: Sequence[float], line_fraction: float = DEFAULT_LINE_FRACTION) -> Tuple[float, float]:
    """Share of incomes strictly below ``line_fraction`` times the median; returns (ratio, line)."""
    if len(incomes) == 0:
        raise ValueError("poverty_headcount of an empty sequence")
    if not 0.0 < line_fraction <= 1.0:
        raise ValueError(f"line_fraction must lie in (0, 1], got {line_fraction!r}")
    line = line_fraction * lower_median(incomes)
    below = sum(1 for x in incomes if x < line)
    return below / len(incomes), line


def deprivation_index(agents: Sequence[AgentState], threshold: float, basic_needs: Iterable[str]) -> float:
    if not agents:
        raise ValueError("deprivation_index of an empty population")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold!r}")
    needs = list(basic_needs)
    deprived = sum(1 for a in agents if any(a.needs.nsl[n] < threshold for n in needs))
    return deprived / len(agents)


@dataclass(frozen=True)
class StepMetrics:
    step: int
    gini_wealth: float
    poverty_line: float
    headcount_ratio: float
    deprivation_index: float
    mean_nsl: Dict[str, float]

    def row(self, needs: Sequence[str]) -> List[str]:
        cells = [self.gini_wealth, self.poverty_line, self.headcount_ratio, self.deprivation_index]
        cells += [self.mean_nsl[n] for n in needs]
        return [str(self.step)] + [f"{v:.6f}" for v in cells]


def trailing_incomes(world, window: int) -> List[int]:
    """Wages plus transfers each agent received over the last ``window`` settled steps."""
    recent = world.inflows[-window:] if window > 0 else []
    return [sum(step.get(a.id, 0) for step in recent) for a in world.agents]


def record_step(
    world,
    line_fraction: float = DEFAULT_LINE_FRACTION,
    income_window: int = DEFAULT_INCOME_WINDOW,
    deprivation_threshold: Optional[float] = None,
    series: Optional[List[StepMetrics]] = None,
) -> StepMetrics:
    catalog = world.catalog
    threshold = catalog.deprivation_threshold if deprivation_threshold is None else deprivation_threshold
    basic = catalog.needs_by_category.get("basic", tuple(catalog.needs))
    ratio, line = poverty_headcount(trailing_incomes(world, income_window), line_fraction)
    metrics = StepMetrics(
        step=world.step,
        gini_wealth=gini([a.wealth for a in world.agents]),
        poverty_line=line,
        headcount_ratio=ratio,
        deprivation_index=deprivation_index(world.agents, threshold, basic),
        mean_nsl=mean_nsl(world.agents, catalog.needs),
    )
    if series is not None:
        series.append(metrics)
    return metrics


METRIC_FIELDS = ("gini_wealth", "poverty_line", "headcount_ratio", "deprivation_index")


def metrics_header(needs: Sequence[str]) -> List[str]:
    return ["step", *METRIC_FIELDS] + [f"mean_nsl_{n}" for n in needs]


def metrics_csv(series: Sequence[StepMetrics], needs: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(metrics_header(needs))
    for m in series:
        writer.writerow(m.row(needs))
    return buf.getvalue()


def as_dict(m: StepMetrics) -> Dict[str, float]:
    out: Dict[str, float] = {"step": m.step}
    out.update({f: getattr(m, f) for f in METRIC_FIELDS})
    out.update({f"mean_nsl_{n}": v for n, v in m.mean_nsl.items()})
    return out
