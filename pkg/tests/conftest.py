import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from normsim.core import AgentState, NeedCatalog, NeedsState, Profile
from normsim.deliberation import SatMatrix
from normsim.environment import ActionDef, Location, WorldState
from normsim.norms import parse_norms
from normsim.scenario import bundled_path

DATA = bundled_path("")
GOLDEN = Path(__file__).parent / "golden"


class FixedDrawRandom(random.Random):
    """Seeded shuffles, but every uniform draw returns the same value."""

    def __init__(self, draw, seed=0):
        super().__init__(seed)
        self.draw = draw

    def random(self):
        return self.draw


def make_agent(agent_id="a000", nsl=None, importance=None, wealth=0, address="home", status="unemployed",
               residency=True, bank=True, location=None, last_action=None, age=40, income=0):
    profile = Profile(age=age, gender="female", address=address, income=income, status=status,
                      residency=residency, has_bank_account=bank)
    return AgentState(
        id=agent_id,
        profile=profile,
        wealth=wealth,
        needs=NeedsState(dict(nsl or {}), dict(importance or {"basic": 1.0})),
        location=location or (address if address is not None else "street"),
        last_action=last_action,
    )


def make_world(agents, actions=(), locations=None, norms=(), needs=None, decay=None, sat=None,
               rng=None, buffer=900.0):
    needs = needs or {"basic": ("food",)}
    catalog = NeedCatalog(
        categories=tuple(needs),
        needs_by_category=needs,
        decay=decay or {n: 0.0 for ns in needs.values() for n in ns},
    )
    locations = locations or [Location("home", "home"), Location("street", "public_space")]
    return WorldState(
        step=0,
        agents=list(agents),
        locations={loc.id: loc for loc in locations},
        actions={a.id: a for a in actions},
        norms=tuple(norms),
        catalog=catalog,
        sat=sat or SatMatrix(),
        rng=rng or random.Random(0),
        financial_buffer=buffer,
    )


@pytest.fixture
def barcelona_norms():
    return parse_norms((DATA / "barcelona_norms.adico").read_text(encoding="utf-8"))


@pytest.fixture
def barcelona_path():
    return DATA / "barcelona_mini.yaml"


ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[number]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
