import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from borelbounds.core import EventSystem, FiniteSpace  # noqa: E402
from borelbounds.six_events import six_event_system, space_text  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def six():
    return six_event_system()


@pytest.fixture(scope="session")
def space_file(tmp_path_factory):
    # examples/ is not tracked; fall back to a freshly rendered copy
    path = ROOT / "examples" / "paper_s3.space"
    if path.exists():
        return path
    path = tmp_path_factory.mktemp("six") / "paper_s3.space"
    path.write_text(space_text())
    return path


def random_corpus_system(rng, max_events=8, max_atoms=12, max_granularity=20, positive=True):
    """Atoms with probabilities k/g (zeros allowed), events random nonempty
    atom subsets; with ``positive`` every event has positive probability."""
    atoms = int(rng.integers(1, max_atoms + 1))
    g = int(rng.integers(max(atoms, 1), max_granularity + 1)) if atoms <= max_granularity else atoms
    w = rng.multinomial(g, np.ones(atoms) / atoms)
    space = FiniteSpace(tuple((f"x{i + 1}", Fraction(int(k), g)) for i, k in enumerate(w)))
    m = int(rng.integers(1, max_events + 1))
    masks = []
    while len(masks) < m:
        mask = int(rng.integers(1, 1 << atoms))
        if positive and space.weight(mask) == 0:
            continue
        masks.append(mask)
    return EventSystem.from_masks(space, masks)


@st.composite
def event_systems(draw, max_atoms=8, max_events=6, positive=True):
    atoms = draw(st.integers(1, max_atoms))
    weights = draw(st.lists(st.integers(0, 6), min_size=atoms, max_size=atoms).filter(lambda w: sum(w) > 0))
    total = sum(weights)
    space = FiniteSpace(tuple((f"a{i}", Fraction(k, total)) for i, k in enumerate(weights)))
    positive_atoms = [i for i, k in enumerate(weights) if k]
    m = draw(st.integers(1, max_events))
    masks = []
    for _ in range(m):
        mask = draw(st.integers(1, (1 << atoms) - 1))
        if positive and space.weight(mask) == 0:
            mask |= 1 << draw(st.sampled_from(positive_atoms))
        masks.append(mask)
    return EventSystem.from_masks(space, masks)


# -- acceptance summary ----------------------------------------------------

_ACCEPTANCE: dict[str, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        crit = name.split("_")[2] if name.startswith("test_criterion_") else name
        _ACCEPTANCE.setdefault(crit, []).append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=lambda c: (len(c), c)):
        results = _ACCEPTANCE[crit]
        ok = all(outcome == "passed" for _, outcome in results)
        parts = ", ".join(f"{n.split('_', 3)[-1]}={o}" for n, o in results)
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  ({parts})")
