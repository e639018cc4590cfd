from fractions import Fraction
from pathlib import Path

import pytest

from gridalloc.core import Allocation, ProblemInstance, ProcessorSpec, SourceSpec, load_instance, parse_allocation

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
GRID = DATA / "grid5x3.json"
PUBLISHED = DATA / "grid5x3_published.json"

# criterion lines collected by test_acceptance and echoed in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def proc(pid, t, c, s, z=0):
    return ProcessorSpec(pid, Fraction(t), Fraction(c), Fraction(z), Fraction(s))


def src(sid, w, b, d):
    return SourceSpec(sid, Fraction(w), Fraction(b), Fraction(d))


def alloc(rows):
    return Allocation(tuple(tuple(Fraction(v) for v in r) for r in rows))


@pytest.fixture
def grid():
    return load_instance(GRID)


@pytest.fixture
def published(grid):
    return parse_allocation(PUBLISHED.read_text(), grid)


@pytest.fixture
def trivial():
    """One source {w=10,b=20,d=10} on one processor {t=1,c=2,s=10}."""
    return ProblemInstance((proc("P1", 1, 2, 10),), (src("S1", 10, 20, 10),))


@pytest.fixture
def two_processor():
    """A{t=1,c=1,s=2} and B{t=1,c=2,s=10} sharing a 4-unit source."""
    return ProblemInstance((proc("A", 1, 1, 2), proc("B", 1, 2, 10)), (src("S1", 4, 100, 10),))
