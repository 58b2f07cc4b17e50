import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from hypersocial.hypergraph import Hypergraph, toy_hypergraph  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def toy():
    return toy_hypergraph()


@pytest.fixture
def acceptance_log():
    def record(name, ok, detail=""):
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        line = f"[{status}] {name}" + (f" :: {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def hypergraphs(draw, max_nodes=12, max_edges=10, min_size=1, max_size=6):
    n = draw(st.integers(1, max_nodes))
    edges = draw(st.lists(
        st.sets(st.integers(0, n - 1), min_size=min_size, max_size=min(max_size, n)),
        min_size=0, max_size=max_edges,
    ))
    return edges


def as_hypergraph(edges):
    return Hypergraph(edges)
