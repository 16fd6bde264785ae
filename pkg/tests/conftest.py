import io
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from ibts.core import ESequence, EventInterval  # noqa: E402
from ibts.ingest import Dataset, parse_dataset  # noqa: E402

DATA = Path(__file__).parent / "data"
TOY_EVENTS = DATA / "toy_events.csv"
TOY_CLASSES = DATA / "toy_classes.csv"

# Raw rows of the four-sequence example dataset.
TOY = {
    "1": [("A", 8, 28), ("B", 18, 21), ("C", 24, 28), ("E", 25, 27)],
    "2": [("A", 1, 14), ("C", 6, 14), ("E", 8, 11), ("F", 8, 11)],
    "3": [("A", 6, 22), ("B", 6, 14), ("C", 14, 20), ("E", 16, 18)],
    "4": [("A", 4, 24), ("B", 5, 10), ("D", 5, 12), ("C", 16, 22), ("E", 18, 20)],
}
TOY_CLASS = {"1": "+", "2": "-", "3": "+", "4": "+"}


@pytest.fixture
def toy():
    with open(TOY_EVENTS, newline="") as ev, open(TOY_CLASSES, newline="") as cl:
        return parse_dataset(ev, cl)


@pytest.fixture
def toy_paths():
    return TOY_EVENTS, TOY_CLASSES


def seq(sid, rows):
    return ESequence(str(sid), [EventInterval(*r) for r in rows])


@st.composite
def label_intervals(draw, label, max_time):
    """Disjoint (possibly touching) intervals of one label inside [0, max_time]."""
    points = sorted(draw(st.sets(st.integers(0, max_time), min_size=2, max_size=6)))
    out = []
    i = 0
    while i + 1 < len(points):
        out.append((label, points[i], points[i + 1]))
        # touching the next interval reuses the finish point as a begin
        i += 1 if draw(st.booleans()) else 2
    return out


@st.composite
def raw_sequences(draw, labels="ABCD", max_time=6):
    chosen = draw(st.lists(st.sampled_from(labels), min_size=1, max_size=len(labels), unique=True))
    rows = []
    for l in chosen:
        rows.extend(draw(label_intervals(l, max_time)))
    return rows


@st.composite
def datasets(draw, labels="ABCD", max_time=6, min_size=1, max_size=6, classes=("x", "y")):
    raws = draw(st.lists(raw_sequences(labels, max_time), min_size=min_size, max_size=max_size))
    seqs = [seq(i + 1, r) for i, r in enumerate(raws)]
    cls = {s.id: draw(st.sampled_from(classes)) for s in seqs}
    return Dataset(seqs, cls), raws


# -- acceptance reporting -------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        prev = _CRITERIA.get(number, (text, True))
        _CRITERIA[number] = (text, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}")
