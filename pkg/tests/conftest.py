import sys

import pytest

from dindex.graph import PaperRecord, build_graph


@pytest.fixture
def toy_graph():
    """Focal F cites R; X cites F; Y cites F and R; Z cites R only."""
    records = [
        PaperRecord("F", 2000),
        PaperRecord("R", 1995),
        PaperRecord("X", 2001),
        PaperRecord("Y", 2002),
        PaperRecord("Z", 2003),
    ]
    edges = [("F", "R"), ("X", "F"), ("Y", "F"), ("Y", "R"), ("Z", "R")]
    return build_graph(records, edges)


def pytest_runtest_logreport(report):
    # one live pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {name}: {report.outcome.upper()}",
              file=sys.stderr, flush=True)
