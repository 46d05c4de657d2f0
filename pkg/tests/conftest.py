import os
import sys

import pytest

from jsjforge.gog import parse_graph

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURES, name + ".gog")


def load(name):
    with open(fixture_path(name)) as fh:
        return parse_graph(fh.read())


@pytest.fixture
def graphs():
    return load


def relators(g):
    """Defining relators of a rank-1 graph of groups, as words in the
    letters of its normal-form model: x_o^m x_t^-n on tree edges and
    s x_o^m s^-1 x_t^-n on edges with a stable letter s."""
    from jsjforge.bass_serre import GraphModel

    letters = GraphModel(g).gens
    out = []
    for name, e in sorted(g.edges.items()):
        m, n = e.inj_o.label, e.inj_t.label
        if name in letters:
            out.append("%s %s^%d %s^-1 %s^%d" % (name, e.o, m, name, e.t, -n))
        else:
            out.append("%s^%d %s^%d" % (e.o, m, e.t, -n))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda x: int(x.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
