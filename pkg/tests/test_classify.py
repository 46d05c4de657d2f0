import pytest

from jsjforge.classify import (PROPERTIES, Budget, TriState, UntrackedEdge, dead_end, explore,
                               global_property)
from jsjforge.gog import EdgeRef, parse_graph
from jsjforge import moves as mv

from conftest import load


def test_fig3_atlas():
    a = explore(load("fig3"))
    assert len(a) == 3 and a.status == "Closed"
    assert sorted(" ".join(a.trace_to(k)) for k in a.order) == ["", "slide ~h ~e", "slide ~h ~f"]


def test_atlas_traces_replay_to_nodes():
    g = load("fig3")
    a = explore(g)
    for k in a.order:
        assert mv.replay(g, a.trace_to(k)).key() == a.nodes[k].key()


def test_fig3_dead_end():
    g = load("fig3")
    st = dead_end(g, "v")
    assert st.is_proven() and st.witness == [EdgeRef("e", False), EdgeRef("f", False)]
    assert dead_end(g, "p").is_refuted() and dead_end(g, "q").is_refuted()


def test_fig3_properties():
    g = load("fig3")
    assert global_property(g, "e", "slippery").witness == ["slide ~h ~e"]
    assert global_property(g, "f", "slippery").witness == ["slide ~h ~f"]
    for prop in PROPERTIES:
        assert global_property(g, "h", prop).evidence == "ClosedAtlas"


def test_fig8_atlas_and_dead_end():
    g = load("fig8")
    a = explore(g)
    assert len(a) == 2 and a.closed
    assert dead_end(g, "v").witness == [EdgeRef("h1", False)]


def test_fig1_atlas():
    g = load("fig1")
    assert len(explore(g)) == 2
    assert global_property(g, "e", "slippery").is_proven()
    assert global_property(g, "a", "slippery").is_refuted()


def test_fig2_pre_ascending_loop():
    g = load("fig2")
    b = Budget(max_nodes=60)
    assert global_property(g, "e", "psa", b).witness == []
    assert global_property(g, "e", "slippery", b).witness == ["slide ~f e"]
    assert global_property(g, "f", "psa", b).is_unknown()


@pytest.mark.parametrize("name", ["bs22", "bs23"])
def test_baumslag_solitar_closed_single_node(name):
    g = load(name)
    a = explore(g)
    assert len(a) == 1 and a.closed
    for prop in PROPERTIES:
        st = global_property(g, "t", prop)
        assert st.is_refuted() and st.evidence == "ClosedAtlas"
    assert dead_end(g, "a").is_refuted()


@pytest.fixture(scope="module")
def fig5():
    g = load("fig5")
    return g, {(e, p): global_property(g, e, p) for e in ("e", "h") for p in ("psa",)} | {
        (e, "slippery"): global_property(g, e, "slippery") for e in ("f", "g")}


def test_fig5_e_pre_ascending(fig5):
    g, props = fig5
    assert props["e", "psa"].witness == []
    assert mv.local_kind(g, EdgeRef("e", False)).pre_ascending


def test_fig5_f_g_slippery(fig5):
    _, props = fig5
    assert props["f", "slippery"].is_proven() and props["g", "slippery"].is_proven()


def test_fig5_h_two_slide_witness(fig5):
    g, props = fig5
    assert props["h", "psa"].witness == ["slide h ~g", "slide h f"]
    labels = [g.labels("h")[1]]
    for line in props["h", "psa"].witness:
        g = mv.apply_move(g, line)
        labels.append(g.labels("h")[1])
    assert labels == [12, 20, 30]
    assert g.edges["h"].is_loop and mv.local_kind(g, EdgeRef("h", False)).pre_ascending


def test_budget_truncation_reports_open():
    a = explore(load("fig2"), Budget(max_nodes=5))
    assert len(a) == 5 and not a.closed and "nodes" in a.truncated


def test_label_budget():
    a = explore(load("fig2"), Budget(max_label=40))
    assert "label" in a.truncated and a.status == "Open"


@pytest.mark.parametrize("name, budgets", [("chain244", [1, 10, 100]), ("fig2", [3, 30, 300])])
def test_budget_ladder_is_monotone(name, budgets):
    g = load(name)
    seen = {}
    for n in budgets:
        b = Budget(max_nodes=n)
        for e in sorted(g.edges):
            for prop in PROPERTIES:
                st = global_property(g, e, prop, b)
                prev = seen.get((e, prop))
                if prev is not None and prev.definite():
                    assert st.verdict == prev.verdict, (e, prop, n)
                seen[e, prop] = st
        for v in sorted(g.vertices):
            st = dead_end(g, v, b)
            prev = seen.get(v)
            if prev is not None and prev.definite():
                assert st.verdict == prev.verdict
            seen[v] = st


def test_errors():
    g = load("fig3")
    with pytest.raises(UntrackedEdge):
        global_property(g, "zz", "psa")
    with pytest.raises(ValueError):
        global_property(g, "e", "wobbly")
    unreduced = parse_graph("vertex u 1\nvertex v 1\nedge a u v [2:1]\n")
    with pytest.raises(mv.NotReduced):
        explore(unreduced)


def test_tristate_dict():
    assert TriState.proven(["slide a e"]).to_dict() == {"verdict": "Proven", "witness": ["slide a e"]}
    assert TriState.unknown(4).to_dict() == {"verdict": "Unknown", "explored": 4}
    assert repr(TriState.refuted("ClosedAtlas")) == "Refuted(ClosedAtlas)"
