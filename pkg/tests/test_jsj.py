import json

import pytest

from jsjforge.bass_serre import GraphModel, bs22_amalgam
from jsjforge.classify import Budget, explore
from jsjforge.gog import EdgeRef, GraphOfGroups, canonical_key, isomorphic, parse_graph
from jsjforge.jsj import (ExpansionUndefined, NotConnected, NotInert, bearing_status,
                          build_t_ab, build_t_comp, collapse_orbits, compatible, expand_inert,
                          inert_status, inert_type_candidate)
from jsjforge.lattice import full, lattice_from_gens
from jsjforge.moves import collapse, slide

from conftest import load


def verdicts(r):
    return {k: (v.kind, v.reason) for k, v in r.verdicts.items()}


# bearing ------------------------------------------------------------------------

def test_bearing_bs22():
    st = bearing_status(load("bs22"), "t")
    assert st.is_proven() and st.witness == ["t"]


def test_bearing_bs2m2_squares_the_letter():
    g = load("bs2m2")
    st = bearing_status(g, "t")
    assert st.witness == ["t^2"]
    m = GraphModel(g)
    # t a^2 t^-1 = a^-2, so t^2 centralizes a^2
    assert m.to_text(m.parse("t a^2 t^-1")) == "a^-2"
    assert m.is_identity(m.parse("t^2 a^2 t^-2 a^-2"))


@pytest.mark.parametrize("name, edge", [("bs23", "t"), ("fig3", "h"), ("fig3", "e")])
def test_bearing_refuted_by_modulus(name, edge):
    st = bearing_status(load(name), edge)
    assert st.is_refuted() and st.evidence == "ModulusObstruction"


def test_bearing_witness_is_hyperbolic_and_centralizes():
    g = load("bs22")
    st = bearing_status(g, "t")
    m = GraphModel(g)
    z = m.parse(st.detail["centralizes"])
    x = m.parse(st.witness[0])
    assert m.is_identity(m.multiply(m.conj(x, z), m.inverse(z)))


def test_bearing_rank2_finite_order_loop():
    assert bearing_status(load("toral6"), "e").is_proven()


# inert -------------------------------------------------------------------------

def test_inert_type_candidates():
    Z2 = full(2)
    assert inert_type_candidate(lattice_from_gens([(2, 0), (0, 1)], 2), Z2) == (2, 2, 1)
    assert inert_type_candidate(lattice_from_gens([(2, 0), (0, 3)], 2), Z2) == (1, None, None)
    assert inert_type_candidate(lattice_from_gens([(4, 0), (0, 1)], 2), Z2) == (2, 2, 2)


@pytest.mark.parametrize("name, edge", [("bs22", "t"), ("bs23", "t"), ("fig3", "e"),
                                        ("fig2", "e"), ("chain244", "f")])
def test_rank_one_never_inert(name, edge):
    st = inert_status(load(name), edge)
    assert st.is_refuted() and st.evidence == "RankOne"


def test_type1_inert_expansion():
    g = load("toral6")
    st = inert_status(g, "e")
    data = st.witness[0]
    assert data.type == 1 and data.H_e == lattice_from_gens([(2, 0), (0, 3)], 2)
    h = expand_inert(g, "e", data)
    new = [n for n in h.edges if n != "e"]
    assert len(new) == 1
    ed = h.edges[new[0]]
    assert ed.inj_o.rows == ((1, 0), (0, 1)) and ed.inj_t.rows == ((1, 0), (0, 1))
    assert isomorphic(collapse(h, new[0]), g)


def test_type2_inert_round_trip():
    g = load("toral2")
    data = inert_status(g, "e").witness[0]
    assert (data.type, data.p, data.k, data.i) == (2, 2, 1, 1)
    assert data.F_e == data.H_e and not data.i_exact
    h = expand_inert(g, "e", data)
    new = [n for n in h.edges if n != "e"][0]
    assert h.edges[new].inj_t.image() == data.F_e
    assert isomorphic(collapse(h, new), g)


def test_type2_expansion_undefined():
    g = load("toral2")
    data = inert_status(g, "e").witness[0]
    bad = data._replace(F_e=full(2))
    with pytest.raises(ExpansionUndefined):
        expand_inert(g, "e", bad)


def test_expand_inert_needs_data():
    with pytest.raises(NotInert):
        expand_inert(load("toral6"), "e", None)


# constructions -------------------------------------------------------------------

def test_fig1_t_comp():
    r = build_t_comp(load("fig1"))
    assert r.exact and verdicts(r) == {"a": ("Keep", None), "e": ("Collapse", "nonascending_slippery")}


def test_fig2_t_comp_and_t_ab():
    b = Budget(max_nodes=60)
    rc = build_t_comp(load("fig2"), b)
    assert verdicts(rc) == {"e": ("Collapse", "psa"), "f": ("Keep", None)}
    assert rc.status == "Partial"
    ra = build_t_ab(load("fig2"), b)
    assert verdicts(ra)["e"] == ("Collapse", "strictly_ascending")


def test_fig3_t_comp():
    r = build_t_comp(load("fig3"))
    assert r.exact and r.collapsed() == ["e", "f"]
    assert verdicts(r)["h"] == ("Keep", None)
    assert verdicts(r)["xv"] == ("Inserted", "blow_up")
    assert r.base.labels("xv") == (1, 1)
    res = r.result_graph
    assert sorted(res.vertices) == ["q", "v"] and res.vertices["v"] == 0
    assert res.edges["xv"].is_loop and res.labels("h") == (14, 2)
    assert sorted(res.composite["v"].edges) == ["e", "f"]


def test_fig3_t_ab_matches_t_comp():
    rc, ra = build_t_comp(load("fig3")), build_t_ab(load("fig3"))
    assert verdicts(ra) == verdicts(rc)
    assert ra.confidence["h"]["bearing"].is_refuted()


def test_fig8_blow_up():
    r = build_t_comp(load("fig8"))
    assert r.exact
    assert verdicts(r) == {"h1": ("Collapse", "nonascending_slippery"), "h2": ("Keep", None),
                           "xv": ("Inserted", "blow_up")}


def test_bs22():
    rc = build_t_comp(load("bs22"))
    assert verdicts(rc) == {"t": ("Keep", None)} and rc.exact
    ra = build_t_ab(load("bs22"))
    assert verdicts(ra) == {"t": ("Collapse", "bearing")} and ra.exact
    assert not ra.result_graph.edges and len(ra.result_graph.vertices) == 1


def test_bs23_both_constructions_are_the_input():
    g = load("bs23")
    for build in (build_t_comp, build_t_ab):
        r = build(g)
        assert r.exact and verdicts(r) == {"t": ("Keep", None)}
        assert canonical_key(r.result_graph) == canonical_key(g)


def test_toral6_t_ab():
    r = build_t_ab(load("toral6"))
    assert r.exact and verdicts(r)["e"] == ("Collapse", "bearing")
    assert sorted(src for _, src, _ in r.inserted) == ["inert_expansion"] * 2


def test_toral2_t_ab_partial():
    r = build_t_ab(load("toral2"))
    assert r.status == "Partial"
    assert any(st.is_unknown() for conf in r.confidence.values() for st in conf.values())


def test_chain_t_comp():
    r = build_t_comp(load("chain244"))
    assert verdicts(r) == {"e": ("Collapse", "nonascending_slippery"), "f": ("Keep", None)}
    assert r.witness_trace("e") == ["slide ~f ~e"]


def test_t_ab_collapses_at_least_t_comp():
    for name in ("fig1", "fig3", "fig8", "bs22", "bs23", "chain244"):
        rc, ra = build_t_comp(load(name)), build_t_ab(load(name))
        if rc.exact and ra.exact:
            assert set(rc.collapsed()) <= set(ra.collapsed()), name


def test_collapsed_orbits_give_result():
    for name in ("fig1", "fig3", "fig8", "bs22"):
        r = build_t_ab(load(name))
        assert canonical_key(collapse_orbits(r.base, r.collapsed())) == canonical_key(r.result_graph)


def test_every_collapse_has_a_proven_witness():
    for name in ("fig1", "fig3", "fig8", "bs22", "chain244"):
        r = build_t_ab(load(name))
        for e in r.collapsed():
            assert r.confidence[e][r.verdicts[e].reason].is_proven()


@pytest.mark.parametrize("name", ["fig1", "fig3", "fig8"])
def test_verdict_pattern_stable_over_the_atlas(name):
    a = explore(load(name))
    pats = set()
    for k in a.order:
        r = build_t_comp(a.nodes[k])
        pats.add((tuple(sorted((v.kind, v.reason or "") for v in r.verdicts.values())), r.exact))
    assert len(pats) == 1


def test_json_schema_and_determinism():
    r = build_t_comp(load("fig3"))
    d = json.loads(r.to_json())
    assert set(d) >= {"edges", "inserted", "exact"}
    for row in d["edges"]:
        assert set(row) >= {"orbit", "verdict", "reason", "confidence", "witness_trace"}
    assert d["inserted"] == [{"edge": "xv", "source": "blow_up", "vertex": "v"}]
    assert build_t_comp(load("fig3")).to_json() == r.to_json()


def test_dot_clusters():
    dot = build_t_comp(load("fig3")).to_dot()
    assert "cluster_0" in dot and "v = {e,f}" in dot


def test_disconnected_input():
    g = load("fig1")
    g = GraphOfGroups(dict(g.vertices, x=1), g.edges, validate=False)
    with pytest.raises(NotConnected):
        build_t_comp(g)


def test_single_ascending_loop_warns():
    r = build_t_comp(parse_graph("vertex v 1\nloop e v [1:2]\n"), Budget(max_nodes=20))
    assert any("ascending" in n for n in r.notes)


# compatibility -------------------------------------------------------------------

def test_compatible_with_itself():
    for name in ("fig1", "fig3", "bs22"):
        assert compatible(load(name), load(name)).witness == ["identity"]


def test_adjacent_trees_have_a_common_refinement():
    g = load("fig1")
    h = slide(g, EdgeRef("a", False), "e")
    st = compatible(g, h)
    assert st.is_proven()
    ref = parse_graph(st.detail["refinement"])
    new = [n for n in ref.edges if n not in g.edges]
    assert len(new) == 1
    assert isomorphic(collapse(ref, new[0]), g)
    assert any(isomorphic(collapse(ref, n), h) for n in ref.edges if n != new[0])


def test_bs22_against_amalgam():
    st = compatible(load("bs22"), bs22_amalgam(), gen_map={"a": "a", "t": "t"},
                    cert={"a": "a", "b": "t^2 a t^-2", "c": "t"})
    assert st.is_refuted() and st.evidence == "IncompatCertificate"


def test_wrong_certificate_is_not_a_refutation():
    st = compatible(load("bs23"), load("bs23"), cert={"a": "a", "b": "t a t^-1", "c": "t"})
    assert st.is_proven()
    st = compatible(load("bs22"), bs22_amalgam(), gen_map={"a": "a", "t": "t"},
                    cert={"a": "a", "b": "t a t^-1", "c": "t^-1 a t"})
    assert not st.is_refuted()


def test_chain_twist_by_centralizing_element_is_not_refuted():
    g = load("chain244")
    h = slide(g, "~f", "~e")
    assert compatible(g, h).witness == ["identity"]
    st = compatible(g, h, gen_map={"x": "x", "y": "y", "z": "x z x^-1"}, max_candidates=4)
    assert st.is_unknown()
