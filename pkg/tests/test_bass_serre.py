from hypothesis import given, settings, strategies as st
import pytest

from jsjforge.bass_serre import (Elliptic, GeneratorMapMissing, GraphModel, Hyperbolic,
                                 MalformedWord, RadiusTooSmall, UnsaturatedHull, axis_segment,
                                 bs22_amalgam, characteristic_hull,
                                 classify_element, incompat_certificate, normal_form, parse_word)
from jsjforge.gog import rank1

from conftest import load, relators

SETTINGS = settings(max_examples=150, deadline=None)


def bs(m, n):
    return rank1(["a"], [("t", "a", "a", m, n)])


def text(g, w):
    m = GraphModel(g)
    return m.to_text(m.parse(w))


def test_parse_word():
    assert parse_word("t a^2 t^-1") == [("t", 1), ("a", 2), ("t", -1)]
    with pytest.raises(MalformedWord):
        parse_word("t a^")
    with pytest.raises(MalformedWord):
        GraphModel(bs(2, 2)).parse("q")


def test_normal_forms():
    assert text(load("bs22"), "t a^2 t^-1") == "a^2"
    assert text(load("bs22"), "") == "1"
    assert text(bs(2, 4), "t a^2 t^-1 a^-4") == "1"
    assert text(bs(1, 2), "t a t^-1 a^-1") == "a"
    assert text(load("bs22"), "t t") == "t^2"


@pytest.mark.parametrize("name", ["bs22", "bs23", "bs2m2", "fig1", "fig2", "fig3", "fig5"])
def test_relators_are_trivial(name):
    g = load(name)
    m = GraphModel(g)
    for r in relators(g):
        assert m.is_identity(m.parse(r)), r


def words_for(name):
    m = GraphModel(load(name))
    letters = sorted(n for n in m.gens if "." not in n)
    tok = st.tuples(st.sampled_from(letters), st.integers(-3, 3).filter(bool))
    return st.lists(tok, max_size=6).map(lambda ts: " ".join("%s^%d" % t for t in ts))


@pytest.mark.parametrize("name", ["bs22", "bs23", "fig3"])
def test_normal_form_idempotent_and_relation_invariant(name):
    g = load(name)
    m = GraphModel(g)
    rels = relators(g)

    @SETTINGS
    @given(words_for(name), st.data())
    def check(w, data):
        x = m.parse(w)
        nf = m.to_text(x)
        assert m.to_text(m.parse(nf)) == nf
        toks = w.split()
        i = data.draw(st.integers(0, len(toks)))
        r = data.draw(st.sampled_from(rels))
        y = m.parse(" ".join(toks[:i] + [r] + toks[i:]))
        assert m.to_text(y) == nf
        assert normal_form(g, w) == normal_form(g, " ".join(toks[:i] + [r] + toks[i:]))

    check()


@pytest.mark.parametrize("name", ["bs22", "bs23", "fig3"])
def test_classification_conjugation_invariant(name):
    g = load(name)
    m = GraphModel(g)

    @SETTINGS
    @given(words_for(name), words_for(name))
    def check(w, c):
        x = m.parse(w)
        y = m.conj(m.parse(c), x)
        k1, k2 = classify_element(m, x), classify_element(m, y)
        assert type(k1) is type(k2)
        if isinstance(k1, Hyperbolic):
            assert k1.translation_length == k2.translation_length

    check()


def test_classify_examples():
    g = load("bs22")
    assert isinstance(classify_element(g, "a"), Elliptic)
    t = classify_element(g, "t")
    assert isinstance(t, Hyperbolic) and t.translation_length == 1
    t2 = classify_element(g, "t^2")
    assert isinstance(t2, Hyperbolic) and t2.translation_length == 2
    assert isinstance(classify_element(bs(1, 2), "t a t^-1 a^-1"), Elliptic)


def test_elliptic_in_bs23_commutes_check():
    g = load("bs23")
    k = classify_element(g, "t a t^-1 a")
    assert isinstance(k, Hyperbolic) and k.translation_length == 2


def test_hull_single_elliptic():
    h = characteristic_hull(load("bs22"), ["a"], 3)
    assert len(h) == 1 and h.saturated and h.bounded


def test_hull_axis_in_ball():
    # the line through the base vertex has 2r+1 vertices in the ball of radius r
    h = characteristic_hull(load("bs22"), ["t"], 3)
    assert len(h) == 7 and len(h.edges) == 6 and not h.bounded
    assert "v0" in h.describe()


def test_hull_two_fixed_vertices_and_bridge():
    h = characteristic_hull(load("bs23"), ["a", "t a t^-1"], 2)
    assert len(h) == 2 and len(h.edges) == 1 and h.saturated


def test_hull_of_central_power_is_unsaturated():
    h = characteristic_hull(load("bs22"), ["a^2"], 3)
    assert not h.saturated


def test_amalgam_certificate():
    am = bs22_amalgam()
    cert = {"a": "a", "b": "t^2 a t^-2", "c": "t"}
    assert incompat_certificate(load("bs22"), am, cert, gen_map={"a": "a", "t": "t"})


def test_certificate_against_itself_is_false():
    g = load("bs23")
    for cert in ({"a": "a", "b": "t a t^-1", "c": "t^2 a t^-2"},
                 {"a": "a", "b": "t a t^-1", "c": "t^-1 a t", "d": "t^2 a t^-2"}):
        assert not incompat_certificate(g, g, cert, radius=4)


def test_four_element_form_is_symmetric():
    g1 = load("fig3")
    g2 = load("fig3")
    cert = {"a": "v", "b": "f v f^-1", "c": "p", "d": "q"}
    assert incompat_certificate(g1, g2, cert, 4) == incompat_certificate(g2, g1, cert, 4)


def test_certificate_errors():
    g = load("bs22")
    with pytest.raises(GeneratorMapMissing):
        incompat_certificate(g, bs22_amalgam(), {"a": "a", "b": "t", "c": "t^2"}, gen_map={"a": "a"})
    with pytest.raises(UnsaturatedHull):
        incompat_certificate(g, g, {"a": "a^2", "b": "t", "c": "a"}, radius=2)
    with pytest.raises(MalformedWord):
        incompat_certificate(g, g, {"a": "a", "b": "t"})


def test_far_axis_keeps_the_verdict():
    g = load("fig3")
    far = "f^5 p f^-5"
    kind = classify_element(g, "f p", radius=1)
    assert isinstance(kind, Hyperbolic)
    m = GraphModel(g)
    x = m.conj(m.parse("f^6"), m.parse("f p"))
    k = classify_element(m, x, radius=2)
    assert isinstance(k, Hyperbolic) and k.translation_length == 2
    assert not k.axis.vertices and not k.axis.saturated
    with pytest.raises(RadiusTooSmall):
        axis_segment(m, x, radius=2)
    assert len(axis_segment(g, "f p", radius=2)) > 0
    assert isinstance(classify_element(g, far), Elliptic)
