"""A-moves and inductions checked as group isomorphisms.

For each move G -> H we write down explicit maps phi: G -> H and
psi: H -> G on generators, then check with the normal-form engine that
every defining relator goes to the identity under both maps and that
psi(phi(x)) = x and phi(psi(y)) = y on generators.
"""

import pytest

from jsjforge.bass_serre import GraphModel, parse_word
from jsjforge.classify import Budget, explore
from jsjforge.gog import rank1
from jsjforge import moves as mv

from conftest import load, relators

RANK1_FIXTURES = ["fig1", "fig2", "fig3", "fig5", "fig8", "bs22", "bs23", "bs2m2", "chain244"]


def letters(g):
    return sorted(n for n in GraphModel(g).gens if "." not in n)


def power(model, x, k):
    if k < 0:
        x, k = model.inverse(x), -k
    out = model.identity()
    while k:
        if k & 1:
            out = model.multiply(out, x)
        x = model.multiply(x, x)
        k >>= 1
    return out


def image(model, word, mapping):
    out = model.identity()
    for name, k in parse_word(word):
        out = model.multiply(out, power(model, model.parse(mapping.get(name, name)), k))
    return out


def check_isomorphism(g, h, phi, psi):
    mg, mh = GraphModel(g), GraphModel(h)
    for r in relators(g):
        assert mh.is_identity(image(mh, r, phi)), ("phi", r)
    for r in relators(h):
        assert mg.is_identity(image(mg, r, psi)), ("psi", r)
    for x in letters(g):
        back = image(mg, phi.get(x, x), psi)
        assert mg.is_identity(mg.multiply(back, mg.inverse(mg.parse(x)))), ("psi.phi", x)
    for y in letters(h):
        back = image(mh, psi.get(y, y), phi)
        assert mh.is_identity(mh.multiply(back, mh.inverse(mh.parse(y)))), ("phi.psi", y)


def loop_letter(r):
    # the stable letter conjugates G_o(r) into G_t(r) when read along r
    return r.name if not r.rev else r.name + "^-1"


def inv(s):
    return s[:-3] if s.endswith("^-1") else s + "^-1"


def a_move_maps(g, rec):
    """b = s^-1 v^m s for the new vertex, identity elsewhere."""
    (r,) = rec.args
    h = rec.result
    v = g.origin(r)
    w = (set(h.vertices) - set(g.vertices)).pop()
    m = g.inj_origin(r).label
    s = loop_letter(r)
    assert set(letters(h)) - {w} == set(letters(g))
    return {}, {w: "%s %s^%d %s" % (inv(s), v, m, s)}


def induction_maps(g, rec):
    """a = a'^(+-d) one way and a' = s^-1 a^(|n|/d) s the other, where
    the sign is that of n times the unit label at the loop's origin."""
    r, d = rec.args
    v = g.origin(r)
    lo, lt = g.inj_origin(r).label, g.inj_terminus(r).label
    eps = lo * (1 if lt > 0 else -1)
    s = loop_letter(r)
    return {v: "%s^%d" % (v, eps * d)}, {v: "%s %s^%d %s" % (inv(s), v, abs(lt) // d, s)}


def moves_of(g, kinds, nodes=40):
    atlas = explore(g, Budget(max_nodes=nodes))
    for key in atlas.order:
        for rec in atlas.moves.get(key, ()):
            if rec.kind in kinds:
                yield atlas.nodes[key], rec


@pytest.mark.parametrize("name", RANK1_FIXTURES)
def test_fixture_moves_are_isomorphisms(name):
    for g, rec in moves_of(load(name), ("amove", "induct")):
        phi, psi = (a_move_maps if rec.kind == "amove" else induction_maps)(g, rec)
        check_isomorphism(g, rec.result, phi, psi)


def test_fixtures_exercise_both_moves():
    kinds = {rec.kind for name in ("fig2", "fig5") for _, rec in moves_of(load(name), ("amove", "induct"))}
    assert kinds == {"amove", "induct"}


@pytest.mark.parametrize("m, k", [(2, 2), (3, 2), (2, 3), (5, 3), (-2, 2), (2, -3)])
def test_a_move_family(m, k):
    g = rank1(["a"], [("t", "a", "a", m, m * k)])
    rec = mv.a_move_record(g, "t")
    check_isomorphism(g, rec.result, *a_move_maps(g, rec))


@pytest.mark.parametrize("lo, n, d", [(1, 6, 2), (1, 6, 3), (1, 6, 6), (1, -4, 2), (1, 12, 4),
                                      (-1, 6, 2), (-1, -6, 3)])
def test_induction_family(lo, n, d):
    g = rank1(["a", "z"], [("t", "a", "a", lo, n), ("f", "a", "z", 5, 2)])
    rec = mv.induct_record(g, "t", d=d)
    check_isomorphism(g, rec.result, *induction_maps(g, rec))


def test_a_inverse_is_an_isomorphism():
    g = rank1(["a"], [("t", "a", "a", 3, 6)])
    rec = mv.a_move_record(g, "t")
    h = rec.result
    loop = next(n for n, e in h.edges.items() if e.is_loop)
    edge = next(n for n, e in h.edges.items() if not e.is_loop)
    back = mv.a_inverse_move(h, loop, edge)
    phi, psi = a_move_maps(g, rec)
    check_isomorphism(h, back, psi, phi)


def test_wrong_map_is_caught():
    g = rank1(["a"], [("t", "a", "a", 2, 4)])
    rec = mv.a_move_record(g, "t")
    phi, psi = a_move_maps(g, rec)
    w = next(iter(psi))
    with pytest.raises(AssertionError):
        check_isomorphism(g, rec.result, phi, {w: "t a^2 t^-1"})
