import itertools

from hypothesis import given, settings, strategies as st
import pytest

from jsjforge.lattice import (AmbientMismatch, LatticeBasis, Mono, Relation, canonicalize, compare,
                              full, intermediate_lattices, join, lattice_from_gens, meet,
                              quotient_invariants, smith_diagonal, trivial)


def box_members(gens, n, bound):
    """Independent oracle: lattice points in a box, by enumerating small combinations."""
    pts = set()
    rng = range(-bound, bound + 1)
    for coeffs in itertools.product(rng, repeat=len(gens)):
        p = tuple(sum(c * g[i] for c, g in zip(coeffs, gens)) for i in range(n))
        if all(abs(x) <= 6 for x in p):
            pts.add(p)
    return pts


def test_hermite_basis_of_small_lattice():
    lat = lattice_from_gens([(6, 0), (4, 2)], 2)
    assert lat.basis == ((2, 4), (0, 6))
    assert lat.det() == 12


def test_membership_agrees_with_box_enumeration():
    gens = [(6, 0), (4, 2)]
    lat = lattice_from_gens(gens, 2)
    pts = box_members(gens, 2, 8)
    for p in itertools.product(range(-6, 7), repeat=2):
        assert (p in lat) == (p in pts)


def test_index_by_counting_residues():
    lat = lattice_from_gens([(6, 0), (4, 2)], 2)
    residues = {lat.reduce(p) for p in itertools.product(range(24), repeat=2)}
    assert len(residues) == lat.det() == 12


def test_compare_kinds():
    a = lattice_from_gens([(2, 0), (0, 3)], 2)
    b = lattice_from_gens([(1, 0), (0, 3)], 2)
    c = lattice_from_gens([(3, 0), (0, 1)], 2)
    assert compare(a, a) == Relation(Relation.EQUAL)
    assert compare(a, b) == Relation(Relation.SUB, 2)
    assert compare(b, a) == Relation(Relation.SUP, 2)
    assert compare(b, c).kind == Relation.INCOMPARABLE


def test_ambient_mismatch():
    with pytest.raises(AmbientMismatch):
        join(full(1), full(2))


def test_meet_and_join_rank_one():
    a, b = lattice_from_gens([(4,)], 1), lattice_from_gens([(6,)], 1)
    assert join(a, b) == lattice_from_gens([(2,)], 1)
    assert meet(a, b) == lattice_from_gens([(12,)], 1)


def test_quotient_invariants():
    gv = full(2)
    assert quotient_invariants(lattice_from_gens([(2, 0), (0, 1)], 2), gv) == ([2], 0)
    assert quotient_invariants(lattice_from_gens([(2, 0), (0, 3)], 2), gv) == ([6], 0)
    assert quotient_invariants(lattice_from_gens([(2, 0)], 2), gv) == ([2], 1)
    assert quotient_invariants(trivial(2), gv) == ([], 2)


def test_smith_diagonal():
    assert smith_diagonal([[2, 4], [6, 8]]) == [2, 4]


def test_intermediate_lattices_rank_one_are_divisors():
    low, high = lattice_from_gens([(12,)], 1), full(1)
    got = [L.basis[0][0] for L in intermediate_lattices(low, high)]
    assert sorted(got) == [1, 2, 3, 4, 6, 12]


def test_intermediate_lattices_rank_two_by_brute_force():
    low = lattice_from_gens([(2, 0), (0, 2)], 2)
    got = set(intermediate_lattices(low, full(2)))
    # oracle: every lattice generated by low plus one or two residues mod 2
    reps = [(a, b) for a in range(2) for b in range(2)]
    want = set()
    for r1 in reps:
        for r2 in reps:
            want.add(lattice_from_gens([(2, 0), (0, 2), r1, r2], 2))
    assert got == want
    assert len(got) == 5


def test_mono_operations():
    m = Mono(((2, 0), (0, 3)))
    assert m.is_injective() and not m.is_surjective()
    assert m.apply((1, 1)) == (2, 3)
    assert m.preimage((4, 3)) == (2, 1)
    assert m.preimage((1, 0)) is None
    assert m.compose(Mono.identity(2)) == m
    assert m.pull(Mono(((4,), (0,)))) == Mono(((2,), (0,)))
    assert Mono.scalar(5).label == 5


vec = st.tuples(st.integers(-9, 9), st.integers(-9, 9))


@settings(max_examples=200, deadline=None)
@given(st.lists(vec, min_size=1, max_size=4))
def test_canonical_form_is_generator_order_free(gens):
    a = lattice_from_gens(gens, 2)
    b = lattice_from_gens(list(reversed(gens)), 2)
    assert a == b
    for g in gens:
        assert g in a


@settings(max_examples=200, deadline=None)
@given(st.lists(vec, min_size=2, max_size=3), st.lists(vec, min_size=2, max_size=3))
def test_meet_join_are_bounds(g1, g2):
    a, b = lattice_from_gens(g1, 2), lattice_from_gens(g2, 2)
    j, m = join(a, b), meet(a, b)
    assert j.contains_lattice(a) and j.contains_lattice(b)
    assert a.contains_lattice(m) and b.contains_lattice(m)


@settings(max_examples=100, deadline=None)
@given(st.lists(vec, min_size=2, max_size=3))
def test_reduce_is_a_canonical_residue(gens):
    lat = lattice_from_gens(gens, 2)
    if lat.rank < 2:
        return
    for p in [(1, 2), (7, -3), (0, 5)]:
        r = lat.reduce(p)
        assert tuple(x - y for x, y in zip(p, r)) in lat
        assert lat.reduce(r) == r


def test_canonicalize_from_matrix_rows():
    assert canonicalize(((6, 4), (0, 2)), 2) == lattice_from_gens([(6, 0), (4, 2)], 2)
    assert isinstance(full(3), LatticeBasis) and full(3).is_full()
