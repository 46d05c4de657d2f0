"""Deformation moves on graphs of groups.

All moves are pure: they take a graph and return a new one.  Edge and
vertex names survive every move except the ones it explicitly destroys, so
an orbit can be followed through a sequence of moves by name.

Conventions, for an oriented edge ``r`` with origin ``v``: ``iota`` is the
injection at the origin, ``omega`` the one at the terminus.  A slide of an
end along ``r`` replaces its injection ``M`` by ``omega . iota^-1 . M``.
"""

from collections import namedtuple

from .gog import EdgeRef, Edge, GraphOfGroups, canonical_key
from .lattice import (Mono, LatticeBasis, compare, intermediate_lattices, full,
                      lattice_from_gens)

__all__ = [
    "MoveError", "NotAdjacent", "StabilizerNotIncluded", "SelfSlide",
    "NotStrictlyAscending", "GroupOutOfRange", "TrivialInduction",
    "NotPreAscending", "IsAscending", "PreconditionsFail", "LoopCollapse",
    "EdgeNotAtVertex", "NotADeadEnd", "NotReduced", "CompositeVertex",
    "EdgeKind", "MoveRecord", "local_kind", "slide", "induct", "a_move",
    "a_inverse_move", "collapse", "expand", "blow_up", "reduce",
    "admissible_moves", "apply_move", "parse_move", "replay",
]


class MoveError(ValueError):
    pass


class NotAdjacent(MoveError):
    pass


class StabilizerNotIncluded(MoveError):
    pass


class SelfSlide(MoveError):
    pass


class NotStrictlyAscending(MoveError):
    pass


class GroupOutOfRange(MoveError):
    pass


class TrivialInduction(MoveError):
    pass


class NotPreAscending(MoveError):
    pass


class IsAscending(MoveError):
    pass


class PreconditionsFail(MoveError):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class LoopCollapse(MoveError):
    pass


class EdgeNotAtVertex(MoveError):
    pass


class NotADeadEnd(MoveError):
    pass


class NotReduced(MoveError):
    pass


class CompositeVertex(MoveError):
    pass


EdgeKind = namedtuple("EdgeKind", "reduced ascending strictly_ascending toric pre_ascending pre_descending")


def as_ref(e, rev=False):
    if isinstance(e, EdgeRef):
        return e
    if isinstance(e, str) and e.startswith("~"):
        return EdgeRef(e[1:], True)
    return EdgeRef(e, rev)


def _check_plain(g, *vertices):
    for v in vertices:
        if v in g.composite:
            raise CompositeVertex("vertex %s is composite; moves are not defined on it" % v)


def local_kind(g, r):
    r = as_ref(r)
    e = g.edge(r.name)
    reduced = g.is_reduced_edge(r.name)
    if not e.is_loop:
        return EdgeKind(reduced, False, False, False, False, False)
    gv = full(g.vertices[e.o])
    i = g.group_at_origin(r)
    w = g.inj_terminus(r).image()
    ascending = i == gv
    strictly = ascending and w != gv
    toric = ascending and w == gv
    pre_asc = compare(w, i).kind == "ProperSub"
    pre_desc = compare(i, w).kind == "ProperSub"
    return EdgeKind(reduced, ascending, strictly, toric, pre_asc, pre_desc)


def strictly_ascending_ref(g, name):
    """The orientation of a loop in which it is strictly ascending, or None."""
    for rev in (False, True):
        r = EdgeRef(name, rev)
        if local_kind(g, r).strictly_ascending:
            return r
    return None


# edge surgery ---------------------------------------------------------------

def _set_terminus(edges, r, vertex, inj):
    e = edges[r.name]
    if r.rev:
        edges[r.name] = e._replace(o=vertex, inj_o=inj)
    else:
        edges[r.name] = e._replace(t=vertex, inj_t=inj)


def _set_origin(edges, r, vertex, inj):
    _set_terminus(edges, r.reverse(), vertex, inj)


def _chain(m, *steps):
    """Apply ('push', X) = X o . and ('pull', X) = X^-1 o . in order."""
    for op, x in steps:
        if op == "push":
            m = x.compose(m)
        else:
            m = x.pull(m)
            if m is None:
                return None
    return m


# MoveRecord -------------------------------------------------------------------

class MoveRecord:
    """One applied move: its kind and arguments, the refs it destroyed and
    created, and the resulting graph."""

    __slots__ = ("kind", "args", "destroyed", "created", "result")

    def __init__(self, kind, args, result, destroyed=(), created=()):
        self.kind = kind
        self.args = tuple(args)
        self.result = result
        self.destroyed = frozenset(destroyed)
        self.created = frozenset(created)

    def trace(self):
        return " ".join([self.kind] + [_fmt_arg(a) for a in self.args])

    def __repr__(self):
        return "MoveRecord(%s)" % self.trace()

    def __eq__(self, other):
        return isinstance(other, MoveRecord) and self.trace() == other.trace()

    def __hash__(self):
        return hash(self.trace())


def _fmt_arg(a):
    if isinstance(a, EdgeRef):
        return repr(a)
    if isinstance(a, LatticeBasis):
        return ";".join(",".join(str(x) for x in col) for col in a.basis)
    if isinstance(a, (list, tuple, frozenset, set)):
        return "{" + ",".join(sorted(_fmt_arg(x) for x in a)) + "}"
    return str(a)


# slides ---------------------------------------------------------------------------

def slide_record(g, f, e):
    f, e = as_ref(f), as_ref(e)
    g.edge(f.name)
    g.edge(e.name)
    if f.name == e.name:
        raise SelfSlide("an edge cannot slide along its own orbit")
    v = g.origin(e)
    _check_plain(g, v, g.terminus(e))
    if g.terminus(f) != v:
        raise NotAdjacent("%r does not end at the origin %s of %r" % (f, v, e))
    new = _chain(g.inj_terminus(f), ("pull", g.inj_origin(e)), ("push", g.inj_terminus(e)))
    if new is None:
        raise StabilizerNotIncluded("G_%r is not contained in G_%r" % (f.reverse(), e))
    edges = dict(g.edges)
    _set_terminus(edges, f, g.terminus(e), new)
    return MoveRecord("slide", (f, e), g.replace(edges=edges))


def slide(g, f, e):
    """Slide the terminal end of f along e."""
    return slide_record(g, f, e).result


# induction ----------------------------------------------------------------------

def _induction_group(g, r, A=None, d=None):
    omega = g.inj_terminus(r)
    n = g.vertices[g.origin(r)]
    low = omega.image()
    if d is not None:
        if n != 1:
            raise GroupOutOfRange("the d shorthand needs a rank-1 vertex")
        label = abs(omega.label)
        if d < 1 or label % d:
            raise GroupOutOfRange("d=%d does not divide %d" % (d, label))
        return LatticeBasis(1, ((label // d,),))
    if A is None:
        raise GroupOutOfRange("induction needs a group")
    if not A.contains_lattice(low) or A.rank != n:
        raise GroupOutOfRange("A must contain the terminal image of the loop")
    return A


def induct_record(g, e, A=None, d=None, allow_trivial=False):
    """Induction on a strictly ascending loop with group A, where
    omega(G_e) <= A <= G_v.  At rank 1, ``d`` is the index [A : omega(G_e)]
    and every other end at v is multiplied by d."""
    r = as_ref(e)
    if not isinstance(e, EdgeRef) and not local_kind(g, r).strictly_ascending:
        r = strictly_ascending_ref(g, r.name) or r
    if not local_kind(g, r).strictly_ascending:
        raise NotStrictlyAscending("%r is not strictly ascending" % (r,))
    v = g.origin(r)
    _check_plain(g, v)
    A = _induction_group(g, r, A, d)
    iota, omega = g.inj_origin(r), g.inj_terminus(r)
    if A == omega.image() and not allow_trivial:
        raise TrivialInduction("A equals the edge group")
    B = Mono.from_columns(A.basis, A.n)
    edges = dict(g.edges)
    for h in g.ends_at(v):
        if h.name == r.name:
            continue
        m = _chain(g.inj_origin(h), ("pull", iota), ("push", omega), ("pull", B))
        _set_origin(edges, h, v, m)
    new_omega = _chain(iota, ("push", B), ("pull", iota), ("push", omega), ("pull", B))
    e0 = edges[r.name]
    if r.rev:
        edges[r.name] = e0._replace(inj_o=new_omega)
    else:
        edges[r.name] = e0._replace(inj_t=new_omega)
    arg = d if d is not None else A
    return MoveRecord("induct", (r, arg), g.replace(edges=edges))


def induct(g, e, A=None, d=None, allow_trivial=False):
    return induct_record(g, e, A, d, allow_trivial).result


# A-moves --------------------------------------------------------------------------

def a_move_record(g, e):
    """Split a pre-ascending, non-ascending loop at v into a strictly
    ascending loop at a new vertex w'' joined to v by a new edge."""
    r = as_ref(e)
    if not isinstance(e, EdgeRef) and not local_kind(g, r).pre_ascending:
        r = r.reverse()
    kind = local_kind(g, r)
    if kind.ascending:
        raise IsAscending("%r is ascending" % (r,))
    if not kind.pre_ascending:
        raise NotPreAscending("%r is not pre-ascending" % (r,))
    v = g.origin(r)
    _check_plain(g, v)
    iota, omega = g.inj_origin(r), g.inj_terminus(r)
    k = iota.pull(omega)
    rank = iota.r
    w = g.fresh_vertex(v + "'")
    f = g.fresh_edge(r.name + "'")
    vertices = dict(g.vertices)
    vertices[w] = rank
    edges = dict(g.edges)
    ident = Mono.identity(rank)
    if r.rev:
        edges[r.name] = Edge(r.name, w, w, k, ident)
    else:
        edges[r.name] = Edge(r.name, w, w, ident, k)
    edges[f] = Edge(f, w, v, k, iota)
    return MoveRecord("amove", (r,), g.replace(vertices=vertices, edges=edges),
                      created=[EdgeRef(f, False), ("v", w)])


def a_move(g, e):
    return a_move_record(g, e).result


def a_inverse_record(g, e, f):
    """Remove the vertex w'' of a strictly ascending loop e, together with
    the edge f joining w'' to another vertex u; e becomes a loop at u."""
    r = as_ref(e)
    if not isinstance(e, EdgeRef) and not local_kind(g, r).strictly_ascending:
        r = strictly_ascending_ref(g, r.name) or r
    if not local_kind(g, r).strictly_ascending:
        raise NotStrictlyAscending("%r is not strictly ascending" % (r,))
    w = g.origin(r)
    fe = g.edge(as_ref(f).name)
    if fe.is_loop:
        raise PreconditionsFail("f must join w'' to a different vertex")
    if fe.t == w:
        fr = EdgeRef(fe.name, False)
    elif fe.o == w:
        fr = EdgeRef(fe.name, True)
    else:
        raise PreconditionsFail("f does not end at the vertex of e")
    u = g.origin(fr)
    _check_plain(g, u, w)
    fu, fw = g.inj_origin(fr), g.inj_terminus(fr)
    gf = fw.image()
    iota, omega = g.inj_origin(r), g.inj_terminus(r)
    if not gf.contains_lattice(omega.image()):
        raise PreconditionsFail("G_f does not contain the terminal image of e")
    others = [h for h in g.ends_at(w) if h.name not in (r.name, fr.name)]
    for h in others:
        if not gf.contains_lattice(g.group_at_origin(h)):
            raise PreconditionsFail("G_f does not contain G_%r" % (h,))
    new_omega = _chain(fw, ("pull", iota), ("push", omega), ("pull", fw), ("push", fu))
    edges = dict(g.edges)
    del edges[fr.name]
    if r.rev:
        edges[r.name] = Edge(r.name, u, u, new_omega, fu)
    else:
        edges[r.name] = Edge(r.name, u, u, fu, new_omega)
    for h in others:
        m = _chain(g.inj_origin(h), ("pull", fw), ("push", fu))
        _set_origin(edges, h, u, m)
    vertices = dict(g.vertices)
    del vertices[w]
    return MoveRecord("ainv", (r, fr.name), g.replace(vertices=vertices, edges=edges),
                      destroyed=[EdgeRef(fr.name, False), ("v", w)])


def a_inverse_move(g, e, f):
    return a_inverse_record(g, e, f).result


# collapse and expansion ------------------------------------------------------------

def collapse_record(g, e):
    """Collapse a non-loop edge.  If one endpoint group equals the edge group
    that endpoint is absorbed; otherwise the merged vertex is composite."""
    name = as_ref(e).name
    ed = g.edge(name)
    if ed.is_loop:
        raise LoopCollapse("loops cannot be collapsed")
    edges = dict(g.edges)
    del edges[name]
    vertices = dict(g.vertices)
    composite = dict(g.composite)
    plain = ed.o not in g.composite and ed.t not in g.composite
    if plain and (ed.inj_t.is_surjective() or ed.inj_o.is_surjective()):
        if ed.inj_t.is_surjective():
            keep, gone, mk, ms = ed.o, ed.t, ed.inj_o, ed.inj_t
        else:
            keep, gone, mk, ms = ed.t, ed.o, ed.inj_t, ed.inj_o
        for h in g.ends_at(gone):
            if h.name == name:
                continue
            m = _chain(g.inj_origin(h), ("pull", ms), ("push", mk))
            _set_origin(edges, h, keep, m)
        del vertices[gone]
        result = g.replace(vertices=vertices, edges=edges, composite=composite)
    else:
        keep = ed.o
        gone = ed.t
        piece = _piece(g, [ed.o, ed.t], [name])
        for h in g.ends_at(gone):
            if h.name == name:
                continue
            e0 = edges[h.name]
            edges[h.name] = e0._replace(t=keep) if h.rev else e0._replace(o=keep)
        del vertices[gone]
        composite.pop(gone, None)
        vertices[keep] = 0
        composite[keep] = piece
        result = g.replace(vertices=vertices, edges=edges, composite=composite)
    return MoveRecord("collapse", (name,), result,
                      destroyed=[EdgeRef(name, False), ("v", gone)])


def _piece(g, vs, names):
    """The collapsed sub-graph a composite vertex stands for."""
    vertices, edges, comp = {}, {}, {}
    for v in vs:
        if v in g.composite:
            sub = g.composite[v]
            vertices.update(sub.vertices)
            edges.update(sub.edges)
            comp.update(sub.composite)
        else:
            vertices[v] = g.vertices[v]
    for n in names:
        edges[n] = g.edges[n]
    return GraphOfGroups(vertices, edges, comp, validate=False)


def collapse(g, e):
    return collapse_record(g, e).result


def expand_record(g, v, H, F, vertex_name=None, edge_name=None):
    """Split v into a new vertex with group H carrying the ends in F and v
    itself carrying the rest, joined by a new edge with group H."""
    if v not in g.vertices:
        raise EdgeNotAtVertex("no vertex %s" % v)
    _check_plain(g, v)
    F = [as_ref(f) for f in F]
    at_v = g.ends_at(v)
    for f in F:
        if f not in at_v:
            raise EdgeNotAtVertex("%r does not start at %s" % (f, v))
    rank = g.vertices[v]
    if H.n != rank or H.rank != rank:
        raise GroupOutOfRange("H must be a finite-index subgroup of G_v")
    B = Mono.from_columns(H.basis, rank)
    edges = dict(g.edges)
    nv = vertex_name or g.fresh_vertex(v + "'")
    ne = edge_name or g.fresh_edge("x" + v)
    for f in F:
        m = B.pull(g.inj_origin(f))
        if m is None:
            raise GroupOutOfRange("G_%r is not contained in H" % (f,))
    for f in F:
        # a loop with both ends in F must see the already-moved other end
        m = B.pull(g.inj_origin(f))
        e0 = edges[f.name]
        edges[f.name] = e0._replace(t=nv, inj_t=m) if f.rev else e0._replace(o=nv, inj_o=m)
    vertices = dict(g.vertices)
    vertices[nv] = rank
    edges[ne] = Edge(ne, nv, v, Mono.identity(rank), B)
    return MoveRecord("expand", (v, H, F), g.replace(vertices=vertices, edges=edges),
                      created=[EdgeRef(ne, False), ("v", nv)])


def expand(g, v, H, F, **kw):
    return expand_record(g, v, H, F, **kw).result


def blow_up_record(g, v, wall, force=True, check=None):
    """Pull the wall end off v onto a new vertex joined by a [1:1] edge."""
    wall = as_ref(wall)
    if g.origin(wall) != v:
        raise EdgeNotAtVertex("%r does not start at %s" % (wall, v))
    if not force:
        status = check(g, v) if check else None
        walls = getattr(status, "witness", None) or []
        if status is None or not status.is_proven() or wall not in walls:
            raise NotADeadEnd("%s is not a dead end with wall %r" % (v, wall))
    rec = expand_record(g, v, full(g.vertices[v]), [wall])
    return MoveRecord("blowup", (v, wall), rec.result, created=rec.created)


def blow_up(g, v, wall, force=True, check=None):
    return blow_up_record(g, v, wall, force, check).result


def reduce(g):
    """Collapse non-reduced non-loop edges one at a time; at each step the
    collapse giving the smallest canonical key is taken."""
    done = []
    while True:
        cands = [n for n in sorted(g.edges)
                 if not g.edges[n].is_loop and not g.is_reduced_edge(n)
                 and g.edges[n].o not in g.composite and g.edges[n].t not in g.composite]
        if not cands:
            return g, done
        best = min(((canonical_key(collapse(g, n)), n) for n in cands))
        g = collapse(g, best[1])
        done.append(EdgeRef(best[1], False))


# enumeration ------------------------------------------------------------------------

def all_refs(g):
    return [EdgeRef(n, rev) for n in sorted(g.edges) for rev in (False, True)]


def slide_candidates(g):
    for e in all_refs(g):
        v = g.origin(e)
        if v in g.composite or g.terminus(e) in g.composite:
            continue
        ge = g.group_at_origin(e)
        for f in g.ends_at(v):
            f = f.reverse()
            if f.name == e.name:
                continue
            if ge.contains_lattice(g.inj_terminus(f).image()):
                yield f, e


def induction_groups(g, r, max_divisors=64, stats=None):
    """Non-trivial intermediate groups for an induction on r."""
    omega = g.inj_terminus(r)
    low = omega.image()
    high = full(g.vertices[g.origin(r)])
    out = [A for A in intermediate_lattices(low, high, limit=max_divisors + 2) if A != low]
    if len(out) > max_divisors and stats is not None:
        stats["divisors"] = True
    return out[:max_divisors]


def admissible_moves(g, max_divisors=64, max_label=None, require_reduced=True, stats=None):
    """Every admissible slide, induction, A-move and A^-1-move on g, in a
    canonical order.  Moves producing a label above max_label are dropped."""
    if require_reduced and not g.is_reduced():
        raise NotReduced("admissible moves need a reduced graph")
    recs = []
    for f, e in slide_candidates(g):
        recs.append(slide_record(g, f, e))
    for name in sorted(g.edges):
        ed = g.edges[name]
        if not ed.is_loop or ed.o in g.composite:
            continue
        for rev in (False, True):
            r = EdgeRef(name, rev)
            kind = local_kind(g, r)
            if kind.strictly_ascending:
                for A in induction_groups(g, r, max_divisors, stats):
                    if g.vertices[ed.o] == 1:
                        d = abs(g.inj_terminus(r).label) // A.basis[0][0]
                        recs.append(induct_record(g, r, d=d))
                    else:
                        recs.append(induct_record(g, r, A=A))
                for fname in sorted(g.edges):
                    fe = g.edges[fname]
                    if fe.is_loop or ed.o not in (fe.o, fe.t):
                        continue
                    try:
                        recs.append(a_inverse_record(g, r, fname))
                    except PreconditionsFail:
                        pass
            if kind.pre_ascending and not kind.ascending:
                recs.append(a_move_record(g, r))
    out = []
    for rec in recs:
        if not rec.result.is_reduced():
            continue
        if max_label is not None and max_abs_entry(rec.result) > max_label:
            if stats is not None:
                stats["label"] = True
            continue
        out.append(rec)
    return out


def max_abs_entry(g):
    return max((abs(x) for e in g.edges.values() for m in (e.inj_o, e.inj_t)
                for row in m.rows for x in row), default=0)


# traces ------------------------------------------------------------------------------

def _parse_lattice(text, n):
    cols = [tuple(int(x) for x in c.split(",")) for c in text.split(";")]
    return lattice_from_gens(cols, n)


def parse_move(g, line):
    """Apply one trace line, e.g. ``slide ~h e`` or ``induct e 2``."""
    parts = line.split()
    if not parts:
        raise MoveError("empty move")
    kind, args = parts[0], parts[1:]
    if kind == "slide":
        return slide_record(g, as_ref(args[0]), as_ref(args[1]))
    if kind == "induct":
        r = as_ref(args[0])
        if "," in args[1] or ";" in args[1]:
            return induct_record(g, r, A=_parse_lattice(args[1], g.vertices[g.origin(r)]))
        return induct_record(g, r, d=int(args[1]))
    if kind == "amove":
        return a_move_record(g, as_ref(args[0]))
    if kind == "ainv":
        return a_inverse_record(g, as_ref(args[0]), args[1])
    if kind == "collapse":
        return collapse_record(g, args[0])
    if kind == "blowup":
        return blow_up_record(g, args[0], as_ref(args[1]))
    if kind == "expand":
        v = args[0]
        H = _parse_lattice(args[1], g.vertices[v])
        F = [as_ref(x) for x in args[2].strip("{}").split(",") if x]
        return expand_record(g, v, H, F)
    raise MoveError("unknown move %r" % kind)


def apply_move(g, line):
    return parse_move(g, line).result


def replay(g, lines):
    for line in lines:
        g = apply_move(g, line)
    return g
