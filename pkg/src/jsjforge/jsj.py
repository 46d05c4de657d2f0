"""Compatibility JSJ constructions.

``build_t_comp`` blows up dead ends and collapses vanishing, p.s.a.,
non-ascending slippery and toric 2-slippery orbits.  ``build_t_ab``
additionally expands inert edges and collapses strictly ascending and
bearing orbits.  Every decision is backed by a ``TriState`` kept in the
report, and the report is Exact only when all of them are definite.
"""

import json
import os
import threading
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import moves as mv
from .bass_serre import (DEFAULT_RADIUS, GraphModel, Hyperbolic,
                         classify_element, incompat_certificate)
from .classify import Budget, TriState, dead_end, explore, global_property, _wall_bullets
from .gog import (EdgeRef, GraphOfGroups, ValidationError, canonical_key, fundamental_moduli,
                  cycle_invariants, edge_label_text, modulus_lattice, ratio, serialize,
                  to_dot, betti)
from .lattice import (_solve, full, join, lattice_from_gens, matmul, meet,
                      quotient_invariants, rational_inverse)

__all__ = [
    "ExpansionUndefined", "NotInert", "NotConnected", "IncomparablePresentations",
    "InertData", "Verdict", "JsjReport", "bearing_status", "inert_status",
    "inert_type_candidate", "expand_inert", "build_t_comp", "build_t_ab", "compatible",
]

MAX_PHI_ORDER = 12
MAX_CYCLES = 64


class ExpansionUndefined(ValueError):
    pass


class NotInert(ValueError):
    pass


class NotConnected(ValidationError):
    pass


class IncomparablePresentations(ValueError):
    pass


class InertData(namedtuple("InertData", "edge type H_e p k a i F_e i_exact")):
    __slots__ = ()

    def __new__(cls, edge, type, H_e, p=None, k=None, a=None, i=None, F_e=None, i_exact=True):
        return super().__new__(cls, edge, type, H_e, p, k, a, i, F_e, i_exact)

    def __str__(self):
        if self.type == 1:
            return "inert type 1 at %r, H_e=%s" % (self.edge, _lat_text(self.H_e))
        return "inert type 2 at %r, p=%d k=%d a=%s i=%d F_e=%s H_e=%s" % (
            self.edge, self.p, self.k, self.a, self.i, _lat_text(self.F_e), _lat_text(self.H_e))


class Verdict(namedtuple("Verdict", "kind reason")):
    """Keep, Collapse(reason) or Inserted(source)."""

    __slots__ = ()

    def __str__(self):
        return self.kind if self.reason is None else "%s(%s)" % (self.kind, self.reason)


KEEP = Verdict("Keep", None)


def _lat_text(lat):
    return ";".join(",".join(str(x) for x in col) for col in lat.basis)


# shared state ---------------------------------------------------------------------

class _Context:
    """Atlases and property answers for one reduced graph, shared by the
    per-orbit workers."""

    def __init__(self, g, budget):
        self.g = g
        self.budget = budget
        self._lock = threading.Lock()
        self._atlas = {}
        self._props = {}

    def atlas(self, name):
        with self._lock:
            if name not in self._atlas:
                self._atlas[name] = explore(self.g, self.budget, track=name)
            return self._atlas[name]

    def prop(self, name, prop):
        key = (name, prop)
        if key not in self._props:
            if prop == "bearing":
                st = bearing_status(self.g, EdgeRef(name, False), self.budget, _ctx=self)
            else:
                st = global_property(self.g, name, prop, self.budget, atlas=self.atlas(name))
            self._props[key] = st
        return self._props[key]


def _threads():
    try:
        return max(1, int(os.environ.get("JSJ_FORGE_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# bearing ------------------------------------------------------------------------------

def _cycles_through(h, name, limit=MAX_CYCLES):
    """Embedded cycles starting with the edge walked from its terminus."""
    start = EdgeRef(name, True)
    o, t = h.origin(start), h.terminus(start)
    if o == t:
        return [[start]]
    out = []

    def dfs(v, path, seen):
        if len(out) >= limit:
            return
        for r in h.ends_at(v):
            if r.name == name or r.name in {x.name for x in path}:
                continue
            w = h.terminus(r)
            if w == o:
                out.append([start] + path + [r])
            elif w not in seen:
                dfs(w, path + [r], seen | {w})

    dfs(t, [], {o, t})
    return out


def _cycle_word(model, cycle):
    """The closed-path element of a cycle, as a word in the model's letters."""
    parts = []
    for r in cycle:
        if r.name in model.tree:
            continue
        k = 1 if r.rev else -1
        if parts and parts[-1][0] == r.name:
            parts[-1][1] += k
        else:
            parts.append([r.name, k])
    return _word_text(parts)


def _word_text(parts):
    return " ".join(n if k == 1 else "%s^%d" % (n, k) for n, k in parts if k)


def _square(word):
    toks = word.split()
    if len(toks) == 1:
        name, _, k = toks[0].partition("^")
        return _word_text([[name, 2 * int(k or 1)]])
    return word + " " + word


def _commutes(model, x, z):
    c = model.multiply(model.multiply(x, z), model.multiply(model.inverse(x), model.inverse(z)))
    return model.is_identity(c)


def _rank1_certificate(h, name):
    """A verified hyperbolic element through the edge centralizing a power of
    the vertex group, found on an embedded cycle of modulus +-1."""
    for cyc in _cycles_through(h, name):
        q = Fraction(1)
        n = 1
        for r in cyc:
            q *= ratio(h, r)
            n *= abs(h.inj_origin(r).label) * abs(h.inj_terminus(r).label)
        if abs(q) != 1:
            continue
        v = h.origin(cyc[0])
        model = GraphModel(h, base=v)
        word = _cycle_word(model, cyc)
        if q == -1:
            word = _square(word)
        x = model.parse(word)
        z = model.parse("%s.1^%d" % (v, n))
        if _commutes(model, x, z) and isinstance(classify_element(model, x), Hyperbolic):
            return word, "%s.1^%d" % (v, n)
    return None


def _edge_coords(inj, target):
    """Rational r x r matrix M with inj * M = target, or None."""
    cols = []
    for c in target.columns():
        y = _solve(inj.rows, c)
        if y is None:
            return None
        cols.append(y)
    r = inj.r
    return [[cols[j][i] for j in range(r)] for i in range(r)]


def _finite_order(m, limit=MAX_PHI_ORDER):
    r = len(m)
    ident = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    p = m
    for k in range(1, limit + 1):
        if p == ident:
            return k
        p = matmul(p, m)
    return None


def _loop_certificate(h, name):
    """At higher rank: a loop whose gluing map has finite order k makes t^k
    centralize a finite-index subgroup of the edge group."""
    e = h.edges[name]
    if not e.is_loop:
        return None
    m = _edge_coords(e.inj_o, e.inj_t)
    if m is None:
        return None
    k = _finite_order(m)
    if k is None:
        return None
    return _word_text([[name, k]]), "edge group of %s" % name


def bearing_status(g, e, budget=None, _ctx=None):
    """Whether the edge lies in the axis of a hyperbolic potentially
    bi-elliptic element, by the commuting certificate or the modulus
    obstruction."""
    budget = budget or Budget()
    if not g.is_reduced():
        raise mv.NotReduced("bearing_status needs a reduced graph")
    name = e.name if isinstance(e, EdgeRef) else mv.as_ref(e).name
    ctx = _ctx or _Context(g, budget)
    rank1 = g.is_rank1()
    find = _rank1_certificate if rank1 else _loop_certificate
    hit = find(g, name)
    if hit is not None:
        return TriState.proven([hit[0]], detail={"centralizes": hit[1]})
    if rank1:
        moduli = fundamental_moduli(g)
        primes, basis = modulus_lattice(moduli)
        if len(basis) == betti(g):
            return TriState.refuted("ModulusObstruction",
                                    detail={"moduli": [str(q) for q in moduli]})
    atlas = ctx.atlas(name)
    for key in atlas.order:
        h = atlas.nodes[key]
        hit = find(h, name)
        if hit is not None:
            return TriState.proven([hit[0]], detail={"centralizes": hit[1],
                                                     "trace": atlas.trace_to(key)})
    return TriState.unknown(len(atlas), detail={"truncated": sorted(set(atlas.truncated))})


# inert edges ---------------------------------------------------------------------------

def _is_prime(p):
    return p > 1 and all(p % d for d in range(2, int(p ** 0.5) + 1))


def _prime_power(n):
    for p in range(2, n + 1):
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            return (p, k) if n == 1 else None
    return None


def inert_type_candidate(G_e, G_v):
    """(type, p, k) from the shape of G_v / G_e: type 2 when it is cyclic of
    prime-power order, type 1 otherwise."""
    invs, free = quotient_invariants(G_e, G_v)
    if free == 0 and len(invs) == 1:
        pk = _prime_power(invs[0])
        if pk is not None:
            return 2, pk[0], pk[1]
    return 1, None, None


def _phi_fixes(h, f, lat):
    """Whether some power t_f^k (k <= limit) of an ascending loop fixes lat."""
    m = h.inj_origin(f)
    w = h.inj_terminus(f)
    inv = rational_inverse([list(r) for r in m.rows])
    phi = matmul([list(r) for r in w.rows], inv)
    p = phi
    for _ in range(MAX_PHI_ORDER):
        if all(tuple(sum(p[i][j] * c[j] for j in range(len(c))) for i in range(len(c))) == tuple(c)
               for c in lat.basis):
            return True
        p = matmul(p, phi)
    return False


def _centralizer_ok(h, r):
    """The centralizer of G_e in the vertex obtained by collapsing the
    ascending edges at v is G_v."""
    v = h.origin(r)
    gv = full(h.vertices[v])
    ge = h.group_at_origin(r)
    for f in h.ends_at(v):
        if f.name == r.name or h.group_at_origin(f) != gv:
            continue
        if not h.edge(f.name).is_loop:
            return False
        if _phi_fixes(h, f, ge):
            return False
    return True


def _type_ok(h, r, typ):
    v = h.origin(r)
    gv = full(h.vertices[v])
    ge = h.group_at_origin(r)
    for f in h.ends_at(v):
        if f.name == r.name:
            continue
        gf = h.group_at_origin(f)
        if typ == 1 and join(gf, ge) != gv:
            return False
        if typ == 2 and gf.contains_lattice(ge) and not mv.local_kind(h, f).toric:
            return False
    return True


def _first_generator(G_e, G_v, p, k):
    """Lexicographically least standard basis vector generating G_v / G_e."""
    for j in range(G_v.n):
        x = tuple(p ** (k - 1) if i == j else 0 for i in range(G_v.n))
        if x not in G_e:
            return j
    raise ValueError("quotient is not generated by a basis vector")


def inert_status(g, e, budget=None, _ctx=None):
    """Decide whether the oriented edge e is inert; a Proven answer carries
    an ``InertData`` as its witness."""
    budget = budget or Budget()
    if not g.is_reduced():
        raise mv.NotReduced("inert_status needs a reduced graph")
    r = mv.as_ref(e)
    ctx = _ctx or _Context(g, budget)
    v = g.origin(r)
    if g.vertices[v] == 1:
        return TriState.refuted("RankOne")
    if g.valence(v) < 2:
        return TriState.refuted("Valence")
    gv = full(g.vertices[v])
    ge = g.group_at_origin(r)
    if ge == gv:
        return TriState.refuted("AscendingEnd")
    unknown = []
    b = ctx.prop(r.name, "bearing")
    if b.is_refuted():
        return TriState.refuted("NotBearing")
    if b.is_unknown():
        unknown.append("bearing")
    for prop in ("vanishing", "slippery", "psa"):
        st = ctx.prop(r.name, prop)
        if st.is_proven():
            return TriState.refuted(prop)
        if st.is_unknown():
            unknown.append(prop)
    typ, p, k = inert_type_candidate(ge, gv)
    atlas = ctx.atlas(r.name)
    H = gv
    for key in atlas.order:
        h = atlas.nodes[key]
        if h.vertices.get(h.origin(r)) != g.vertices[v]:
            continue
        if not _centralizer_ok(h, r):
            return TriState.refuted("Centralizer", detail={"trace": atlas.trace_to(key)})
        if not _type_ok(h, r, typ):
            return TriState.refuted("Type%d" % typ, detail={"trace": atlas.trace_to(key)})
        if h.origin(r) == v:
            for f in h.ends_at(v):
                if f != r:
                    H = meet(H, join(h.group_at_origin(r), h.group_at_origin(f)))
    if not atlas.closed:
        unknown.append("atlas")
    if typ == 1:
        data = InertData(r, 1, H)
    else:
        j = _first_generator(ge, gv, p, k)
        # the minimal exponent is bounded by k; the bound is used as is
        i = k
        a = tuple(p ** i if x == j else 0 for x in range(gv.n))
        F = join(ge, lattice_from_gens([list(a)], gv.n))
        data = InertData(r, 2, H, p, k, "%s.%d" % (v, j + 1), i, F, i_exact=False)
    if unknown:
        return TriState.unknown(len(atlas), detail={"open": unknown, "candidate": str(data)})
    return TriState.proven([data], detail={"i_exact": data.i_exact})


def expand_inert(g, e, data):
    """Expand an inert edge: at its origin, with group G_v (type 1) or F_e
    (type 2), moving only e."""
    if isinstance(data, TriState):
        if not data.is_proven():
            raise NotInert("edge %r is not known to be inert" % (e,))
        data = data.witness[0]
    if not isinstance(data, InertData):
        raise NotInert("no inert data for %r" % (e,))
    r = mv.as_ref(e)
    v = g.origin(r)
    if data.type == 1:
        return mv.expand(g, v, full(g.vertices[v]), [r])
    if not data.H_e.contains_lattice(data.F_e):
        raise ExpansionUndefined("F_e is not contained in H_e")
    return mv.expand(g, v, data.F_e, [r])


# reports --------------------------------------------------------------------------------

def _all_states(confidence):
    for states in confidence.values():
        for st in states.values():
            yield st


def _pieces_text(g, indent=""):
    lines = []
    for v in sorted(g.composite):
        lines.append("%s# composite %s:" % (indent, v))
        for line in serialize(g.composite[v]).splitlines():
            lines.append("%s#   %s" % (indent, line))
    return lines


class JsjReport:
    """Outcome of a construction.

    ``verdicts`` and ``confidence`` are keyed by edge name of ``base``;
    ``result_graph`` is ``base`` with the Collapse orbits collapsed in name
    order.
    """

    def __init__(self, construction, source, base, verdicts, confidence, result_graph,
                 inserted, notes=()):
        self.construction = construction
        self.source = source
        self.base = base
        self.verdicts = verdicts
        self.confidence = confidence
        self.result_graph = result_graph
        self.inserted = inserted
        self.notes = list(notes)

    @property
    def exact(self):
        return all(st.definite() for st in _all_states(self.confidence))

    @property
    def status(self):
        return "Exact" if self.exact else "Partial"

    def collapsed(self):
        return sorted(n for n, v in self.verdicts.items() if v.kind == "Collapse")

    def kept(self):
        return sorted(n for n, v in self.verdicts.items() if v.kind == "Keep")

    def witness_trace(self, name):
        v = self.verdicts[name]
        st = self.confidence.get(name, {}).get(v.reason)
        if v.kind == "Collapse" and st is not None and st.witness is not None:
            return [str(x) for x in st.witness]
        return []

    def clusters(self):
        """Base vertices grouped by the composite vertex they merge into."""
        out = {}
        for v in sorted(self.result_graph.composite):
            piece = self.result_graph.composite[v]
            out["%s = {%s}" % (v, ",".join(sorted(piece.edges)))] = sorted(piece.vertices)
        return out

    def to_dict(self):
        edges = []
        for name in sorted(self.verdicts):
            v = self.verdicts[name]
            edges.append({
                "orbit": name,
                "verdict": v.kind,
                "reason": v.reason,
                "confidence": {p: st.to_dict() for p, st in sorted(self.confidence.get(name, {}).items())},
                "witness_trace": self.witness_trace(name),
            })
        return {
            "construction": self.construction,
            "edges": edges,
            "inserted": [dict(zip(("edge", "source", "vertex"), x)) for x in self.inserted],
            "exact": self.exact,
            "notes": self.notes,
            "result_graph": serialize(self.result_graph).splitlines() + _pieces_text(self.result_graph),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=str) + "\n"

    def to_dot(self):
        return to_dot(self.base, self.construction, self.clusters())

    def to_text(self):
        lines = ["%s: %s" % (self.construction, self.status)]
        for name in sorted(self.verdicts):
            v = self.verdicts[name]
            line = "  %s %s %s" % (name, _label(self.base, name), v)
            trace = self.witness_trace(name)
            if trace:
                line += "  witness: " + "; ".join(trace)
            open_ = [p for p, st in sorted(self.confidence.get(name, {}).items()) if not st.definite()]
            if open_:
                line += "  unknown: " + ",".join(open_)
            lines.append(line)
        for n, src, at in self.inserted:
            lines.append("  inserted %s by %s at %s" % (n, src, at))
        for note in self.notes:
            lines.append("  note: " + note)
        lines.append("result:")
        lines.extend("  " + x for x in serialize(self.result_graph).splitlines())
        lines.extend("  " + x for x in _pieces_text(self.result_graph))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return "JsjReport(%s, %s, collapse=%s)" % (self.construction, self.status, self.collapsed())


def _label(g, name):
    e = g.edges[name]
    return "%s-[%s]-%s" % (e.o, edge_label_text(e), e.t)


def _absorb_loop(g, name):
    """Collapse a loop into its vertex, which becomes composite."""
    e = g.edge(name)
    v = e.o
    edges = dict(g.edges)
    del edges[name]
    composite = dict(g.composite)
    if v in composite:
        inner = composite[v]
        piece_edges = dict(inner.edges)
        piece_edges[name] = e
        piece = GraphOfGroups(inner.vertices, piece_edges, inner.composite, validate=False)
    else:
        piece = GraphOfGroups({v: g.vertices[v]}, {name: e}, validate=False)
    vertices = dict(g.vertices)
    vertices[v] = 0
    composite[v] = piece
    return g.replace(vertices=vertices, edges=edges, composite=composite)


def collapse_orbits(g, names):
    """Collapse the named edges one at a time in name order."""
    for name in sorted(names):
        if g.edges[name].is_loop:
            g = _absorb_loop(g, name)
        else:
            g = mv.collapse(g, name)
    return g


# pipeline ---------------------------------------------------------------------------------

def _prepare(g, notes):
    if not g.is_connected():
        raise NotConnected("graph is not connected")
    g0, done = mv.reduce(g)
    if done:
        notes.append("input reduced by collapsing %s" % ", ".join(r.name for r in done))
    if len(g0.vertices) == 1 and len(g0.edges) == 1:
        name = next(iter(g0.edges))
        if g0.edges[name].is_loop and mv.strictly_ascending_ref(g0, name) is not None:
            notes.append("single strictly ascending loop: the group is an ascending HNN "
                         "extension, outside the range of the constructions")
    return g0


def _blow_up_dead_ends(ctx, base, confidence, inserted, notes, force=False):
    """Blow up every dead end of the reduced graph inside base (which may
    already carry other insertions), at the first wall found."""
    g0 = ctx.g
    for v in sorted(g0.vertices):
        st = dead_end(g0, v, ctx.budget, lookup=ctx.prop)
        if st.is_refuted():
            continue
        confidence["vertex " + v] = {"dead_end": st}
        walls = list(st.witness or [])
        if st.is_unknown():
            if not force:
                continue
            walls = [f for f in g0.ends_at(v) if _wall_bullets(g0, v, f)]
            if not walls:
                continue
            notes.append("forced blow-up of %s with unproven dead end" % v)
        rec = mv.expand_record(base, v, full(base.vertices[v]), [walls[0]])
        base = rec.result
        new = [c.name for c in rec.created if isinstance(c, EdgeRef)][0]
        inserted.append((new, "blow_up", v))
    return base


def _ascending(g, name):
    return any(mv.local_kind(g, EdgeRef(name, rev)).ascending for rev in (False, True))


def _toric(g, name):
    return any(mv.local_kind(g, EdgeRef(name, rev)).toric for rev in (False, True))


def _strict(g, name):
    return mv.strictly_ascending_ref(g, name) is not None


def _decide(ctx, name, checks):
    """Run (reason, guard, property) checks in order; the first Proven one
    collapses the orbit.  Returns the verdict and the states used."""
    used = {}
    for reason, guard, prop in checks:
        if not guard:
            continue
        st = ctx.prop(name, prop) if prop is not None else TriState.proven(["local"])
        key = prop or reason
        used[key] = st
        if st.is_proven():
            return Verdict("Collapse", reason), _rename(used, key, reason)
    return KEEP, used


def _rename(used, key, reason):
    out = dict(used)
    out[reason] = out.pop(key)
    return out


def _comp_checks(g0, name):
    return [
        ("vanishing", True, "vanishing"),
        ("psa", True, "psa"),
        ("nonascending_slippery", not _ascending(g0, name), "slippery"),
        ("toric_2slippery", _toric(g0, name), "two_slippery"),
    ]


def _ab_checks(g0, name):
    return [
        ("nonascending_slippery", not _ascending(g0, name), "slippery"),
        ("strictly_ascending", _strict(g0, name), None),
        ("toric_2slippery", _toric(g0, name), "two_slippery"),
        ("bearing", True, "bearing"),
    ]


def _finish(construction, source, g0, base, ctx, check_fn, confidence, inserted, notes):
    names = sorted(g0.edges)
    results = _map(lambda n: _decide(ctx, n, check_fn(g0, n)), names)
    verdicts = {}
    for name, (verdict, used) in zip(names, results):
        verdicts[name] = verdict
        confidence[name] = used
    for new, src, _ in inserted:
        verdicts[new] = Verdict("Inserted", src)
    result = collapse_orbits(base, [n for n, v in verdicts.items() if v.kind == "Collapse"])
    return JsjReport(construction, source, base, verdicts, confidence, result, inserted, notes)


def build_t_comp(g, budget=None, force_blowup=False):
    """Blow up dead ends, then collapse vanishing, p.s.a., non-ascending
    slippery and toric 2-slippery orbits."""
    budget = budget or Budget()
    notes = []
    g0 = _prepare(g, notes)
    ctx = _Context(g0, budget)
    confidence, inserted = {}, []
    base = _blow_up_dead_ends(ctx, g0, confidence, inserted, notes, force_blowup)
    return _finish("T_comp", g, g0, base, ctx, _comp_checks, confidence, inserted, notes)


def build_t_ab(g, budget=None, force_blowup=False):
    """Expand inert edges, blow up dead ends, then collapse non-ascending
    slippery, strictly ascending, toric 2-slippery and bearing orbits."""
    budget = budget or Budget()
    notes = []
    g0 = _prepare(g, notes)
    ctx = _Context(g0, budget)
    confidence, inserted = {}, []
    base = g0
    for name in sorted(g0.edges):
        for rev in (False, True):
            r = EdgeRef(name, rev)
            st = inert_status(g0, r, budget, _ctx=ctx)
            if st.is_refuted():
                continue
            confidence.setdefault("inert " + repr(r), {})["inert"] = st
            if not st.is_proven():
                continue
            data = st.witness[0]
            if not data.i_exact:
                confidence["inert " + repr(r)]["minimal_exponent"] = TriState.unknown(
                    0, detail={"bound": data.k})
            try:
                rec = mv.expand_record(base, base.origin(r), *_inert_args(base, r, data))
            except ExpansionUndefined:
                notes.append("expansion of %r is undefined" % (r,))
                continue
            base = rec.result
            new = [c.name for c in rec.created if isinstance(c, EdgeRef)][0]
            inserted.append((new, "inert_expansion", g0.origin(r)))
    base = _blow_up_dead_ends(ctx, base, confidence, inserted, notes, force_blowup)
    report = _finish("T_ab", g, g0, base, ctx, _ab_checks, confidence, inserted, notes)
    for name in sorted(g0.edges):
        if _strict(g0, name):
            continue
        if ctx.prop(name, "psa").is_proven():
            report.notes.append("%s is p.s.a. but not strictly ascending" % name)
    return report


def _inert_args(g, r, data):
    v = g.origin(r)
    if data.type == 1:
        return full(g.vertices[v]), [r]
    if not data.H_e.contains_lattice(data.F_e):
        raise ExpansionUndefined("F_e is not contained in H_e")
    return data.F_e, [r]


# compatibility ----------------------------------------------------------------------------

def _plain(x):
    if isinstance(x, JsjReport):
        x = x.result_graph
    return x


def _one_expansion_refinements(g, limit):
    """Graphs obtained from g by one expansion at a vertex, moving a set of
    ends into a subgroup generated by end images."""
    count = 0
    for v in sorted(g.vertices):
        if v in g.composite:
            continue
        ends = g.ends_at(v)
        groups = []
        for r in ends:
            lat = g.group_at_origin(r)
            if lat.rank == g.vertices[v] and lat not in groups:
                groups.append(lat)
        for H in groups:
            inside = [r for r in ends if H.contains_lattice(g.group_at_origin(r))]
            for mask in range(1, 1 << len(inside)):
                if count >= limit:
                    return
                F = [r for i, r in enumerate(inside) if mask >> i & 1]
                try:
                    rec = mv.expand_record(g, v, H, F)
                except mv.MoveError:
                    continue
                count += 1
                yield rec.result, "expand %s %s {%s}" % (v, _lat_text(H), ",".join(map(repr, F)))


def _collapses_to(r, key):
    for name in sorted(r.edges):
        if r.edges[name].is_loop:
            continue
        if canonical_key(mv.collapse(r, name)) == key:
            return name
    return None


def _refinement(g1, g2, limit):
    """A common refinement of g1 and g2 one elementary expansion away."""
    k1, k2 = canonical_key(g1), canonical_key(g2)
    if _collapses_to(g1, k2):
        return g1, "refines"
    if _collapses_to(g2, k1):
        return g2, "refines"
    for r, line in _one_expansion_refinements(g1, limit):
        if _collapses_to(r, k2):
            return r, line
    return None


def _group_check(g1, g2):
    if isinstance(g1, GraphOfGroups) and isinstance(g2, GraphOfGroups) and g1.is_rank1() and g2.is_rank1():
        if not cycle_invariants(g1).same_as(cycle_invariants(g2)):
            raise IncomparablePresentations("the graphs have different cycle invariants")


def _identity_map(gen_map):
    return gen_map is None or all(k == v.strip() for k, v in gen_map.items())


def _candidate_words(g, limit):
    """Short elliptic words: vertex generators and their conjugates by stable letters."""
    m = GraphModel(g)
    short = {}
    for n, gen in sorted(m.gens.items()):
        if gen not in short or len(n) < len(short[gen]):
            short[gen] = n
    vs = sorted(n for gen, n in short.items() if gen[0] == "v")
    ts = sorted(n for gen, n in short.items() if gen[0] == "t")
    out = list(vs)
    for gen, n in sorted(short.items()):
        if gen[0] == "v" and g.vertices[gen[1]] == 1:
            for lab in sorted({abs(g.inj_origin(r).label) for r in g.ends_at(gen[1])}):
                if lab > 1:
                    out.append("%s^%d" % (n, lab))
    for u in ts + vs:
        for v in vs:
            if u != v:
                out.append("%s %s %s^-1" % (u, v, u))
                out.append("%s^-1 %s %s" % (u, v, u))
    out.extend(ts)
    return out[:limit]


def compatible(t1, t2, budget=None, gen_map=None, cert=None, radius=DEFAULT_RADIUS,
               max_candidates=8):
    """Proven(refinement), Refuted(certificate) or Unknown.

    ``gen_map`` sends the letters of t1 to words of t2; without it the two
    graphs are taken with their letters identified by name."""
    budget = budget or Budget()
    g1, g2 = _plain(t1), _plain(t2)
    graphs = isinstance(g1, GraphOfGroups) and isinstance(g2, GraphOfGroups)
    if graphs:
        _group_check(g1, g2)
    if graphs and _identity_map(gen_map):
        if canonical_key(g1) == canonical_key(g2):
            return TriState.proven(["identity"])
        if not g1.composite and not g2.composite:
            hit = _refinement(g1, g2, budget.max_nodes)
            if hit is not None:
                return TriState.proven([hit[1]], detail={"refinement": serialize(hit[0])})
    if cert is not None:
        if incompat_certificate(g1, g2, cert, radius, gen_map):
            return TriState.refuted("IncompatCertificate", detail={"certificate": dict(cert)})
        return TriState.unknown(0, detail={"certificate": "not validated"})
    if graphs and not g1.composite and not g2.composite and gen_map is not None:
        words = _candidate_words(g1, max_candidates)
        tried = 0
        for a in words:
            for b in words:
                if b <= a:
                    continue
                for c in words:
                    if c in (a, b):
                        continue
                    tried += 1
                    try:
                        ok = incompat_certificate(g1, g2, {"a": a, "b": b, "c": c}, radius, gen_map)
                    except ValueError:
                        continue
                    if ok:
                        return TriState.refuted("IncompatCertificate",
                                                detail={"certificate": {"a": a, "b": b, "c": c}})
        return TriState.unknown(tried)
    return TriState.unknown(0)
