"""Graphs of groups with free abelian vertex and edge groups.

A graph is immutable: every move returns a new ``GraphOfGroups``.  Edge
``e`` from ``o`` to ``t`` carries two injections of its edge group Z^r, one
into each endpoint.  In the rank-1 shorthand ``u-[m:n]-w`` the edge group
maps to ``m Z`` at ``u`` and to ``n Z`` at ``w``; for a loop ``[m:n]`` the
first label sits at the initial end, and the stable letter ``t`` satisfies
``t a^m t^-1 = a^n``.
"""

import itertools
import re
from collections import namedtuple
from fractions import Fraction

from .lattice import Mono, lattice_from_gens, _hnf_columns, quotient_invariants, full

__all__ = [
    "ParseError", "ValidationError", "RankUnsupported", "EdgeNotFound",
    "EdgeRef", "Edge", "GraphOfGroups", "CycleInvariants", "parse_graph",
    "serialize", "canonical_key", "cycle_invariants", "to_dot", "rank1",
]


class ParseError(ValueError):
    def __init__(self, line, reason):
        super().__init__("line %d: %s" % (line, reason))
        self.line = line
        self.reason = reason


class ValidationError(ValueError):
    pass


class RankUnsupported(ValueError):
    pass


class EdgeNotFound(KeyError):
    pass


class EdgeRef(namedtuple("EdgeRef", "name rev")):
    """An oriented edge: ``rev`` False means the stored orientation."""

    __slots__ = ()

    def reverse(self):
        return EdgeRef(self.name, not self.rev)

    def __repr__(self):
        return ("~" if self.rev else "") + self.name


def ref(name, rev=False):
    return EdgeRef(name, rev)


class Edge(namedtuple("Edge", "name o t inj_o inj_t")):
    __slots__ = ()

    @property
    def rank(self):
        return self.inj_o.r

    @property
    def is_loop(self):
        return self.o == self.t


class GraphOfGroups:
    """Vertex name -> rank, edge name -> Edge.  Composite vertices (from
    collapsing reduced edges) keep the collapsed piece in ``composite``."""

    __slots__ = ("vertices", "edges", "composite", "_key")

    def __init__(self, vertices, edges, composite=None, validate=True):
        self.vertices = dict(vertices)
        self.edges = dict(edges)
        self.composite = dict(composite or {})
        self._key = None
        if validate:
            self.validate()

    # construction helpers -------------------------------------------------
    def validate(self):
        for e in self.edges.values():
            for end, inj in ((e.o, e.inj_o), (e.t, e.inj_t)):
                if end not in self.vertices:
                    raise ValidationError("edge %s: unknown vertex %s" % (e.name, end))
                if inj.n != self.vertices[end]:
                    raise ValidationError("edge %s: injection has %d rows, vertex %s has rank %d"
                                          % (e.name, inj.n, end, self.vertices[end]))
                if not inj.is_injective():
                    raise ValidationError("edge %s: injection is not of full column rank" % e.name)
            if e.inj_o.r != e.inj_t.r:
                raise ValidationError("edge %s: injections disagree on the edge rank" % e.name)
        if not self.is_connected():
            raise ValidationError("graph is not connected")

    def is_connected(self):
        if not self.vertices:
            return False
        adj = {v: set() for v in self.vertices}
        for e in self.edges.values():
            adj[e.o].add(e.t)
            adj[e.t].add(e.o)
        start = min(self.vertices)
        seen, stack = {start}, [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def replace(self, vertices=None, edges=None, composite=None, validate=False):
        return GraphOfGroups(self.vertices if vertices is None else vertices,
                             self.edges if edges is None else edges,
                             self.composite if composite is None else composite,
                             validate=validate)

    # oriented access ------------------------------------------------------
    def edge(self, name):
        try:
            return self.edges[name]
        except KeyError:
            raise EdgeNotFound(name) from None

    def origin(self, r):
        e = self.edge(r.name)
        return e.t if r.rev else e.o

    def terminus(self, r):
        e = self.edge(r.name)
        return e.o if r.rev else e.t

    def inj_origin(self, r):
        e = self.edge(r.name)
        return e.inj_t if r.rev else e.inj_o

    def inj_terminus(self, r):
        e = self.edge(r.name)
        return e.inj_o if r.rev else e.inj_t

    def group_at_origin(self, r):
        """The lattice G_r inside the vertex group of the origin of r."""
        return self.inj_origin(r).image()

    def ends_at(self, v):
        """Oriented edges with origin v, in a fixed order."""
        out = []
        for name in sorted(self.edges):
            e = self.edges[name]
            if e.o == v:
                out.append(EdgeRef(name, False))
            if e.t == v:
                out.append(EdgeRef(name, True))
        return out

    def valence(self, v):
        return len(self.ends_at(v))

    def is_rank1(self):
        return all(r == 1 for r in self.vertices.values())

    def labels(self, name):
        e = self.edge(name)
        return e.inj_o.label, e.inj_t.label

    def is_reduced_edge(self, name):
        e = self.edge(name)
        if e.is_loop:
            return True
        return not e.inj_o.is_surjective() and not e.inj_t.is_surjective()

    def is_reduced(self):
        return all(self.is_reduced_edge(n) for n in self.edges)

    def fresh_vertex(self, base):
        return _fresh(base, self.vertices)

    def fresh_edge(self, base):
        return _fresh(base, self.edges)

    def key(self):
        if self._key is None:
            self._key = canonical_key(self)
        return self._key

    def __eq__(self, other):
        return (isinstance(other, GraphOfGroups) and self.vertices == other.vertices
                and self.edges == other.edges and self.composite == other.composite)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "GraphOfGroups(%s)" % serialize(self).strip().replace("\n", "; ")


def _fresh(base, taken):
    name = base
    while name in taken:
        name += "'"
    return name


def rank1(vertices, edges):
    """Build a rank-1 graph from vertex names and (name, u, w, m, n) tuples."""
    es = {}
    for name, u, w, m, n in edges:
        es[name] = Edge(name, u, w, Mono.scalar(m), Mono.scalar(n))
    return GraphOfGroups({v: 1 for v in vertices}, _normalize_signs(es))


def _normalize_signs(edges):
    out = {}
    for name, e in edges.items():
        if e.rank == 1 and e.inj_o.n == 1 and e.inj_t.n == 1 and e.inj_o.label < 0:
            e = e._replace(inj_o=Mono.scalar(-e.inj_o.label), inj_t=Mono.scalar(-e.inj_t.label))
        out[name] = e
    return out


# parsing ------------------------------------------------------------------

_NAME = r"[A-Za-z_][A-Za-z0-9_'.~]*"
_LABEL = re.compile(r"^\[\s*(-?\d+)\s*:\s*(-?\d+)\s*\]$")
_SHAPE = re.compile(r"^(\d+)\s*[x×]\s*(\d+)$")


def _parse_matrices(tokens, lineno):
    mats = []
    i = 0
    while i < len(tokens):
        if tokens[i] != "matrix":
            raise ParseError(lineno, "expected 'matrix', got %r" % tokens[i])
        if i + 1 >= len(tokens):
            raise ParseError(lineno, "missing matrix shape")
        m = _SHAPE.match(tokens[i + 1])
        if not m:
            raise ParseError(lineno, "bad matrix shape %r" % tokens[i + 1])
        rows, cols = int(m.group(1)), int(m.group(2))
        vals = tokens[i + 2:i + 2 + rows * cols]
        if len(vals) != rows * cols:
            raise ParseError(lineno, "matrix needs %d entries" % (rows * cols))
        try:
            ints = [int(v) for v in vals]
        except ValueError:
            raise ParseError(lineno, "non-integer matrix entry") from None
        mats.append(Mono([ints[r * cols:(r + 1) * cols] for r in range(rows)]))
        i += 2 + rows * cols
    if len(mats) != 2:
        raise ParseError(lineno, "an edge needs exactly two matrices")
    return mats


def parse_graph(text):
    """Parse the line-oriented graph grammar into a validated graph."""
    vertices, edges = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kw = tokens[0]
        if kw == "vertex":
            if len(tokens) != 3:
                raise ParseError(lineno, "usage: vertex <name> <rank>")
            name = tokens[1]
            if not re.fullmatch(_NAME, name):
                raise ParseError(lineno, "bad vertex name %r" % name)
            if name in vertices:
                raise ParseError(lineno, "duplicate vertex %r" % name)
            try:
                rank = int(tokens[2])
            except ValueError:
                raise ParseError(lineno, "rank must be an integer") from None
            if rank < 1:
                raise ParseError(lineno, "rank must be positive")
            vertices[name] = rank
        elif kw in ("edge", "loop"):
            nend = 2 if kw == "edge" else 1
            if len(tokens) < 2 + nend + 1:
                raise ParseError(lineno, "incomplete %s line" % kw)
            name = tokens[1]
            if not re.fullmatch(_NAME, name):
                raise ParseError(lineno, "bad edge name %r" % name)
            if name in edges:
                raise ParseError(lineno, "duplicate edge %r" % name)
            ends = tokens[2:2 + nend]
            u = ends[0]
            w = ends[-1]
            for v in (u, w):
                if v not in vertices:
                    raise ParseError(lineno, "unknown vertex %r" % v)
            rest = tokens[2 + nend:]
            lab = _LABEL.match(" ".join(rest))
            if lab:
                m, n = int(lab.group(1)), int(lab.group(2))
                if m == 0 or n == 0:
                    raise ValidationError("edge %s: zero label" % name)
                if vertices[u] != 1 or vertices[w] != 1:
                    raise ParseError(lineno, "label shorthand needs rank-1 endpoints")
                inj_o, inj_t = Mono.scalar(m), Mono.scalar(n)
            else:
                inj_o, inj_t = _parse_matrices(rest, lineno)
            edges[name] = Edge(name, u, w, inj_o, inj_t)
        else:
            raise ParseError(lineno, "unknown keyword %r" % kw)
    if not vertices:
        raise ValidationError("graph has no vertices")
    return GraphOfGroups(vertices, _normalize_signs(edges))


def _mat_text(m):
    return "matrix %dx%d %s" % (m.n, m.r, " ".join(str(v) for row in m.rows for v in row))


def serialize(g):
    """Write a graph back in the input grammar (vertices, then edges, by name)."""
    lines = []
    for v in sorted(g.vertices):
        lines.append("vertex %s %d" % (v, g.vertices[v]))
    for name in sorted(g.edges):
        e = g.edges[name]
        head = "loop %s %s" % (name, e.o) if e.is_loop else "edge %s %s %s" % (name, e.o, e.t)
        if e.inj_o.n == 1 and e.inj_t.n == 1 and e.rank == 1:
            lines.append("%s [%d:%d]" % (head, e.inj_o.label, e.inj_t.label))
        else:
            lines.append("%s %s %s" % (head, _mat_text(e.inj_o), _mat_text(e.inj_t)))
    return "\n".join(lines) + "\n"


def edge_label_text(e):
    if e.rank == 1 and e.inj_o.n == 1 and e.inj_t.n == 1:
        return "%d:%d" % (e.inj_o.label, e.inj_t.label)
    return "%s:%s" % (_compact(e.inj_o), _compact(e.inj_t))


def _compact(m):
    return "[" + ";".join(",".join(str(v) for v in row) for row in m.rows) + "]"


# canonical keys -------------------------------------------------------------

def _edge_frame(mo, mt):
    """Normal form of an injection pair under change of edge-group basis."""
    if mo.r == 1 and mo.n == 1 and mt.n == 1:
        a, b = mo.label, mt.label
        return ((a, b),) if a > 0 else ((-a, -b),)
    rows = [list(r) for r in mo.rows] + [list(r) for r in mt.rows]
    cols = [[rows[i][j] for i in range(len(rows))] for j in range(mo.r)]
    return _hnf_columns(cols, len(rows))


def _vertex_invariant(g, v, marks):
    ends = []
    for r in g.ends_at(v):
        img = g.group_at_origin(r)
        other = g.group_at_origin(r.reverse())
        loop = g.origin(r) == g.terminus(r)
        ends.append((loop, _abs_invariant(img), _abs_invariant(other), marks.get(r.name, "")))
    return (g.vertices[v], marks.get(("v", v), ""), tuple(sorted(ends)))


def _abs_invariant(lat):
    if lat.n == 1:
        return (1, 0, (abs(lat.basis[0][0]),))
    inv, free = quotient_invariants(lat, full(lat.n))
    return (lat.n, free, tuple(inv))


def _refine(g, marks):
    """Vertex classes from colour refinement, in a canonical order."""
    init = {v: _vertex_invariant(g, v, marks) for v in g.vertices}
    ranks = {c: i for i, c in enumerate(sorted(set(init.values())))}
    colour = {v: ranks[init[v]] for v in g.vertices}
    while True:
        nbrs = {v: [] for v in g.vertices}
        for e in g.edges.values():
            nbrs[e.o].append(colour[e.t])
            nbrs[e.t].append(colour[e.o])
        sig = {v: (colour[v], tuple(sorted(nbrs[v]))) for v in g.vertices}
        ranks = {c: i for i, c in enumerate(sorted(set(sig.values())))}
        new = {v: ranks[sig[v]] for v in g.vertices}
        done = len(set(new.values())) == len(set(colour.values()))
        colour = new
        if done:
            break
    classes = {}
    for v, c in colour.items():
        classes.setdefault(c, []).append(v)
    return [sorted(classes[c]) for c in sorted(classes)]


def canonical_key(g, marks=None):
    """Bytes identifying g up to renaming, orientation, edge-basis change and,
    for rank-1 vertices, generator sign changes.  ``marks`` maps edge names
    (or ("v", vertex)) to tags that must be preserved."""
    marks = marks or {}
    classes = _refine(g, marks)
    best = None
    frames = []
    for name in g.edges:
        e = g.edges[name]
        table = {}
        for so in (1, -1):
            for st in (1, -1):
                mo, mt = _scaled(e.inj_o, so), _scaled(e.inj_t, st)
                table[so, st] = (_edge_frame(mo, mt), _edge_frame(mt, mo))
        frames.append((e.o, e.t, table, marks.get(name, "")))
    comp = sorted(g.composite)
    comp_keys = {v: canonical_key(g.composite[v]).decode() for v in comp}
    for perm_parts in itertools.product(*[itertools.permutations(c) for c in classes]):
        order = [v for part in perm_parts for v in part]
        pos = {v: i for i, v in enumerate(order)}
        head = (tuple(g.vertices[v] for v in order),
                tuple(marks.get(("v", v), "") for v in order))
        tail = tuple(sorted((pos[v], comp_keys[v]) for v in comp))
        flippable = [v for v in order[1:] if g.vertices[v] == 1]
        for flips in itertools.product((1, -1), repeat=len(flippable)):
            sign = dict(zip(flippable, flips))
            items = []
            for o, t, table, mark in frames:
                fa, fb = table[sign.get(o, 1), sign.get(t, 1)]
                a = (pos[o], pos[t], fa)
                b = (pos[t], pos[o], fb)
                items.append((a if a <= b else b, mark))
            items.sort()
            cand = (head, tuple(items), tail)
            if best is None or cand < best:
                best = cand
    return repr(best).encode()


def _scaled(m, s):
    if s == 1:
        return m
    return Mono(tuple(tuple(-v for v in row) for row in m.rows))


def isomorphic(g, h):
    return canonical_key(g) == canonical_key(h)


# cycle invariants -----------------------------------------------------------

class CycleInvariants(namedtuple("CycleInvariants", "betti modulus_generators")):
    """First Betti number and the moduli of a fundamental cycle basis."""

    __slots__ = ()

    def modulus_group(self):
        """Canonical form of the subgroup of Q_{>0} generated by the moduli."""
        if self.modulus_generators is None:
            return None
        return modulus_lattice(self.modulus_generators)

    def same_as(self, other):
        return self.betti == other.betti and self.modulus_group() == other.modulus_group()


def _factor(n):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def modulus_lattice(gens):
    """Exponent lattice over primes of the group generated by positive rationals."""
    vecs = []
    primes = set()
    facts = []
    for q in gens:
        q = Fraction(q)
        num, den = _factor(q.numerator), _factor(q.denominator)
        f = dict(num)
        for p, k in den.items():
            f[p] = f.get(p, 0) - k
        facts.append(f)
        primes.update(p for p, k in f.items() if k)
    primes = sorted(primes)
    if not primes:
        return ((), ())
    for f in facts:
        vecs.append([f.get(p, 0) for p in primes])
    lat = lattice_from_gens(vecs, len(primes))
    return (tuple(primes), lat.basis)


def spanning_tree(g, root=None):
    """BFS spanning tree: returns (parent edge ref per vertex, tree edge names)."""
    root = root if root is not None else min(g.vertices)
    parent = {root: None}
    tree = set()
    queue = [root]
    while queue:
        v = queue.pop(0)
        for r in g.ends_at(v):
            w = g.terminus(r)
            if w not in parent:
                parent[w] = r
                tree.add(r.name)
                queue.append(w)
    return parent, tree


def cycle_invariants(g):
    """Betti number and, for rank-1 graphs, one modulus per fundamental cycle."""
    betti = len(g.edges) - len(g.vertices) + 1
    if not g.is_rank1():
        raise RankUnsupported("modulus is only defined when every group has rank 1")
    return CycleInvariants(betti, tuple(fundamental_moduli(g)))


def betti(g):
    return len(g.edges) - len(g.vertices) + 1


def ratio(g, r):
    """terminal label / initial label of an oriented rank-1 edge."""
    return Fraction(g.inj_terminus(r).label, g.inj_origin(r).label)


def fundamental_cycles(g):
    """For each non-tree edge, the closed oriented path it closes up."""
    parent, tree = spanning_tree(g)

    def path_to(v):
        out = []
        while parent[v] is not None:
            r = parent[v]
            out.append(r)
            v = g.origin(r)
        return list(reversed(out))

    cycles = []
    for name in sorted(g.edges):
        if name in tree:
            continue
        r = EdgeRef(name, False)
        to_o = path_to(g.origin(r))
        to_t = path_to(g.terminus(r))
        # strip the common prefix
        k = 0
        while k < min(len(to_o), len(to_t)) and to_o[k] == to_t[k]:
            k += 1
        down, up = to_o[k:], to_t[k:]
        cyc = down + [r] + [x.reverse() for x in reversed(up)]
        cycles.append(cyc)
    return cycles


def fundamental_moduli(g):
    out = []
    for cyc in fundamental_cycles(g):
        q = Fraction(1)
        for r in cyc:
            q *= ratio(g, r)
        out.append(abs(q))
    return out


# DOT -------------------------------------------------------------------------

def _q(s):
    return '"%s"' % str(s).replace("\\", "\\\\").replace('"', '\\"')


def to_dot(g, name="G", clusters=None):
    """Graphviz text with edge labels m:n; ``clusters`` maps a title to a
    list of vertex names drawn together."""
    lines = ["graph %s {" % _q(name)]
    clustered = set()
    for i, (title, members) in enumerate(sorted((clusters or {}).items())):
        lines.append("  subgraph %s {" % _q("cluster_%d" % i))
        lines.append("    label=%s;" % _q(title))
        for v in sorted(members):
            lines.append("    %s;" % _q(v))
            clustered.add(v)
        lines.append("  }")
    for v in sorted(g.vertices):
        shape = "box" if v in g.composite else "circle"
        lines.append("  %s [shape=%s, label=%s];" % (_q(v), shape, _q("%s (Z^%d)" % (v, g.vertices[v]))))
    for name in sorted(g.edges):
        e = g.edges[name]
        lines.append("  %s -- %s [label=%s];" % (_q(e.o), _q(e.t), _q("%s %s" % (name, edge_label_text(e)))))
    lines.append("}")
    return "\n".join(lines) + "\n"
