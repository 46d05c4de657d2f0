"""Words, normal forms and Bass-Serre trees.

An element of the fundamental group is stored as a closed path at the base
vertex: ``(g0, r1, g1, ..., rn, gn)`` with ``gi`` an integer vector in the
group of the i-th vertex and ``ri`` an oriented edge walked from its origin
to its terminus.  Walking ``r`` then ``x`` then back along ``r`` collapses
when ``x`` lies in the image of the edge group at the terminus.

User words use vertex generators ``v.1, v.2, ...`` (or the bare name ``v``
for a rank-1 vertex) and one stable letter per edge outside the spanning
tree.  The stable letter ``t`` of an edge satisfies ``t iota(c) t^-1 =
omega(c)``, so a loop ``[m:n]`` gives ``t a^m t^-1 = a^n``.
"""

import itertools
import re
from collections import namedtuple, deque

from .gog import EdgeRef, spanning_tree, rank1

__all__ = [
    "MalformedWord", "UnsaturatedHull", "GeneratorMapMissing", "RadiusTooSmall",
    "GraphModel", "AmalgamModel", "Elliptic", "Hyperbolic", "HullFragment",
    "normal_form", "classify_element", "axis_segment", "characteristic_hull",
    "incompat_certificate", "bs22_amalgam",
]

DEFAULT_RADIUS = 8
# fixed sets larger than this are treated as reaching the boundary
MAX_FIXED_VERTICES = 1024


class MalformedWord(ValueError):
    pass


class UnsaturatedHull(ValueError):
    pass


class GeneratorMapMissing(KeyError):
    pass


class RadiusTooSmall(ValueError):
    pass


Elliptic = namedtuple("Elliptic", "vertex local")
Hyperbolic = namedtuple("Hyperbolic", "translation_length axis")

_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_'.]*)(?:\^(-?\d+))?$")


def parse_word(text):
    """'t a^2 t^-1' -> [('t', 1), ('a', 2), ('t', -1)]."""
    out = []
    for tok in text.replace("*", " ").split():
        if tok == "1":
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise MalformedWord("bad token %r" % tok)
        k = int(m.group(2)) if m.group(2) is not None else 1
        if k:
            out.append((m.group(1), k))
    return out


def _add(x, y):
    return tuple(a + b for a, b in zip(x, y))


def _sub(x, y):
    return tuple(a - b for a, b in zip(x, y))


def _neg(x):
    return tuple(-a for a in x)


def _box(lat):
    """Coset representatives of a full-rank lattice."""
    n = lat.n
    diag = [lat.basis[j][j] for j in range(n)]
    for combo in itertools.product(*[range(d) for d in diag]):
        yield tuple(combo)


class GraphModel:
    """Bass-Serre tree of a graph of free abelian groups."""

    def __init__(self, g, base=None):
        if g.composite:
            raise MalformedWord("composite vertices have no word model")
        self.g = g
        self.base = base if base is not None else min(g.vertices)
        self.parent, self.tree = spanning_tree(g, self.base)
        self.gamma = {v: self._tree_path(v) for v in g.vertices}
        self.gens = {}
        for v in sorted(g.vertices):
            for i in range(g.vertices[v]):
                self.gens["%s.%d" % (v, i + 1)] = ("v", v, i)
        for v in sorted(g.vertices):
            if g.vertices[v] == 1 and v not in g.edges:
                self.gens.setdefault(v, ("v", v, 0))
        for name in sorted(g.edges):
            if name not in self.tree:
                self.gens[name] = ("t", name)
        self._img = {}

    # plumbing ---------------------------------------------------------------------
    def _tree_path(self, v):
        path = []
        while self.parent[v] is not None:
            r = self.parent[v]
            path.append(r)
            v = self.g.origin(r)
        return list(reversed(path))

    def zero(self, v):
        return (0,) * self.g.vertices[v]

    def image(self, r, at_origin=True):
        key = (r, at_origin)
        if key not in self._img:
            inj = self.g.inj_origin(r) if at_origin else self.g.inj_terminus(r)
            self._img[key] = inj.image()
        return self._img[key]

    def identity(self):
        return (self.zero(self.base),)

    def _walk(self, refs, elem_at):
        """Closed path along refs with element elem_at at the far end."""
        path = [self.zero(self.base)]
        for r in refs:
            path.extend([r, self.zero(self.g.terminus(r))])
        path[-1] = elem_at
        return path

    def generator(self, name, k=1):
        if name not in self.gens:
            raise MalformedWord("unknown generator %r" % name)
        gen = self.gens[name]
        if gen[0] == "v":
            _, v, i = gen
            x = tuple(k if j == i else 0 for j in range(self.g.vertices[v]))
            out = self._walk(self.gamma[v], x)
            for r in reversed(self.gamma[v]):
                out.extend([r.reverse(), self.zero(self.g.origin(r))])
            return self.normal(tuple(out))
        e = self.g.edges[gen[1]]
        # the stable letter walks from t(e) to o(e)
        r = EdgeRef(gen[1], True) if k > 0 else EdgeRef(gen[1], False)
        start = e.t if k > 0 else e.o
        end = e.o if k > 0 else e.t
        one = self._walk(self.gamma[start], self.zero(start))
        one.extend([r, self.zero(end)])
        for s in reversed(self.gamma[end]):
            one.extend([s.reverse(), self.zero(self.g.origin(s))])
        w = self.identity()
        for _ in range(abs(k)):
            w = self.multiply(w, tuple(one))
        return w

    def parse(self, text):
        w = self.identity()
        for name, k in parse_word(text):
            w = self.multiply(w, self.generator(name, k))
        return w

    def multiply(self, x, y):
        mid = _add(x[-1], y[0])
        return self.normal(tuple(x[:-1]) + (mid,) + tuple(y[1:]))

    def inverse(self, x):
        out = [_neg(x[-1])]
        for i in range(len(x) - 2, 0, -2):
            out.extend([x[i].reverse(), _neg(x[i - 1])])
        return self.normal(tuple(out))

    def conj(self, c, x):
        return self.multiply(self.multiply(c, x), self.inverse(c))

    def reduce_path(self, path):
        """Stack-based removal of backtracking subpaths."""
        g = self.g
        out = [path[0]]
        i = 1
        while i < len(path):
            r, x = path[i], path[i + 1]
            if len(out) >= 3:
                last_r, last_x = out[-2], out[-1]
                if r == last_r.reverse() and last_x in self.image(last_r, at_origin=False):
                    c = g.inj_terminus(last_r).preimage(last_x)
                    carried = g.inj_origin(last_r).apply(c)
                    out.pop()
                    out.pop()
                    out[-1] = _add(_add(out[-1], carried), x)
                    i += 2
                    continue
            out.extend([r, x])
            i += 2
        return tuple(out)

    def normal(self, path):
        """Reduced path whose inner elements are canonical coset reps."""
        path = list(self.reduce_path(path))
        g = self.g
        for i in range(0, len(path) - 2, 2):
            r = path[i + 1]
            lat = self.image(r)
            rep = lat.reduce(path[i])
            diff = _sub(path[i], rep)
            if any(diff):
                c = g.inj_origin(r).preimage(diff)
                path[i + 2] = _add(path[i + 2], g.inj_terminus(r).apply(c))
                path[i] = rep
        return tuple(path)

    def length(self, x):
        return (len(x) - 1) // 2

    def is_identity(self, x):
        return len(x) == 1 and not any(x[0])

    def to_text(self, x):
        """Render a normal form as a word over the generators."""
        toks = []
        g = self.g
        names = {}
        for name, gen in self.gens.items():
            if gen[0] == "v":
                key = ("v", gen[1], gen[2])
                if key not in names or len(name) < len(names[key]):
                    names[key] = name

        def emit(v, vec):
            for i, k in enumerate(vec):
                if k:
                    toks.append([names[("v", v, i)], k])

        def letter(name, k):
            if toks and toks[-1][0] == name:
                toks[-1][1] += k
            else:
                toks.append([name, k])

        v = self.base
        emit(v, x[0])
        for i in range(1, len(x), 2):
            r = x[i]
            if r.name not in self.tree:
                letter(r.name, 1 if r.rev else -1)
            v = g.terminus(r)
            emit(v, x[i + 1])
        words = [n if k == 1 else "%s^%d" % (n, k) for n, k in toks if k]
        return " ".join(words) if words else "1"

    # tree -----------------------------------------------------------------------
    # A tree vertex is the normal form of a path from the base with its last
    # group element dropped: (g0, r1, ..., g_{k-1}, rk).

    def base_vertex(self):
        return ()

    def end_vertex(self, label):
        return self.g.terminus(label[-1]) if label else self.base

    def _label_path(self, label):
        return tuple(label) + (self.zero(self.end_vertex(label)),) if label else (self.zero(self.base),)

    def vertex(self, x):
        """x . v0."""
        return tuple(self.normal(x)[:-1])

    def act(self, h, label):
        lp = self._label_path(label)
        path = tuple(h[:-1]) + (_add(h[-1], lp[0]),) + tuple(lp[1:])
        return tuple(self.normal(path)[:-1])

    def path_from_base(self, label):
        return [tuple(label[:k]) for k in range(0, len(label) + 1, 2)]

    def local_element(self, x, label):
        """P^-1 x P for the path P of label, when x fixes the vertex."""
        lp = self._label_path(label)
        inv = [_neg(lp[-1])]
        for i in range(len(lp) - 2, 0, -2):
            inv.extend([lp[i].reverse(), _neg(lp[i - 1])])
        path = tuple(inv[:-1]) + (_add(inv[-1], x[0]),) + tuple(x[1:])
        path = path[:-1] + (_add(path[-1], lp[0]),) + tuple(lp[1:])
        nf = self.normal(path)
        return nf[0] if len(nf) == 1 else None

    def fixed_neighbours(self, label, y):
        """Neighbours of label fixed by an element acting there by y."""
        g = self.g
        v = self.end_vertex(label)
        out = []
        for r in g.ends_at(v):
            if y not in self.image(r):
                continue
            c = g.inj_origin(r).preimage(y)
            y2 = g.inj_terminus(r).apply(c)
            w = g.terminus(r)
            lat = self.image(r)
            if lat.rank != lat.n:
                raise UnsaturatedHull("edge group of %s has infinite index" % r.name)
            for x in _box(lat):
                raw = (tuple(label) + (x, r, self.zero(w))) if label else (x, r, self.zero(w))
                out.append((tuple(self.normal(raw)[:-1]), y2))
        return out

    def describe_vertex(self, label):
        if not label:
            return "v0"
        return self.to_text(tuple(label) + (self.zero(self.end_vertex(label)),)) + " . " + self.end_vertex(label)


class AmalgamModel:
    """G = A *_C B with A given by its own graph of groups (a vertex group
    that is not free abelian) and B = Z^2.

    ``c_in_a`` decides membership of an A-element in C and returns its
    C-coordinates; ``c_to_a`` and ``c_to_b`` embed C-coordinates.  ``odd``
    is a conjugacy-invariant test proving an A-element has no conjugate in
    C, used to bound fixed sets at A-vertices.
    """

    def __init__(self, a_model, b_rank, c_in_a, c_to_a, c_in_b, c_to_b, a_rep, b_rep,
                 no_conjugate_in_c, letters):
        self.A = a_model
        self.b_rank = b_rank
        self.c_in_a = c_in_a
        self.c_to_a = c_to_a
        self.c_in_b = c_in_b
        self.c_to_b = c_to_b
        self.a_rep = a_rep
        self.b_rep = b_rep
        self.no_conjugate_in_c = no_conjugate_in_c
        self.letters = letters

    # factor arithmetic -------------------------------------------------------------
    def _mul(self, f, x, y):
        return self.A.multiply(x, y) if f == "A" else _add(x, y)

    def _inv(self, f, x):
        return self.A.inverse(x) if f == "A" else _neg(x)

    def _one(self, f):
        return self.A.identity() if f == "A" else (0,) * self.b_rank

    def _in_c(self, f, x):
        return self.c_in_a(x) if f == "A" else self.c_in_b(x)

    def _from_c(self, f, c):
        return self.c_to_a(c) if f == "A" else self.c_to_b(c)

    def _split(self, f, x):
        """x = rep . c with rep a canonical right-coset representative."""
        rep = self.a_rep(x) if f == "A" else self.b_rep(x)
        c = self._in_c(f, self._mul(f, self._inv(f, rep), x))
        return rep, c

    def _is_one(self, f, x):
        return x == self._one(f) if f == "B" else self.A.is_identity(x)

    # elements: (reps tuple of (factor, rep), c) -----------------------------------
    def identity(self):
        return ((), None)

    def normal(self, syllables):
        """Normal form of a product of (factor, element) syllables."""
        syl = [list(s) for s in syllables]
        changed = True
        while changed:
            changed = False
            merged = []
            for f, x in syl:
                if merged and merged[-1][0] == f:
                    merged[-1][1] = self._mul(f, merged[-1][1], x)
                    changed = True
                else:
                    merged.append([f, x])
            syl = merged
            for i, (f, x) in enumerate(syl):
                c = self._in_c(f, x)
                if c is not None and len(syl) > 1:
                    other = "B" if f == "A" else "A"
                    syl[i] = [other, self._from_c(other, c)]
                    changed = True
                    break
        reps = []
        carry = None
        for f, x in syl:
            if carry is not None:
                x = self._mul(f, self._from_c(f, carry), x)
            rep, carry = self._split(f, x)
            if not self._is_one(f, rep):
                reps.append((f, rep))
        if carry is not None and not any(carry):
            carry = None
        return (tuple(reps), carry)

    def syllables(self, x):
        reps, c = x
        out = [list(r) for r in reps]
        if c is not None:
            if out:
                f = out[-1][0]
                out[-1][1] = self._mul(f, out[-1][1], self._from_c(f, c))
            else:
                out.append(["A", self._from_c("A", c)])
        return out

    def multiply(self, x, y):
        return self.normal(self.syllables(x) + self.syllables(y))

    def inverse(self, x):
        return self.normal([[f, self._inv(f, v)] for f, v in reversed(self.syllables(x))])

    def is_identity(self, x):
        return x == ((), None)

    def generator(self, name, k=1):
        if name not in self.letters:
            raise MalformedWord("unknown generator %r" % name)
        f, g = self.letters[name]
        if f == "A":
            one = self.A.generator(g, k)
        else:
            one = tuple(k if i == g else 0 for i in range(self.b_rank))
        return self.normal([[f, one]])

    def parse(self, text):
        w = self.identity()
        for name, k in parse_word(text):
            w = self.multiply(w, self.generator(name, k))
        return w

    def to_text(self, x):
        parts = []
        for f, v in self.syllables(x):
            if f == "A":
                parts.append(self.A.to_text(v))
            else:
                names = {g: n for n, (ff, g) in self.letters.items() if ff == "B"}
                parts.extend(names[i] + ("" if k == 1 else "^%d" % k) for i, k in enumerate(v) if k)
        return " ".join(p for p in parts if p != "1") or "1"

    # tree: vertices (factor, reps) standing for the coset reps . factor --------------
    def base_vertex(self):
        return ("A", ())

    def _label(self, f, reps):
        reps = tuple(reps)
        if reps and reps[-1][0] == f:
            reps = reps[:-1]
        return (f, reps)

    def vertex(self, x):
        return self._label("A", x[0])

    def act(self, h, label):
        f, reps = label
        prod = self.multiply(h, self.normal([list(r) for r in reps]))
        return self._label(f, prod[0])

    def path_from_base(self, label):
        f_end, reps = label
        verts = [("A", ())]
        cur = ()
        for f, r in reps:
            here = self._label(f, cur)
            if verts[-1] != here:
                verts.append(here)
            cur = cur + ((f, r),)
            nxt = self._label("B" if f == "A" else "A", cur)
            verts.append(nxt)
        if verts[-1] != label:
            verts.append(label)
        return verts

    def local_element(self, x, label):
        f, reps = label
        p = self.normal([list(r) for r in reps])
        y = self.multiply(self.multiply(self.inverse(p), x), p)
        syl = self.syllables(y)
        if not syl:
            return self._one(f)
        if len(syl) == 1:
            g, v = syl[0]
            if g == f:
                return v
            c = self._in_c(g, v)
            if c is not None:
                return self._from_c(f, c)
        return None

    def fixed_neighbours(self, label, y):
        f, reps = label
        other = "B" if f == "A" else "A"
        out = []
        c = self._in_c(f, y)
        if c is not None:
            out.append((self._label(other, reps), self._from_c(other, c)))
        if f == "B":
            for k in range(1, 2):
                x = tuple(k if i == 1 else 0 for i in range(self.b_rank))
                if c is not None:
                    out.append((self._label(other, reps + (("B", x),)), self._from_c(other, c)))
            return out
        if self.no_conjugate_in_c(y):
            return out
        raise UnsaturatedHull("fixed set at an A-vertex cannot be enumerated")

    def describe_vertex(self, label):
        f, reps = label
        return "%s . v_%s" % (self.to_text(self.normal([list(r) for r in reps])), f)


def bs22_amalgam():
    """BS(2,2) = <a,s | s a^2 s^-1 = a^2> *_{a^2=b, s=t^2} <b,t | [b,t]>.

    C = <a^2, s> is free abelian; coordinates (i, j) mean a^(2i) s^j = b^i t^(2j).
    """
    A = GraphModel(rank1(["a"], [("s", "a", "a", 2, 2)]))
    s_fwd = EdgeRef("s", True)

    def c_in_a(x):
        inner = [x[i] for i in range(0, len(x) - 1, 2)]
        if any(any(v) for v in inner) or x[-1][0] % 2:
            return None
        letters = [x[i] for i in range(1, len(x), 2)]
        if letters and len(set(letters)) != 1:
            return None
        j = len(letters) * (1 if not letters or letters[0] == s_fwd else -1)
        return (x[-1][0] // 2, j)

    def c_to_a(c):
        i, j = c
        return A.multiply(A.generator("s", j) if j else A.identity(), A.generator("a", 2 * i) if i else A.identity())

    def c_in_b(x):
        return None if x[1] % 2 else (x[0], x[1] // 2)

    def c_to_b(c):
        return (c[0], 2 * c[1])

    def a_rep(x):
        x = tuple(x)
        while True:
            if x[-1][0] % 2:
                return x[:-1] + ((1,),)
            if len(x) == 1:
                return ((0,),)
            x = x[:-2]

    def b_rep(x):
        return (0, x[1] % 2)

    def no_conj(y):
        return _a_exponent(A, y) % 2 == 1

    return AmalgamModel(A, 2, c_in_a, c_to_a, c_in_b, c_to_b, a_rep, b_rep, no_conj,
                        {"a": ("A", "a"), "s": ("A", "s"), "b": ("B", 0), "t": ("B", 1)})


def _a_exponent(model, x):
    return sum(x[i][0] for i in range(0, len(x), 2))


# generic tree algorithms ---------------------------------------------------------

def _model(t):
    return t if isinstance(t, (GraphModel, AmalgamModel)) else GraphModel(t)


def _dist(model, label):
    return len(model.path_from_base(label)) - 1


def geodesic(model, u, w):
    pu, pw = model.path_from_base(u), model.path_from_base(w)
    k = 0
    while k < min(len(pu), len(pw)) and pu[k] == pw[k]:
        k += 1
    return list(reversed(pu[k - 1:])) + pw[k:]


def normal_form(g, word):
    """Normal form of a word given as text or as an element."""
    m = _model(g)
    x = m.parse(word) if isinstance(word, str) else m.normal(word)
    return x


def classify_element(g, word, radius=DEFAULT_RADIUS):
    """Elliptic(fixed vertex, local element) or Hyperbolic(length, axis)."""
    m = _model(g)
    x = m.parse(word) if isinstance(word, str) else word
    p1 = m.path_from_base(m.vertex(x))
    d1 = len(p1) - 1
    d2 = _dist(m, m.vertex(m.multiply(x, x)))
    if d2 <= d1:
        mid = p1[d1 // 2]
        return Elliptic(mid, m.local_element(x, mid))
    length = d2 - d1
    return Hyperbolic(length, _axis_fragment(m, x, p1, d1, length, radius))


def _axis_points(m, x, p1, d1, length, radius):
    start = p1[(d1 - length) // 2]
    seg = geodesic(m, start, m.act(x, start))
    xinv = m.inverse(x)
    pts = set()
    edges = set()
    for direction in (x, xinv):
        cur = seg
        for _ in range(4 * radius + d1 + 4):
            inside = [v for v in cur if _dist(m, v) <= radius]
            pts.update(inside)
            for a, b in zip(cur, cur[1:]):
                if _dist(m, a) <= radius and _dist(m, b) <= radius:
                    edges.add(frozenset((a, b)))
            if not inside and _dist(m, cur[0]) > radius + d1:
                break
            cur = [m.act(direction, v) for v in cur]
    return pts, edges


def _axis_fragment(m, x, p1, d1, length, radius):
    # an axis missing the ball gives an empty, unsaturated fragment
    pts, edges = _axis_points(m, x, p1, d1, length, radius)
    return HullFragment(pts, edges, radius, bool(pts), False, m)


def axis_segment(g, word, radius=DEFAULT_RADIUS):
    """The part of the axis of a hyperbolic element inside the ball."""
    kind = classify_element(g, word, radius)
    if not isinstance(kind, Hyperbolic):
        raise ValueError("%s is elliptic" % (word,))
    if not kind.axis.vertices:
        raise RadiusTooSmall("the axis misses the ball of radius %d" % radius)
    return kind.axis


def _fixed_set(m, x, radius):
    """Fixed vertices of an elliptic element inside the ball.  Returns
    (vertices, edges, bounded) where bounded is False when the fixed set
    reaches the boundary of the ball."""
    ell = classify_element(m, x, radius)
    start, y = ell.vertex, ell.local
    if _dist(m, start) > radius:
        return set(), set(), False
    seen = {start: y}
    edges = set()
    queue = deque([start])
    bounded = True
    while queue:
        if len(seen) > MAX_FIXED_VERTICES:
            return set(seen), edges, False
        v = queue.popleft()
        for w, y2 in m.fixed_neighbours(v, seen[v]):
            if w == v:
                continue
            if _dist(m, w) > radius:
                bounded = False
                continue
            edges.add(frozenset((v, w)))
            if w not in seen:
                seen[w] = y2
                queue.append(w)
    return set(seen), edges, bounded


class HullFragment:
    """The part of a convex subtree lying in the ball of a given radius
    around the base vertex."""

    def __init__(self, vertices, edges, radius, saturated, bounded, model=None):
        self.vertices = frozenset(vertices)
        self.edges = frozenset(edges)
        self.radius = radius
        self.saturated = saturated
        self.bounded = bounded
        self.model = model

    def __len__(self):
        return len(self.vertices)

    def meets(self, other):
        return bool(self.vertices & other.vertices)

    def shares_edge(self, other):
        return bool(self.edges & other.edges)

    def describe(self):
        m = self.model
        return sorted(m.describe_vertex(v) for v in self.vertices) if m else sorted(map(str, self.vertices))

    def __repr__(self):
        return "HullFragment(%d vertices, radius=%d, saturated=%s, bounded=%s)" % (
            len(self.vertices), self.radius, self.saturated, self.bounded)


def characteristic_hull(g, S, radius=DEFAULT_RADIUS):
    """Convex hull of the fixed sets and axes of the elements of S, cut to
    the ball of the given radius."""
    m = _model(g)
    elems = [m.parse(w) if isinstance(w, str) else w for w in S]
    verts, edges = set(), set()
    saturated, bounded = True, True
    for x in elems:
        kind = classify_element(m, x, radius)
        if isinstance(kind, Elliptic):
            vs, es, b = _fixed_set(m, x, radius)
            if not vs or not b:
                saturated = False
        else:
            vs, es = set(kind.axis.vertices), set(kind.axis.edges)
            bounded = False
            if not vs:
                saturated = False
        verts |= vs
        edges |= es
    if verts:
        root = min(verts, key=lambda v: (_dist(m, v), repr(v)))
        for v in list(verts):
            path = geodesic(m, root, v)
            for a, b in zip(path, path[1:]):
                edges.add(frozenset((a, b)))
            verts.update(path)
    return HullFragment(verts, edges, radius, saturated, bounded, m)


def _exact_pair(h1, h2):
    """Intersections are exact when both are saturated and one is bounded."""
    if not (h1.saturated and h2.saturated) or not (h1.bounded or h2.bounded):
        raise UnsaturatedHull("hulls are not contained in the ball of radius %d" % h1.radius)


def _translate(word, gen_map, target):
    if gen_map is None:
        return target.parse(word) if isinstance(word, str) else word
    out = target.identity()
    for name, k in parse_word(word):
        if name not in gen_map:
            raise GeneratorMapMissing(name)
        img = target.parse(gen_map[name])
        step = img if k > 0 else target.inverse(img)
        for _ in range(abs(k)):
            out = target.multiply(out, step)
    return out


def incompat_certificate(gT, gT2, cert, radius=DEFAULT_RADIUS, gen_map=None):
    """True when the given elements certify that the two trees have no
    common refinement.

    ``cert`` holds words a, b, c (hull of {a, b} misses the characteristic
    space of c in one tree and shares an edge with it in the other) or
    a, b, c, d (hulls of {a,b}, {c,d} disjoint in one tree and hulls of
    {a,c}, {b,d} disjoint in the other).  Words are written in the letters
    of gT; ``gen_map`` sends each letter to a word of gT2.
    """
    m1, m2 = _model(gT), _model(gT2)
    letters = set()
    for w in cert.values():
        letters.update(n for n, _ in parse_word(w))
    if gen_map is not None:
        missing = sorted(letters - set(gen_map))
        if missing:
            raise GeneratorMapMissing(missing[0])
    x1 = {k: _translate(w, None, m1) for k, w in cert.items()}
    x2 = {k: _translate(w, gen_map, m2) for k, w in cert.items()}

    def hull(m, xs, keys):
        return characteristic_hull(m, [xs[k] for k in keys], radius)

    if set(cert) == {"a", "b", "c"}:
        def disjoint(m, xs):
            h1, h2 = hull(m, xs, "ab"), hull(m, xs, "c")
            _exact_pair(h1, h2)
            return not h1.meets(h2)

        def edge(m, xs):
            h1, h2 = hull(m, xs, "ab"), hull(m, xs, "c")
            _exact_pair(h1, h2)
            return h1.shares_edge(h2)

        return (disjoint(m1, x1) and edge(m2, x2)) or (disjoint(m2, x2) and edge(m1, x1))
    if set(cert) == {"a", "b", "c", "d"}:
        def apart(m, xs, p, q):
            h1, h2 = hull(m, xs, p), hull(m, xs, q)
            _exact_pair(h1, h2)
            return not h1.meets(h2)

        return ((apart(m1, x1, "ab", "cd") and apart(m2, x2, "ac", "bd"))
                or (apart(m2, x2, "ab", "cd") and apart(m1, x1, "ac", "bd")))
    raise MalformedWord("a certificate needs keys a,b,c or a,b,c,d")
