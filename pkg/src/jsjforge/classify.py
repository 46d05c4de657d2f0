"""Properties quantified over a whole reduced deformation space.

Each answer is a ``TriState``.  Proven answers carry a replayable move
trace.  Refuted answers come either from a closed atlas (every reduced tree
was visited) or from a local obstruction.  Anything else is Unknown and
reports how many trees were visited.
"""

from collections import namedtuple, deque

from .gog import EdgeRef, canonical_key, serialize
from .lattice import full, join
from . import moves as mv

__all__ = [
    "Budget", "TriState", "DeformationAtlas", "UntrackedEdge", "explore",
    "global_property", "dead_end", "PROPERTIES",
]

PROPERTIES = ("slippery", "two_slippery", "psa", "vanishing")


class UntrackedEdge(KeyError):
    pass


class Budget(namedtuple("Budget", "max_nodes max_label max_divisors")):
    __slots__ = ()

    def __new__(cls, max_nodes=10_000, max_label=10**6, max_divisors=64):
        return super().__new__(cls, max_nodes, max_label, max_divisors)

    def scaled(self, k):
        return Budget(self.max_nodes * k, self.max_label * k, self.max_divisors * k)


class TriState:
    """Proven(witness) / Refuted(evidence) / Unknown(explored)."""

    __slots__ = ("verdict", "witness", "evidence", "explored", "detail")

    def __init__(self, verdict, witness=None, evidence=None, explored=None, detail=None):
        self.verdict = verdict
        self.witness = witness
        self.evidence = evidence
        self.explored = explored
        self.detail = detail

    @classmethod
    def proven(cls, witness, detail=None):
        return cls("Proven", witness=witness, detail=detail)

    @classmethod
    def refuted(cls, evidence, detail=None):
        return cls("Refuted", evidence=evidence, detail=detail)

    @classmethod
    def unknown(cls, explored, detail=None):
        return cls("Unknown", explored=explored, detail=detail)

    def is_proven(self):
        return self.verdict == "Proven"

    def is_refuted(self):
        return self.verdict == "Refuted"

    def is_unknown(self):
        return self.verdict == "Unknown"

    def definite(self):
        return self.verdict != "Unknown"

    def to_dict(self):
        out = {"verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = [str(x) for x in self.witness]
        if self.evidence is not None:
            out["evidence"] = self.evidence
        if self.explored is not None:
            out["explored"] = self.explored
        if self.detail is not None:
            out["detail"] = self.detail
        return out

    def __repr__(self):
        if self.is_proven():
            return "Proven(%s)" % list(self.witness)
        if self.is_refuted():
            return "Refuted(%s)" % self.evidence
        return "Unknown(%d)" % self.explored


class DeformationAtlas:
    """BFS closure of a reduced graph under admissible moves.

    ``nodes`` maps canonical keys to the first graph reached with that key,
    so ``trace_to(key)`` replays exactly to ``nodes[key]``.
    """

    def __init__(self, root, marks):
        self.marks = marks
        self.root_key = canonical_key(root, marks)
        self.nodes = {self.root_key: root}
        self.order = [self.root_key]
        self.parent = {self.root_key: None}
        self.arcs = []
        self.closed = False
        self.truncated = []
        self.moves = {}

    def __len__(self):
        return len(self.nodes)

    def trace_to(self, key):
        out = []
        while self.parent[key] is not None:
            key, line = self.parent[key]
            out.append(line)
        return list(reversed(out))

    def graphs(self):
        return [(k, self.nodes[k]) for k in self.order]

    @property
    def status(self):
        return "Closed" if self.closed else "Open"

    def to_dot(self):
        idx = {k: i for i, k in enumerate(self.order)}
        lines = ["digraph atlas {"]
        for k in self.order:
            text = serialize(self.nodes[k]).strip().replace("\n", "\\n")
            lines.append('  n%d [shape=box, label="%s"];' % (idx[k], text.replace('"', '\\"')))
        for a, line, b in self.arcs:
            lines.append('  n%d -> n%d [label="%s"];' % (idx[a], idx[b], line))
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_trace(self):
        """One block per node: the move lines leading to it from the root."""
        blocks = []
        for i, k in enumerate(self.order):
            blocks.append("# node %d" % i)
            blocks.extend(self.trace_to(k))
        return "\n".join(blocks) + "\n"


def _marks(track=None, track_vertex=None):
    marks = {}
    if track is not None:
        marks[track] = "*"
    if track_vertex is not None:
        marks[("v", track_vertex)] = "*"
    return marks


def _destroys(rec, track, track_vertex):
    for d in rec.destroyed:
        if isinstance(d, EdgeRef) and d.name == track:
            return True
        if d == ("v", track_vertex):
            return True
    return False


def explore(g, budget=None, track=None, track_vertex=None):
    """Visit reduced graphs reachable by admissible moves, breadth first.

    With ``track`` (an edge name) or ``track_vertex`` the visited sequences
    must preserve it: A^-1-moves destroying it are pruned, and nodes are
    told apart by where the tracked object sits.
    """
    budget = budget or Budget()
    if not g.is_reduced():
        raise mv.NotReduced("explore needs a reduced graph")
    if track is not None and track not in g.edges:
        raise UntrackedEdge(track)
    marks = _marks(track, track_vertex)
    atlas = DeformationAtlas(g, marks)
    queue = deque([atlas.root_key])
    full_stop = False
    while queue:
        key = queue.popleft()
        h = atlas.nodes[key]
        stats = {}
        recs = mv.admissible_moves(h, budget.max_divisors, budget.max_label, stats=stats)
        if stats.get("label"):
            atlas.truncated.append("label")
        if stats.get("divisors"):
            atlas.truncated.append("divisors")
        kept = []
        for rec in recs:
            if _destroys(rec, track, track_vertex):
                continue
            kept.append(rec)
            ck = canonical_key(rec.result, marks)
            if ck not in atlas.nodes:
                if len(atlas.nodes) >= budget.max_nodes:
                    full_stop = True
                    continue
                atlas.nodes[ck] = rec.result
                atlas.order.append(ck)
                atlas.parent[ck] = (key, rec.trace())
                queue.append(ck)
            atlas.arcs.append((key, rec.trace(), ck))
        atlas.moves[key] = recs
    if full_stop:
        atlas.truncated.append("nodes")
    atlas.closed = not atlas.truncated
    return atlas


# local conditions -------------------------------------------------------------

def _local(h, name, prop, recs):
    """A witness move line at graph h, or "" when the condition holds with
    no further move, or None."""
    if prop == "psa":
        for rev in (False, True):
            if mv.local_kind(h, EdgeRef(name, rev)).pre_ascending:
                return ""
        return None
    if prop == "slippery":
        for rec in recs:
            if rec.kind == "slide" and rec.args[1].name == name:
                return rec.trace()
        return None
    if prop == "two_slippery":
        for rev in (False, True):
            sliders = [rec for rec in recs if rec.kind == "slide" and rec.args[1] == EdgeRef(name, rev)]
            if len({rec.args[0] for rec in sliders}) >= 2:
                return sliders[0].trace()
        return None
    if prop == "vanishing":
        for rec in recs:
            if rec.kind == "ainv" and any(isinstance(d, EdgeRef) and d.name == name for d in rec.destroyed):
                return rec.trace()
        return None
    raise ValueError("unknown property %r" % prop)


def _proven(trace, last):
    return TriState.proven(trace + ([last] if last else []))


def global_property(g, e, prop, budget=None, atlas=None):
    """Decide an orbit property of edge e over the deformation space of g."""
    budget = budget or Budget()
    name = e.name if isinstance(e, EdgeRef) else e
    if name not in g.edges:
        raise UntrackedEdge(name)
    if not g.is_reduced():
        raise mv.NotReduced("global properties need a reduced graph")
    recs = mv.admissible_moves(g, budget.max_divisors, budget.max_label)
    hit = _local(g, name, prop, recs)
    if hit is not None:
        return _proven([], hit)
    atlas = atlas or explore(g, budget, track=name)
    for key in atlas.order:
        h = atlas.nodes[key]
        hit = _local(h, name, prop, atlas.moves.get(key) or mv.admissible_moves(
            h, budget.max_divisors, budget.max_label))
        if hit is not None:
            return _proven(atlas.trace_to(key), hit)
    if atlas.closed:
        return TriState.refuted("ClosedAtlas", detail={"nodes": len(atlas)})
    return TriState.unknown(len(atlas), detail={"truncated": sorted(set(atlas.truncated))})


# dead ends ------------------------------------------------------------------------

def _wall_bullets(h, v, f):
    """The purely local dead-end conditions for wall f at v in graph h."""
    gv = full(h.vertices[v])
    gf = h.group_at_origin(f)
    if gf == gv:
        return False
    others = [x for x in h.ends_at(v) if x != f]
    for x in others:
        if join(h.group_at_origin(x), gf) != gv:
            return False
    for gp in others:
        ggp = h.group_at_origin(gp)
        if ggp == gv:
            continue
        if all(ggp.contains_lattice(h.group_at_origin(x)) for x in others if x != gp):
            return True
    return False


def dead_end(g, v, budget=None, lookup=None):
    """Whether v is a dead end in every reduced tree of the deformation space.

    A Proven answer lists the walls found at v in the root graph as its
    witness and the walls at every atlas node in ``detail``.  ``lookup``,
    when given, answers ``(edge name, property)`` queries in place of fresh
    global_property calls.
    """
    budget = budget or Budget()
    if not g.is_reduced():
        raise mv.NotReduced("dead_end needs a reduced graph")
    atlas = explore(g, budget, track_vertex=v)
    for key in atlas.order:
        for rec in atlas.moves.get(key, ()):
            if rec.kind == "ainv" and ("v", v) in rec.destroyed:
                return TriState.refuted("LocalObstruction",
                                        detail={"vanishing": atlas.trace_to(key) + [rec.trace()]})
    cache = {}
    lookup = lookup or (lambda name, prop: global_property(g, name, prop, budget))

    def slippery_or_psad(name):
        if name not in cache:
            a = lookup(name, "slippery")
            if not a.is_proven():
                b = lookup(name, "psa")
                if b.is_proven() or a.is_refuted():
                    a = b
            cache[name] = a
        return cache[name]

    per_node = []
    unknown = False
    for key in atlas.order:
        h = atlas.nodes[key]
        walls, maybe = [], False
        for f in h.ends_at(v):
            if not _wall_bullets(h, v, f):
                continue
            st = slippery_or_psad(f.name)
            if st.is_proven():
                walls.append(f)
            elif st.is_unknown():
                maybe = True
        per_node.append((atlas.trace_to(key), walls))
        if not walls:
            if maybe:
                unknown = True
            else:
                return TriState.refuted("LocalObstruction",
                                        detail={"no_wall_at": atlas.trace_to(key)})
    if unknown or not atlas.closed:
        return TriState.unknown(len(atlas), detail={"walls": _walls_text(per_node)})
    return TriState.proven(per_node[0][1], detail={"walls": _walls_text(per_node)})


def _walls_text(per_node):
    return [{"trace": t, "walls": [repr(w) for w in ws]} for t, ws in per_node]
