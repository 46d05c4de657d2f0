"""Command line front end.

Exit status: 0 when every answer is definite, 2 when some answer is
Unknown or an atlas is Open, 1 on errors.
"""

import argparse
import json
import sys

from . import __version__
from . import bass_serre as bs
from .classify import PROPERTIES, Budget, dead_end, explore, global_property
from .gog import ParseError, ValidationError, parse_graph, serialize
from .jsj import bearing_status, build_t_ab, build_t_comp, compatible
from .moves import MoveError

COMMANDS = ("classify", "tcomp", "tab", "explore", "compat", "normalform")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("%r is not an integer" % text)
    if n <= 0:
        raise argparse.ArgumentTypeError("budgets must be positive")
    return n


def build_parser():
    p = _Parser(prog="jsjforge", description="Deformation spaces and compatibility JSJ trees "
                                             "of generalized Baumslag-Solitar groups.")
    p.add_argument("--version", action="version", version="jsjforge " + __version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", help="graph file")
    p.add_argument("extra", nargs="*", help="compat: second graph file; normalform: words")
    p.add_argument("--budget-nodes", "--max-nodes", dest="nodes", type=_positive, default=10_000)
    p.add_argument("--budget-label", dest="label", type=_positive, default=10**6)
    p.add_argument("--budget-divisors", dest="divisors", type=_positive, default=64)
    p.add_argument("--radius", type=_positive, default=bs.DEFAULT_RADIUS)
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.add_argument("--force-blowup", action="store_true",
                   help="blow up vertices whose dead-end status is Unknown")
    p.add_argument("--cert", help="compat: certificate as a=WORD;b=WORD;c=WORD[;d=WORD]")
    p.add_argument("--map", dest="gen_map", help="compat: letter images as x=WORD;...")
    p.add_argument("--amalgam", action="store_true",
                   help="compat: compare against the built-in BS(2,2) amalgam tree")
    return p


def _pairs(text):
    out = {}
    for item in text.split(";"):
        if not item.strip():
            continue
        k, sep, v = item.partition("=")
        if not sep:
            raise UsageError("expected key=word in %r" % item)
        out[k.strip()] = v.strip()
    return out


def _read(path):
    with open(path) as fh:
        return parse_graph(fh.read())


def _emit(out, obj, fmt):
    if fmt == "json":
        out.write(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")
    else:
        out.write(obj if obj.endswith("\n") else obj + "\n")


# commands ---------------------------------------------------------------------------

def _cmd_classify(g, args, budget, out):
    rows, definite = {}, True
    for name in sorted(g.edges):
        row = {}
        for prop in PROPERTIES:
            row[prop] = global_property(g, name, prop, budget)
        row["bearing"] = bearing_status(g, name, budget)
        rows[name] = row
    for v in sorted(g.vertices):
        rows["vertex " + v] = {"dead_end": dead_end(g, v, budget)}
    definite = all(st.definite() for row in rows.values() for st in row.values())
    if args.format == "json":
        _emit(out, {k: {p: st.to_dict() for p, st in row.items()} for k, row in rows.items()}, "json")
    else:
        lines = []
        for k in sorted(rows):
            lines.append("%s: %s" % (k, ", ".join("%s=%r" % (p, st) for p, st in rows[k].items())))
        _emit(out, "\n".join(lines), "text")
    return 0 if definite else 2


def _cmd_report(g, args, budget, out, builder):
    r = builder(g, budget, force_blowup=args.force_blowup)
    if args.format == "json":
        out.write(r.to_json())
    elif args.format == "dot":
        out.write(r.to_dot())
    else:
        out.write(r.to_text())
    return 0 if r.exact else 2


def _cmd_explore(g, args, budget, out):
    atlas = explore(g, budget)
    if args.format == "dot":
        out.write(atlas.to_dot())
    elif args.format == "json":
        nodes = [{"graph": serialize(atlas.nodes[k]).splitlines(), "trace": atlas.trace_to(k)}
                 for k in atlas.order]
        _emit(out, {"status": atlas.status, "nodes": nodes,
                    "truncated": sorted(set(atlas.truncated))}, "json")
    else:
        lines = ["atlas: %d nodes, %s" % (len(atlas), atlas.status)]
        if atlas.truncated:
            lines.append("truncated by: " + ", ".join(sorted(set(atlas.truncated))))
        for i, k in enumerate(atlas.order):
            trace = atlas.trace_to(k)
            lines.append("node %d: %s" % (i, "; ".join(trace) if trace else "(root)"))
            lines.extend("  " + x for x in serialize(atlas.nodes[k]).splitlines())
        _emit(out, "\n".join(lines), "text")
    return 0 if atlas.closed else 2


def _cmd_compat(g, args, budget, out):
    if args.amalgam:
        if args.extra:
            raise UsageError("--amalgam replaces the second graph file")
        other = bs.bs22_amalgam()
    elif len(args.extra) == 1:
        other = _read(args.extra[0])
    else:
        raise UsageError("compat needs a second graph file or --amalgam")
    cert = _pairs(args.cert) if args.cert else None
    gen_map = _pairs(args.gen_map) if args.gen_map else None
    st = compatible(g, other, budget, gen_map=gen_map, cert=cert, radius=args.radius)
    if args.format == "json":
        _emit(out, st.to_dict(), "json")
    else:
        _emit(out, "compatible: %r" % (st,), "text")
    return 0 if st.definite() else 2


def _cmd_normalform(g, args, budget, out):
    if not args.extra:
        raise UsageError("normalform needs at least one word")
    m = bs.GraphModel(g)
    rows = []
    for word in args.extra:
        x = m.parse(word)
        kind = bs.classify_element(m, x, args.radius)
        if isinstance(kind, bs.Hyperbolic):
            desc = "hyperbolic, translation length %d" % kind.translation_length
        else:
            desc = "elliptic, fixes %s" % m.describe_vertex(kind.vertex)
        rows.append({"word": word, "normal_form": m.to_text(x), "type": desc})
    if args.format == "json":
        _emit(out, rows, "json")
    else:
        _emit(out, "\n".join("%s -> %s (%s)" % (r["word"], r["normal_form"], r["type"]) for r in rows),
              "text")
    return 0


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        budget = Budget(args.nodes, args.label, args.divisors)
        g = _read(args.input)
        if args.format == "dot" and args.command not in ("tcomp", "tab", "explore"):
            raise UsageError("--format dot applies to tcomp, tab and explore")
        if args.command == "classify":
            return _cmd_classify(g, args, budget, out)
        if args.command == "tcomp":
            return _cmd_report(g, args, budget, out, build_t_comp)
        if args.command == "tab":
            return _cmd_report(g, args, budget, out, build_t_ab)
        if args.command == "explore":
            return _cmd_explore(g, args, budget, out)
        if args.command == "compat":
            return _cmd_compat(g, args, budget, out)
        return _cmd_normalform(g, args, budget, out)
    except UsageError as exc:
        err.write("jsjforge: usage: %s\n" % exc)
        return 1
    except (OSError, ParseError, ValidationError, MoveError, ValueError, KeyError) as exc:
        err.write("jsjforge: error: %s\n" % exc)
        return 1
