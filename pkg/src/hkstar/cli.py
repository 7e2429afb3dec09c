"""Command-line entry point.

Data goes to stdout (counts as integers, sets as sorted comma-separated
ids, traces and verdicts as JSON lines); timings and notes go to stderr.
Exit status: 0 success, 1 a verification failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Sequence

from . import counting, forest, injections, verify
from .errors import InvariantViolation, PreconditionError
from .injections import cas_label_key, format_trace
from .trees import TreeFormatError, build_perfect, enumerate_unlabeled_trees, leftmost_path, load_forest, load_tree, serialize_tree

DEFAULT_BUDGET = 20_000_000


class UsageError(Exception):
    pass


def _ids(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad id list {text!r}; expected comma-separated integers") from None


def _graph(args):
    if getattr(args, "forest", None):
        return load_forest(args.forest)
    if getattr(args, "tree", None):
        return load_tree(args.tree)
    raise UsageError("one of --tree or --forest is required")


def _fmt_set(xs) -> str:
    return ",".join(str(x) for x in sorted(xs))


def _print(line: str = "") -> None:
    sys.stdout.write(line + "\n")
    sys.stdout.flush()


def cmd_count(args) -> int:
    g = _graph(args)
    _print(str(counting.count_star(g, args.vertex, args.k)))
    return 0


def cmd_profile(args) -> int:
    g = _graph(args)
    if args.vertex is None:
        prof = counting.independence_profile(g)
    else:
        if not 0 <= args.vertex < g.n:
            raise UsageError(f"vertex {args.vertex} out of range")
        prof = counting.independence_profile(g, forced=args.vertex)
    _print(",".join(str(c) for c in prof))
    return 0


def cmd_classes(args) -> int:
    g = _graph(args)
    for x in (args.v, args.leaf):
        if not 0 <= x < g.n:
            raise UsageError(f"vertex {x} out of range")
    sizes = counting.count_classes(g, args.v, args.leaf, args.k)
    _print(f"a={sizes.a} b={sizes.b} c={sizes.c}")
    return 0


def cmd_map(args) -> int:
    t = load_tree(args.tree)
    trace = [] if args.trace else None
    out = injections.map_star(t, args.v, _ids(args.set), trace=trace)
    _print(_fmt_set(out))
    if trace is not None:
        sys.stdout.write(format_trace(trace))
    return 0


def cmd_cas(args) -> int:
    td, tu = load_tree(args.td), load_tree(args.tu)
    labels = [x.strip() for x in args.set.split(",") if x.strip()]
    trace = [] if args.trace else None
    out = injections.cas(labels, td, tu, trace=trace)
    _print(",".join(sorted(out, key=cas_label_key)))
    if trace is not None:
        sys.stdout.write(format_trace(trace))
    return 0


def cmd_best_leaf(args) -> int:
    F = load_forest(args.forest)
    sel = forest.best_leaf(F)
    _print(json.dumps({"tree_index": sel.tree_index, "leaf": sel.leaf, "rule": sel.rule}))
    return 0


def cmd_enum_trees(args) -> int:
    trees = list(enumerate_unlabeled_trees(args.n, cap=args.cap))
    sys.stdout.write("\n".join(serialize_tree(t) for t in trees))
    sys.stdout.flush()
    print(f"{len(trees)} trees with {args.n} vertices", file=sys.stderr)
    return 0


# --- verify ---------------------------------------------------------------------

def _emit_verdict(v: verify.Verdict) -> bool:
    rec = v.to_record()
    rec.pop("elapsed")  # keep stdout reproducible
    _print(json.dumps(rec, sort_keys=False))
    return v.passed


def _verify_injection(args) -> int:
    ok = True
    n_max = args.n_max or 40
    for r, h in verify.perfect_pool(n_max):
        t = build_perfect(r, h)
        path = leftmost_path(t, t.root)
        for v in path[:-1]:
            size = sum(counting._constrained_profile(t, (v,), (path[-1],)))
            if size > args.budget:
                print(f"skipped perfect({r},{h}) v={v}: {size} sets exceeds --budget {args.budget}", file=sys.stderr)
                continue
            ok &= _emit_verdict(verify.check_injection_exhaustive(t, v, args.k))
    return 0 if ok else 1


def _verify_main(args) -> int:
    ok = True
    for r, h in verify.perfect_pool(args.n_max or 40):
        ok &= _emit_verdict(verify.check_theorem_main(build_perfect(r, h)))
    return 0 if ok else 1


def _verify_forest(args) -> int:
    ok = True
    n_max = args.n_max or 60
    for F in verify.forest_pool(n_max):
        ok &= _emit_verdict(verify.check_forest_theorem(F))
    if args.lemmas:
        for kind, F, l1, l2 in verify.lemma_instances(n_max):
            check = verify.check_arity_lemma if kind == "arity" else verify.check_level_lemma
            ok &= _emit_verdict(check(F, l1, l2))
    return 0 if ok else 1


def _verify_hk(args) -> int:
    n_max = args.n_max or 10
    if args.family == "all":
        trees = verify.unlabeled_trees_up_to(n_max, cap=max(n_max, 10))
    elif args.family == "spider":
        trees = verify.all_spiders(n_max)
    else:
        trees = verify.all_caterpillars(n_max)
    reports = verify.hk_sweep(trees, args.k_max, workers=args.workers)
    failures = 0
    for rep in reports:
        _print(json.dumps(rep.to_record()))
        failures += not rep.is_k_hk
    print(f"{len(trees)} trees, {len(reports)} reports, {failures} not k-HK", file=sys.stderr)
    return 0 if failures == 0 else 1


def cmd_verify(args) -> int:
    start = time.perf_counter()
    handler = {"injection": _verify_injection, "main": _verify_main, "forest": _verify_forest, "hk": _verify_hk}
    status = handler[args.what](args)
    print(f"verify {args.what}: {'pass' if status == 0 else 'FAIL'} in {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return status


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hkstar", description="Stars of independent sets in trees and forests.")
    sub = p.add_subparsers(dest="verb", required=True)

    def graph_opts(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--tree", help="tree file or perfect:<r>:<h>")
        g.add_argument("--forest", help="forest file or perfect:<r>:<h>+perfect:<r>:<h>")

    sp = sub.add_parser("count", help="star size for one vertex and size")
    graph_opts(sp)
    sp.add_argument("--vertex", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("profile", help="independence profile, optionally of a star")
    graph_opts(sp)
    sp.add_argument("--vertex", type=int)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("classes", help="sizes of the three classes for a vertex pair")
    graph_opts(sp)
    sp.add_argument("--v", type=int, required=True)
    sp.add_argument("--leaf", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_classes)

    sp = sub.add_parser("map", help="apply the star injection to one set")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--v", type=int, required=True)
    sp.add_argument("--set", required=True)
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("cas", help="conditional alternating swap between two perfect trees")
    sp.add_argument("--td", required=True)
    sp.add_argument("--tu", required=True)
    sp.add_argument("--set", required=True, help="labels such as u0,d1")
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_cas)

    sp = sub.add_parser("best-leaf", help="leaf with a maximum star in a forest of perfect trees")
    sp.add_argument("--forest", required=True)
    sp.set_defaults(func=cmd_best_leaf)

    sp = sub.add_parser("verify", help="exhaustive verification sweeps")
    sp.add_argument("what", choices=["injection", "main", "forest", "hk"])
    sp.add_argument("--n-max", type=int)
    sp.add_argument("--k-max", type=int)
    sp.add_argument("--k", type=int, help="injection: restrict to one set size")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="injection: largest domain to enumerate")
    sp.add_argument("--lemmas", action="store_true", help="forest: also run the exhaustive lemma checks")
    sp.add_argument("--family", choices=["all", "spider", "caterpillar"], default="all", help="hk: tree family")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("enum-trees", help="one tree per isomorphism class")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--cap", type=int, default=10)
    sp.set_defaults(func=cmd_enum_trees)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, PreconditionError, TreeFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
