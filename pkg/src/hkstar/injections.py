"""Injections from stars at inner vertices to stars at the leftmost leaf.

For a perfect tree ``t``, a vertex ``v`` on the root-to-leftmost-leaf path
and the leftmost leaf ``l``, the maps below send every independent set that
contains ``v`` but not ``l`` to one that contains ``l`` but not ``v``,
without changing its size.  Which map applies depends on the parity of the
distance between ``v`` and ``l``; the even case repeatedly calls the
conditional alternating swap (:func:`cas`) on pairs of side subtrees.

Every routine takes ``monitor`` (re-check the loop invariants at each
iteration boundary, raising :class:`InvariantViolation` on failure) and
``trace`` (a list that receives one :class:`TraceEvent` per step).

These implementations work on Python sets and favour readability; the
bit-mask kernels in :mod:`hkstar.kernels` run the same procedures for bulk
verification.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import chain
from typing import Iterable, Union

from .errors import InvariantViolation, PreconditionError
from .trees import Forest, RootedTree, leftmost_path

Graph = Union[RootedTree, Forest]

__all__ = [
    "TraceEvent",
    "SwapState",
    "cas",
    "run_cas",
    "phi_even",
    "phi_odd",
    "map_star",
    "canonical_vertex",
    "format_trace",
    "replay_trace",
    "cas_label_key",
]

ACTIONS = ("swap", "skip", "terminate", "primary-shift", "cas-call", "secondary-shift")


@dataclass
class TraceEvent:
    iteration: int
    s: object
    t: object
    action: str
    enqueued_s: list = field(default_factory=list)
    enqueued_t: list = field(default_factory=list)
    set_after: list = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "iteration": self.iteration,
            "s": self.s,
            "t": self.t,
            "action": self.action,
            "enqueued_s": list(self.enqueued_s),
            "enqueued_t": list(self.enqueued_t),
            "set_after": list(self.set_after),
        }


def format_trace(events: Iterable[TraceEvent]) -> str:
    """Newline-delimited JSON, one record per event."""
    return "".join(json.dumps(e.to_record()) + "\n" for e in events)


def replay_trace(start: Iterable, events: Iterable[TraceEvent]) -> set:
    """Re-apply the membership changes recorded in a trace."""
    current = set(start)
    for e in events:
        if e.action in ("swap", "primary-shift", "secondary-shift"):
            current.discard(e.s)
            current.add(e.t)
    return current


@dataclass
class SwapState:
    """Working state of a two-queue swap procedure."""

    current: set
    queue_s: deque
    queue_t: deque
    visited: set
    iteration: int = 1
    modified: set = field(default_factory=set)


def _require(ok: bool, condition: str, message: str) -> None:
    if not ok:
        raise InvariantViolation(condition, message)


def _emit(trace, iteration, s, t, action, current, enq_s=(), enq_t=()):
    if trace is not None:
        trace.append(TraceEvent(iteration, s, t, action, list(enq_s), list(enq_t), sorted(current)))


def _levels_below(g: Graph, x: int) -> int:
    levels = 1
    while g.children[x]:
        x = g.children[x][0]
        levels += 1
    return levels


def _edges_within(g: Graph, members: set) -> list[tuple[int, int]]:
    return [(g.parents[x], x) for x in members if g.parents[x] >= 0 and g.parents[x] in members]


# --- conditional alternating swap ------------------------------------------

def _check_cas(g: Graph, st: SwapState, d: int, u: int, d_side: set, u_side: set, size0: int) -> None:
    qs, qt, cur, vis = st.queue_s, st.queue_t, st.current, st.visited
    _require(len(qs) == len(qt), "A1", f"queue sizes differ: {len(qs)} vs {len(qt)}")
    _require(len(cur) == size0, "A1", f"set size changed from {size0} to {len(cur)}")
    for side, root in ((d_side, d), (u_side, u)):
        for x in vis & side:
            _require(x == root or g.parents[x] in vis, "A2", f"visited vertices below {root} do not form a subtree at {x}")
    for x in chain(qs, qt):
        _require(not any(c in vis for c in g.children[x]), "A2", f"queued vertex {x} is not a leaf of the visited region")
        _require(x not in st.modified, "A2", f"queued vertex {x} was already modified")
    in_qs = set(qs)
    for x in cur:
        if x != d and x != u and g.parents[x] in cur:
            _require(x in in_qs, "A3", f"edge {g.parents[x]}-{x} with {x} not waiting in the source queue")
    for x in qt:
        _require(x not in cur, "A4", f"target-queue vertex {x} is in the set")
        if x != d and x != u:
            _require(g.parents[x] not in cur, "A4", f"parent of target-queue vertex {x} is in the set")
    for x in qs:
        if x in d_side:
            _require((g.depth[x] - g.depth[d]) % 2 == 1, "A5", f"source vertex {x} at even distance from {d}")
    for x in qt:
        if x in d_side:
            _require((g.depth[x] - g.depth[d]) % 2 == 0, "A5", f"target vertex {x} at odd distance from {d}")
    if qs:
        s, t = qs[0], qt[0]
        _require((s in d_side) != (t in d_side), "A6", f"queue heads {s}, {t} lie in the same tree")
        ds = g.depth[s] - g.depth[d if s in d_side else u]
        dt = g.depth[t] - g.depth[d if t in d_side else u]
        _require(ds == dt, "A6", f"queue heads {s}, {t} at different depths ({ds} vs {dt})")


def run_cas(g: Graph, current: Iterable[int], d: int, u: int, *, monitor: bool = True, trace: list | None = None,
            outer_iteration: int | None = None) -> set[int]:
    """Conditional alternating swap inside a host tree or forest.

    ``d`` and ``u`` root the two disjoint perfect subtrees; ``current`` must
    lie inside them, contain ``u`` and avoid ``d``.  Preconditions on the
    subtree shapes are the caller's job (see :func:`cas`).

    With ``outer_iteration`` set the run is a sub-step of another map: its
    events carry that iteration number and no ``terminate`` event is emitted.
    """
    d_side = set(g.subtree(d))
    u_side = set(g.subtree(u))
    st = SwapState(set(current), deque([u]), deque([d]), {u, d})
    size0 = len(st.current)

    def it():
        return st.iteration if outer_iteration is None else outer_iteration

    while True:
        if monitor:
            _check_cas(g, st, d, u, d_side, u_side, size0)
        if not st.queue_s:
            if outer_iteration is None:
                _emit(trace, it(), None, None, "terminate", st.current)
            return st.current
        s = st.queue_s.popleft()
        t = st.queue_t.popleft()
        if s not in st.current:
            _emit(trace, it(), s, t, "skip", st.current)
            st.iteration += 1
            continue
        st.current.discard(s)
        st.current.add(t)
        st.modified.update((s, t))
        enq_s: list[int] = []
        enq_t: list[int] = []
        # Expand unless t is a leaf of T_d; s in T_d is never a leaf.
        if s in d_side or (t in d_side and g.children[t]):
            cs, ct = g.children[s], g.children[t]
            if monitor:
                _require(bool(cs) and len(cs) == len(ct), "A6", f"swap pair {s}, {t} cannot both expand")
            enq_t.extend(cs)
            enq_s.extend(ct)
        if monitor:
            for x in chain(enq_s, enq_t):
                _require(x not in st.visited, "A2", f"vertex {x} enqueued twice")
        st.queue_s.extend(enq_s)
        st.queue_t.extend(enq_t)
        st.visited.update(enq_s)
        st.visited.update(enq_t)
        _emit(trace, it(), s, t, "swap", st.current, enq_s, enq_t)
        st.iteration += 1


def cas_label_key(label: str) -> tuple[int, str]:
    """Sort key for ``d<i>`` / ``u<i>`` labels: by index, then tree."""
    return int(label[1:]), label[0]


def _parse_cas_label(label, n_d: int, n_u: int) -> int:
    if isinstance(label, tuple):
        tag, idx = label
    else:
        label = str(label).strip()
        tag, idx = label[:1], label[1:]
    try:
        idx = int(idx)
    except ValueError:
        raise PreconditionError("labels", f"bad vertex label {label!r}; expected d<i> or u<i>") from None
    if tag == "d" and 0 <= idx < n_d:
        return idx
    if tag == "u" and 0 <= idx < n_u:
        return n_d + idx
    raise PreconditionError("labels", f"vertex label {label!r} out of range")


def cas(I: Iterable, td: RootedTree, tu: RootedTree, *, monitor: bool = True, trace: list | None = None) -> frozenset[str]:
    """Conditional alternating swap between two separate perfect trees.

    Vertices are labelled ``"d<i>"`` for ``td`` and ``"u<i>"`` for ``tu``
    (tuples ``("d", i)`` are accepted too).  ``I`` must be an independent set
    containing the root of ``tu`` and not the root of ``td``; the result has
    the same size, contains the root of ``td`` and not the root of ``tu``.

    >>> from hkstar.trees import build_perfect
    >>> sorted(cas({"u0"}, build_perfect(2, 3), build_perfect(2, 4)))
    ['d0']
    """
    if td.shape is None or tu.shape is None:
        raise PreconditionError("perfect", "both trees must be perfect")
    if td.shape.h % 2 == 0:
        raise PreconditionError("odd-levels", f"T_d must have an odd number of levels, got {td.shape.h}")
    if tu.shape.h <= td.shape.h:
        raise PreconditionError("taller", f"T_u needs more levels than T_d ({tu.shape.h} <= {td.shape.h})")
    if td.shape.h > 1 and td.shape.r != tu.shape.r:
        raise PreconditionError("arity", f"arities differ: {td.shape.r} vs {tu.shape.r}")
    host = Forest((td, tu))
    ids = {_parse_cas_label(x, td.n, tu.n) for x in I}
    d, u = host.roots
    if _edges_within(host, ids):
        raise PreconditionError("independent", "input set is not independent")
    if u not in ids:
        raise PreconditionError("u-in", f"input must contain u{tu.root}")
    if d in ids:
        raise PreconditionError("d-out", f"input must not contain d{td.root}")

    def label(x):
        return f"d{x}" if x < td.n else f"u{x - td.n}"

    raw: list[TraceEvent] | None = [] if trace is not None else None
    out = run_cas(host, ids, d, u, monitor=monitor, trace=raw)
    if trace is not None:
        for e in raw:
            trace.append(TraceEvent(
                e.iteration,
                None if e.s is None else label(e.s),
                None if e.t is None else label(e.t),
                e.action,
                [label(x) for x in e.enqueued_s],
                [label(x) for x in e.enqueued_t],
                sorted((label(x) for x in e.set_after), key=cas_label_key),
            ))
    return frozenset(label(x) for x in out)


# --- shared input checks ----------------------------------------------------

def canonical_vertex(t: RootedTree, v: int) -> int:
    """The vertex on the leftmost root-to-leaf path at the depth of ``v``.

    In a perfect tree, star sizes depend only on depth, so this is the
    representative the maps are defined for.
    """
    x = t.root
    for _ in range(t.depth[v]):
        x = t.children[x][0]
    return x


def _domain_check(t: RootedTree, v: int, I: Iterable[int]) -> tuple[list[int], int, set[int]]:
    if t.shape is None:
        raise PreconditionError("perfect", "tree is not perfect")
    try:
        path = leftmost_path(t, v)
    except ValueError as exc:
        raise PreconditionError("leftmost-path", str(exc)) from None
    leaf = path[-1]
    if v == leaf:
        raise PreconditionError("distinct", "v is the leftmost leaf; the class A is undefined")
    members = set(I)
    for x in members:
        if not 0 <= x < t.n:
            raise PreconditionError("range", f"vertex {x} out of range")
    if _edges_within(t, members):
        raise PreconditionError("independent", "input set is not independent")
    if v not in members or leaf in members:
        raise PreconditionError("class-A", f"input must contain v={v} and not the leaf {leaf}")
    return path, leaf, members


def _check_output(t: RootedTree, v: int, leaf: int, size: int, out: set[int]) -> None:
    _require(len(out) == size, "size", f"output size {len(out)} differs from input size {size}")
    _require(not _edges_within(t, out), "independent", f"output has edges {_edges_within(t, out)}")
    _require(leaf in out and v not in out, "class-B", "output must contain the leaf and not v")


# --- even distance ----------------------------------------------------------

def _check_even(t, cur, d, u, i, hist, touched, allowed, v):
    ch = t.children
    if i > 1:
        pd, pu = hist[-1]
        _require(d == t.parents[t.parents[pd]] and u == ch[ch[pu][0]][0], "even:1", f"pointers moved wrongly at iteration {i}")
        _require(t.distance(u, d) == t.distance(pu, pd) - 4, "even:1", "u-d distance did not shrink by 4")
    _require(t.is_ancestor(u, d), "even:1", f"d={d} is not u={u} or below it")
    _require(u not in cur and t.parents[u] not in cur, "even:2", f"u={u} or its parent is in the set")
    for x, count in touched.items():
        _require(count <= 1, "even:3", f"vertex {x} modified {count} times")
        _require(x in allowed, "even:3", f"vertex {x} modified outside the permitted region")
    edges = _edges_within(t, cur)
    if d in cur:
        _require(all(e == (d, ch[d][0]) for e in edges), "even:4", f"unexpected edges {edges}")
    else:
        _require(not edges, "even:4", f"set is not independent: {edges}")


def phi_even(t: RootedTree, v: int, I: Iterable[int], *, monitor: bool = True, trace: list | None = None) -> frozenset[int]:
    """Injection for an even distance ``d(v, l) >= 2``.

    Walks two pointers toward each other along the path from ``v`` to the
    leftmost leaf: ``d`` climbs two levels and ``u`` descends two levels per
    round.  Each round shifts ``d`` to ``u``, repairs the side subtrees with
    :func:`run_cas`, then shifts the first child of ``u`` to the parent of
    ``d`` if it is still in conflict.
    """
    path, leaf, members = _domain_check(t, v, I)
    if (len(path) - 1) % 2:
        raise PreconditionError("parity", f"d(v, l) = {len(path) - 1} is odd")
    ch, par = t.children, t.parents
    size = len(members)
    cur = set(members)
    cur.discard(v)
    cur.add(leaf)
    _emit(trace, 0, v, leaf, "swap", cur)
    d, u = par[leaf], ch[v][0]
    i = 1
    hist: list[tuple[int, int]] = []
    touched = Counter({v: 1, leaf: 1})
    allowed = {v, leaf}

    def change(before, after):
        for x in before ^ after:
            touched[x] += 1

    while True:
        if monitor:
            _check_even(t, cur, d, u, i, hist, touched, allowed, v)
        if d not in cur:
            _emit(trace, i, None, None, "terminate", cur)
            break
        if monitor:
            _require(d != u, "even:2", "d = u while d is in the set")
            for cd in ch[d][1:]:
                _require(cd not in cur and cd not in touched, "even:3", f"sibling {cd} of the path is occupied or modified")
        allowed.update((d, u, par[d], ch[u][0]))
        for m in range(1, len(ch[u])):
            allowed.update(t.subtree(ch[u][m]))
            allowed.update(t.subtree(ch[d][m]))
        cur.discard(d)
        cur.add(u)
        touched[d] += 1
        touched[u] += 1
        _emit(trace, i, d, u, "primary-shift", cur)
        for m in range(1, len(ch[u])):
            cu, cd = ch[u][m], ch[d][m]
            if cu not in cur:
                continue
            levels_d, levels_u = _levels_below(t, cd), _levels_below(t, cu)
            _require(levels_d % 2 == 1 and levels_u > levels_d, "cas-pre",
                     f"sub-call trees at {cd} ({levels_d} levels) and {cu} ({levels_u} levels) violate the CAS shape rules")
            region = set(t.subtree(cd)) | set(t.subtree(cu))
            part = cur & region
            _require(cd not in part, "cas-pre", f"{cd} already in the set")
            _emit(trace, i, cu, cd, "cas-call", cur)
            sub = [] if trace is not None else None
            swapped = run_cas(t, part, cd, cu, monitor=monitor, trace=sub, outer_iteration=i)
            change(part, swapped)
            cur = (cur - part) | swapped
            if trace is not None:
                for e in sub:
                    e.set_after = sorted((cur - region) | set(e.set_after))
                trace.extend(sub)
        c1u = ch[u][0]
        if c1u not in cur:
            _emit(trace, i, None, None, "terminate", cur)
            break
        pd = par[d]
        if monitor:
            _require(c1u != pd, "even:1", "first child of u meets the parent of d")
        cur.discard(c1u)
        cur.add(pd)
        touched[c1u] += 1
        touched[pd] += 1
        _emit(trace, i, c1u, pd, "secondary-shift", cur)
        hist.append((d, u))
        d, u = par[pd], ch[c1u][0]
        i += 1
    if monitor:
        _check_output(t, v, leaf, size, cur)
    return frozenset(cur)


# --- odd distance -----------------------------------------------------------

def _check_odd(t, st, size0, L, V, on_path, leaf, v, degenerate):
    qs, qt, cur = st.queue_s, st.queue_t, st.current
    _require(len(qs) == len(qt), "odd:1", f"queue sizes differ: {len(qs)} vs {len(qt)}")
    _require(len(cur) == size0, "odd:1", f"set size changed from {size0} to {len(cur)}")
    overlap = L & V
    _require(not overlap or (degenerate and overlap == {v}), "odd:2", f"L and V overlap in {sorted(overlap)}")
    _require(L | V == st.visited, "odd:2", "L and V do not cover the visited vertices")
    for side in (L, V):
        inner = sum(1 for x in side if t.parents[x] in side)
        _require(inner == len(side) - 1, "odd:2", "a visited side is not a subtree")
    for x in chain(qs, qt):
        side = L if x in L else V
        deg = sum(1 for y in t.neighbours(x) if y in side)
        _require(deg <= 1, "odd:2", f"queued vertex {x} is not a leaf of its side")
        _require(x not in st.modified, "odd:2", f"queued vertex {x} was already modified")
    in_qs = set(qs)
    for a, b in _edges_within(t, cur):
        _require(a in in_qs or b in in_qs, "odd:3", f"edge {a}-{b} has no endpoint in the source queue")
    for x in qs:
        if x not in cur:
            continue
        nbrs = [y for y in t.neighbours(x) if y in cur]
        _require(len(nbrs) == 1, "odd:3", f"source vertex {x} has {len(nbrs)} neighbours in the set")
        via_child = t.children[x] and nbrs[0] == t.children[x][0]
        _require(bool(via_child) == (x in L and x in on_path), "odd:3", f"source vertex {x} conflicts on the wrong side")
    for x in qt:
        _require(x not in cur, "odd:4", f"target-queue vertex {x} is in the set")
    for x in qs:
        _require(t.distance(leaf, x) % 2 == 1, "odd:5", f"source vertex {x} at even distance from the leaf")
    for x in qt:
        _require(t.distance(leaf, x) % 2 == 0, "odd:5", f"target vertex {x} at odd distance from the leaf")
    if qs:
        s, tt = qs[0], qt[0]
        _require((s in V and tt in L) or (s in L and tt in V), "odd:6", f"queue heads {s}, {tt} not on opposite sides")


def phi_odd(t: RootedTree, v: int, I: Iterable[int], *, monitor: bool = True, trace: list | None = None) -> frozenset[int]:
    """Injection for an odd distance ``d(v, l)``.

    Conflicts spread from the parent of the leaf (side ``L``) and are
    absorbed by the space freed under ``v`` starting at its second child
    (side ``V``); two synchronised queues pair each conflicting vertex with
    a free one.
    """
    path, leaf, members = _domain_check(t, v, I)
    if (len(path) - 1) % 2 == 0:
        raise PreconditionError("parity", f"d(v, l) = {len(path) - 1} is even")
    ch, par = t.children, t.parents
    if len(ch[v]) < 2:
        raise PreconditionError("arity", "v needs at least two children")
    on_path = set(path)
    size = len(members)
    cur = set(members)
    cur.discard(v)
    cur.add(leaf)
    _emit(trace, 0, v, leaf, "swap", cur)
    pl, c2v = par[leaf], ch[v][1]
    st = SwapState(cur, deque([pl]), deque([c2v]), {leaf, pl, v, c2v})
    degenerate = pl == v
    L, V = {leaf, pl}, {v, c2v}
    side_of = {leaf: L, v: V, c2v: V}
    if not degenerate:
        side_of[pl] = L

    while True:
        if monitor:
            _check_odd(t, st, size, L, V, on_path, leaf, v, degenerate)
        if not st.queue_s:
            _emit(trace, st.iteration, None, None, "terminate", st.current)
            break
        s = st.queue_s.popleft()
        tt = st.queue_t.popleft()
        if s not in st.current:
            _emit(trace, st.iteration, s, tt, "skip", st.current)
            st.iteration += 1
            continue
        first_child_conflict = s in L and s in on_path and ch[s] and ch[s][0] in st.current
        st.current.discard(s)
        st.current.add(tt)
        st.modified.update((s, tt))
        # (vertex, queue, side) additions in the order they are made
        adds: list[tuple[int, str, set]] = []
        s_side, t_side = side_of[s], side_of[tt]
        if first_child_conflict:
            if ch[tt]:
                for m in range(1, len(ch[tt])):
                    adds += [(ch[tt][m], "s", t_side), (ch[s][m], "t", s_side)]
                if monitor:
                    _require(par[s] != v, "odd:5", f"parent of source {s} is v")
                adds += [(par[s], "t", s_side), (ch[tt][0], "s", t_side)]
        elif s in L:
            if ch[tt]:
                for m in range(len(ch[tt])):
                    adds += [(ch[s][m], "t", s_side), (ch[tt][m], "s", t_side)]
        else:
            if ch[tt]:
                for m in range(1, len(ch[tt])):
                    adds += [(ch[tt][m], "s", t_side), (ch[s][m], "t", s_side)]
                if tt in on_path:
                    pt = par[tt]
                    if monitor:
                        _require(pt == v or pt not in st.visited, "odd:2", f"parent {pt} of {tt} already visited")
                    if pt != v:
                        adds += [(pt, "s", t_side), (ch[s][0], "t", s_side)]
                else:
                    if monitor:
                        _require(ch[tt][0] not in st.visited, "odd:2", f"child {ch[tt][0]} of {tt} already visited")
                    adds += [(ch[tt][0], "s", t_side), (ch[s][0], "t", s_side)]
        enq_s, enq_t = [], []
        for x, queue, side in adds:
            if monitor:
                _require(x not in st.visited, "odd:2", f"vertex {x} enqueued twice")
            (st.queue_s if queue == "s" else st.queue_t).append(x)
            (enq_s if queue == "s" else enq_t).append(x)
            st.visited.add(x)
            side.add(x)
            side_of[x] = side
        _emit(trace, st.iteration, s, tt, "swap", st.current, enq_s, enq_t)
        st.iteration += 1
    if monitor:
        _check_output(t, v, leaf, size, st.current)
    return frozenset(st.current)


def map_star(t: RootedTree, v: int, I: Iterable[int], *, monitor: bool = True, trace: list | None = None) -> frozenset[int]:
    """Send ``I`` (contains ``v``, not the leftmost leaf) to a set containing
    the leftmost leaf and not ``v``; dispatches on the parity of the distance.
    """
    path, _, _ = _domain_check(t, v, I)
    if (len(path) - 1) % 2 == 0:
        return phi_even(t, v, I, monitor=monitor, trace=trace)
    return phi_odd(t, v, I, monitor=monitor, trace=trace)
