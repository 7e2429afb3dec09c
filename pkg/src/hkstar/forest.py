"""Forests of perfect trees: comparing leaves across components.

``arity_map`` compares leaves of components with different arities,
``level_map`` leaves of equal-arity components with different heights,
and ``best_leaf`` combines both rules to pick a leaf with a maximum star.
Vertex ids are global forest ids throughout.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .counting import _constrained_profile, _mul
from .errors import InvariantViolation, PreconditionError
from .injections import _edges_within, _emit, _require
from .trees import Forest, leftmost_leaf

__all__ = [
    "LeafSelection",
    "Embedding",
    "best_leaf",
    "plane_embedding",
    "arity_map",
    "level_map",
    "forest_count_star",
    "forest_star_profile",
]


@dataclass(frozen=True)
class LeafSelection:
    tree_index: int
    leaf: int
    rule: str  # "tallest" (all heights even) or "shortest-odd"


@dataclass(frozen=True)
class Embedding:
    """Plane embedding of a shorter perfect tree into a taller one.

    ``forward`` maps the shorter component into the taller one; ``mirror``
    is the involution that swaps each vertex with its counterpart.
    """

    forward: dict[int, int]
    mirror: dict[int, int]


def _shape(F: Forest, tree_index: int):
    shape = F.trees[tree_index].shape
    if shape is None:
        raise PreconditionError("perfect", f"component {tree_index} is not a perfect tree")
    return shape


def best_leaf(F: Forest) -> LeafSelection:
    """Leaf whose star is largest for every ``k``.

    Among the components of maximum arity: if all have an even number of
    levels take the tallest, otherwise the one with the fewest odd levels.
    Ties go to the lowest component index; the leaf is its leftmost one.
    Single-vertex components have every arity and always join the group.
    """
    shapes = [_shape(F, i) for i in range(len(F.trees))]
    proper = [s.r for s in shapes if s.h > 1]
    top = max(proper) if proper else None
    group = [i for i, s in enumerate(shapes) if s.h == 1 or s.r == top]
    odd = [i for i in group if shapes[i].h % 2 == 1]
    if odd:
        chosen = min(odd, key=lambda i: (shapes[i].h, i))
        rule = "shortest-odd"
    else:
        chosen = min(group, key=lambda i: (-shapes[i].h, i))
        rule = "tallest"
    return LeafSelection(chosen, F.offsets[chosen] + leftmost_leaf(F.trees[chosen]), rule)


def _leaf_in(F: Forest, x: int, name: str) -> int:
    idx, _ = F.component(x)
    _shape(F, idx)
    if F.children[x]:
        raise PreconditionError("leaf", f"{name}={x} is not a leaf")
    return idx


def _class_check(F: Forest, I: Iterable[int], keep: int, drop: int) -> set[int]:
    members = set(I)
    for x in members:
        if not 0 <= x < F.n:
            raise PreconditionError("range", f"vertex {x} out of range")
    if _edges_within(F, members):
        raise PreconditionError("independent", "input set is not independent")
    if keep not in members or drop in members:
        raise PreconditionError("class", f"input must contain {keep} and not {drop}")
    return members


def _check_result(F: Forest, out: set[int], size: int, has: int, lacks: int) -> None:
    _require(len(out) == size, "size", f"output size {len(out)} differs from input size {size}")
    _require(not _edges_within(F, out), "independent", f"output has edges {_edges_within(F, out)}")
    _require(has in out and lacks not in out, "class", f"output must contain {has} and not {lacks}")


def arity_map(F: Forest, l1: int, l2: int, I: Iterable[int], *, monitor: bool = True,
              trace: list | None = None) -> frozenset[int]:
    """Move the star from leaf ``l1`` (arity r1) to leaf ``l2`` (arity r2 > r1).

    Swap the leaves; if the parent of ``l2`` now conflicts, move it to the
    parent of ``l1`` and push the displaced neighbours of that parent onto
    the spare children of the parent of ``l2``.
    """
    i1, i2 = _leaf_in(F, l1, "l1"), _leaf_in(F, l2, "l2")
    s1, s2 = F.trees[i1].shape, F.trees[i2].shape
    if s1.h < 2 or s2.h < 2:
        raise PreconditionError("levels", "both components need at least two levels")
    if s1.r >= s2.r:
        raise PreconditionError("arity", f"need r1 < r2, got {s1.r} and {s2.r}")
    members = _class_check(F, I, l1, l2)
    cur = set(members)
    cur.discard(l1)
    cur.add(l2)
    _emit(trace, 0, l1, l2, "swap", cur)
    p1, p2 = F.parents[l1], F.parents[l2]
    if p2 in cur:
        cur.discard(p2)
        cur.add(p1)
        _emit(trace, 1, p2, p1, "primary-shift", cur)
        near = [c for c in F.children[p1] if c != l1]
        spare = [c for c in F.children[p2] if c != l2]
        moves = list(zip(near, spare))
        if F.parents[p1] >= 0:
            moves.append((F.parents[p1], spare[len(near)]))
        for src, dst in moves:
            if src in cur:
                if monitor:
                    _require(dst not in cur, "arity:spare", f"spare slot {dst} already occupied")
                cur.discard(src)
                cur.add(dst)
                _emit(trace, 2, src, dst, "secondary-shift", cur)
    _emit(trace, 3, None, None, "terminate", cur)
    if monitor:
        _check_result(F, cur, len(members), l2, l1)
    return frozenset(cur)


def plane_embedding(F: Forest, l1: int, l2: int) -> Embedding:
    """Embed the component of ``l1`` into that of ``l2`` with ``l1 -> l2``.

    The root goes to the ancestor of ``l2`` at distance ``h1 - 1``; children
    are matched by plane position, except that at each depth the positions
    of the two leaf paths are transposed so the leaves line up.
    """
    i1 = F.component(l1)[0]
    t1 = F.trees[i1]
    h1 = t1.shape.h
    anchor = l2
    path2 = []
    for _ in range(h1 - 1):
        p = F.parents[anchor]
        path2.append(F.children[p].index(anchor))
        anchor = p
    path2.reverse()
    path1 = []
    x = l1
    while F.parents[x] >= 0:
        p = F.parents[x]
        path1.append(F.children[p].index(x))
        x = p
    path1.reverse()
    root1 = F.roots[i1]

    def position(depth: int, idx: int) -> int:
        a, b = path1[depth], path2[depth]
        return b if idx == a else a if idx == b else idx

    forward = {root1: anchor}
    queue = deque([root1])
    while queue:
        x = queue.popleft()
        for idx, c in enumerate(F.children[x]):
            forward[c] = F.children[forward[x]][position(F.depth[x] - F.depth[root1], idx)]
            queue.append(c)
    if forward[l1] != l2 or len(set(forward.values())) != len(forward):
        raise InvariantViolation("embedding", "plane embedding is not injective or misses the leaf")
    for x, y in forward.items():
        p = F.parents[x]
        if p >= 0 and F.parents[y] != forward[p]:
            raise InvariantViolation("embedding", f"edge {p}-{x} not preserved")
    mirror = dict(forward)
    mirror.update({y: x for x, y in forward.items()})
    return Embedding(forward, mirror)


def level_map(F: Forest, l1: int, l2: int, I: Iterable[int], *, monitor: bool = True,
              trace: list | None = None) -> frozenset[int]:
    """Compare leaves of equal-arity components with ``h1 < h2`` levels.

    For even ``h1`` sets containing ``l1`` (not ``l2``) are sent to sets
    containing ``l2`` (not ``l1``); for odd ``h1`` the direction reverses.
    Conflicts are resolved by a synchronised queue walk over the shorter
    tree and its mirror image in the taller one.
    """
    i1, i2 = _leaf_in(F, l1, "l1"), _leaf_in(F, l2, "l2")
    s1, s2 = F.trees[i1].shape, F.trees[i2].shape
    if s1.h > 1 and s1.r != s2.r:
        raise PreconditionError("arity", f"arities differ: {s1.r} vs {s2.r}")
    if s1.h >= s2.h:
        raise PreconditionError("levels", f"need h1 < h2, got {s1.h} and {s2.h}")
    if s1.h % 2 == 0:
        old, new = l1, l2
    else:
        old, new = l2, l1
    members = _class_check(F, I, old, new)
    mirror = plane_embedding(F, l1, l2).mirror
    cur = set(members)
    cur.discard(old)
    cur.add(new)
    _emit(trace, 0, old, new, "swap", cur)
    qs: deque[int] = deque()
    qt: deque[int] = deque()
    visited = {l1, l2}
    if F.parents[new] >= 0:
        qs.append(F.parents[new])
        qt.append(F.parents[old])
        visited.update((F.parents[new], F.parents[old]))
    it = 1
    while True:
        if monitor:
            _require(len(qs) == len(qt), "mirror", "queue sizes differ")
            for s, t in zip(qs, qt):
                _require(mirror.get(s) == t, "mirror", f"target {t} is not the mirror of source {s}")
                _require(t not in cur, "mirror", f"mirror {t} of queued {s} is in the set")
        if not qs:
            _emit(trace, it, None, None, "terminate", cur)
            break
        s, t = qs.popleft(), qt.popleft()
        if s not in cur:
            _emit(trace, it, s, t, "skip", cur)
            it += 1
            continue
        cur.discard(s)
        cur.add(t)
        enq_s, enq_t = [], []
        for w in F.neighbours(t):
            if w in visited:
                continue
            if w not in mirror:
                raise InvariantViolation("mirror-domain", f"neighbour {w} of {t} lies outside the embedded region")
            mw = mirror[w]
            if monitor:
                _require(mw not in visited, "mirror", f"mirror {mw} of fresh vertex {w} already visited")
            enq_s.append(w)
            enq_t.append(mw)
            visited.update((w, mw))
        qs.extend(enq_s)
        qt.extend(enq_t)
        _emit(trace, it, s, t, "swap", cur, enq_s, enq_t)
        it += 1
    if monitor:
        _check_result(F, cur, len(members), new, old)
    return frozenset(cur)


def forest_star_profile(F: Forest, v: int) -> list[int]:
    """Star sizes at ``v`` for every k: the forced profile of ``v``'s
    component convolved with the plain profiles of the others."""
    idx, local = F.component(v)
    prof = [1]
    for j, t in enumerate(F.trees):
        prof = _mul(prof, _constrained_profile(t, (local,) if j == idx else ()))
    while len(prof) > 1 and prof[-1] == 0:
        prof.pop()
    return prof


def forest_count_star(F: Forest, v: int, k: int) -> int:
    prof = forest_star_profile(F, v)
    return prof[k] if 0 <= k < len(prof) else 0
