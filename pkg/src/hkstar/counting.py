"""Exact counts of independent sets, stars and the A/B/C classes.

Counts come from a two-state tree DP whose states are polynomials in the
set size; Python ints keep them exact.  ``enumerate_independent_sets`` is
the brute-force oracle the DP is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .trees import Forest, RootedTree

Graph = Union[RootedTree, Forest]

__all__ = [
    "ClassSizes",
    "enumerate_independent_sets",
    "independence_profile",
    "independence_number",
    "count_star",
    "count_classes",
    "star_profile",
    "is_independent",
]


def _mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _add(a: list[int], b: list[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, y in enumerate(b):
        out[i] += y
    return out


def _trim(p: list[int], length: int) -> list[int]:
    p = p[:length]
    return p + [0] * (length - len(p))


def _constrained_profile(g: Graph, forced: Iterable[int] = (), forbidden: Iterable[int] = ()) -> list[int]:
    """Untrimmed generating polynomial of constrained independent sets."""
    forced = set(forced)
    forbidden = set(forbidden)
    n = g.n
    for x in forced | forbidden:
        if not 0 <= x < n:
            raise ValueError(f"vertex {x} out of range")
    if forced & forbidden:
        raise ValueError(f"vertices both forced and forbidden: {sorted(forced & forbidden)}")
    take: list[list[int]] = [[]] * n
    skip: list[list[int]] = [[]] * n
    for x in reversed(g.bfs_order()):
        p_in, p_out = [0, 1], [1]
        for c in g.children[x]:
            p_in = _mul(p_in, skip[c])
            p_out = _mul(p_out, _add(take[c], skip[c]))
        if x in forced:
            p_out = [0]
        if x in forbidden:
            p_in = [0]
        take[x], skip[x] = p_in, p_out
    total = [1]
    for root in g.roots:
        total = _mul(total, _add(take[root], skip[root]))
    return total


def independence_number(g: Graph) -> int:
    prof = _constrained_profile(g)
    return max(k for k, c in enumerate(prof) if c)


def independence_profile(g: Graph, forced: int | None = None, forbidden: Iterable[int] | None = None) -> list[int]:
    """Number of independent sets of each size ``k = 0 .. alpha(g)``.

    ``forced`` restricts to sets containing that vertex and ``forbidden`` to
    sets avoiding those vertices.  The list always has ``alpha(g) + 1``
    entries, alpha being the unconstrained independence number.
    """
    length = independence_number(g) + 1
    prof = _constrained_profile(g, () if forced is None else (forced,), forbidden or ())
    return _trim(prof, length)


def star_profile(g: Graph, v: int) -> list[int]:
    return independence_profile(g, forced=v)


def count_star(g: Graph, v: int, k: int) -> int:
    """``|I_g^k(v)|``: independent sets of size ``k`` containing ``v``."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    prof = _constrained_profile(g, (v,))
    return prof[k] if 0 <= k < len(prof) else 0


@dataclass(frozen=True)
class ClassSizes:
    """Sizes of the classes for a vertex pair ``(v, l)``.

    ``a`` counts sets with v and not l, ``b`` sets with l and not v, ``c``
    sets with both.
    """

    a: int
    b: int
    c: int


def count_classes(g: Graph, v: int, leaf: int, k: int) -> ClassSizes:
    if v == leaf:
        raise ValueError("class decomposition needs two distinct vertices")

    def coef(forced, forbidden):
        prof = _constrained_profile(g, forced, forbidden)
        return prof[k] if 0 <= k < len(prof) else 0

    return ClassSizes(
        a=coef((v,), (leaf,)),
        b=coef((leaf,), (v,)),
        c=coef((v, leaf), ()),
    )


def is_independent(g: Graph, vertices: Iterable[int]) -> bool:
    members = set(vertices)
    return not any(g.parents[x] in members for x in members if g.parents[x] >= 0)


def enumerate_independent_sets(g: Graph, k: int) -> list[frozenset[int]]:
    """All independent sets of size exactly ``k``, in lexicographic order.

    Plain backtracking over vertex ids; used as the counting oracle.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    n = g.n
    adj = [set(g.neighbours(x)) for x in range(n)]
    out: list[frozenset[int]] = []
    chosen: list[int] = []

    def extend(start: int) -> None:
        if len(chosen) == k:
            out.append(frozenset(chosen))
            return
        for x in range(start, n - (k - len(chosen)) + 1):
            if adj[x].isdisjoint(chosen):
                chosen.append(x)
                extend(x + 1)
                chosen.pop()

    extend(0)
    return out
