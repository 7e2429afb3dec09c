"""Rooted plane trees and forests.

Vertices are integers ``0..n-1``.  A tree is stored as a parent array with
``-1`` marking the root; each vertex's children are kept in ascending id
order, which is also their plane (left-to-right) order.
"""

from __future__ import annotations

import heapq
import itertools
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

__all__ = [
    "TreeFormatError",
    "PerfectShape",
    "RootedTree",
    "Forest",
    "build_perfect",
    "parse_tree",
    "parse_forest",
    "load_tree",
    "load_forest",
    "serialize_tree",
    "serialize_forest",
    "leftmost_leaf",
    "leftmost_path",
    "canonical_code",
    "canonical_tree",
    "enumerate_unlabeled_trees",
    "prufer_decode",
    "iter_labeled_trees",
    "random_tree",
    "path_tree",
    "star_tree",
    "relabel",
    "tree_from_edges",
]

DEFAULT_ENUM_CAP = 10


class TreeFormatError(ValueError):
    """Malformed tree or forest text.  ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PerfectShape:
    r: int
    h: int

    @property
    def n(self) -> int:
        if self.h == 1:
            return 1
        return (self.r**self.h - 1) // (self.r - 1)

    @property
    def leaves(self) -> int:
        return self.r ** (self.h - 1)


@dataclass(frozen=True, eq=False)
class RootedTree:
    """Immutable ordered rooted tree.

    Build instances with :meth:`from_parents`; the constructor trusts its
    arguments.
    """

    parents: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]
    root: int
    shape: PerfectShape | None = None

    @classmethod
    def from_parents(cls, parents: Sequence[int], shape: PerfectShape | None = None) -> "RootedTree":
        parents = tuple(int(p) for p in parents)
        n = len(parents)
        if n == 0:
            raise ValueError("a tree needs at least one vertex")
        roots = [i for i, p in enumerate(parents) if p == -1]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        kids: list[list[int]] = [[] for _ in range(n)]
        for i, p in enumerate(parents):
            if p == -1:
                continue
            if not 0 <= p < n:
                raise ValueError(f"parent of {i} out of range: {p}")
            if p == i:
                raise ValueError(f"vertex {i} is its own parent")
            kids[p].append(i)
        root = roots[0]
        depth = [-1] * n
        depth[root] = 0
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for c in kids[x]:
                depth[c] = depth[x] + 1
                queue.append(c)
        if min(depth) < 0:
            raise ValueError("parent array contains a cycle")
        tree = cls(parents, tuple(tuple(k) for k in kids), tuple(depth), root, None)
        if shape is None:
            shape = _detect_perfect(tree)
        object.__setattr__(tree, "shape", shape)
        return tree

    @property
    def n(self) -> int:
        return len(self.parents)

    @property
    def roots(self) -> tuple[int, ...]:
        return (self.root,)

    def parent(self, x: int) -> int | None:
        p = self.parents[x]
        return None if p < 0 else p

    def is_leaf(self, x: int) -> bool:
        return not self.children[x]

    def leaves(self) -> list[int]:
        return [x for x in range(self.n) if not self.children[x]]

    def neighbours(self, x: int) -> list[int]:
        p = self.parents[x]
        return ([p] if p >= 0 else []) + list(self.children[x])

    def edges(self) -> list[tuple[int, int]]:
        return [(p, i) for i, p in enumerate(self.parents) if p >= 0]

    def bfs_order(self) -> list[int]:
        order = [self.root]
        for x in order:
            order.extend(self.children[x])
        return order

    def subtree(self, x: int) -> list[int]:
        out = [x]
        for y in out:
            out.extend(self.children[y])
        return out

    def is_ancestor(self, a: int, x: int) -> bool:
        """True if ``a`` equals ``x`` or lies above it."""
        while x >= 0:
            if x == a:
                return True
            x = self.parents[x]
        return False

    def distance(self, x: int, y: int) -> int:
        dist = 0
        while x != y:
            if self.depth[x] >= self.depth[y]:
                x = self.parents[x]
            else:
                y = self.parents[y]
            dist += 1
        return dist

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RootedTree) and self.parents == other.parents

    def __hash__(self) -> int:
        return hash(self.parents)

    def __repr__(self) -> str:
        if self.shape is not None:
            return f"RootedTree(perfect r={self.shape.r} h={self.shape.h})"
        return f"RootedTree(n={self.n}, parents={list(self.parents)})"


def _detect_perfect(t: RootedTree) -> PerfectShape | None:
    if t.n == 1:
        return PerfectShape(2, 1)
    arities = {len(c) for c in t.children if c}
    if len(arities) != 1:
        return None
    (r,) = arities
    if r < 2:
        return None
    leaf_depths = {t.depth[x] for x in range(t.n) if not t.children[x]}
    if len(leaf_depths) != 1:
        return None
    (h,) = leaf_depths
    return PerfectShape(r, h + 1)


@dataclass(frozen=True, eq=False)
class Forest:
    """Ordered list of trees with vertices flattened to global ids.

    Component ``i`` owns global ids ``offsets[i] .. offsets[i] + trees[i].n - 1``.
    """

    trees: tuple[RootedTree, ...]
    offsets: tuple[int, ...] = field(init=False)
    parents: tuple[int, ...] = field(init=False)
    children: tuple[tuple[int, ...], ...] = field(init=False)
    depth: tuple[int, ...] = field(init=False)
    roots: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        trees = tuple(self.trees)
        if not trees:
            raise ValueError("a forest needs at least one tree")
        offsets, parents, children, depth = [], [], [], []
        base = 0
        for t in trees:
            offsets.append(base)
            parents.extend(p + base if p >= 0 else -1 for p in t.parents)
            children.extend(tuple(c + base for c in cs) for cs in t.children)
            depth.extend(t.depth)
            base += t.n
        object.__setattr__(self, "trees", trees)
        object.__setattr__(self, "offsets", tuple(offsets))
        object.__setattr__(self, "parents", tuple(parents))
        object.__setattr__(self, "children", tuple(children))
        object.__setattr__(self, "depth", tuple(depth))
        object.__setattr__(self, "roots", tuple(o + t.root for o, t in zip(offsets, trees)))

    @property
    def n(self) -> int:
        return len(self.parents)

    def component(self, g: int) -> tuple[int, int]:
        """Map a global id to ``(tree index, local id)``."""
        if not 0 <= g < self.n:
            raise ValueError(f"vertex {g} out of range for forest of {self.n} vertices")
        for i in range(len(self.trees) - 1, -1, -1):
            if g >= self.offsets[i]:
                return i, g - self.offsets[i]
        raise AssertionError("unreachable")

    def global_id(self, tree_index: int, local: int) -> int:
        return self.offsets[tree_index] + local

    def parent(self, x: int) -> int | None:
        p = self.parents[x]
        return None if p < 0 else p

    def is_leaf(self, x: int) -> bool:
        return not self.children[x]

    def neighbours(self, x: int) -> list[int]:
        p = self.parents[x]
        return ([p] if p >= 0 else []) + list(self.children[x])

    def edges(self) -> list[tuple[int, int]]:
        return [(p, i) for i, p in enumerate(self.parents) if p >= 0]

    def bfs_order(self) -> list[int]:
        order = list(self.roots)
        for x in order:
            order.extend(self.children[x])
        return order

    def subtree(self, x: int) -> list[int]:
        out = [x]
        for y in out:
            out.extend(self.children[y])
        return out

    def __repr__(self) -> str:
        return f"Forest({list(self.trees)})"


def build_perfect(r: int, h: int) -> RootedTree:
    """Perfect ``r``-ary tree with ``h`` levels in level order.

    The root is 0 and the children of ``i`` are ``r*i+1 .. r*i+r``.
    """
    if h <= 0:
        raise ValueError(f"level count must be positive, got h={h}")
    if h == 1:
        return RootedTree.from_parents([-1], PerfectShape(max(r, 2), 1))
    if r <= 1:
        raise ValueError(f"arity must be at least 2, got r={r}")
    n = (r**h - 1) // (r - 1)
    parents = [-1] + [(i - 1) // r for i in range(1, n)]
    return RootedTree.from_parents(parents, PerfectShape(r, h))


def leftmost_leaf(t: RootedTree) -> int:
    x = t.root
    while t.children[x]:
        x = t.children[x][0]
    return x


def leftmost_path(t: RootedTree, v: int) -> list[int]:
    """Vertices from ``v`` down to the leftmost leaf, both ends included.

    ``v`` must lie on the root-to-leftmost-leaf path.
    """
    if not 0 <= v < t.n:
        raise ValueError(f"vertex {v} out of range")
    spine = [t.root]
    while t.children[spine[-1]]:
        spine.append(t.children[spine[-1]][0])
    if v not in spine:
        raise ValueError(f"vertex {v} is not an ancestor of the leftmost leaf {spine[-1]}")
    return spine[spine.index(v):]


# --- text formats -----------------------------------------------------------

def _meaningful_lines(text: str) -> list[tuple[int, str]]:
    return [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1) if not ln.strip().startswith("#")]


def _parse_shorthand(spec: str) -> RootedTree:
    parts = spec.strip().split(":")
    if len(parts) != 3 or parts[0] != "perfect":
        raise TreeFormatError(f"bad shorthand {spec!r}, expected perfect:<r>:<h>")
    try:
        r, h = int(parts[1]), int(parts[2])
    except ValueError:
        raise TreeFormatError(f"bad shorthand {spec!r}: arity and levels must be integers") from None
    try:
        return build_perfect(r, h)
    except ValueError as exc:
        raise TreeFormatError(str(exc)) from None


def _parse_block(lines: list[tuple[int, str]]) -> RootedTree:
    if len(lines) == 1 and lines[0][1].startswith("perfect:"):
        return _parse_shorthand(lines[0][1])
    if len(lines) != 2:
        where = lines[0][0] if lines else None
        raise TreeFormatError(f"expected 2 lines (n, parents), got {len(lines)}", where)
    (ln_n, head), (ln_p, body) = lines
    try:
        n = int(head)
    except ValueError:
        raise TreeFormatError(f"vertex count is not an integer: {head!r}", ln_n) from None
    if n <= 0:
        raise TreeFormatError(f"vertex count must be positive, got {n}", ln_n)
    try:
        parents = [int(tok) for tok in body.split()]
    except ValueError:
        raise TreeFormatError("parent list contains a non-integer", ln_p) from None
    if len(parents) != n:
        raise TreeFormatError(f"length mismatch: n={n} but {len(parents)} parents given", ln_p)
    try:
        return RootedTree.from_parents(parents)
    except ValueError as exc:
        raise TreeFormatError(str(exc), ln_p) from None


def parse_tree(text: str) -> RootedTree:
    """Parse the parent-array tree format or the ``perfect:<r>:<h>`` shorthand."""
    if text.strip().startswith("perfect:") and "\n" not in text.strip():
        return _parse_shorthand(text)
    lines = [(i, ln) for i, ln in _meaningful_lines(text) if ln]
    return _parse_block(lines)


def parse_forest(text: str) -> Forest:
    """Parse tree blocks separated by blank lines.

    A single line of ``+``-joined shorthands (``perfect:2:3+perfect:3:2``) is
    also accepted.
    """
    stripped = text.strip()
    if stripped.startswith("perfect:") and "\n" not in stripped:
        return Forest(tuple(_parse_shorthand(s) for s in stripped.split("+")))
    blocks: list[list[tuple[int, str]]] = [[]]
    for i, ln in _meaningful_lines(text):
        if ln:
            blocks[-1].append((i, ln))
        elif blocks[-1]:
            blocks.append([])
    blocks = [b for b in blocks if b]
    if not blocks:
        raise TreeFormatError("empty forest")
    return Forest(tuple(_parse_block(b) for b in blocks))


def _read_spec(spec: str) -> str:
    if spec.startswith("perfect:"):
        return spec
    with open(spec, encoding="utf-8") as fh:
        return fh.read()


def load_tree(spec: str) -> RootedTree:
    """Load a tree from a file path or a ``perfect:<r>:<h>`` shorthand."""
    return parse_tree(_read_spec(spec))


def load_forest(spec: str) -> Forest:
    return parse_forest(_read_spec(spec))


def serialize_tree(t: RootedTree) -> str:
    return f"{t.n}\n{' '.join(str(p) for p in t.parents)}\n"


def serialize_forest(f: Forest) -> str:
    return "\n".join(serialize_tree(t) for t in f.trees)


# --- canonical forms --------------------------------------------------------

def _adjacency(parents: Sequence[int]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in parents]
    for i, p in enumerate(parents):
        if p >= 0:
            adj[i].append(p)
            adj[p].append(i)
    return adj


def _centers(adj: list[list[int]]) -> list[int]:
    n = len(adj)
    if n <= 2:
        return list(range(n))
    deg = [len(a) for a in adj]
    layer = [i for i in range(n) if deg[i] == 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for x in layer:
            for y in adj[x]:
                deg[y] -= 1
                if deg[y] == 1:
                    nxt.append(y)
        layer = nxt
    return sorted(layer)


def _rooted_codes(adj: list[list[int]], root: int) -> tuple[bytes, list[int], list[int]]:
    """AHU codes of every subtree when rooted at ``root``.

    Returns the root code plus parent and BFS order, which callers reuse.
    """
    n = len(adj)
    parent = [-1] * n
    order = [root]
    seen = [False] * n
    seen[root] = True
    for x in order:
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                order.append(y)
    codes: list[bytes] = [b""] * n
    kids: list[list[bytes]] = [[] for _ in range(n)]
    for x in reversed(order):
        codes[x] = b"(" + b"".join(sorted(kids[x])) + b")"
        if parent[x] >= 0:
            kids[parent[x]].append(codes[x])
    return codes[root], parent, order


def canonical_code(t: RootedTree) -> bytes:
    """AHU code of the underlying free tree, rooted at its centre.

    Bicentral trees take the smaller of the two centre-rooted codes.
    """
    adj = _adjacency(t.parents)
    return min(_rooted_codes(adj, c)[0] for c in _centers(adj))


def canonical_tree(t: RootedTree) -> RootedTree:
    """Representative of ``t``'s isomorphism class with canonical labels.

    Rooted at the centre giving the smaller code; children ordered by code
    and vertices numbered in BFS order.
    """
    adj = _adjacency(t.parents)
    best = None
    for c in _centers(adj):
        code, parent, order = _rooted_codes(adj, c)
        if best is None or code < best[0]:
            best = (code, c, parent, order)
    _, root, parent, order = best
    sub: list[bytes] = [b""] * t.n
    kids: list[list[int]] = [[] for _ in range(t.n)]
    for x in reversed(order):
        kids[x].sort(key=lambda y: sub[y])
        sub[x] = b"(" + b"".join(sub[y] for y in kids[x]) + b")"
        if parent[x] >= 0:
            kids[parent[x]].append(x)
    new_order = [root]
    for x in new_order:
        new_order.extend(kids[x])
    label = {old: new for new, old in enumerate(new_order)}
    parents = [-1] * t.n
    for old in new_order:
        if parent[old] >= 0:
            parents[label[old]] = label[parent[old]]
    return RootedTree.from_parents(parents)


# --- enumeration ------------------------------------------------------------

@lru_cache(maxsize=None)
def _rooted_shapes(n: int) -> tuple[tuple, ...]:
    """All unlabeled rooted trees on ``n`` vertices as sorted nested tuples."""
    if n == 1:
        return ((),)
    shapes = []
    for parts in _partitions(n - 1, n - 1):
        per_size = []
        for size, mult in sorted(Counter(parts).items()):
            per_size.append(list(itertools.combinations_with_replacement(_rooted_shapes(size), mult)))
        for combo in itertools.product(*per_size):
            kids = tuple(sorted(itertools.chain.from_iterable(combo)))
            shapes.append(kids)
    return tuple(shapes)


def _partitions(n: int, largest: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _shape_to_parents(shape: tuple) -> list[int]:
    parents = [-1]
    stack = [(shape, 0)]
    while stack:
        node, idx = stack.pop()
        for child in node:
            parents.append(idx)
            stack.append((child, len(parents) - 1))
    return parents


def enumerate_unlabeled_trees(n: int, cap: int = DEFAULT_ENUM_CAP) -> Iterator[RootedTree]:
    """One canonical representative per isomorphism class of free trees.

    Trees are generated as rooted shapes and deduplicated by
    :func:`canonical_code`; results are yielded in code order.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if n > cap:
        raise ValueError(f"n={n} exceeds the enumeration cap {cap}")
    by_code: dict[bytes, RootedTree] = {}
    for shape in _rooted_shapes(n):
        t = RootedTree.from_parents(_shape_to_parents(shape))
        code = canonical_code(t)
        if code not in by_code:
            by_code[code] = t
    for code in sorted(by_code):
        yield canonical_tree(by_code[code])


def prufer_decode(seq: Sequence[int], n: int) -> RootedTree:
    """Labeled tree for a Prüfer sequence over ``0..n-1``, rooted at 0."""
    if n == 1:
        return RootedTree.from_parents([-1])
    if len(seq) != n - 2:
        raise ValueError(f"Prüfer sequence for n={n} must have length {n - 2}")
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    adj: list[list[int]] = [[] for _ in range(n)]
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        adj[leaf].append(x)
        adj[x].append(leaf)
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    a, b = leaves
    adj[a].append(b)
    adj[b].append(a)
    parents = [-1] * n
    seen = [False] * n
    seen[0] = True
    queue = [0]
    for x in queue:
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parents[y] = x
                queue.append(y)
    return RootedTree.from_parents(parents)


def iter_labeled_trees(n: int) -> Iterator[RootedTree]:
    """Every labeled tree on ``n`` vertices (``n**(n-2)`` of them)."""
    if n <= 2:
        yield RootedTree.from_parents([-1] + [0] * (n - 1))
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        yield prufer_decode(seq, n)


def random_tree(n: int, rng: random.Random) -> RootedTree:
    """Uniform labeled tree via a random Prüfer sequence."""
    if n <= 2:
        return RootedTree.from_parents([-1] + [0] * (n - 1))
    return prufer_decode([rng.randrange(n) for _ in range(n - 2)], n)


def path_tree(n: int) -> RootedTree:
    return RootedTree.from_parents([-1] + list(range(n - 1)))


def star_tree(n: int) -> RootedTree:
    return RootedTree.from_parents([-1] + [0] * (n - 1))


def relabel(t: RootedTree, perm: Sequence[int]) -> RootedTree:
    """Apply the vertex relabeling ``x -> perm[x]``."""
    parents = [-1] * t.n
    for x, p in enumerate(t.parents):
        parents[perm[x]] = perm[p] if p >= 0 else -1
    return RootedTree.from_parents(parents)


def tree_from_edges(n: int, edges: Iterable[tuple[int, int]], root: int = 0) -> RootedTree:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    parents = [-1] * n
    seen = [False] * n
    seen[root] = True
    order = [root]
    for x in order:
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parents[y] = x
                order.append(y)
    if len(order) != n:
        raise ValueError("edge list is not a spanning tree")
    return RootedTree.from_parents(parents)
