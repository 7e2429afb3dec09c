"""Reference computations that share no code with the package's DP or maps."""

from __future__ import annotations

from itertools import combinations


def adjacency(parents):
    adj = [set() for _ in parents]
    for x, p in enumerate(parents):
        if p >= 0:
            adj[x].add(p)
            adj[p].add(x)
    return adj


def subset_profile(parents, forced=(), forbidden=()):
    """Count independent sets by size over all 2^n vertex subsets."""
    n = len(parents)
    edges = [(x, p) for x, p in enumerate(parents) if p >= 0]
    need = sum(1 << x for x in forced)
    avoid = sum(1 << x for x in forbidden)
    prof = [0] * (n + 1)
    for m in range(1 << n):
        if m & need != need or m & avoid:
            continue
        if any((m >> a) & 1 and (m >> b) & 1 for a, b in edges):
            continue
        prof[bin(m).count("1")] += 1
    while len(prof) > 1 and prof[-1] == 0:
        prof.pop()
    return prof


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _components(vertices, adj):
    left = set(vertices)
    while left:
        seed = left.pop()
        comp, stack = {seed}, [seed]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in left:
                    left.discard(y)
                    comp.add(y)
                    stack.append(y)
        yield comp


def split_profile(parents):
    """Branch on a vertex, then count each connected piece separately.

    Exact for any graph; on trees the pieces shrink fast, which makes
    perfect trees with dozens of vertices tractable where plain subset
    enumeration is not.
    """
    adj = adjacency(parents)

    def count(vertices: frozenset):
        if not vertices:
            return [1]
        comps = list(_components(vertices, adj))
        if len(comps) > 1:
            out = [1]
            for c in comps:
                out = _poly_mul(out, count(frozenset(c)))
            return out
        x = max(vertices, key=lambda y: (len(adj[y] & vertices), -y))
        skip = count(vertices - {x})
        take = [0] + count(vertices - {x} - adj[x])
        width = max(len(skip), len(take))
        return [(skip[i] if i < len(skip) else 0) + (take[i] if i < len(take) else 0) for i in range(width)]

    prof = count(frozenset(range(len(parents))))
    while len(prof) > 1 and prof[-1] == 0:
        prof.pop()
    return prof


def stars_by_subsets(parents, k):
    """Star sizes at every vertex for one k, by listing k-subsets."""
    n = len(parents)
    adj = adjacency(parents)
    stars = [0] * n
    for combo in combinations(range(n), k):
        chosen = set(combo)
        if all(adj[x].isdisjoint(chosen) for x in combo):
            for x in combo:
                stars[x] += 1
    return stars


def prufer_edges(seq, n):
    """Edges of the labeled tree with Prüfer sequence ``seq`` (linear-time decode)."""
    if n == 1:
        return []
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    ptr = degree.index(1)
    leaf = ptr
    edges = []
    for x in seq:
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    if n >= 2:
        edges.append((leaf, n - 1))
    return edges


def free_tree_string(n, edges):
    """Centre-rooted AHU string: equal iff the free trees are isomorphic."""
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    deg = [len(a) for a in adj]
    layer = [x for x in range(n) if deg[x] <= 1]
    left = n
    while left > 2:
        left -= len(layer)
        nxt = []
        for x in layer:
            for y in adj[x]:
                deg[y] -= 1
                if deg[y] == 1:
                    nxt.append(y)
        layer = nxt
    centres = layer if n > 1 else [0]

    def enc(x, parent):
        return "(" + "".join(sorted(enc(y, x) for y in adj[x] if y != parent)) + ")"

    return min(enc(c, -1) for c in centres)
