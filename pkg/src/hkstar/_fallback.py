"""Pure-Python versions of the compiled kernels, with identical signatures.

They rebuild a tree or forest from the host arrays and call the reference
maps, so results (and monitor tags) agree with the compiled build.
"""

from __future__ import annotations

import numpy as np

from .errors import PreconditionError
from .injections import map_star, run_cas
from .trees import Forest, RootedTree

MAXN = 64


def _graph(parent):
    parent = [int(p) for p in parent]
    roots = [x for x, p in enumerate(parent) if p < 0]
    if len(roots) == 1:
        return RootedTree.from_parents(parent)
    bounds = roots[1:] + [len(parent)]
    trees = []
    for start, stop in zip(roots, bounds):
        trees.append(RootedTree.from_parents([p - start if p >= 0 else -1 for p in parent[start:stop]]))
    return Forest(tuple(trees))


def _members(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _mask(members) -> int:
    m = 0
    for x in members:
        m |= 1 << x
    return m


def map_star_batch(parent, first, nch, depth, v, masks, monitor=True):
    t = _graph(parent)
    if len(parent) > MAXN:
        raise ValueError(f"kernels handle at most {MAXN} vertices, got {len(parent)}")
    out = np.empty(len(masks), dtype=np.uint64)
    for i, m in enumerate(masks):
        try:
            out[i] = _mask(map_star(t, v, _members(int(m)), monitor=monitor))
        except PreconditionError:
            raise
        except Exception as exc:
            if hasattr(exc, "witness"):
                exc.witness = int(m)
            raise
    return out


def cas_batch(parent, first, nch, depth, d, u, masks, monitor=True):
    g = _graph(parent)
    out = np.empty(len(masks), dtype=np.uint64)
    for i, m in enumerate(masks):
        members = _members(int(m))
        if not (int(m) >> u) & 1 or (int(m) >> d) & 1:
            raise PreconditionError("cas-input", f"mask {int(m):#x} must contain u and not d")
        try:
            out[i] = _mask(run_cas(g, members, d, u, monitor=monitor))
        except Exception as exc:
            if hasattr(exc, "witness"):
                exc.witness = int(m)
            raise
    return out


def enumerate_independent(parent, order, allowed, forced):
    parent = [int(p) for p in parent]
    if len(parent) > MAXN:
        raise ValueError(f"kernels handle at most {MAXN} vertices, got {len(parent)}")
    allowed, forced = int(allowed), int(forced)
    blocked = 0
    for x, p in enumerate(parent):
        if p >= 0 and (forced >> x) & 1:
            blocked |= 1 << p
        if p >= 0 and (forced >> p) & 1:
            blocked |= 1 << x
    if blocked & forced:
        return np.empty(0, dtype=np.uint64)
    seq = [x for x in order if (allowed >> x) & 1 and not (blocked >> x) & 1]
    out: list[int] = []

    def rec(pos: int, cur: int) -> None:
        if pos == len(seq):
            out.append(cur)
            return
        x = seq[pos]
        if not (forced >> x) & 1:
            rec(pos + 1, cur)
        p = parent[x]
        if p < 0 or not (cur >> p) & 1:
            rec(pos + 1, cur | (1 << x))

    rec(0, 0)
    return np.array(out, dtype=np.uint64)
