"""Bulk set operations on uint64 bit masks.

The compiled extension is used when it imports; otherwise the pure-Python
fallback takes over.  ``BACKEND`` says which one is active and every
wrapper accepts ``backend="python"`` to force the fallback (used by the
differential tests and the benchmark).
"""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

from . import _fallback
from .trees import Forest, RootedTree

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
MAXN = 64

Graph = Union[RootedTree, Forest]

__all__ = [
    "BACKEND",
    "MAXN",
    "host_arrays",
    "mask_of",
    "members_of",
    "independent_masks",
    "star_images",
    "cas_images",
    "sizes_of",
]


def _impl(backend: str | None):
    if backend in (None, "auto"):
        return _compiled or _fallback
    if backend == "python":
        return _fallback
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}")


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for x in vertices:
        m |= 1 << x
    return m


def members_of(mask) -> list[int]:
    mask = int(mask)
    return [x for x in range(mask.bit_length()) if (mask >> x) & 1]


def host_arrays(g: Graph):
    """(parent, first_child, child_count, depth) arrays for the kernels.

    Raises ValueError when the graph is too large or a vertex's children
    are not consecutive ids.
    """
    n = g.n
    if n > MAXN:
        raise ValueError(f"kernels handle at most {MAXN} vertices, got {n}")
    parent = np.asarray(g.parents, dtype=np.int32)
    first = np.full(n, -1, dtype=np.int32)
    nch = np.zeros(n, dtype=np.int32)
    for x in range(n):
        kids = list(g.children[x])
        if kids:
            if kids != list(range(kids[0], kids[0] + len(kids))):
                raise ValueError(f"children of {x} are not consecutive ids")
            first[x] = kids[0]
            nch[x] = len(kids)
    depth = np.asarray(g.depth, dtype=np.int32)
    return parent, first, nch, depth


def independent_masks(g: Graph, forced: Iterable[int] = (), forbidden: Iterable[int] = (),
                      allowed: Iterable[int] | None = None, *, backend: str | None = None) -> np.ndarray:
    """Every independent set (as a mask) inside ``allowed`` that contains all
    of ``forced`` and none of ``forbidden``; sizes are mixed."""
    if g.n > MAXN:
        raise ValueError(f"kernels handle at most {MAXN} vertices, got {g.n}")
    allow = (1 << g.n) - 1 if allowed is None else mask_of(allowed)
    allow &= ~mask_of(forbidden)
    force = mask_of(forced)
    if force & ~allow:
        return np.empty(0, dtype=np.uint64)
    return _impl(backend).enumerate_independent(
        list(g.parents), list(g.bfs_order()), np.uint64(allow), np.uint64(force))


def sizes_of(masks: np.ndarray) -> np.ndarray:
    """Popcount of every mask."""
    return np.bitwise_count(np.asarray(masks, dtype=np.uint64)).astype(np.int64)


def star_images(t: RootedTree, v: int, masks: np.ndarray, *, monitor: bool = True,
                backend: str | None = None) -> np.ndarray:
    """Apply the star injection for ``v`` (on the leftmost path) to each mask."""
    parent, first, nch, depth = host_arrays(t)
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    return _impl(backend).map_star_batch(parent, first, nch, depth, int(v), masks, monitor)


def cas_images(g: Graph, d: int, u: int, masks: np.ndarray, *, monitor: bool = True,
               backend: str | None = None) -> np.ndarray:
    parent, first, nch, depth = host_arrays(g)
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    return _impl(backend).cas_batch(parent, first, nch, depth, int(d), int(u), masks, monitor)
