"""Exhaustive checks of the star injections and of the leaf-maximality claims.

Counting checks run on the polynomial DP.  Injectivity checks enumerate
whole domains as bit masks, push them through the compiled kernels (or the
reference maps) and validate every image independently with numpy.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .counting import _constrained_profile, _mul, independence_number
from .errors import InvariantViolation, PreconditionError
from .forest import arity_map, best_leaf, level_map, plane_embedding
from .injections import canonical_vertex
from .kernels import cas_images, independent_masks, mask_of, members_of, sizes_of, star_images
from .trees import Forest, RootedTree, build_perfect, canonical_code, enumerate_unlabeled_trees, leftmost_path

__all__ = [
    "Verdict",
    "HkReport",
    "check_injection_exhaustive",
    "check_cas_exhaustive",
    "check_theorem_main",
    "check_hk",
    "check_forest_theorem",
    "check_arity_lemma",
    "check_level_lemma",
    "recheck_witness",
    "generate_family",
    "all_spiders",
    "all_caterpillars",
    "is_caterpillar",
    "is_spider",
    "perfect_pool",
    "forest_pool",
    "lemma_instances",
    "hk_sweep",
    "unlabeled_trees_up_to",
]


@dataclass
class Verdict:
    name: str
    passed: bool
    witness: dict | None = None
    checked: int = 0
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class HkReport:
    tree: str  # hex canonical code
    k: int
    max_star_vertex: int
    max_star_value: int
    best_leaf_value: int
    is_k_hk: bool

    def to_record(self) -> dict:
        return asdict(self)


def _fail(name, witness, checked, start, **details) -> Verdict:
    return Verdict(name, False, witness, checked, time.perf_counter() - start, details)


# --- image validation -------------------------------------------------------

def _edge_conflicts(parents: Sequence[int], masks: np.ndarray) -> np.ndarray:
    bad = np.zeros(len(masks), dtype=bool)
    one = np.uint64(1)
    for x, p in enumerate(parents):
        if p >= 0:
            bad |= ((masks >> np.uint64(x)) & (masks >> np.uint64(p)) & one).astype(bool)
    return bad


def _bad_images(parents, inputs: np.ndarray, outputs: np.ndarray, has: int, lacks: int) -> np.ndarray:
    """Indices of images that break size, independence or class membership."""
    bad = sizes_of(inputs) != sizes_of(outputs)
    bad |= _edge_conflicts(parents, outputs)
    bad |= (outputs & np.uint64(mask_of([has]))) == 0
    bad |= (outputs & np.uint64(mask_of([lacks]))) != 0
    return np.flatnonzero(bad)


def _collision(inputs: np.ndarray, outputs: np.ndarray) -> tuple[int, int] | None:
    order = np.argsort(outputs, kind="stable")
    sorted_out = outputs[order]
    dup = np.flatnonzero(sorted_out[1:] == sorted_out[:-1])
    if len(dup) == 0:
        return None
    i = dup[0]
    return int(inputs[order[i]]), int(inputs[order[i + 1]])


def _per_k(masks: np.ndarray) -> dict[int, int]:
    sizes, counts = np.unique(sizes_of(masks), return_counts=True)
    return {int(s): int(c) for s, c in zip(sizes, counts)}


def _validate(name, g, inputs, outputs, has, lacks, start, base_witness) -> Verdict:
    bad = _bad_images(g.parents, inputs, outputs, has, lacks)
    if len(bad):
        i = int(bad[0])
        w = dict(base_witness, set=members_of(inputs[i]), image=members_of(outputs[i]), reason="invalid-image")
        return _fail(name, w, len(inputs), start)
    pair = _collision(inputs, outputs)
    if pair is not None:
        w = dict(base_witness, set=members_of(pair[0]), other=members_of(pair[1]),
                 image=members_of(outputs[np.flatnonzero(inputs == np.uint64(pair[0]))[0]]), reason="collision")
        return _fail(name, w, len(inputs), start)
    return Verdict(name, True, None, len(inputs), time.perf_counter() - start, {"per_k": _per_k(inputs)})


# --- perfect-tree injections ------------------------------------------------

Mapper = Callable[[RootedTree, int, np.ndarray], np.ndarray]


def check_injection_exhaustive(t: RootedTree, v: int, k: int | None = None, *, monitor: bool = True,
                               backend: str | None = None, mapper: Mapper | None = None) -> Verdict:
    """Map every set of class A for ``(v, leftmost leaf)`` and check the images.

    ``k=None`` checks all sizes at once.  Monitor trips and invalid or
    colliding images become failing verdicts with a witness.  ``mapper``
    replaces the kernel call (used to exercise the failure path).
    """
    start = time.perf_counter()
    name = f"injection r={t.shape.r if t.shape else '?'} h={t.shape.h if t.shape else '?'} v={v} k={k if k is not None else 'all'}"
    if t.shape is None:
        raise PreconditionError("perfect", "tree is not perfect")
    v = canonical_vertex(t, v)
    leaf = leftmost_path(t, t.root)[-1]
    base = {"tree": list(t.parents), "v": v, "k": k}
    if v == leaf:
        return Verdict(name, True, None, 0, time.perf_counter() - start, {"per_k": {}})
    inputs = independent_masks(t, forced=[v], forbidden=[leaf], backend=backend)
    if k is not None:
        inputs = inputs[sizes_of(inputs) == k]
    expected = _constrained_profile(t, (v,), (leaf,))
    want = sum(expected) if k is None else (expected[k] if 0 <= k < len(expected) else 0)
    if len(inputs) != want:
        return _fail(name, dict(base, reason=f"domain has {len(inputs)} sets, DP says {want}"), len(inputs), start)
    if len(inputs) == 0:
        return Verdict(name, True, None, 0, time.perf_counter() - start, {"per_k": {}})
    try:
        if mapper is not None:
            outputs = mapper(t, v, inputs)
        else:
            outputs = star_images(t, v, inputs, monitor=monitor, backend=backend)
    except InvariantViolation as exc:
        w = dict(base, reason=f"monitor {exc.condition}", set=members_of(exc.witness) if exc.witness is not None else None)
        return _fail(name, w, len(inputs), start)
    return _validate(name, t, inputs, outputs, leaf, v, start, base)


def recheck_witness(witness: dict, mapper: Mapper | None = None, *, backend: str | None = None) -> bool:
    """Re-run a failing injection witness in isolation; True if it still fails."""
    t = RootedTree.from_parents(witness["tree"])
    v = witness["v"]
    leaf = leftmost_path(t, t.root)[-1]
    sets = [witness["set"]] + ([witness["other"]] if witness.get("other") is not None else [])
    masks = np.array([mask_of(s) for s in sets], dtype=np.uint64)
    try:
        out = mapper(t, v, masks) if mapper is not None else star_images(t, v, masks, backend=backend)
    except InvariantViolation:
        return True
    if len(_bad_images(t.parents, masks, out, leaf, v)):
        return True
    return len(sets) == 2 and out[0] == out[1]


def check_cas_exhaustive(td: RootedTree, tu: RootedTree, *, monitor: bool = True, backend: str | None = None) -> Verdict:
    """Every independent set of the two-tree host containing the root of
    ``tu`` and not the root of ``td`` goes to a distinct valid set."""
    start = time.perf_counter()
    name = f"cas d={td.shape.r},{td.shape.h} u={tu.shape.r},{tu.shape.h}"
    host = Forest((td, tu))
    d, u = host.roots
    inputs = independent_masks(host, forced=[u], forbidden=[d], backend=backend)
    base = {"forest": [list(td.parents), list(tu.parents)], "d": d, "u": u}
    try:
        outputs = cas_images(host, d, u, inputs, monitor=monitor, backend=backend)
    except InvariantViolation as exc:
        return _fail(name, dict(base, reason=f"monitor {exc.condition}", set=members_of(exc.witness or 0)), len(inputs), start)
    return _validate(name, host, inputs, outputs, d, u, start, base)


# --- counting checks --------------------------------------------------------

def _star_profiles(g) -> list[list[int]]:
    return [_constrained_profile(g, (x,)) for x in range(g.n)]


@lru_cache(maxsize=None)
def _perfect_profiles(r: int, h: int) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    t = build_perfect(r, h)
    return tuple(tuple(p) for p in _star_profiles(t)), tuple(_constrained_profile(t))


def _coef(p: Sequence[int], k: int) -> int:
    return p[k] if 0 <= k < len(p) else 0


def check_theorem_main(t: RootedTree) -> Verdict:
    """Stars at the leftmost leaf dominate every other star, for every k."""
    start = time.perf_counter()
    if t.shape is None:
        raise PreconditionError("perfect", "tree is not perfect")
    name = f"main r={t.shape.r} h={t.shape.h}"
    profiles, _ = _perfect_profiles(t.shape.r, t.shape.h)
    leaf = leftmost_path(t, t.root)[-1]
    alpha = independence_number(t)
    checked = 0
    for v in range(t.n):
        for k in range(1, alpha + 1):
            checked += 1
            sv, sl = _coef(profiles[v], k), _coef(profiles[leaf], k)
            if sv > sl:
                return _fail(name, {"tree": list(t.parents), "v": v, "k": k, "star_v": sv, "star_leaf": sl},
                             checked, start)
    return Verdict(name, True, None, checked, time.perf_counter() - start)


def _is_tree_leaf(t: RootedTree, x: int) -> bool:
    return len(t.neighbours(x)) <= 1


def check_hk(t: RootedTree, k_max: int | None = None) -> list[HkReport]:
    """k-HK status for ``k = 1 .. k_max`` (default: the independence number).

    Leaves are degree-one vertices of the underlying free tree, so a root
    with a single child counts.  Sizes above the independence number are
    vacuously k-HK.
    """
    code = canonical_code(t).hex()
    profiles = _star_profiles(t)
    alpha = independence_number(t)
    top = alpha if k_max is None else k_max
    leaves = [x for x in range(t.n) if _is_tree_leaf(t, x)]
    out = []
    for k in range(1, top + 1):
        values = [_coef(p, k) for p in profiles]
        best = max(values)
        arg = values.index(best)
        leaf_best = max(values[x] for x in leaves)
        out.append(HkReport(code, k, arg, best, leaf_best, leaf_best == best))
    return out


def _forest_profiles(F: Forest) -> list[list[int]]:
    """Star profile of every global vertex of a forest of perfect trees."""
    comps = []
    for tr in F.trees:
        if tr.shape is None:
            raise PreconditionError("perfect", "every component must be a perfect tree")
        stars, plain = _perfect_profiles(tr.shape.r, tr.shape.h)
        comps.append((stars, plain))
    out = []
    for i, (stars, _) in enumerate(comps):
        rest = [1]
        for j, (_, plain) in enumerate(comps):
            if j != i:
                rest = _mul(rest, list(plain))
        out.extend(_mul(list(p), rest) for p in stars)
    return out


def check_forest_theorem(F: Forest) -> Verdict:
    """The chosen best leaf has a maximum star in the forest for every k."""
    start = time.perf_counter()
    shapes = [(tr.shape.r, tr.shape.h) if tr.shape else None for tr in F.trees]
    name = f"forest {shapes}"
    profiles = _forest_profiles(F)
    sel = best_leaf(F)
    alpha = independence_number(F)
    checked = 0
    for k in range(1, alpha + 1):
        best = _coef(profiles[sel.leaf], k)
        for v, p in enumerate(profiles):
            checked += 1
            if _coef(p, k) > best:
                w = {"shapes": shapes, "leaf": sel.leaf, "v": v, "k": k, "star_v": _coef(p, k), "star_leaf": best}
                return _fail(name, w, checked, start)
    return Verdict(name, True, None, checked, time.perf_counter() - start, {"leaf": sel.leaf, "rule": sel.rule})


# --- forest lemmas ------------------------------------------------------------

def _closed_neighbourhood(F: Forest, region: set[int]) -> set[int]:
    out = set(region)
    for x in region:
        out.update(F.neighbours(x))
    return out


def _lemma_check(name, F, l1, l2, old, new, work, mapper, *, region, monitor, start) -> Verdict:
    """Shared driver: enumerate the domain, map, validate, and confirm that
    only ``work`` vertices changed.

    With ``region`` the domain is the independent sets of the sub-forest
    induced by ``work`` and its neighbours.  Sets outside it pass through
    unchanged and cannot create conflicts, so injectivity there is
    equivalent to injectivity on the whole forest.
    """
    allowed = _closed_neighbourhood(F, work) if region else None
    inputs = independent_masks(F, forced=[old], forbidden=[new], allowed=allowed)
    base = {"shapes": [(t.shape.r, t.shape.h) for t in F.trees], "l1": l1, "l2": l2}
    work_mask = np.uint64(mask_of(work))
    outputs = np.empty_like(inputs)
    for i, m in enumerate(inputs):
        try:
            outputs[i] = mask_of(mapper(F, l1, l2, members_of(m), monitor=monitor))
        except (InvariantViolation, PreconditionError) as exc:
            return _fail(name, dict(base, set=members_of(m), reason=f"{type(exc).__name__} {exc}"), i + 1, start)
    moved = np.flatnonzero((inputs ^ outputs) & ~work_mask)
    if len(moved):
        i = int(moved[0])
        return _fail(name, dict(base, set=members_of(inputs[i]), reason="changed a vertex outside the work region"),
                     len(inputs), start)
    verdict = _validate(name, F, inputs, outputs, new, old, start, base)
    verdict.details["region"] = len(allowed) if allowed is not None else F.n
    return verdict


def _star_inequality(F: Forest, small: int, large: int) -> dict | None:
    profiles = _forest_profiles(F)
    for k in range(1, max(len(profiles[small]), len(profiles[large]))):
        a, b = _coef(profiles[small], k), _coef(profiles[large], k)
        if a > b:
            return {"k": k, "smaller_side": small, "count": a, "other": large, "other_count": b}
    return None


def check_arity_lemma(F: Forest, l1: int, l2: int, *, region: bool = True, monitor: bool = True) -> Verdict:
    """Leaves ``l1`` (arity r1) and ``l2`` (arity r2 > r1): the map from
    sets with ``l1`` to sets with ``l2`` is injective, and the star at
    ``l1`` never exceeds the star at ``l2``."""
    start = time.perf_counter()
    name = f"arity-lemma {[(t.shape.r, t.shape.h) for t in F.trees]} l1={l1} l2={l2}"
    p1, p2 = F.parents[l1], F.parents[l2]
    work = {l1, l2, p1, p2, *F.children[p1], *F.children[p2]}
    if F.parents[p1] >= 0:
        work.add(F.parents[p1])
    verdict = _lemma_check(name, F, l1, l2, l1, l2, work, arity_map, region=region, monitor=monitor, start=start)
    if verdict.passed:
        bad = _star_inequality(F, l1, l2)
        if bad:
            return _fail(name, dict(bad, reason="star inequality"), verdict.checked, start)
    return verdict


def check_level_lemma(F: Forest, l1: int, l2: int, *, region: bool = True, monitor: bool = True) -> Verdict:
    """Equal arity, ``h1 < h2``.  Even ``h1``: star(l1) <= star(l2) via an
    injection from sets with ``l1``; odd ``h1``: the reverse."""
    start = time.perf_counter()
    name = f"level-lemma {[(t.shape.r, t.shape.h) for t in F.trees]} l1={l1} l2={l2}"
    i1 = F.component(l1)[0]
    h1 = F.trees[i1].shape.h
    old, new = (l1, l2) if h1 % 2 == 0 else (l2, l1)
    emb = plane_embedding(F, l1, l2)
    work = set(emb.mirror)
    verdict = _lemma_check(name, F, l1, l2, old, new, work, level_map, region=region, monitor=monitor, start=start)
    if verdict.passed:
        bad = _star_inequality(F, old, new)
        if bad:
            return _fail(name, dict(bad, reason="star inequality"), verdict.checked, start)
    return verdict


# --- pools and families -------------------------------------------------------

POOL_SHAPES = ((2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4))


def perfect_pool(n_max: int = 40) -> list[tuple[int, int]]:
    """All (r, h) with h >= 2 whose perfect tree has at most ``n_max`` vertices."""
    out = []
    r = 2
    while r + 1 <= n_max:
        h = 2
        while (r ** h - 1) // (r - 1) <= n_max:
            out.append((r, h))
            h += 1
        r += 1
    return out


def forest_pool(n_max: int = 60, shapes: Iterable[tuple[int, int]] = POOL_SHAPES,
                sizes: Iterable[int] = (2, 3)) -> list[Forest]:
    """Ordered tuples of perfect components with at most ``n_max`` vertices."""
    shapes = list(shapes)
    out = []
    for m in sizes:
        for combo in itertools.product(shapes, repeat=m):
            if sum((r ** h - 1) // (r - 1) for r, h in combo) <= n_max:
                out.append(Forest(tuple(build_perfect(r, h) for r, h in combo)))
    return out


def lemma_instances(n_max: int = 60, shapes: Iterable[tuple[int, int]] = POOL_SHAPES):
    """Two-component forests from the pool meeting one lemma's hypotheses.

    Yields ``(kind, forest, l1, l2)`` with ``kind`` "arity" or "level"; the
    leaves are the leftmost leaves of their components.
    """
    for F in forest_pool(n_max, shapes, sizes=(2,)):
        (ra, ha), (rb, hb) = [(t.shape.r, t.shape.h) for t in F.trees]
        la = F.offsets[0] + leftmost_path(F.trees[0], 0)[-1]
        lb = F.offsets[1] + leftmost_path(F.trees[1], 0)[-1]
        for (r1, h1, l1), (r2, h2, l2) in (((ra, ha, la), (rb, hb, lb)), ((rb, hb, lb), (ra, ha, la))):
            if r1 < r2:
                yield "arity", F, l1, l2
            elif r1 == r2 and h1 < h2:
                yield "level", F, l1, l2


def generate_family(kind: str, params) -> RootedTree:
    """Spider (``params`` = leg lengths) or caterpillar (``params`` = leaves
    per spine vertex, or a mapping with ``spine`` and ``legs``)."""
    if kind == "spider":
        legs = [int(x) for x in params]
        if any(x < 0 for x in legs):
            raise ValueError("leg lengths must be nonnegative")
        parents = [-1]
        for length in legs:
            prev = 0
            for _ in range(length):
                parents.append(prev)
                prev = len(parents) - 1
        return RootedTree.from_parents(parents)
    if kind == "caterpillar":
        if isinstance(params, dict):
            spine, legs = int(params["spine"]), [int(x) for x in params["legs"]]
            if len(legs) != spine:
                raise ValueError(f"need one leg count per spine vertex, got {len(legs)} for spine {spine}")
        else:
            legs = [int(x) for x in params]
            spine = len(legs)
        if spine < 1:
            raise ValueError("a caterpillar needs a nonempty spine")
        if any(x < 0 for x in legs):
            raise ValueError("leg counts must be nonnegative")
        parents = [-1] + list(range(spine - 1))
        for i, count in enumerate(legs):
            parents.extend([i] * count)
        return RootedTree.from_parents(parents)
    raise ValueError(f"unknown family {kind!r}; expected 'spider' or 'caterpillar'")


def _partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for part in range(min(n, largest), 0, -1):
        for rest in _partitions(n - part, part):
            yield (part,) + rest


def _dedup(trees: Iterable[RootedTree]) -> list[RootedTree]:
    seen: dict[bytes, RootedTree] = {}
    for t in trees:
        seen.setdefault(canonical_code(t), t)
    return [seen[c] for c in sorted(seen)]


def all_spiders(n_max: int) -> list[RootedTree]:
    """One spider per isomorphism class with at most ``n_max`` vertices."""
    return _dedup(generate_family("spider", legs) for n in range(1, n_max + 1) for legs in _partitions(n - 1))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def all_caterpillars(n_max: int) -> list[RootedTree]:
    """One caterpillar per isomorphism class with at most ``n_max`` vertices."""
    return _dedup(
        generate_family("caterpillar", legs)
        for n in range(1, n_max + 1)
        for spine in range(1, n + 1)
        for legs in _compositions(n - spine, spine)
    )


def _degrees(t: RootedTree) -> list[int]:
    return [len(t.neighbours(x)) for x in range(t.n)]


def is_spider(t: RootedTree) -> bool:
    return sum(1 for d in _degrees(t) if d >= 3) <= 1


def is_caterpillar(t: RootedTree) -> bool:
    """Removing all leaves leaves a path (or nothing)."""
    deg = _degrees(t)
    inner = [x for x in range(t.n) if deg[x] > 1]
    inner_set = set(inner)
    for x in inner:
        if sum(1 for y in t.neighbours(x) if y in inner_set) > 2:
            return False
    return True


# --- the k-HK sweep -----------------------------------------------------------

def _hk_job(job: tuple[list[int], int | None]) -> list[HkReport]:
    parents, k_max = job
    return check_hk(RootedTree.from_parents(parents), k_max)


def hk_sweep(trees: Iterable[RootedTree], k_max: int | None = None, workers: int = 1) -> list[HkReport]:
    """k-HK reports for every tree, in input order then by k.

    ``workers > 1`` spreads trees over a process pool; ``map`` keeps the
    results in submission order, so output does not depend on scheduling.
    """
    jobs = [(list(t.parents), k_max) for t in trees]
    if workers <= 1:
        results = [_hk_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_hk_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [rep for reps in results for rep in reps]


def unlabeled_trees_up_to(n_max: int, cap: int | None = None) -> list[RootedTree]:
    return [t for n in range(1, n_max + 1) for t in enumerate_unlabeled_trees(n, cap=cap or max(n_max, 10))]
