from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkstar.counting import count_star, enumerate_independent_sets, is_independent
from hkstar.errors import PreconditionError
from hkstar.forest import (
    LeafSelection,
    arity_map,
    best_leaf,
    forest_count_star,
    forest_star_profile,
    level_map,
    plane_embedding,
)
from hkstar.trees import Forest, RootedTree, build_perfect, leftmost_leaf
from oracles import subset_profile


def forest(*shapes):
    return Forest(tuple(build_perfect(r, h) for r, h in shapes))


def test_best_leaf_examples():
    F = forest((2, 3), (3, 2), (3, 4))
    assert best_leaf(F) == LeafSelection(2, F.offsets[2] + 13, "tallest")
    F = forest((3, 3), (3, 4))
    assert best_leaf(F) == LeafSelection(0, 4, "shortest-odd")
    F = forest((2, 2))
    assert best_leaf(F) == LeafSelection(0, 1, "tallest")


def test_best_leaf_ties_and_single_vertices():
    F = forest((2, 4), (2, 4))
    assert best_leaf(F).tree_index == 0
    F = forest((2, 3), (2, 1))
    # the single vertex has one level, the shortest odd count
    assert best_leaf(F) == LeafSelection(1, 7, "shortest-odd")
    with pytest.raises(PreconditionError):
        best_leaf(Forest((RootedTree.from_parents([-1, 0, 1, 0, 0]),)))


def test_arity_map_examples():
    F = forest((2, 2), (3, 2))  # a0..a2, b0..b3 = 3..6
    assert arity_map(F, 1, 4, {1, 3}) == {0, 4}
    assert arity_map(F, 1, 4, {1, 2}) == {2, 4}
    assert arity_map(F, 1, 4, {1}) == {4}


def test_arity_map_preconditions():
    F = forest((3, 2), (2, 2))
    with pytest.raises(PreconditionError):
        arity_map(F, 1, 5, {1})
    F = forest((2, 2), (3, 2))
    with pytest.raises(PreconditionError):
        arity_map(F, 0, 4, {0})
    with pytest.raises(PreconditionError):
        arity_map(F, 1, 4, {1, 4})


def test_level_map_examples():
    F = forest((2, 2), (2, 3))  # b0 = 3
    assert level_map(F, 1, 6, {1, 4}) == {0, 6}
    assert level_map(F, 1, 6, {1, 2}) == {2, 6}
    G = forest((2, 3), (2, 4))
    l1, l2 = 3, 7 + 7
    assert level_map(G, l1, l2, {l2}) == {l1}


def test_level_map_preconditions():
    with pytest.raises(PreconditionError):
        level_map(forest((2, 2), (3, 3)), 1, 7, {1})
    with pytest.raises(PreconditionError):
        level_map(forest((2, 3), (2, 2)), 3, 8, {3})
    # odd h1: input must contain l2, not l1
    with pytest.raises(PreconditionError):
        level_map(forest((2, 3), (2, 4)), 3, 14, {3})


@pytest.mark.parametrize("s1,s2", [((2, 2), (2, 4)), ((3, 3), (3, 4)), ((2, 3), (2, 5)), ((2, 1), (2, 3))])
def test_plane_embedding_is_homomorphism(s1, s2):
    F = forest(s1, s2)
    l1 = leftmost_leaf(F.trees[0])
    for l2 in F.trees[1].leaves()[:5]:
        l2 += F.offsets[1]
        emb = plane_embedding(F, l1, l2)
        assert emb.forward[l1] == l2
        assert len(set(emb.forward.values())) == len(emb.forward)
        for x, y in emb.forward.items():
            p = F.parents[x]
            if p >= 0:
                assert F.parents[y] == emb.forward[p]
        for x, y in emb.mirror.items():
            assert emb.mirror[y] == x


def test_forest_count_examples():
    F = forest((2, 2), (2, 2))
    assert forest_count_star(F, 1, 2) == 4
    G = forest((2, 2), (3, 2))
    for k in range(1, 5):
        assert forest_count_star(G, 4, k) >= forest_count_star(G, 1, k)
    assert forest_count_star(G, 1, 1) == 1


@pytest.mark.parametrize("shapes", [
    [(2, 2), (2, 2)], [(2, 2), (3, 2)], [(2, 3), (3, 2)], [(2, 2), (2, 3), (3, 2)], [(2, 1), (2, 3)],
])
def test_forest_profile_matches_subsets(shapes):
    F = forest(*shapes)
    for v in range(F.n):
        assert forest_star_profile(F, v) == subset_profile(F.parents, forced=[v])
        assert forest_star_profile(F, v) == [count_star(F, v, k) for k in range(len(forest_star_profile(F, v)))]


def _forest_domain(F, has, lacks):
    for k in range(1, F.n + 1):
        sets = [s for s in enumerate_independent_sets(F, k) if has in s and lacks not in s]
        if not sets and k > 1:
            return
        yield from sets


@pytest.mark.parametrize("shapes", [[(2, 2), (3, 2)], [(2, 3), (3, 2)], [(3, 2), (2, 2)], [(2, 2), (3, 3)]])
def test_arity_map_injective_all_leaves(shapes):
    F = forest(*shapes)
    small = 0 if F.trees[0].shape.r < F.trees[1].shape.r else 1
    l1s = [F.offsets[small] + x for x in F.trees[small].leaves()]
    l2s = [F.offsets[1 - small] + x for x in F.trees[1 - small].leaves()]
    for l1, l2 in itertools.product(l1s, l2s[:3]):
        images = set()
        count = 0
        for I in _forest_domain(F, l1, l2):
            out = arity_map(F, l1, l2, I)
            assert is_independent(F, out) and len(out) == len(I) and l2 in out and l1 not in out
            images.add(out)
            count += 1
        assert len(images) == count


@pytest.mark.parametrize("shapes", [[(2, 2), (2, 3)], [(2, 2), (2, 4)], [(2, 3), (2, 4)], [(3, 2), (3, 3)], [(2, 1), (2, 2)]])
def test_level_map_injective_all_leaves(shapes):
    F = forest(*shapes)
    h1 = F.trees[0].shape.h
    l1s = [x for x in F.trees[0].leaves()]
    l2s = [F.offsets[1] + x for x in F.trees[1].leaves()]
    for l1, l2 in itertools.product(l1s, l2s[:4]):
        old, new = (l1, l2) if h1 % 2 == 0 else (l2, l1)
        images = set()
        count = 0
        for I in _forest_domain(F, old, new):
            out = level_map(F, l1, l2, I)
            assert is_independent(F, out) and len(out) == len(I) and new in out and old not in out
            images.add(out)
            count += 1
        assert len(images) == count


@given(st.lists(st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 2), (3, 3), (4, 2)]), min_size=1, max_size=3))
def test_best_leaf_is_optimal(shapes):
    F = forest(*shapes)
    sel = best_leaf(F)
    assert F.children[sel.leaf] == () or not F.children[sel.leaf]
    best = forest_star_profile(F, sel.leaf)
    for v in range(F.n):
        prof = forest_star_profile(F, v)
        for k in range(1, len(prof)):
            assert prof[k] <= (best[k] if k < len(best) else 0)
