from __future__ import annotations

import json
import random
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkstar.counting import enumerate_independent_sets, is_independent
from hkstar.errors import InvariantViolation, PreconditionError
from hkstar.injections import (
    canonical_vertex,
    cas,
    format_trace,
    map_star,
    phi_even,
    phi_odd,
    replay_trace,
    run_cas,
)
from hkstar.trees import Forest, RootedTree, build_perfect, leftmost_path

GOLDEN = Path(__file__).parent / "golden" / "cas_r2_example.jsonl"
EXAMPLE_INPUT = ["u0", "u3", "u4", "u11", "u12", "u13", "u14", "d1", "d5"]
EXAMPLE_OUTPUT = {"d0", "u1", "d3", "d4", "d5", "u11", "u12", "u13", "u14"}

# (r, h) trees small enough to sample class-A sets by listing them
SHAPES = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2), (4, 3), (2, 5)]


def test_cas_worked_example():
    trace = []
    out = cas(EXAMPLE_INPUT, build_perfect(2, 3), build_perfect(2, 4), trace=trace)
    assert out == EXAMPLE_OUTPUT
    steps = [(e.s, e.t, e.action) for e in trace]
    assert steps == [
        ("u0", "d0", "swap"), ("d1", "u1", "swap"), ("d2", "u2", "skip"),
        ("u3", "d3", "swap"), ("u4", "d4", "swap"), (None, None, "terminate"),
    ]
    assert format_trace(trace) == GOLDEN.read_text()


def test_cas_singleton_and_precondition():
    td, tu = build_perfect(2, 3), build_perfect(2, 4)
    trace = []
    assert cas({"u0"}, td, tu, trace=trace) == {"d0"}
    assert [e.action for e in trace] == ["swap", "skip", "skip", "terminate"]
    with pytest.raises(PreconditionError) as exc:
        cas({"u0", "d0"}, td, tu)
    assert exc.value.condition == "d-out"


@pytest.mark.parametrize("td,tu,cond", [
    ((2, 2), (2, 4), "odd-levels"),
    ((2, 3), (2, 3), "taller"),
    ((2, 3), (3, 4), "arity"),
])
def test_cas_shape_preconditions(td, tu, cond):
    with pytest.raises(PreconditionError) as exc:
        cas({"u0"}, build_perfect(*td), build_perfect(*tu))
    assert exc.value.condition == cond


def test_cas_rejects_dependent_and_bad_labels():
    td, tu = build_perfect(2, 3), build_perfect(2, 4)
    with pytest.raises(PreconditionError):
        cas({"u0", "u1"}, td, tu)
    with pytest.raises(PreconditionError):
        cas({"u0", "x3"}, td, tu)
    with pytest.raises(PreconditionError):
        cas({"u0", "d7"}, td, tu)


def test_cas_single_vertex_td():
    # a one-vertex T_d is legal (odd level count 1)
    out = cas({"u0", "u3"}, build_perfect(2, 1), build_perfect(2, 3))
    assert out == {"d0", "u3"}


def test_phi_even_examples():
    t = build_perfect(2, 5)
    assert phi_even(t, 0, {0, 7}) == {1, 15}
    trace = []
    assert phi_even(t, 0, {0, 7, 4}, trace=trace) == {1, 15, 16}
    assert any(e.action == "cas-call" for e in trace)
    assert phi_even(build_perfect(2, 3), 0, {0, 4}) == {3, 4}


def test_phi_odd_examples():
    t = build_perfect(2, 4)
    assert phi_odd(t, 0, {0, 3}) == {2, 7}
    assert phi_odd(t, 0, {0, 3, 5}) == {1, 2, 7}
    assert phi_odd(build_perfect(2, 2), 0, {0}) == {1}


def test_map_star_dispatch():
    assert map_star(build_perfect(2, 5), 0, {0, 7}) == {1, 15}
    assert map_star(build_perfect(2, 4), 0, {0, 3}) == {2, 7}
    for r, h in SHAPES:
        t = build_perfect(r, h)
        path = leftmost_path(t, 0)
        for v in path[:-1]:
            assert map_star(t, v, {v}) == {path[-1]}


def test_map_errors():
    t = build_perfect(2, 4)
    with pytest.raises(PreconditionError) as exc:
        phi_even(t, 0, {0})
    assert exc.value.condition == "parity"
    with pytest.raises(PreconditionError):
        phi_odd(build_perfect(2, 5), 0, {0})
    with pytest.raises(PreconditionError) as exc:
        map_star(t, 7, {7})
    assert exc.value.condition == "distinct"
    with pytest.raises(PreconditionError) as exc:
        map_star(t, 2, {2})
    assert exc.value.condition == "leftmost-path"
    with pytest.raises(PreconditionError) as exc:
        map_star(t, 0, {0, 7})
    assert exc.value.condition == "class-A"
    with pytest.raises(PreconditionError):
        map_star(t, 0, {0, 1})
    with pytest.raises(PreconditionError):
        map_star(t, 0, {0, 99})
    with pytest.raises(PreconditionError):
        map_star(RootedTree.from_parents([-1, 0, 0, 1]), 0, {0})  # not perfect


def test_canonical_vertex_by_depth():
    t = build_perfect(3, 3)
    assert canonical_vertex(t, 2) == 1
    assert canonical_vertex(t, 7) == 4
    assert canonical_vertex(t, 12) == 4
    assert canonical_vertex(t, 0) == 0


def _class_a(t, v, k):
    leaf = leftmost_path(t, 0)[-1]
    return [s for s in enumerate_independent_sets(t, k) if v in s and leaf not in s]


@st.composite
def class_a_instances(draw):
    r, h = draw(st.sampled_from(SHAPES[:-1]))
    t = build_perfect(r, h)
    path = leftmost_path(t, 0)
    v = draw(st.sampled_from(path[:-1]))
    k = draw(st.integers(1, 5))
    pool = _class_a(t, v, k)
    if not pool:
        k = 1
        pool = [frozenset({v})]
    return t, v, draw(st.sampled_from(pool))


@given(class_a_instances())
def test_map_output_valid_and_trace_replays(inst):
    t, v, I = inst
    leaf = leftmost_path(t, 0)[-1]
    trace = []
    out = map_star(t, v, I, trace=trace)
    assert len(out) == len(I)
    assert is_independent(t, out)
    assert leaf in out and v not in out
    assert replay_trace(I, trace) == set(out)
    assert trace[-1].set_after == sorted(out)


@given(class_a_instances())
def test_untouched_vertices_unchanged(inst):
    t, v, I = inst
    trace = []
    out = map_star(t, v, I, trace=trace)
    seen = set()
    for e in trace:
        seen.update(x for x in (e.s, e.t) if x is not None)
        seen.update(e.enqueued_s)
        seen.update(e.enqueued_t)
    # even-distance maps also touch whole CAS regions, reached through cas-call events
    for e in trace:
        if e.action == "cas-call":
            seen.update(t.subtree(e.s))
            seen.update(t.subtree(e.t))
    changed = set(I) ^ set(out)
    assert changed <= seen


@pytest.mark.parametrize("r,h", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 3)])
def test_maps_injective_by_listing(r, h):
    t = build_perfect(r, h)
    path = leftmost_path(t, 0)
    for v in path[:-1]:
        for k in range(1, t.n + 1):
            domain = _class_a(t, v, k)
            if not domain and k > 1:
                break
            images = {map_star(t, v, I) for I in domain}
            assert len(images) == len(domain)


def test_cas_injective_by_listing():
    td, tu = build_perfect(2, 3), build_perfect(2, 4)
    host = Forest((td, tu))
    d, u = host.roots
    seen = {}
    for k in range(1, 12):
        for I in enumerate_independent_sets(host, k):
            if u in I and d not in I:
                out = frozenset(run_cas(host, I, d, u))
                assert out not in seen
                seen[out] = I
                assert d in out and u not in out and len(out) == k and is_independent(host, out)
    assert seen


def test_monitor_catches_corrupted_state():
    # start CAS with d already in the set: A4 trips on the first check
    td, tu = build_perfect(2, 3), build_perfect(2, 4)
    host = Forest((td, tu))
    d, u = host.roots
    with pytest.raises(InvariantViolation) as exc:
        run_cas(host, {u, d}, d, u)
    assert exc.value.condition in {"A3", "A4"}


def test_trace_records_have_fixed_keys():
    trace = []
    map_star(build_perfect(2, 4), 0, {0, 3, 5}, trace=trace)
    for line in format_trace(trace).splitlines():
        rec = json.loads(line)
        assert list(rec) == ["iteration", "s", "t", "action", "enqueued_s", "enqueued_t", "set_after"]
        assert rec["set_after"] == sorted(rec["set_after"])


def test_random_large_sets_on_perfect_2_5():
    rng = random.Random(7)
    t = build_perfect(2, 5)
    path = leftmost_path(t, 0)
    for _ in range(300):
        v = rng.choice(path[:-1])
        members = {v}
        for x in rng.sample(range(t.n), t.n):
            if x != path[-1] and all(y not in members for y in t.neighbours(x)):
                if rng.random() < 0.6:
                    members.add(x)
        out = map_star(t, v, members)
        assert is_independent(t, out) and len(out) == len(members)
