from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from hkstar.cli import main
from hkstar.counting import count_classes, count_star, independence_profile
from hkstar.trees import Forest, build_perfect, serialize_forest

GOLDEN = Path(__file__).parent / "golden" / "cas_r2_example.jsonl"


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_count(capsys):
    assert run(capsys, "count", "--tree", "perfect:2:3", "--vertex", "3", "--k", "2")[:2] == (0, "5\n")


def test_count_rejects_unary_shape(capsys):
    status, out, err = run(capsys, "count", "--tree", "perfect:1:3", "--vertex", "0", "--k", "1")
    assert status == 2 and out == "" and "error" in err


def test_map_with_trace(capsys):
    status, out, _ = run(capsys, "map", "--tree", "perfect:2:4", "--v", "0", "--set", "0,3", "--trace")
    lines = out.splitlines()
    assert status == 0 and lines[0] == "2,7"
    records = [json.loads(x) for x in lines[1:]]
    assert records and records[-1]["set_after"] == [2, 7]


def test_cas_matches_golden(capsys):
    status, out, _ = run(capsys, "cas", "--td", "perfect:2:3", "--tu", "perfect:2:4",
                         "--set", "u0,u3,u4,u11,u12,u13,u14,d1,d5", "--trace")
    assert status == 0
    first, rest = out.split("\n", 1)
    assert first == "d0,u1,d3,d4,d5,u11,u12,u13,u14"
    assert rest == GOLDEN.read_text()


def test_library_adapters(capsys, tmp_path):
    t = build_perfect(2, 4)
    _, out, _ = run(capsys, "profile", "--tree", "perfect:2:4")
    assert out.strip() == ",".join(map(str, independence_profile(t)))
    _, out, _ = run(capsys, "profile", "--tree", "perfect:2:4", "--vertex", "3")
    assert out.strip() == ",".join(map(str, independence_profile(t, forced=3)))
    _, out, _ = run(capsys, "classes", "--tree", "perfect:2:4", "--v", "0", "--leaf", "7", "--k", "3")
    s = count_classes(t, 0, 7, 3)
    assert out.strip() == f"a={s.a} b={s.b} c={s.c}"
    f = tmp_path / "two.txt"
    F = Forest((build_perfect(2, 2), build_perfect(3, 2)))
    f.write_text(serialize_forest(F))
    _, out, _ = run(capsys, "count", "--forest", str(f), "--vertex", "4", "--k", "2")
    assert out.strip() == str(count_star(F, 4, 2))


def test_best_leaf(capsys):
    status, out, _ = run(capsys, "best-leaf", "--forest", "perfect:3:3+perfect:3:4")
    assert status == 0 and json.loads(out) == {"tree_index": 0, "leaf": 4, "rule": "shortest-odd"}


def test_enum_trees(capsys):
    status, out, err = run(capsys, "enum-trees", "--n", "4")
    assert status == 0 and len(out.strip().split("\n\n")) == 2 and "2 trees" in err
    assert run(capsys, "enum-trees", "--n", "11")[0] == 2


def test_verify_main_and_hk(capsys):
    status, out, err = run(capsys, "verify", "main", "--n-max", "15")
    records = [json.loads(x) for x in out.splitlines()]
    assert status == 0 and records and all(r["passed"] for r in records)
    assert "elapsed" not in records[0] and "verify main: pass" in err
    status, out, _ = run(capsys, "verify", "hk", "--n-max", "6", "--k-max", "3")
    assert status == 0 and all(json.loads(x)["is_k_hk"] for x in out.splitlines())


def test_verify_injection_budget(capsys):
    status, out, err = run(capsys, "verify", "injection", "--n-max", "15", "--budget", "50")
    assert status == 0 and "skipped" in err
    assert all(json.loads(x)["passed"] for x in out.splitlines())


def test_output_is_deterministic(capsys):
    argv = ["verify", "forest", "--n-max", "20"]
    first = run(capsys, *argv)[1]
    assert first and first == run(capsys, *argv)[1]


@pytest.mark.parametrize("argv", [
    [], ["count"], ["count", "--tree", "perfect:2:3"], ["frobnicate"],
    ["map", "--tree", "perfect:2:4", "--v", "0", "--set", "0,x"],
    ["map", "--tree", "perfect:2:4", "--v", "0", "--set", "0,7"],
    ["count", "--tree", "/nonexistent/file", "--vertex", "0", "--k", "1"],
])
def test_usage_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hkstar", "count", "--tree", "perfect:2:3", "--vertex", "0", "--k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "4\n"
