"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict in ``RESULTS``; ``conftest.py``
prints them at the end of the run, and running this file directly prints
them as well.
"""

import random
import sys
import time
from pathlib import Path

import pytest

from netkat_safecheck.cli import BenchJob, run_bench, worker_cap
from netkat_safecheck.explain import Verdict, explain, is_minimal, minimize
from netkat_safecheck.generators import GenConfig, random_network_problem, random_problem
from netkat_safecheck.oracle import all_packets, eval_set, is_empty_star_program, saturation_depth
from netkat_safecheck.parser import parse_problem
from netkat_safecheck.rewrite import normalize, reduce_path, termination_measure
from netkat_safecheck.terms import format_path, policy_size
from netkat_safecheck.unfold import build_program

FIXTURES = Path(__file__).parent / "fixtures"
ZOO_DIR = Path(__file__).resolve().parent.parent / "data" / "topozoo"

RESULTS = {}
EXPLANATIONS = []  # every Explanation produced by criteria 1-6


def record(num, ok, detail):
    RESULTS[num] = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def load(name):
    return parse_problem((FIXTURES / name).read_text())


def timed_explain(prob):
    t0 = time.perf_counter()
    r = explain(prob)
    EXPLANATIONS.append(r)
    return r, time.perf_counter() - t0


def test_criterion_01_golden_a():
    r, dt = timed_explain(load("fig3_p1p2_in1.nk"))
    got = [format_path(p) for p in r.sorted_paths()]
    ok = r.verdict is Verdict.UNSAFE and got == ["pt=1 . pt<-5 . pt<-6 . pt<-4"] and r.unfold_n == 6 and dt < 1
    assert record(1, ok, f"paths={got} n={r.unfold_n} time={dt:.4f}s")


def test_criterion_02_golden_b():
    r, dt = timed_explain(load("fig3_p1p2_in3.nk"))
    got = [format_path(p) for p in r.sorted_paths()]
    ok = r.verdict is Verdict.UNSAFE and got == ["pt=3 . pt<-5 . pt<-6 . pt<-2"] and dt < 1
    assert record(2, ok, f"paths={got} time={dt:.4f}s")


def test_criterion_03_golden_safety():
    r1, dt1 = timed_explain(load("fig3_p1_only.nk"))
    r2, dt2 = timed_explain(load("fig3_p2_only.nk"))
    ok = all(r.verdict is Verdict.SAFE and not r.paths and r.unfold_n == 6 for r in (r1, r2))
    ok = ok and max(dt1, dt2) < 1
    assert record(3, ok, f"p1: {r1.verdict.value}, p2: {r2.verdict.value}, time={max(dt1, dt2):.4f}s")


def test_criterion_04_firewall():
    from netkat_safecheck.parser import parse_policy
    from netkat_safecheck.rewrite import to_union_free_sum

    r, dt = timed_explain(load("firewall.nk"))
    (expected,) = to_union_free_sum(
        parse_policy(
            "sw=A . pt=1 . dst=H2 . firewalled=0 . pt<-2 . sw<-B . pt<-4 . typ=SSH"
            " . firewalled<-1 . pt<-5 . sw<-A . pt<-6 . pt<-3"
        )
    )
    ok = r.verdict is Verdict.UNSAFE and len(r.paths) == 1 and r.unfold_n == 4 and dt < 1
    detail = f"{len(r.paths)} path(s), time={dt:.4f}s"
    if ok:
        (path,) = r.paths
        same_multiset = sorted(map(repr, path)) == sorted(map(repr, expected))
        fields = {t.field for t in expected}
        same_order = all(
            [t for t in path if t.field == f] == [t for t in expected if t.field == f] for f in fields
        )
        names = {format_path([t]) for t in path}
        lost_tokens = {"pt<-2", "pt<-5", "firewalled=0", "firewalled<-1"} <= names
        ok = same_multiset and same_order and lost_tokens
        detail = f"{format_path(path)}; multiset={same_multiset} per-field order={same_order} time={dt:.4f}s"
    assert record(4, ok, detail)


def test_criterion_05_consistency():
    t0 = time.perf_counter()
    cfg = GenConfig()
    disagreements, empties = [], 0
    for seed in range(500):
        prob = random_problem(random.Random(seed), cfg)
        assert len(prob.domains) <= 3 and max(len(v) for v in prob.domains.values()) <= 4
        assert policy_size(prob.switch_policy) + policy_size(prob.topology) <= 25 and prob.unfold_n <= 4
        r = explain(prob)
        EXPLANATIONS.append(r)
        prog = build_program(prob, prob.unfold_n)
        oracle_empty = not eval_set(prog, all_packets(prob.domains))
        empties += oracle_empty
        if (r.verdict is Verdict.SAFE) != oracle_empty:
            disagreements.append(seed)
    dt = time.perf_counter() - t0
    ok = not disagreements and dt < 300
    assert record(5, ok, f"500 problems, {empties} empty, disagreements={disagreements[:5]} time={dt:.1f}s")


def test_criterion_06_approximation():
    t0 = time.perf_counter()
    bad, depths, empty = [], [], 0
    for seed in range(100):
        prob = random_network_problem(random.Random(seed))
        depth = saturation_depth(prob)
        depths.append(depth)
        star_empty = is_empty_star_program(prob)
        bounded = [not normalize(build_program(prob, n), prob.domains) for n in range(depth + 1)]
        r = explain(prob, depth)
        EXPLANATIONS.append(r)
        empty += star_empty
        if star_empty != all(bounded) or (r.verdict is Verdict.SAFE) != star_empty:
            bad.append(seed)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 300
    assert record(6, ok, f"100 networks, {empty} safe, max depth={max(depths)}, mismatches={bad[:5]} time={dt:.1f}s")


def test_criterion_07_confluence():
    t0 = time.perf_counter()
    differ = []
    for seed in range(100):
        rng = random.Random(10_000 + seed)
        prob = random_problem(rng)
        policy = build_program(prob, prob.unfold_n)
        s1, s2 = random.Random(2 * seed), random.Random(2 * seed + 1)
        a = normalize(policy, prob.domains, reducer=lambda p: reduce_path(p, rng=s1))
        b = normalize(policy, prob.domains, reducer=lambda p: reduce_path(p, rng=s2))
        if a != b or a != normalize(policy, prob.domains):
            differ.append(seed)
    dt = time.perf_counter() - t0
    ok = not differ and dt < 120
    assert record(7, ok, f"100 policies, differing={differ[:5]} time={dt:.1f}s")


def test_criterion_08_minimality():
    if not EXPLANATIONS:
        pytest.skip("criteria 1-6 did not run")
    not_minimal = sum(not is_minimal(r.paths) for r in EXPLANATIONS)
    not_idempotent = sum(minimize(r.paths) != r.paths for r in EXPLANATIONS)
    ok = not_minimal == 0 and not_idempotent == 0
    assert record(
        8, ok, f"{len(EXPLANATIONS)} explanations, non-minimal={not_minimal} non-idempotent={not_idempotent}"
    )


def test_criterion_09_termination():
    t0 = time.perf_counter()
    steps, violations = 0, []

    def observer(rule, before, after):
        nonlocal steps
        steps += 1
        if not termination_measure(after) < termination_measure(before):
            violations.append((rule, before, after))

    for seed in range(500):
        prob = random_problem(random.Random(seed))
        normalize(build_program(prob, prob.unfold_n), prob.domains, reducer=lambda p: reduce_path(p, observer=observer))
    dt = time.perf_counter() - t0
    ok = steps > 0 and not violations
    assert record(9, ok, f"{steps} rule applications, violations={len(violations)} time={dt:.1f}s")


def _zoo_files(max_nodes=30):
    if not ZOO_DIR.is_dir() or not any(ZOO_DIR.glob("*.graphml")):
        try:
            sys.path.insert(0, str(ZOO_DIR.parent.parent / "scripts"))
            import fetch_topology_zoo

            fetch_topology_zoo.main(["--out", str(ZOO_DIR)])
        except ImportError as exc:
            pytest.skip(f"Topology Zoo data unavailable: {exc}")
    import networkx as nx

    return [p for p in sorted(ZOO_DIR.glob("*.graphml")) if nx.read_graphml(p).number_of_nodes() <= max_nodes]


def test_criterion_10_topology_zoo():
    files = _zoo_files()
    t0 = time.perf_counter()
    rows = run_bench([BenchJob(str(f)) for f in files], timeout=60, workers=worker_cap())
    wall = time.perf_counter() - t0
    failed = [r["file"] for r in rows if r["status"] != "ok"]
    totals = [float(r["io_time"]) + float(r["analysis_time"]) for r in rows if r["status"] == "ok"]
    io = sum(float(r["io_time"]) for r in rows if r["status"] == "ok")
    analysis = sum(float(r["analysis_time"]) for r in rows if r["status"] == "ok")
    slowest = max(totals, default=0.0)
    ok = bool(rows) and not failed and slowest < 60
    assert record(
        10,
        ok,
        f"{len(rows)} graphs (<=30 nodes), failed={failed[:5]} slowest={slowest:.3f}s "
        f"io={io:.2f}s analysis={analysis:.2f}s wall={wall:.1f}s",
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
