from hypothesis import given, strategies as st

from netkat_safecheck.explain import Explanation, Verdict, explain, is_minimal, minimize, subsumes
from netkat_safecheck.oracle import all_packets, eval_set, is_empty_program
from netkat_safecheck.parser import SafetyProblem, parse_policy
from netkat_safecheck.rewrite import symbolic_zero_check, to_union_free_sum
from netkat_safecheck.terms import DROP, ONE, ZERO, DomainMap, Mod, Test, format_path, policy_of_path
from netkat_safecheck.unfold import build_program

from .conftest import load_fixture
from .strategies import paths, problems


def P(text):
    (path,) = to_union_free_sum(parse_policy(text))
    return path


class TestSubsumes:
    def test_deleting_a_middle_block(self):
        assert subsumes(P("f=1 . g<-1"), P("f=1 . h<-2 . g<-1"))

    def test_reflexive(self):
        p = P("f=1 . g<-1")
        assert subsumes(p, p)
        assert not subsumes(p, p, strict=True)

    def test_differing_token(self):
        assert not subsumes(P("pt=1 . pt<-5"), P("pt=1 . pt<-6"))

    def test_order_matters(self):
        assert not subsumes(P("pt<-5 . pt<-6"), P("pt<-6 . pt<-5"))

    @given(paths(), st.data())
    def test_deletion_gives_subsumed_path(self, q, data):
        keep = data.draw(st.lists(st.booleans(), min_size=len(q), max_size=len(q)))
        p = tuple(t for t, k in zip(q, keep) if k)
        assert subsumes(p, q)
        assert subsumes(p, q, strict=True) == (len(p) < len(q))


class TestMinimize:
    def test_keeps_shorter(self):
        e1, e2 = P("f=1 . g<-1"), P("f=1 . h<-2 . g<-1")
        assert minimize({e1, e2}) == {e1}

    def test_empty(self):
        assert minimize(frozenset()) == frozenset()

    def test_incomparable_unchanged(self):
        s = {P("pt=1 . pt<-5"), P("pt=1 . pt<-6")}
        assert minimize(s) == s

    @given(st.lists(paths(max_len=6), max_size=12))
    def test_minimal_and_idempotent(self, ps):
        m = minimize(ps)
        assert is_minimal(m)
        assert minimize(m) == m
        assert m <= set(ps)
        for q in ps:
            assert any(subsumes(p, q) for p in m)


class TestExplain:
    def test_golden_a(self, fig3_a):
        r = explain(fig3_a)
        assert r.verdict is Verdict.UNSAFE
        assert [format_path(p) for p in r.sorted_paths()] == ["pt=1 . pt<-5 . pt<-6 . pt<-4"]
        assert r.unfold_n == 6

    def test_golden_b(self, fig3_b):
        r = explain(fig3_b)
        assert [format_path(p) for p in r.sorted_paths()] == ["pt=3 . pt<-5 . pt<-6 . pt<-2"]

    def test_p2_alone_is_safe(self):
        r = explain(load_fixture("fig3_p2_only.nk"))
        assert r.verdict is Verdict.SAFE and not r.paths

    def test_contradicting_ingress_and_egress(self):
        prob = SafetyProblem(Test("pt", 1), DROP, DROP, Test("pt", 2), DomainMap({"pt": [1, 2]}), 0)
        assert explain(prob).verdict is Verdict.SAFE

    def test_identity_program(self):
        r = explain(load_fixture("identity.nk"))
        assert r.paths == {(Test("pt", 1),)}

    def test_default_bound_used_when_file_has_none(self, fig3_a):
        from dataclasses import replace

        assert explain(replace(fig3_a, unfold_n=None)).unfold_n == 6

    def test_override_bound(self, fig3_a):
        # pt=1 reaches pt=4 after two rounds of p . t, so one unfolding is not enough
        assert explain(fig3_a, 1).verdict is Verdict.SAFE
        assert explain(fig3_a, 2).verdict is Verdict.UNSAFE

    def test_unminimized_is_superset(self, firewall):
        full = explain(firewall, minimized=False)
        small = explain(firewall)
        assert small.paths < full.paths
        assert minimize(full.paths) == small.paths

    def test_stats(self, fig3_a):
        s = explain(fig3_a).stats
        for key in ("summands_before_reduction", "zero_paths", "dedup_count", "elapsed"):
            assert key in s

    @given(problems())
    def test_invariants_on_random_problems(self, prob):
        r = explain(prob)
        assert (r.verdict is Verdict.SAFE) == (not r.paths)
        assert is_minimal(r.paths)
        if r.verdict is Verdict.SAFE:
            assert is_empty_program(prob, r.unfold_n)
        prog = build_program(prob, r.unfold_n)
        for e in r.paths:
            assert not symbolic_zero_check(e)
            witnesses = [x for x in all_packets(prob.domains) if eval_set(policy_of_path(e), [x])]
            assert any(eval_set(prog, [x]) for x in witnesses)


class TestSerialization:
    def test_json_round_trip(self, firewall):
        r = explain(firewall)
        again = Explanation.from_json(r.to_json())
        assert again.paths == r.paths and again.verdict is r.verdict and again.unfold_n == r.unfold_n

    def test_json_tokens(self, fig3_a):
        d = explain(fig3_a).to_json_dict()
        assert d["verdict"] == "unsafe"
        assert d["paths"][0][:2] == [
            {"kind": "test", "field": "pt", "value": 1},
            {"kind": "mod", "field": "pt", "value": 5},
        ]

    def test_units_round_trip(self):
        r = Explanation(Verdict.UNSAFE, frozenset({(ONE,), (Mod("sw", "A"),)}), 1)
        assert Explanation.from_json(r.to_json()).paths == r.paths
        assert Explanation.from_json(Explanation(Verdict.SAFE, frozenset({(ZERO,)}), 0).to_json()).paths == {(ZERO,)}

    def test_text(self, fig3_a):
        text = explain(fig3_a).to_text()
        assert text.splitlines()[0] == "verdict: UNSAFE (unfold n = 6)"
        assert "  pt=1 . pt<-5 . pt<-6 . pt<-4" in text.splitlines()
