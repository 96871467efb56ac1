import random

import pytest
from hypothesis import given

from netkat_safecheck.errors import UndeclaredField, ValueOutOfDomain
from netkat_safecheck.generators import random_domains, random_policy
from netkat_safecheck.oracle import all_packets, eval_set
from netkat_safecheck.terms import (
    ID,
    ONE,
    ZERO,
    Conj,
    Disj,
    DomainMap,
    Filter,
    Mod,
    Neg,
    Rep,
    Seq,
    Test,
    Union,
    format_path,
    policy_of_path,
    policy_size,
    pretty,
    structural_eq,
    union,
)

from .strategies import paths, policies

a, b, c = Filter(Test("pt", 1)), Mod("pt", 5), Filter(Test("pt", 6))


class TestPolicyOfPath:
    def test_embeds_left_associated(self):
        assert policy_of_path([Test("pt", 1), Mod("pt", 5)]) == Seq(Filter(Test("pt", 1)), Mod("pt", 5))

    def test_empty_is_identity(self):
        assert policy_of_path([]) == Filter(ONE)

    def test_zero(self):
        assert policy_of_path([ZERO]) == Filter(ZERO)

    @given(paths(with_units=False))
    def test_agrees_with_tokenwise_application(self, path):
        from .strategies import SMALL

        for pk in all_packets(SMALL):
            expected = {pk}
            for t in path:
                if isinstance(t, Test):
                    expected = {q for q in expected if q[t.field] == t.value}
                else:
                    expected = {q.with_value(t.field, t.value) for q in expected}
            assert eval_set(policy_of_path(path), [pk]) == expected


class TestStructuralEq:
    def test_union_commutes(self):
        assert structural_eq(Union(a, b), Union(b, a))

    def test_seq_is_ordered(self):
        assert not structural_eq(Seq(a, b), Seq(b, a))

    def test_union_idempotent(self):
        assert structural_eq(Union(a, Union(a, b)), Union(a, b))

    def test_union_flattened_at_construction(self):
        assert Union(a, Union(b, c)) == Union(Union(a, b), c)
        assert Union(a, a).ops == frozenset({a})

    def test_filter_of_disjunction_is_a_union(self):
        assert structural_eq(Filter(Disj(Test("pt", 1), Test("pt", 2))), Union(a, Filter(Test("pt", 2))))

    @given(policies(), policies())
    def test_equivalence_relation(self, dp, dq):
        p, q = dp[1], dq[1]
        assert structural_eq(p, p)
        assert structural_eq(p, q) == structural_eq(q, p)
        r = Union(p, p)
        if structural_eq(p, q):
            assert structural_eq(r, q)


class TestPolicySize:
    def test_constant_filter(self):
        assert policy_size(Filter(ONE)) == 1

    def test_counts_nodes(self):
        assert policy_size(Seq(Filter(Test("pt", 1)), Mod("pt", 5))) == 4

    def test_rep(self):
        assert policy_size(Rep(Filter(ONE), 6)) == 2

    def test_union_counts_binary_chain(self):
        assert policy_size(Union(b, Mod("pt", 6), Mod("pt", 7))) == 5


class TestRep:
    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            Rep(ID, -1)


class TestDomainMap:
    def test_fields_sorted_and_counted(self):
        d = DomainMap({"sw": ["A", "B"], "pt": range(1, 7)})
        assert d.fields == ("pt", "sw")
        assert d.packet_count() == 12

    def test_check(self):
        d = DomainMap({"pt": [1, 2]})
        d.check("pt", 1)
        with pytest.raises(ValueOutOfDomain):
            d.check("pt", 3)
        with pytest.raises(UndeclaredField):
            d.check("sw", 1)

    def test_empty_domain_rejected(self):
        with pytest.raises(ValueError):
            DomainMap({"pt": []})

    def test_validate_walks_policy(self):
        d = DomainMap({"pt": [1, 2]})
        with pytest.raises(ValueOutOfDomain):
            d.validate(Seq(Filter(Neg(Test("pt", 1))), Mod("pt", 9)))


class TestPrinting:
    def test_format_path(self):
        assert format_path((Test("pt", 1), Mod("pt", 5), Mod("pt", 6), Mod("pt", 4))) == "pt=1 . pt<-5 . pt<-6 . pt<-4"

    def test_empty_path_prints_identity(self):
        assert format_path(()) == "1"

    def test_precedence(self):
        p = Seq(Union(a, b), Filter(Neg(Disj(Test("pt", 1), Test("pt", 2)))))
        assert pretty(p) == "(pt<-5 + pt=1) . ~(pt=1 + pt=2)"
        assert pretty(Rep(Seq(a, b), 3)) == "(pt=1 . pt<-5)^3"

    def test_union_helper(self):
        assert union() == Filter(ZERO)
        assert union(a) == a

    def test_conj_prints_as_sequence(self):
        assert pretty(Filter(Conj(Test("pt", 1), Test("sw", 2)))) == "pt=1 . sw=2"


def test_random_policies_mention_only_declared_values():
    for seed in range(50):
        rng = random.Random(seed)
        d = random_domains(rng)
        d.validate(random_policy(rng, d, 15))
