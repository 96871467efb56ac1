"""Bounded end-to-end programs and the default unfolding bound."""

from __future__ import annotations

from .errors import MalformedTopology
from .terms import ID, Filter, Mod, Neg, One, Rep, Seq, Test, Union, Zero, seq, value_key


def build_program(problem, n: int):
    """in . (1 + p.t)^n . out"""
    if n < 0:
        raise ValueError("unfolding bound must be >= 0")
    hop = Union(ID, Seq(problem.switch_policy, problem.topology))
    return Seq(Filter(problem.ingress), Seq(Rep(hop, n), Filter(problem.egress)))


def unfold(p):
    """Replace every ``Rep(q, m)`` by the m-fold chain ``q . q . ... . q``."""
    if isinstance(p, Rep):
        body = unfold(p.body)
        return seq(*([body] * p.n))
    if isinstance(p, Seq):
        return Seq(unfold(p.left), unfold(p.right))
    if isinstance(p, Union):
        return Union(*(unfold(q) for q in p.ops))
    return p


def _is_graph(t) -> bool:
    return hasattr(t, "links") and hasattr(t, "hosts")


def _link_shape(path):
    toks = [t for t in path if not isinstance(t, One)]
    if not toks:
        raise MalformedTopology("identity summand 1 is not a link")
    i = 0
    while i < len(toks) and isinstance(toks[i], Test):
        i += 1
    tests, mods = toks[:i], toks[i:]
    if not tests or not all(isinstance(m, Mod) for m in mods):
        shown = " . ".join(map(str, toks))
        raise MalformedTopology(f"summand is not of shape tests . modifications: {shown}")
    # tests commute among themselves; mods keep their per-field order
    tests = tuple(sorted(tests, key=lambda t: (t.field, value_key(t.value))))
    mods = tuple(sorted(mods, key=lambda m: m.field))
    return tests, mods


def default_unfold_bound(t, domains=None) -> int:
    """Number of forwarding links: directed internal links plus perimeter filters.

    ``t`` is either a topology policy (a sum of ``tests . mods`` summands,
    possibly factored as in ``sw = A . (... + ...)``) or a topology graph.
    """
    if _is_graph(t):
        return len(t.links) + len(t.hosts)
    from .rewrite import eliminate_negation, to_union_free_sum

    if _contains_neg(t):
        if domains is None:
            raise MalformedTopology("negated topology needs field domains")
        t = eliminate_negation(t, domains)
    if _contains(t, Rep):
        raise MalformedTopology("topology may not contain repetition")
    summands = {p for p in to_union_free_sum(t) if not any(isinstance(x, Zero) for x in p)}
    return len({_link_shape(p) for p in summands})


def _contains(p, cls) -> bool:
    if isinstance(p, cls):
        return True
    if isinstance(p, Seq):
        return _contains(p.left, cls) or _contains(p.right, cls)
    if isinstance(p, Union):
        return any(_contains(q, cls) for q in p.ops)
    if isinstance(p, Rep):
        return _contains(p.body, cls)
    return False


def _contains_neg(p) -> bool:
    stack = [p]
    while stack:
        x = stack.pop()
        if isinstance(x, Neg):
            return True
        for attr in ("pred", "left", "right", "arg", "body"):
            if hasattr(x, attr):
                stack.append(getattr(x, attr))
        if isinstance(x, Union):
            stack.extend(x.ops)
    return False
