"""Policy AST and the finite field domains it ranges over.

The fragment is dup-free and star-free NetKAT plus bounded repetition
``Rep(p, n)``.  Predicates and policies are separate node families; a
predicate enters a policy through ``Filter``.

A path is a plain tuple of tokens and a sum of paths is a frozenset of
paths, so the AC-and-idempotence laws of ``+`` on sums come for free
from set semantics.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Tuple, Union as _TUnion

from .errors import UndeclaredField, ValueOutOfDomain

Value = _TUnion[int, str]


def value_key(v: Value):
    """Sort key that orders ints numerically before strings."""
    return (0, v, "") if isinstance(v, int) else (1, 0, v)


# -- predicates -------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class One:
    def __repr__(self):
        return "ONE"


@dataclass(frozen=True, slots=True)
class Zero:
    def __repr__(self):
        return "ZERO"


ONE = One()
ZERO = Zero()


@dataclass(frozen=True, slots=True)
class Test:
    field: str
    value: Value


@dataclass(frozen=True, slots=True)
class Disj:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True, slots=True)
class Conj:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Predicate"


Predicate = _TUnion[One, Zero, Test, Disj, Conj, Neg]
PREDICATE_TYPES = (One, Zero, Test, Disj, Conj, Neg)


# -- policies ---------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Filter:
    pred: Predicate


@dataclass(frozen=True, slots=True)
class Mod:
    field: str
    value: Value


@dataclass(frozen=True, init=False)
class Union:
    """Union stored as a flattened set of operands.

    ``Union(a, Union(a, b)) == Union(a, b)`` holds by construction.
    """

    ops: frozenset

    def __init__(self, *ops: "Policy"):
        flat = set()
        for p in ops:
            if isinstance(p, Union):
                flat |= p.ops
            else:
                flat.add(p)
        object.__setattr__(self, "ops", frozenset(flat))


@dataclass(frozen=True, slots=True)
class Seq:
    left: "Policy"
    right: "Policy"


@dataclass(frozen=True, slots=True)
class Rep:
    body: "Policy"
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValueError(f"repetition exponent must be a natural, got {self.n!r}")


Policy = _TUnion[Filter, Mod, Union, Seq, Rep]

Token = _TUnion[One, Zero, Test, Mod]
Path = Tuple[Token, ...]
SumOfPaths = frozenset  # frozenset[Path]

ID = Filter(ONE)
DROP = Filter(ZERO)


def filt(a: Predicate) -> Filter:
    return Filter(a)


def union(*ps: Policy) -> Policy:
    """Smart union: drops nothing, but unwraps singletons and maps () to 0."""
    u = Union(*ps)
    if not u.ops:
        return DROP
    if len(u.ops) == 1:
        return next(iter(u.ops))
    return u


def seq(*ps: Policy) -> Policy:
    """Left-associated sequential composition; ``seq()`` is 1."""
    if not ps:
        return ID
    out = ps[0]
    for p in ps[1:]:
        out = Seq(out, p)
    return out


def disj(*preds: Predicate) -> Predicate:
    if not preds:
        return ZERO
    out = preds[0]
    for a in preds[1:]:
        out = Disj(out, a)
    return out


def conj(*preds: Predicate) -> Predicate:
    if not preds:
        return ONE
    out = preds[0]
    for a in preds[1:]:
        out = Conj(out, a)
    return out


def as_policy(x) -> Policy:
    return Filter(x) if isinstance(x, PREDICATE_TYPES) else x


# -- domains ----------------------------------------------------------------


class DomainMap(Mapping):
    """Immutable map from field name to its ordered, non-empty value tuple."""

    def __init__(self, domains: Mapping[str, Iterable[Value]] = ()):
        data = {}
        for f, vals in dict(domains).items():
            if not f:
                raise ValueError("field names must be non-empty")
            seen = []
            for v in vals:
                if v not in seen:
                    seen.append(v)
            if not seen:
                raise ValueError(f"domain of field {f!r} is empty")
            data[f] = tuple(seen)
        self._data = data

    def __getitem__(self, field: str) -> Tuple[Value, ...]:
        return self._data[field]

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._data))

    def __len__(self) -> int:
        return len(self._data)

    def __repr__(self):
        return f"DomainMap({dict(self.items())!r})"

    def __eq__(self, other):
        if isinstance(other, DomainMap):
            return self._data == other._data
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self._data.items())))

    @property
    def fields(self) -> Tuple[str, ...]:
        return tuple(sorted(self._data))

    def packet_count(self) -> int:
        count = 1
        for vals in self._data.values():
            count *= len(vals)
        return count

    def check(self, field: str, value: Value | None = None) -> None:
        if field not in self._data:
            raise UndeclaredField(f"field {field!r} has no declared domain")
        if value is not None and value not in self._data[field]:
            raise ValueOutOfDomain(
                f"value {value!r} is not in the domain of {field!r}: {self._data[field]}"
            )

    def validate(self, p) -> None:
        """Raise if ``p`` mentions an undeclared field or out-of-domain value."""
        for f, v in mentioned(p):
            self.check(f, v)


def mentioned(p) -> Iterator[Tuple[str, Value]]:
    """Yield every (field, value) pair occurring in a test or modification."""
    stack = [p]
    while stack:
        node = stack.pop()
        if isinstance(node, (Test, Mod)):
            yield node.field, node.value
        elif isinstance(node, (Disj, Conj, Seq)):
            stack.extend((node.left, node.right))
        elif isinstance(node, Neg):
            stack.append(node.arg)
        elif isinstance(node, Filter):
            stack.append(node.pred)
        elif isinstance(node, Union):
            stack.extend(node.ops)
        elif isinstance(node, Rep):
            stack.append(node.body)


def fields_of(p) -> frozenset:
    return frozenset(f for f, _ in mentioned(p))


# -- operations -------------------------------------------------------------


def policy_of_path(path: Iterable[Token]) -> Policy:
    """Embed a token sequence back into the AST as a left-nested ``Seq``."""
    parts = [t if isinstance(t, Mod) else Filter(t) for t in path]
    return seq(*parts)


def _pred_size(a: Predicate) -> int:
    if isinstance(a, (Disj, Conj)):
        return 1 + _pred_size(a.left) + _pred_size(a.right)
    if isinstance(a, Neg):
        return 1 + _pred_size(a.arg)
    return 1


def policy_size(p: Policy) -> int:
    """Number of AST nodes; a constant filter (1 or 0) is a single leaf."""
    if isinstance(p, Filter):
        if isinstance(p.pred, (One, Zero)):
            return 1
        return 1 + _pred_size(p.pred)
    if isinstance(p, Mod):
        return 1
    if isinstance(p, Seq):
        return 1 + policy_size(p.left) + policy_size(p.right)
    if isinstance(p, Union):
        # counted as the equivalent chain of binary unions
        return len(p.ops) - 1 + sum(policy_size(q) for q in p.ops)
    if isinstance(p, Rep):
        return 1 + policy_size(p.body)
    if isinstance(p, PREDICATE_TYPES):
        return _pred_size(p)
    raise TypeError(f"not a policy: {p!r}")


def _canon(p):
    if isinstance(p, PREDICATE_TYPES):
        p = Filter(p)
    if isinstance(p, Filter):
        a = p.pred
        if isinstance(a, Disj):
            return _canon_union([Filter(a.left), Filter(a.right)])
        if isinstance(a, Conj):
            return ("seq", _canon(Filter(a.left)), _canon(Filter(a.right)))
        if isinstance(a, Neg):
            return ("neg", _canon(Filter(a.arg)))
        return a
    if isinstance(p, Mod):
        return p
    if isinstance(p, Union):
        return _canon_union(p.ops)
    if isinstance(p, Seq):
        return ("seq", _canon(p.left), _canon(p.right))
    if isinstance(p, Rep):
        return ("rep", _canon(p.body), p.n)
    raise TypeError(f"not a policy: {p!r}")


def _canon_union(ops):
    flat = set()
    for q in ops:
        c = _canon(q)
        if isinstance(c, tuple) and c[0] == "union":
            flat |= c[1]
        else:
            flat.add(c)
    if len(flat) == 1:
        return next(iter(flat))
    return ("union", frozenset(flat))


def structural_eq(p, q) -> bool:
    """Equality modulo the AC-and-idempotence laws of ``+``.

    A filter over a disjunction (conjunction) is identified with the union
    (sequence) of the filters over its operands.  Sequencing is never
    commuted.
    """
    return _canon(p) == _canon(q)


# -- printing ---------------------------------------------------------------


def format_value(v: Value) -> str:
    return str(v)


def format_token(t: Token) -> str:
    if isinstance(t, One):
        return "1"
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, Test):
        return f"{t.field}={format_value(t.value)}"
    if isinstance(t, Mod):
        return f"{t.field}<-{format_value(t.value)}"
    raise TypeError(f"not a token: {t!r}")


def format_path(path: Iterable[Token]) -> str:
    toks = list(path)
    if not toks:
        return "1"
    return " . ".join(format_token(t) for t in toks)


_PLUS, _DOT, _UNARY = 0, 1, 2


def _wrap(s: str, inner: int, outer: int) -> str:
    return f"({s})" if inner < outer else s


def _fmt_pred(a: Predicate, ctx: int) -> str:
    if isinstance(a, (One, Zero, Test)):
        return format_token(a)
    if isinstance(a, Disj):
        s = f"{_fmt_pred(a.left, _PLUS)} + {_fmt_pred(a.right, _DOT)}"
        return _wrap(s, _PLUS, ctx)
    if isinstance(a, Conj):
        s = f"{_fmt_pred(a.left, _DOT)} . {_fmt_pred(a.right, _UNARY)}"
        return _wrap(s, _DOT, ctx)
    if isinstance(a, Neg):
        return "~" + _fmt_pred(a.arg, _UNARY)
    raise TypeError(f"not a predicate: {a!r}")


def _fmt(p: Policy, ctx: int) -> str:
    if isinstance(p, Filter):
        return _fmt_pred(p.pred, ctx)
    if isinstance(p, Mod):
        return format_token(p)
    if isinstance(p, Union):
        parts = sorted(_fmt(q, _DOT) for q in p.ops)
        return _wrap(" + ".join(parts), _PLUS, ctx)
    if isinstance(p, Seq):
        s = f"{_fmt(p.left, _DOT)} . {_fmt(p.right, _UNARY)}"
        return _wrap(s, _DOT, ctx)
    if isinstance(p, Rep):
        return f"({_fmt(p.body, _PLUS)})^{p.n}"
    raise TypeError(f"not a policy: {p!r}")


def pretty(p) -> str:
    """Render a policy or predicate in the parser's concrete syntax."""
    if isinstance(p, PREDICATE_TYPES):
        return _fmt_pred(p, _PLUS)
    return _fmt(p, _PLUS)
