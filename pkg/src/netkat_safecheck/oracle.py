"""Brute-force denotational semantics over single packets.

Histories collapse to their head packet because the fragment has no
``dup``.  Everything is evaluated on explicit finite packet sets, so the
results are exact; large packet spaces are refused, never sampled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple

from .errors import DomainTooLarge, UndeclaredField, UnsupportedConstruct
from .terms import (
    Conj,
    Disj,
    DomainMap,
    Filter,
    Mod,
    Neg,
    One,
    Rep,
    Seq,
    Test,
    Union,
    Value,
    Zero,
)

DEFAULT_MAX_PACKETS = 10**7


@dataclass(frozen=True)
class Packet:
    """Total assignment of values to the (sorted) declared fields."""

    fields: Tuple[str, ...]
    values: Tuple[Value, ...]

    @classmethod
    def of(cls, assignment: Mapping[str, Value]) -> "Packet":
        fs = tuple(sorted(assignment))
        return cls(fs, tuple(assignment[f] for f in fs))

    def __getitem__(self, field: str) -> Value:
        try:
            return self.values[self.fields.index(field)]
        except ValueError:
            raise UndeclaredField(f"packet has no field {field!r}") from None

    def with_value(self, field: str, value: Value) -> "Packet":
        try:
            i = self.fields.index(field)
        except ValueError:
            raise UndeclaredField(f"packet has no field {field!r}") from None
        return Packet(self.fields, self.values[:i] + (value,) + self.values[i + 1:])

    def as_dict(self) -> Dict[str, Value]:
        return dict(zip(self.fields, self.values))

    def __repr__(self):
        inner = ", ".join(f"{f}={v}" for f, v in zip(self.fields, self.values))
        return "{" + inner + "}"


PacketSet = FrozenSet[Packet]


def all_packets(domains: DomainMap, max_packets: int = DEFAULT_MAX_PACKETS) -> Iterator[Packet]:
    count = domains.packet_count()
    if count > max_packets:
        raise DomainTooLarge(f"packet space has {count} packets, cap is {max_packets}")
    fs = domains.fields
    for combo in itertools.product(*(domains[f] for f in fs)):
        yield Packet(fs, combo)


def _filter(a, pks: PacketSet) -> PacketSet:
    if isinstance(a, One):
        return pks
    if isinstance(a, Zero):
        return frozenset()
    if isinstance(a, Test):
        return frozenset(pk for pk in pks if pk[a.field] == a.value)
    if isinstance(a, Disj):
        return _filter(a.left, pks) | _filter(a.right, pks)
    if isinstance(a, Conj):
        return _filter(a.right, _filter(a.left, pks))
    if isinstance(a, Neg):
        return pks - _filter(a.arg, pks)
    raise UnsupportedConstruct(f"unsupported predicate node {a!r}")


def eval_set(p, pks: Iterable[Packet]) -> PacketSet:
    """Union of ``eval(p, pk)`` over ``pks``; Kleisli composition on sets."""
    pks = frozenset(pks)
    if not pks:
        return pks
    if isinstance(p, (One, Zero, Test, Disj, Conj, Neg)):
        return _filter(p, pks)
    if isinstance(p, Filter):
        return _filter(p.pred, pks)
    if isinstance(p, Mod):
        return frozenset(pk.with_value(p.field, p.value) for pk in pks)
    if isinstance(p, Union):
        out = frozenset()
        for q in p.ops:
            out |= eval_set(q, pks)
        return out
    if isinstance(p, Seq):
        return eval_set(p.right, eval_set(p.left, pks))
    if isinstance(p, Rep):
        cur = pks
        for _ in range(p.n):
            nxt = eval_set(p.body, cur)
            if nxt == cur:
                break
            cur = nxt
        return cur
    raise UnsupportedConstruct(f"unsupported policy node {p!r}")


def _check_packet(pk: Packet, domains: Optional[DomainMap]) -> None:
    if domains is not None and pk.fields != domains.fields:
        raise UndeclaredField(
            f"packet fields {pk.fields} do not match declared fields {domains.fields}"
        )


def eval(p, pk: Packet, domains: Optional[DomainMap] = None) -> PacketSet:  # noqa: A001
    _check_packet(pk, domains)
    return eval_set(p, (pk,))


def eval_star_set(p, pks: Iterable[Packet]) -> PacketSet:
    """Least fixpoint of ``S -> pks | eval_set(p, S)``."""
    seen = frozenset(pks)
    frontier = seen
    while frontier:
        nxt = eval_set(p, frontier) - seen
        seen |= nxt
        frontier = nxt
    return seen


def eval_star(p, pk: Packet, domains: Optional[DomainMap] = None) -> PacketSet:
    _check_packet(pk, domains)
    return eval_star_set(p, (pk,))


def find_witness(p, domains: DomainMap, max_packets: int = DEFAULT_MAX_PACKETS) -> Optional[Packet]:
    """First packet (in enumeration order) for which ``p`` is non-empty."""
    for pk in all_packets(domains, max_packets):
        if eval_set(p, (pk,)):
            return pk
    return None


def policy_is_empty(p, domains: DomainMap, max_packets: int = DEFAULT_MAX_PACKETS) -> bool:
    return not eval_set(p, all_packets(domains, max_packets))


def is_empty_program(problem, n: int, max_packets: int = DEFAULT_MAX_PACKETS) -> bool:
    """True iff in . (1 + p.t)^n . out drops every packet."""
    from .unfold import build_program

    return policy_is_empty(build_program(problem, n), problem.domains, max_packets)


def star_program_outputs(problem, max_packets: int = DEFAULT_MAX_PACKETS) -> PacketSet:
    """Outputs of in . (p.t)* . out over the whole packet space."""
    start = _filter(problem.ingress, frozenset(all_packets(problem.domains, max_packets)))
    hop = Seq(problem.switch_policy, problem.topology)
    return _filter(problem.egress, eval_star_set(hop, start))


def is_empty_star_program(problem, max_packets: int = DEFAULT_MAX_PACKETS) -> bool:
    return not star_program_outputs(problem, max_packets)


def saturation_depth(problem, max_packets: int = DEFAULT_MAX_PACKETS) -> int:
    """Smallest k with (1 + p.t)^k reaching the same packets as (p.t)* from the ingress."""
    start = _filter(problem.ingress, frozenset(all_packets(problem.domains, max_packets)))
    hop = Seq(problem.switch_policy, problem.topology)
    seen, frontier, depth = start, start, 0
    while True:
        nxt = eval_set(hop, frontier) - seen
        if not nxt:
            return depth
        seen |= nxt
        frontier = nxt
        depth += 1
