"""Seeded random generators for safety problems and small networks.

Used by the property tests and the acceptance scripts.  Everything takes
an explicit :class:`random.Random` so runs are reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional

from .parser import SafetyProblem
from .terms import (
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
    policy_size,
)
from .topology import HostPort, Link, TopologyGraph, encode_topology, next_hops


@dataclass
class GenConfig:
    max_fields: int = 3
    max_domain: int = 4
    max_policy_size: int = 25
    max_unfold: int = 4
    rep_prob: float = 0.05
    neg_prob: float = 0.15


FIELD_NAMES = ("f", "g", "h")


def random_domains(rng: random.Random, cfg: GenConfig = GenConfig()) -> DomainMap:
    k = rng.randint(1, cfg.max_fields)
    return DomainMap({f: range(1, rng.randint(1, cfg.max_domain) + 1) for f in FIELD_NAMES[:k]})


def random_test(rng: random.Random, domains: DomainMap) -> Test:
    f = rng.choice(domains.fields)
    return Test(f, rng.choice(domains[f]))


def random_predicate(rng: random.Random, domains: DomainMap, size: int, cfg: GenConfig = GenConfig()):
    """Predicate of roughly ``size`` nodes."""
    if size <= 1:
        r = rng.random()
        if r < 0.08:
            return ONE
        if r < 0.12:
            return ZERO
        return random_test(rng, domains)
    if rng.random() < cfg.neg_prob:
        return Neg(random_predicate(rng, domains, size - 1, cfg))
    left = rng.randint(1, size - 1)
    ctor = Disj if rng.random() < 0.5 else Conj
    return ctor(random_predicate(rng, domains, left, cfg), random_predicate(rng, domains, size - left, cfg))


def random_policy(rng: random.Random, domains: DomainMap, size: int, cfg: GenConfig = GenConfig()):
    """Policy of roughly ``size`` nodes over the given domains."""
    if size <= 1:
        r = rng.random()
        if r < 0.45:
            return Filter(random_test(rng, domains))
        if r < 0.9:
            f = rng.choice(domains.fields)
            return Mod(f, rng.choice(domains[f]))
        return Filter(ONE) if r < 0.96 else Filter(ZERO)
    r = rng.random()
    if r < 0.12:
        return Filter(random_predicate(rng, domains, min(size, 4), cfg))
    if r < 0.12 + cfg.rep_prob and size > 2:
        return Rep(random_policy(rng, domains, size - 1, cfg), rng.randint(0, 2))
    left = rng.randint(1, size - 1)
    a = random_policy(rng, domains, left, cfg)
    b = random_policy(rng, domains, size - left, cfg)
    return Union(a, b) if r < 0.5 else Seq(a, b)


def random_problem(rng: random.Random, cfg: GenConfig = GenConfig()) -> SafetyProblem:
    """Random problem whose switch policy and topology together stay within the size cap."""
    domains = random_domains(rng, cfg)
    while True:
        p = random_policy(rng, domains, rng.randint(1, cfg.max_policy_size // 2), cfg)
        t = random_policy(rng, domains, rng.randint(1, cfg.max_policy_size // 2), cfg)
        if policy_size(p) + policy_size(t) <= cfg.max_policy_size:
            break
    return SafetyProblem(
        ingress=random_predicate(rng, domains, rng.randint(1, 3), cfg),
        switch_policy=p,
        topology=t,
        egress=random_predicate(rng, domains, rng.randint(1, 3), cfg),
        domains=domains,
        unfold_n=rng.randint(0, cfg.max_unfold),
    )


def random_graph(
    rng: random.Random, n_switches: int, edge_prob: float = 0.5, hosts: int = 0, connected: bool = True
) -> TopologyGraph:
    """Undirected random graph on switches ``1..n`` with ports numbered per switch.

    With ``connected`` a random spanning tree is laid down first.
    """
    sws = list(range(1, n_switches + 1))
    tree = set()
    if connected:
        for i in range(1, n_switches):
            tree.add((rng.choice(sws[:i]), sws[i]))
    edges = [
        (a, b) for i, a in enumerate(sws) for b in sws[i + 1:] if (a, b) in tree or rng.random() < edge_prob
    ]
    next_port = {s: 1 for s in sws}
    links: List[Link] = []
    for a, b in edges:
        pa, pb = next_port[a], next_port[b]
        next_port[a] += 1
        next_port[b] += 1
        links += [Link(a, pa, b, pb), Link(b, pb, a, pa)]
    hps = []
    for k in range(hosts):
        s = rng.choice(sws)
        hps.append(HostPort(f"h{k}", s, next_port[s]))
        next_port[s] += 1
    return TopologyGraph(tuple(sws), tuple(links), tuple(hps))


def random_network_problem(
    rng: random.Random, max_switches: int = 5, drop_prob: float = 0.2, n: Optional[int] = None
) -> SafetyProblem:
    """Random graph, a shortest-path policy with some rules dropped or rewired, random endpoints."""
    g = random_graph(rng, rng.randint(2, max_switches), rng.uniform(0.0, 0.6), hosts=rng.randint(0, 2))
    ports = g.ports() or [1]
    port_of = g.port_of
    summands = []
    for (s, d), nh in sorted(next_hops(g).items()):
        if rng.random() < drop_prob:
            continue
        port = port_of[(s, nh)]
        if rng.random() < 0.15:
            port = rng.choice(ports)
        summands.append(Seq(Filter(Test("sw", s)), Seq(Filter(Test("dst", d)), Mod("pt", port))))
    if rng.random() < 0.3:
        # a rule that rewrites the destination, so loops and detours appear
        s = rng.choice(g.switches)
        summands.append(Seq(Filter(Test("sw", s)), Mod("dst", rng.choice(g.switches))))
    policy = Union(*summands) if summands else Filter(ZERO)
    src, dst = rng.choice(g.switches), rng.choice(g.switches)
    ingress = Test("sw", src)
    if rng.random() < 0.5:
        ingress = Conj(ingress, Test("dst", rng.choice(g.switches)))
    return SafetyProblem(
        ingress=ingress,
        switch_policy=policy,
        topology=encode_topology(g),
        egress=Test("sw", dst),
        domains=DomainMap({"dst": g.switches, "pt": ports, "sw": g.switches}),
        unfold_n=n if n is not None else len(g.links) + len(g.hosts),
    )
