"""Topology Zoo ingestion: GraphML to NetKAT topology and forwarding policy.

Node ids become switch values (integers when numeric).  Ports are
numbered per switch in sorted-neighbor order unless an edge carries
explicit ``source_port`` / ``target_port`` data.  Nodes whose ``kind``
attribute is ``host`` are hosts; the switch port facing a host becomes a
perimeter filter in the topology encoding.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import networkx as nx

from .errors import EmptyGraph, GraphMLParseError, MalformedTopology
from .parser import SafetyProblem
from .terms import DROP, DomainMap, Filter, Mod, Test, Value, seq, union, value_key

SOURCE_PORT_KEYS = ("source_port", "sport")
TARGET_PORT_KEYS = ("target_port", "tport")


@dataclass(frozen=True)
class Link:
    """Directed link ``src:src_port -> dst:dst_port``."""

    src: Value
    src_port: int
    dst: Value
    dst_port: int


@dataclass(frozen=True)
class HostPort:
    host: Value
    switch: Value
    port: int


@dataclass
class TopologyGraph:
    switches: Tuple[Value, ...]
    links: Tuple[Link, ...]
    hosts: Tuple[HostPort, ...] = ()
    labels: Dict[Value, str] = field(default_factory=dict)
    directed: bool = False

    @property
    def port_of(self) -> Dict[Tuple[Value, Value], int]:
        """Outgoing port of ``node`` towards ``neighbor`` (lowest port if several)."""
        out: Dict[Tuple[Value, Value], int] = {}
        for l in self.links:
            k = (l.src, l.dst)
            out[k] = min(out.get(k, l.src_port), l.src_port)
        for h in self.hosts:
            out.setdefault((h.switch, h.host), h.port)
        return out

    def successors(self) -> Dict[Value, List[Value]]:
        succ: Dict[Value, set] = {s: set() for s in self.switches}
        for l in self.links:
            succ[l.src].add(l.dst)
        return {s: sorted(vs, key=value_key) for s, vs in succ.items()}

    def ports(self) -> List[int]:
        ps = {l.src_port for l in self.links} | {l.dst_port for l in self.links}
        ps |= {h.port for h in self.hosts}
        return sorted(ps)

    @property
    def undirected_links(self) -> int:
        return len({frozenset((l.src, l.dst)) for l in self.links})


_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _node_values(ids) -> Dict[str, Value]:
    out: Dict[str, Value] = {}
    used = set()
    for raw in sorted(ids, key=str):
        s = str(raw)
        if s.isdigit() and str(int(s)) == s:
            v: Value = int(s)
        elif _IDENT.match(s):
            v = s
        else:
            v = re.sub(r"[^A-Za-z0-9_]", "_", s)
            if not _IDENT.match(v):
                v = "n_" + v
        base, k = v, 1
        while v in used:
            v = f"{base}_{k}" if isinstance(base, str) else f"n{base}_{k}"
            k += 1
        used.add(v)
        out[raw] = v
    return out


def _first(data: dict, keys) -> Optional[int]:
    for k in keys:
        if k in data and data[k] not in (None, ""):
            return int(data[k])
    return None


def graph_from_networkx(G) -> TopologyGraph:
    directed = G.is_directed()
    values = _node_values(G.nodes)
    is_host = {values[n]: str(d.get("kind", "")).lower() == "host" for n, d in G.nodes(data=True)}
    labels = {values[n]: str(d.get("label", n)) for n, d in G.nodes(data=True)}

    # (u, v, explicit port at u, explicit port at v); parallel edges without ports collapse
    edges: List[list] = []
    seen = set()
    for u, v, d in G.edges(data=True):
        a, b = values[u], values[v]
        if a == b:
            continue
        pa, pb = _first(d, SOURCE_PORT_KEYS), _first(d, TARGET_PORT_KEYS)
        key = (a, b) if directed else frozenset((a, b))
        if pa is None and pb is None:
            if key in seen:
                continue
            seen.add(key)
        edges.append([a, b, pa, pb])

    used: Dict[Value, set] = defaultdict(set)
    for a, b, pa, pb in edges:
        if pa is not None:
            used[a].add(pa)
        if pb is not None:
            used[b].add(pb)
    ends: Dict[Value, list] = defaultdict(list)
    for idx, e in enumerate(edges):
        ends[e[0]].append((value_key(e[1]), idx, 2))
        ends[e[1]].append((value_key(e[0]), idx, 3))
    for node, lst in ends.items():
        nxt = 1
        for _, idx, slot in sorted(lst):
            if edges[idx][slot] is None:
                while nxt in used[node]:
                    nxt += 1
                edges[idx][slot] = nxt
                used[node].add(nxt)

    links: List[Link] = []
    hosts: List[HostPort] = []
    for a, b, pa, pb in edges:
        ha, hb = is_host.get(a, False), is_host.get(b, False)
        if ha and hb:
            continue
        if ha or hb:
            sw, port, host = (b, pb, a) if ha else (a, pa, b)
            hosts.append(HostPort(host, sw, port))
            continue
        links.append(Link(a, pa, b, pb))
        if not directed:
            links.append(Link(b, pb, a, pa))
    switches = tuple(sorted((v for v in values.values() if not is_host[v]), key=value_key))
    links.sort(key=lambda l: (value_key(l.src), l.src_port, value_key(l.dst), l.dst_port))
    hosts = sorted(set(hosts), key=lambda h: (value_key(h.switch), h.port, value_key(h.host)))
    return TopologyGraph(switches, tuple(links), tuple(hosts), labels, directed)


def load_graphml(data) -> TopologyGraph:
    """Parse GraphML bytes or text into a :class:`TopologyGraph`."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        G = nx.parse_graphml(data)
    except (ET.ParseError, nx.NetworkXError, ValueError, KeyError, TypeError) as exc:
        raise GraphMLParseError(f"cannot parse GraphML: {exc}") from exc
    return graph_from_networkx(G)


def encode_topology(
    g: TopologyGraph, *, switch_field: Optional[str] = "sw", port_field: str = "pt"
):
    """Sum of ``sw=A . pt=x . sw<-B . pt<-y`` per directed link plus ``sw=A . pt=k`` per host port.

    With ``switch_field=None`` the port-only form is produced, which
    requires port numbers to be unique across the whole network.
    """
    if switch_field is None:
        owners: Dict[int, set] = defaultdict(set)
        for l in g.links:
            owners[l.src_port].add(l.src)
            owners[l.dst_port].add(l.dst)
        for h in g.hosts:
            owners[h.port].add(h.switch)
        clash = sorted(p for p, o in owners.items() if len(o) > 1)
        if clash:
            raise MalformedTopology(f"port-only encoding needs globally unique ports; shared: {clash}")
    summands = []
    for l in g.links:
        if switch_field is None:
            summands.append(seq(Filter(Test(port_field, l.src_port)), Mod(port_field, l.dst_port)))
        else:
            summands.append(
                seq(
                    Filter(Test(switch_field, l.src)),
                    Filter(Test(port_field, l.src_port)),
                    Mod(switch_field, l.dst),
                    Mod(port_field, l.dst_port),
                )
            )
    for h in g.hosts:
        if switch_field is None:
            summands.append(Filter(Test(port_field, h.port)))
        else:
            summands.append(seq(Filter(Test(switch_field, h.switch)), Filter(Test(port_field, h.port))))
    return union(*summands) if summands else DROP


def _distances_to(g: TopologyGraph, target: Value) -> Dict[Value, int]:
    pred: Dict[Value, set] = defaultdict(set)
    for l in g.links:
        pred[l.dst].add(l.src)
    dist = {target: 0}
    q = deque([target])
    while q:
        u = q.popleft()
        for w in pred[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def next_hops(g: TopologyGraph) -> Dict[Tuple[Value, Value], Value]:
    """``(S, D) -> N``: S's neighbor on a shortest path to D, smallest id on ties."""
    succ = g.successors()
    out = {}
    for d in g.switches:
        dist = _distances_to(g, d)
        for s in g.switches:
            if s == d or s not in dist:
                continue
            out[(s, d)] = next(n for n in succ[s] if dist.get(n) == dist[s] - 1)
    return out


def gen_shortest_path_policy(
    g: TopologyGraph, *, switch_field: str = "sw", dst_field: str = "dst", port_field: str = "pt"
):
    """Destination-based shortest-path forwarding: ``sw=S . dst=D . pt<-p`` per pair."""
    port_of = g.port_of
    summands = []
    for (s, d), n in sorted(next_hops(g).items(), key=lambda kv: (value_key(kv[0][0]), value_key(kv[0][1]))):
        summands.append(
            seq(Filter(Test(switch_field, s)), Filter(Test(dst_field, d)), Mod(port_field, port_of[(s, n)]))
        )
    return union(*summands) if summands else DROP


def _components(g: TopologyGraph) -> List[List[Value]]:
    adj: Dict[Value, set] = {s: set() for s in g.switches}
    for l in g.links:
        adj[l.src].add(l.dst)
        adj[l.dst].add(l.src)
    comps, seen = [], set()
    for s in g.switches:
        if s in seen:
            continue
        comp, q = [], deque([s])
        seen.add(s)
        while q:
            u = q.popleft()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    q.append(w)
        comps.append(sorted(comp, key=value_key))
    return comps


def longest_path_endpoints(g: TopologyGraph) -> Tuple[Value, Value]:
    """Endpoints of a diameter (longest shortest path) in the largest component.

    Ties go to the lexicographically smallest ``(src, dst)`` pair.
    """
    if not g.switches:
        raise EmptyGraph("graph has no switches")
    comps = _components(g)
    comp = max(comps, key=len)  # first largest, in switch order
    members = set(comp)
    best = None
    for d in comp:
        dist = _distances_to(g, d)
        for s, k in dist.items():
            if s not in members:
                continue
            cand = (-k, value_key(s), value_key(d))
            if best is None or cand < best[0]:
                best = (cand, s, d)
    return best[1], best[2]


def encode_problem(
    g: TopologyGraph,
    src: Optional[Value] = None,
    dst: Optional[Value] = None,
    unfold_n: Optional[int] = None,
) -> SafetyProblem:
    """Reachability problem ``sw=src`` to ``sw=dst`` under the shortest-path policy."""
    from .unfold import default_unfold_bound

    if not g.switches:
        raise EmptyGraph("graph has no switches")
    if src is None or dst is None:
        a, b = longest_path_endpoints(g)
        src = a if src is None else src
        dst = b if dst is None else dst
    for v in (src, dst):
        if v not in g.switches:
            raise MalformedTopology(f"{v!r} is not a switch of this graph")
    ports = g.ports() or [1]
    domains = DomainMap({"dst": g.switches, "pt": ports, "sw": g.switches})
    return SafetyProblem(
        ingress=Test("sw", src),
        switch_policy=gen_shortest_path_policy(g),
        topology=encode_topology(g),
        egress=Test("sw", dst),
        domains=domains,
        unfold_n=default_unfold_bound(g) if unfold_n is None else unfold_n,
    )


def parse_node_value(text: str) -> Value:
    """Switch value as written on the command line."""
    return int(text) if text.isdigit() else text
