"""Write the Topology Zoo graphs shipped with ``topohub`` as GraphML files.

Usage::

    python3 scripts/fetch_topology_zoo.py [--out data/topozoo] [--max-nodes 30]

Each graph keeps the Topology Zoo node ids and a ``label`` attribute with
the node name; geographic and traffic metadata are dropped.
"""

from __future__ import annotations

import argparse
import json
import os
from pathlib import Path

import networkx as nx


def topohub_dir() -> Path:
    import topohub

    return Path(os.path.dirname(topohub.__file__)) / "data" / "topozoo"


def convert(src: Path) -> nx.Graph:
    data = json.loads(src.read_text())
    G = nx.DiGraph() if data.get("directed") else nx.Graph()
    G.graph["name"] = data.get("graph", {}).get("name", src.stem)
    for node in data["nodes"]:
        G.add_node(str(node["id"]), label=str(node.get("name", node["id"])))
    for e in data["edges"]:
        G.add_edge(str(e["source"]), str(e["target"]))
    return G


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "topozoo"))
    ap.add_argument("--max-nodes", type=int, default=None)
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for src in sorted(topohub_dir().glob("*.json")):
        G = convert(src)
        if args.max_nodes is not None and G.number_of_nodes() > args.max_nodes:
            continue
        nx.write_graphml(G, out / f"{src.stem}.graphml")
        written += 1
    print(f"wrote {written} GraphML files to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
