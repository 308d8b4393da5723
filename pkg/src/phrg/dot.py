"""Graphviz export for hypergraphs.

Nodes are circles (filled when external, annotated with their positions
in the external sequence); hyperedges are boxes joined to their attached
nodes by numbered tentacle lines.  Output is deterministic: the same
graph always yields the same bytes.
"""

from __future__ import annotations

from .hypergraph import Hypergraph


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(h: Hypergraph, name: str = "hypergraph") -> str:
    positions: dict[str, list[int]] = {}
    for i, v in enumerate(h.ext):
        positions.setdefault(v, []).append(i + 1)
    lines = [f"graph {_quote(name)} {{"]
    lines.append("  node [fontsize=11];")
    for v in h.nodes:
        attrs = ["shape=circle"]
        if v in positions:
            marks = ",".join(str(p) for p in positions[v])
            attrs.append("style=filled")
            attrs.append("fillcolor=lightgray")
            attrs.append(f"label={_quote(f'{v} ({marks})')}")
        else:
            attrs.append(f"label={_quote(v)}")
        lines.append(f"  {_quote('n:' + v)} [{', '.join(attrs)}];")
    for e in h.edges:
        lines.append(
            f"  {_quote('e:' + e.id)} [shape=box, label={_quote(e.label)}];"
        )
        for pos, v in enumerate(e.att):
            lines.append(
                f"  {_quote('e:' + e.id)} -- {_quote('n:' + v)} "
                f"[label={_quote(str(pos + 1))}, fontsize=9];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
