"""Canonical forms and isomorphism witnesses.

Isomorphism here is label-, tentacle-order- and external-sequence-
preserving: a bijection on nodes and one on edges commuting with
attachment, labelling and the external sequence pointwise.

The canonical key is computed by individualization-refinement: nodes are
colored (initially by their positions in the external sequence), colors
are refined by the multiset of incident (label, tentacle position,
attached colors) signatures, and non-discrete colorings branch on every
member of the first non-singleton color class.  Each discrete coloring
yields a certificate; the minimum certificate over all branches is
canonical, so two graphs get equal keys iff they are isomorphic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .hypergraph import Hyperedge, Hypergraph

_Cert = tuple


@dataclass(frozen=True)
class IsoWitness:
    node_map: tuple[tuple[str, str], ...]
    edge_map: tuple[tuple[str, str], ...]

    def node(self, v: str) -> str:
        return dict(self.node_map)[v]

    def edge(self, e: str) -> str:
        return dict(self.edge_map)[e]


def _rank(values: list) -> list[int]:
    order = {v: i for i, v in enumerate(sorted(set(values)))}
    return [order[v] for v in values]


@lru_cache(maxsize=65536)
def _canonical_data(h: Hypergraph) -> tuple[_Cert, tuple[int, ...]]:
    """Return (certificate, node order realizing it).

    The node order lists node indices (into ``h.nodes``) in certificate
    position order.
    """
    nodes = h.nodes
    n = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    edges = [(e.label, tuple(idx[v] for v in e.att)) for e in h.edges]
    ext = tuple(idx[v] for v in h.ext)

    incidence: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for ei, (_, att) in enumerate(edges):
        for pos, v in enumerate(att):
            incidence[v].append((ei, pos))

    profile: list[list[int]] = [[] for _ in range(n)]
    for pos, v in enumerate(ext):
        profile[v].append(pos)
    colors = _rank([tuple(p) for p in profile])

    def refine(cs: list[int]) -> list[int]:
        while True:
            sigs = []
            for v in range(n):
                local = sorted(
                    (edges[ei][0], pos, tuple(cs[u] for u in edges[ei][1]))
                    for ei, pos in incidence[v]
                )
                sigs.append((cs[v], tuple(local)))
            new = _rank(sigs)
            if new == cs:
                return cs
            cs = new

    best: list[tuple[_Cert, tuple[int, ...]] | None] = [None]

    def leaf(cs: list[int]) -> None:
        order = sorted(range(n), key=cs.__getitem__)
        position = [0] * n
        for p, v in enumerate(order):
            position[v] = p
        cert: _Cert = (
            n,
            tuple(position[v] for v in ext),
            tuple(sorted((lab, tuple(position[u] for u in att)) for lab, att in edges)),
        )
        if best[0] is None or cert < best[0][0]:
            best[0] = (cert, tuple(order))

    def search(cs: list[int]) -> None:
        cs = refine(cs)
        counts: dict[int, int] = {}
        for c in cs:
            counts[c] = counts.get(c, 0) + 1
        target = next((c for c in sorted(counts) if counts[c] > 1), None)
        if target is None:
            leaf(cs)
            return
        for v in range(n):
            if cs[v] == target:
                child = [c * 2 for c in cs]
                child[v] -= 1
                search(child)

    search(colors)
    assert best[0] is not None
    return best[0]


def canonical_key(h: Hypergraph) -> bytes:
    """A byte string equal for two graphs iff they are isomorphic."""
    return repr(_canonical_data(h)[0]).encode("ascii")


def canonical_graph(h: Hypergraph) -> Hypergraph:
    """A canonical representative, isomorphic to ``h``.

    Nodes are named ``n0..``, edges ``e0..``; structurally equal for
    isomorphic inputs.
    """
    cert, _ = _canonical_data(h)
    n, ext, edge_cert = cert
    return Hypergraph(
        nodes=tuple(f"n{i}" for i in range(n)),
        edges=tuple(
            Hyperedge(f"e{i}", lab, tuple(f"n{p}" for p in att))
            for i, (lab, att) in enumerate(edge_cert)
        ),
        ext=tuple(f"n{p}" for p in ext),
    )


def isomorphism(g: Hypergraph, h: Hypergraph) -> IsoWitness | None:
    """An explicit isomorphism g -> h, or None."""
    cg, og = _canonical_data(g)
    ch, oh = _canonical_data(h)
    if cg != ch:
        return None
    node_map = {g.nodes[a]: h.nodes[b] for a, b in zip(og, oh)}

    def edge_entries(graph: Hypergraph, order: tuple[int, ...]):
        pos = {graph.nodes[v]: p for p, v in enumerate(order)}
        entries = [
            ((e.label, tuple(pos[v] for v in e.att)), e.id) for e in graph.edges
        ]
        entries.sort()
        return entries

    ge = edge_entries(g, og)
    he = edge_entries(h, oh)
    edge_map = {}
    for (gk, gid), (hk, hid) in zip(ge, he):
        assert gk == hk
        edge_map[gid] = hid
    hg_edges = {e.id: e for e in h.edges}
    for e in g.edges:
        mate = hg_edges[edge_map[e.id]]
        assert mate.label == e.label
        assert mate.att == tuple(node_map[v] for v in e.att)
    assert tuple(node_map[v] for v in g.ext) == h.ext
    return IsoWitness(
        node_map=tuple(sorted(node_map.items())),
        edge_map=tuple(sorted(edge_map.items())),
    )


def is_isomorphic(g: Hypergraph, h: Hypergraph) -> bool:
    return canonical_key(g) == canonical_key(h)
