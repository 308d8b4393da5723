"""Hypergraphs with ordered tentacles and a sequence of external nodes.

A hypergraph is a finite set of nodes plus a finite set of labelled
hyperedges; each hyperedge is attached to a sequence of nodes (its
tentacles, ordered), and the graph itself carries a sequence of external
nodes used as the interface when the graph is substituted for an edge.
The length of the external sequence is the graph's type.

Everything here is immutable; operations return new graphs.  Node and
edge identities are plain strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence


class HypergraphError(ValueError):
    """Raised when an operation receives structurally unusable input."""


@dataclass(frozen=True)
class Signature:
    """A finite ranked alphabet: labels with fixed arities."""

    arities: tuple[tuple[str, int], ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        pairs = tuple(sorted((str(l), int(a)) for l, a in self.arities))
        index: dict[str, int] = {}
        for label, arity in pairs:
            if arity < 0:
                raise HypergraphError(f"negative arity for label {label!r}")
            if label in index and index[label] != arity:
                raise HypergraphError(
                    f"label {label!r} declared with arities {index[label]} and {arity}"
                )
            index[label] = arity
        object.__setattr__(self, "arities", tuple(sorted(index.items())))
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, mapping: Mapping[str, int]) -> "Signature":
        return cls(tuple(mapping.items()))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.arities)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def arity(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise HypergraphError(f"label {label!r} not in signature") from None

    def merged(self, other: "Signature") -> "Signature":
        combined = dict(self.arities)
        for label, arity in other.arities:
            if combined.setdefault(label, arity) != arity:
                raise HypergraphError(
                    f"label {label!r} has arity {combined[label]} and {arity}"
                )
        return Signature.of(combined)


@dataclass(frozen=True)
class Hyperedge:
    id: str
    label: str
    att: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "att", tuple(str(v) for v in self.att))


@dataclass(frozen=True)
class Hypergraph:
    """An immutable hypergraph.  ``ext`` is the external node sequence.

    Construction normalizes ordering (nodes sorted, edges sorted by id)
    but does not reject malformed references; ``validate`` reports those
    as data so that broken inputs can be inspected rather than trapped.
    """

    nodes: tuple[str, ...]
    edges: tuple[Hyperedge, ...]
    ext: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(sorted(str(v) for v in self.nodes)))
        object.__setattr__(
            self, "edges", tuple(sorted(self.edges, key=lambda e: e.id))
        )
        object.__setattr__(self, "ext", tuple(str(v) for v in self.ext))

    @property
    def type(self) -> int:
        return len(self.ext)

    @property
    def repetition_free(self) -> bool:
        return len(set(self.ext)) == len(self.ext)

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    def edge(self, edge_id: str) -> Hyperedge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise HypergraphError(f"no edge with id {edge_id!r}")

    def labels(self) -> frozenset[str]:
        return frozenset(e.label for e in self.edges)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str


def hypergraph(
    nodes: Iterable[str],
    edges: Iterable[tuple[str, str, Sequence[str]]],
    ext: Sequence[str],
) -> Hypergraph:
    """Convenience constructor from (id, label, attachment) triples."""
    return Hypergraph(
        nodes=tuple(nodes),
        edges=tuple(Hyperedge(i, l, tuple(a)) for i, l, a in edges),
        ext=tuple(ext),
    )


def validate(h: Hypergraph, sig: Optional[Signature] = None) -> list[Violation]:
    """Check structural integrity and, if given, conformance to ``sig``.

    Returns a list of violations; an empty list means valid.
    """
    out: list[Violation] = []
    seen_nodes: set[str] = set()
    for v in h.nodes:
        if v in seen_nodes:
            out.append(Violation("duplicate-node", v, "node id occurs twice"))
        seen_nodes.add(v)
    node_set = set(h.nodes)
    seen_edges: set[str] = set()
    for e in h.edges:
        if e.id in seen_edges:
            out.append(Violation("duplicate-edge", e.id, "edge id occurs twice"))
        seen_edges.add(e.id)
        for v in e.att:
            if v not in node_set:
                out.append(
                    Violation("dangling-ref", e.id, f"attachment node {v!r} missing")
                )
        if sig is not None:
            if e.label not in sig:
                out.append(
                    Violation("unknown-label", e.id, f"label {e.label!r} not in signature")
                )
            elif sig.arity(e.label) != len(e.att):
                out.append(
                    Violation(
                        "arity-mismatch",
                        e.id,
                        f"label {e.label!r} has arity {sig.arity(e.label)}, "
                        f"attachment has length {len(e.att)}",
                    )
                )
    for i, v in enumerate(h.ext):
        if v not in node_set:
            out.append(Violation("dangling-ref", f"ext[{i}]", f"external node {v!r} missing"))
    return out


def string_graph(word: Sequence[str] | str, sig: Optional[Signature] = None) -> Hypergraph:
    """The path graph spelling ``word``: n+1 nodes, one arity-2 edge per letter.

    The empty word gives the one-node graph whose two external nodes
    coincide; note that graph is not repetition-free.
    """
    letters = tuple(word) if not isinstance(word, str) else tuple(word)
    if sig is not None:
        for a in letters:
            if sig.arity(a) != 2:
                raise HypergraphError(f"letter {a!r} has arity {sig.arity(a)}, need 2")
    n = len(letters)
    nodes = tuple(f"v{i}" for i in range(n + 1))
    edges = tuple(
        Hyperedge(f"e{i + 1}", a, (f"v{i}", f"v{i + 1}")) for i, a in enumerate(letters)
    )
    return Hypergraph(nodes=nodes, edges=edges, ext=("v0", f"v{n}"))


def handle(label: str, arity_or_sig: int | Signature) -> Hypergraph:
    """The graph with one ``label`` edge attached to fresh external nodes."""
    arity = (
        arity_or_sig.arity(label)
        if isinstance(arity_or_sig, Signature)
        else int(arity_or_sig)
    )
    nodes = tuple(f"v{i + 1}" for i in range(arity))
    return Hypergraph(
        nodes=nodes, edges=(Hyperedge("e", label, nodes),), ext=nodes
    )


def discrete_graph(n: int) -> Hypergraph:
    """n isolated nodes, all external."""
    nodes = tuple(f"v{i + 1}" for i in range(n))
    return Hypergraph(nodes=nodes, edges=(), ext=nodes)


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # ordinal order decides the representative
            if ra > rb:
                ra, rb = rb, ra
            self.parent[rb] = ra


def replace(host: Hypergraph, images: Mapping[str, Hypergraph]) -> Hypergraph:
    """Substitute a hypergraph for each selected edge simultaneously.

    For each edge id in ``images`` the edge is removed and its image is
    glued in, identifying the image's k-th external node with the edge's
    k-th attached node.  The image's type must equal the edge's arity.
    Nodes are renumbered ``n0, n1, ...`` by ordinal (host nodes first,
    then image nodes grouped by replaced edge id); edges ``e0, e1, ...``
    (surviving host edges first, then image edges in the same grouping).
    """
    host_edges = {e.id: e for e in host.edges}
    for eid in images:
        if eid not in host_edges:
            raise HypergraphError(f"no edge with id {eid!r} in host")
    replaced = sorted(images)
    for eid in replaced:
        edge = host_edges[eid]
        img = images[eid]
        if img.type != len(edge.att):
            raise HypergraphError(
                f"edge {eid!r} has arity {len(edge.att)}, image has type {img.type}"
            )

    # ordinals: host nodes, then each image's nodes in replaced-id order
    ordinal: dict[tuple[str, str], int] = {}
    for v in host.nodes:
        ordinal[("", v)] = len(ordinal)
    for eid in replaced:
        for v in images[eid].nodes:
            ordinal[(eid, v)] = len(ordinal)

    uf = _UnionFind(len(ordinal))
    for eid in replaced:
        edge = host_edges[eid]
        img = images[eid]
        for ext_node, att_node in zip(img.ext, edge.att):
            uf.union(ordinal[("", att_node)], ordinal[(eid, ext_node)])

    rep_name: dict[int, str] = {}
    for _, idx in sorted(ordinal.items(), key=lambda kv: kv[1]):
        root = uf.find(idx)
        if root not in rep_name:
            rep_name[root] = f"n{len(rep_name)}"

    def node_of(scope: str, v: str) -> str:
        return rep_name[uf.find(ordinal[(scope, v)])]

    new_edges: list[Hyperedge] = []
    for e in host.edges:
        if e.id in images:
            continue
        new_edges.append(
            Hyperedge(f"e{len(new_edges)}", e.label, tuple(node_of("", v) for v in e.att))
        )
    for eid in replaced:
        for e in images[eid].edges:
            new_edges.append(
                Hyperedge(
                    f"e{len(new_edges)}",
                    e.label,
                    tuple(node_of(eid, v) for v in e.att),
                )
            )

    return Hypergraph(
        nodes=tuple(rep_name.values()),
        edges=tuple(new_edges),
        ext=tuple(node_of("", v) for v in host.ext),
    )


def disjoint_union(g: Hypergraph, h: Hypergraph) -> Hypergraph:
    """Disjoint union; the external sequence is g's followed by h's."""
    return Hypergraph(
        nodes=tuple(f"l.{v}" for v in g.nodes) + tuple(f"r.{v}" for v in h.nodes),
        edges=tuple(
            Hyperedge(f"l.{e.id}", e.label, tuple(f"l.{v}" for v in e.att))
            for e in g.edges
        )
        + tuple(
            Hyperedge(f"r.{e.id}", e.label, tuple(f"r.{v}" for v in e.att))
            for e in h.edges
        ),
        ext=tuple(f"l.{v}" for v in g.ext) + tuple(f"r.{v}" for v in h.ext),
    )


def extract_string(
    h: Hypergraph, empty_labels: frozenset[str] | set[str] = frozenset()
) -> Optional[tuple[str, ...]]:
    """Read a word off a string graph; None when ``h`` is not one.

    ``h`` must be a simple path of arity-2 edges from the first external
    node to the second (the one-node graph with both external nodes equal
    yields the empty word).  Labels in ``empty_labels`` are read as no
    letter at all, so a path interleaved with such edges still extracts.
    """
    if h.type != 2:
        return None
    for e in h.edges:
        if len(e.att) != 2:
            return None
    succ: dict[str, tuple[str, str]] = {}
    indeg: dict[str, int] = {v: 0 for v in h.nodes}
    for e in h.edges:
        a, b = e.att
        if a in succ:
            return None  # out-degree above one
        succ[a] = (e.label, b)
        indeg[b] += 1
    start, end = h.ext
    if len(h.edges) == 0:
        if len(h.nodes) == 1 and start == end:
            return ()
        return None
    if indeg[start] != 0:
        return None
    word: list[str] = []
    seen = {start}
    cur = start
    while cur in succ:
        label, cur = succ[cur]
        if cur in seen:
            return None
        seen.add(cur)
        if label not in empty_labels:
            word.append(label)
    if cur != end:
        return None
    if len(seen) != len(h.nodes):
        return None  # stray nodes off the path
    for v, d in indeg.items():
        if d > 1:
            return None
    return tuple(word)


def to_json_obj(h: Hypergraph, include_version: bool = False) -> dict:
    obj: dict = {}
    if include_version:
        obj["format_version"] = 1
    obj["nodes"] = list(h.nodes)
    obj["edges"] = [
        {"id": e.id, "label": e.label, "att": list(e.att)} for e in h.edges
    ]
    obj["ext"] = list(h.ext)
    return obj


def from_json_obj(obj: object) -> Hypergraph:
    if not isinstance(obj, dict):
        raise HypergraphError("hypergraph JSON must be an object")
    allowed = {"format_version", "nodes", "edges", "ext"}
    unknown = set(obj) - allowed
    if unknown:
        raise HypergraphError(f"unknown keys in hypergraph JSON: {sorted(unknown)}")
    version = obj.get("format_version", 1)
    if version != 1:
        raise HypergraphError(f"unsupported format_version {version!r}")
    for key in ("nodes", "edges", "ext"):
        if key not in obj:
            raise HypergraphError(f"hypergraph JSON missing key {key!r}")
        if not isinstance(obj[key], list):
            raise HypergraphError(f"hypergraph JSON key {key!r} must be a list")
    edges = []
    for item in obj["edges"]:
        if not isinstance(item, dict) or set(item) != {"id", "label", "att"}:
            raise HypergraphError(
                "each edge must be an object with exactly id, label, att"
            )
        if not isinstance(item["att"], list):
            raise HypergraphError("edge att must be a list")
        edges.append((str(item["id"]), str(item["label"]), [str(v) for v in item["att"]]))
    return hypergraph(
        [str(v) for v in obj["nodes"]], edges, [str(v) for v in obj["ext"]]
    )


def to_json(h: Hypergraph) -> str:
    return json.dumps(to_json_obj(h, include_version=True), indent=2) + "\n"


def from_json(text: str) -> Hypergraph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HypergraphError(f"invalid JSON: {exc}") from None
    return from_json_obj(obj)
