"""Bounded derivation engine: language enumeration and membership.

Exploration is breadth-first over canonical forms (paired with control
states when a control automaton is present), so each isomorphism class
is expanded once.  All searches are bounded; the result records say
exactly which budget, if any, cut the search:

* ``exhaustive`` is True iff no node, edge or result budget pruned
  anything.  The step horizon does not clear it: the enumeration is then
  complete for every derivation depth up to ``max_steps``.
* ``saturated`` is True iff the frontier emptied before the step horizon,
  i.e. more steps would add nothing within the same bounds.

For grammars whose rules never shrink the graph (``node_monotone`` /
``edge_monotone``) a saturated run with an edge or node bound is a
completeness proof for all graphs within that bound, pruned or not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .canonical import canonical_key
from .grammar import (
    AnyPHR,
    ControlledPHRGrammar,
    PHRGrammar,
    Table,
    Word,
    parallel_budgeted,
    split_control,
)
from .hypergraph import Hypergraph, Signature, extract_string, string_graph


@dataclass(frozen=True)
class Limits:
    max_steps: int = 8
    max_nodes: int = 200
    max_edges: int = 200
    max_results: int = 200_000


@dataclass(frozen=True)
class LanguageEnumeration:
    graphs: tuple[Hypergraph, ...]
    exhaustive: bool
    saturated: bool
    steps: int
    hit_node_bound: bool
    hit_edge_bound: bool
    hit_result_budget: bool


@dataclass(frozen=True)
class StringEnumeration:
    words: tuple[Word, ...]
    exhaustive: bool
    saturated: bool


@dataclass(frozen=True)
class MemberVerdict:
    verdict: str  # "yes" | "no-within-limits" | "unknown"
    trace: Optional[tuple[str, ...]] = None


def _is_terminal(h: Hypergraph, terminals: frozenset[str]) -> bool:
    return all(e.label in terminals for e in h.edges)


@dataclass
class _Search:
    grammar: PHRGrammar
    control: object
    limits: Limits
    visited: dict = field(default_factory=dict)
    parents: dict = field(default_factory=dict)
    hit_nodes: bool = False
    hit_edges: bool = False
    hit_results: bool = False
    steps_taken: int = 0
    saturated: bool = False

    def run(self, on_accept) -> None:
        """BFS; calls ``on_accept(pair, graph)`` for each accepted state.

        ``on_accept`` may return True to stop the whole search early.
        """
        grammar, ctrl, limits = self.grammar, self.control, self.limits
        terminals = frozenset(grammar.terminals)
        start = grammar.start_graph()
        if len(start.nodes) > limits.max_nodes or len(start.edges) > limits.max_edges:
            self.hit_nodes = len(start.nodes) > limits.max_nodes
            self.hit_edges = self.hit_edges or len(start.edges) > limits.max_edges
            self.saturated = True
            return
        q0 = ctrl.initial if ctrl is not None else None
        start_pair = (canonical_key(start), q0)
        self.visited[start_pair] = start
        self.parents[start_pair] = None
        if self._accepting(start, q0, terminals) and on_accept(start_pair, start):
            return
        frontier = [start_pair]
        while frontier and self.steps_taken < limits.max_steps:
            self.steps_taken += 1
            next_frontier = []
            for pair in sorted(frontier, key=lambda p: (p[0], p[1] or "")):
                h = self.visited[pair]
                labels = h.labels()
                for index, table in grammar.tables:
                    q2 = ctrl.step(pair[1], index) if ctrl is not None else None
                    if not (labels & table.active_labels):
                        succs = {pair[0]: h}
                    else:
                        succs, hn, he = parallel_budgeted(
                            h, table, limits.max_nodes, limits.max_edges
                        )
                        self.hit_nodes = self.hit_nodes or hn
                        self.hit_edges = self.hit_edges or he
                    for key in sorted(succs):
                        new_pair = (key, q2)
                        if new_pair in self.visited:
                            continue
                        if len(self.visited) >= self.limits.max_results:
                            self.hit_results = True
                            return
                        graph = succs[key]
                        self.visited[new_pair] = graph
                        self.parents[new_pair] = (pair, index)
                        if self._accepting(graph, q2, terminals) and on_accept(
                            new_pair, graph
                        ):
                            return
                        next_frontier.append(new_pair)
            frontier = next_frontier
        self.saturated = not frontier and not self.hit_results

    def _accepting(self, h: Hypergraph, state, terminals: frozenset[str]) -> bool:
        if not _is_terminal(h, terminals):
            return False
        if self.control is None:
            return True
        return state in self.control.finals


def enumerate_language(g: AnyPHR, limits: Limits = Limits()) -> LanguageEnumeration:
    """All derivable terminally labelled graphs within the limits.

    Graphs are canonical representatives, sorted by canonical key, one
    per isomorphism class.  For a controlled grammar a graph counts only
    when some derivation's table trace is accepted by the control
    automaton.
    """
    grammar, ctrl = split_control(g)
    search = _Search(grammar=grammar, control=ctrl, limits=limits)
    results: dict[bytes, Hypergraph] = {}

    def collect(pair, graph) -> bool:
        results[pair[0]] = graph
        return False

    search.run(collect)
    return LanguageEnumeration(
        graphs=tuple(results[k] for k in sorted(results)),
        exhaustive=not (search.hit_nodes or search.hit_edges or search.hit_results),
        saturated=search.saturated,
        steps=search.steps_taken,
        hit_node_bound=search.hit_nodes,
        hit_edge_bound=search.hit_edges,
        hit_result_budget=search.hit_results,
    )


def enumerate_strings(
    g: AnyPHR,
    limits: Limits = Limits(),
    empty_labels: frozenset[str] | set[str] = frozenset(),
) -> StringEnumeration:
    """All nonempty words whose string graphs the grammar derives.

    The empty word is never included: string languages are compared
    modulo the empty word throughout.
    """
    result = enumerate_language(g, limits)
    words = set()
    for h in result.graphs:
        w = extract_string(h, frozenset(empty_labels))
        if w:
            words.add(w)
    return StringEnumeration(
        words=tuple(sorted(words, key=lambda w: (len(w), w))),
        exhaustive=result.exhaustive,
        saturated=result.saturated,
    )


def member_string(
    g: AnyPHR, word: Sequence[str] | str, limits: Limits = Limits()
) -> MemberVerdict:
    """Decide within limits whether the grammar derives the word's graph.

    Verdicts: ``yes`` (with a witnessing table trace), ``no-within-limits``
    (exhausted everything inside the limits without finding it), or
    ``unknown`` (a budget cut the search in a way that could hide the
    word).  For grammars that never shrink node or edge counts the node
    budget is lowered to |word|+1 and the edge budget to |word|, which
    keeps the search small without affecting the verdict.
    """
    grammar, ctrl = split_control(g)
    letters = tuple(word)
    if not letters:
        return MemberVerdict("no-within-limits")
    terminals = set(grammar.terminals)
    for a in letters:
        if a not in terminals or grammar.signature.arity(a) != 2:
            return MemberVerdict("no-within-limits")
    target = canonical_key(string_graph(letters))

    max_nodes = limits.max_nodes
    max_edges = limits.max_edges
    if grammar.node_monotone:
        max_nodes = min(max_nodes, len(letters) + 1)
    if grammar.edge_monotone:
        max_edges = min(max_edges, len(letters))
    bounded = Limits(
        max_steps=limits.max_steps,
        max_nodes=max_nodes,
        max_edges=max_edges,
        max_results=limits.max_results,
    )
    search = _Search(grammar=grammar, control=ctrl, limits=bounded)
    hit: list = []

    def check(pair, graph) -> bool:
        if pair[0] == target:
            hit.append(pair)
            return True
        return False

    search.run(check)
    if hit:
        trace = []
        pair = hit[0]
        while search.parents[pair] is not None:
            pair, index = search.parents[pair]
            trace.append(index)
        return MemberVerdict("yes", tuple(reversed(trace)))
    if search.hit_results:
        return MemberVerdict("unknown")
    if search.hit_nodes and not grammar.node_monotone:
        return MemberVerdict("unknown")
    if search.hit_edges and not grammar.edge_monotone:
        return MemberVerdict("unknown")
    return MemberVerdict("no-within-limits")


def remove_unreachable(g: AnyPHR) -> AnyPHR:
    """Drop labels no derivation from the start handle can ever touch.

    Reachability is over rule structure only (control cannot make an
    unreachable label reachable), so the derived language is unchanged.
    """
    grammar, _ = split_control(g)
    reachable = {grammar.start}
    changed = True
    while changed:
        changed = False
        for _, table in grammar.tables:
            for rule in table.rules:
                if rule.lhs in reachable:
                    for e in rule.rhs.edges:
                        if e.label not in reachable:
                            reachable.add(e.label)
                            changed = True
    keep = tuple(sorted(reachable))
    sig = Signature.of({l: grammar.signature.arity(l) for l in keep})
    tables = tuple(
        (
            index,
            Table(
                rules=tuple(r for r in table.rules if r.lhs in reachable),
                scope=keep,
            ),
        )
        for index, table in grammar.tables
    )
    trimmed = PHRGrammar(
        signature=sig,
        terminals=tuple(a for a in grammar.terminals if a in reachable),
        start=grammar.start,
        tables=tables,
        order=grammar.order,
    )
    if isinstance(g, ControlledPHRGrammar):
        return ControlledPHRGrammar(grammar=trimmed, control=g.control)
    return trimmed
