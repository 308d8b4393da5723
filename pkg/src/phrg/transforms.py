"""Language-preserving grammar constructions.

Each function here builds a new grammar whose derived (string) language
relates to its inputs in a stated way: embeddings of sequential
hyperedge replacement and of tabled word grammars, removal of derivation
control, substitution and iterated substitution of string languages into
terminal letters, the rational operations, intersection with a regular
word language, inverse homomorphisms, and the word problem of a free
product of groups given by grammars for their word problems.

String languages are always compared modulo the empty word.

Fresh labels are written ``@name`` and barred (tagged) copies ``~name``;
both prefixes are uniquified against every label in sight, so user
labels never collide with construction labels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .engine import remove_unreachable
from .grammar import (
    ControlAutomaton,
    ControlledPHRGrammar,
    ET0LGrammar,
    HRGrammar,
    PHRGrammar,
    Rule,
    Table,
    Word,
    WordTable,
    identity_table,
    is_identity_rule,
    override_table,
)
from .hypergraph import (
    Hyperedge,
    Hypergraph,
    Signature,
    disjoint_union,
    handle,
    string_graph,
)


class TransformError(ValueError):
    """Raised when a construction's preconditions are not met."""


# ---------------------------------------------------------------- naming


def _fresh(used: set[str], base: str) -> str:
    name = f"@{base}"
    k = 2
    while name in used:
        name = f"@{base}.{k}"
        k += 1
    used.add(name)
    return name


def _fresh_bar(used: set[str], base: str) -> str:
    name = f"~{base}"
    k = 2
    while name in used:
        name = f"~{base}.{k}"
        k += 1
    used.add(name)
    return name


def relabel_graph(h: Hypergraph, mapping: Mapping[str, str]) -> Hypergraph:
    return Hypergraph(
        nodes=h.nodes,
        edges=tuple(
            Hyperedge(e.id, mapping.get(e.label, e.label), e.att) for e in h.edges
        ),
        ext=h.ext,
    )


def relabel_grammar(g: PHRGrammar, mapping: Mapping[str, str]) -> PHRGrammar:
    """Rename labels (missing entries stay); must stay injective."""
    old = g.signature.labels
    new = [mapping.get(l, l) for l in old]
    if len(set(new)) != len(new):
        raise TransformError("relabelling collides two labels")
    sig = Signature.of(
        {mapping.get(l, l): g.signature.arity(l) for l in old}
    )
    tables = tuple(
        (
            index,
            Table(
                rules=tuple(
                    Rule(mapping.get(r.lhs, r.lhs), relabel_graph(r.rhs, mapping))
                    for r in t.rules
                ),
                scope=sig.labels,
            ),
        )
        for index, t in g.tables
    )
    return PHRGrammar(
        signature=sig,
        terminals=tuple(mapping.get(a, a) for a in g.terminals),
        start=mapping.get(g.start, g.start),
        tables=tables,
        order=g.order,
    )


# ------------------------------------------------------------ embeddings


def hr_to_phr(g: HRGrammar) -> PHRGrammar:
    """Embed a sequential grammar: one table, its rules plus identities.

    Identity rules let every edge idle, so each parallel step rewrites an
    arbitrary subset of edges; the derived language is unchanged.
    """
    table = Table(
        rules=g.rules + identity_table(g.signature).rules,
        scope=g.signature.labels,
    )
    return PHRGrammar(
        signature=g.signature,
        terminals=g.terminals,
        start=g.start,
        tables=(("1", table),),
        order=g.order,
    )


_ERASABLE_GUARD = 8
_TABLE_GUARD = 20_000


def et0l_propagating(g: ET0LGrammar) -> ET0LGrammar:
    """An equivalent (modulo the empty word) grammar with no erasing rules.

    Deleting erasable symbols at birth is only sound when the deleted
    symbol can erase along the *remaining* table sequence, so symbols of
    the new grammar are pairs (X, E): X is simulated, E is the set of
    symbols whose pending erasure the derivation still owes.  A step with
    source table i from commitment E to commitment E' exists when every
    symbol of E has an i-rule staying inside E'; a word decodes to plain
    terminals only when its commitment is empty.
    """
    if all(w for _, t in g.tables for _, w in t.rules):
        return g
    erasable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for _, t in g.tables:
            for l, w in t.rules:
                if l not in erasable and all(a in erasable for a in w):
                    erasable.add(l)
                    changed = True
    if len(erasable) > _ERASABLE_GUARD:
        raise TransformError(
            f"{len(erasable)} erasable symbols; commitment sets would blow up"
        )
    er_sorted = tuple(sorted(erasable))
    subsets = [
        frozenset(c)
        for k in range(len(er_sorted) + 1)
        for c in itertools.combinations(er_sorted, k)
    ]

    used = set(g.alphabet)
    start2 = _fresh(used, "start")
    dead = _fresh(used, "dead")
    sym: dict[tuple[str, frozenset[str]], str] = {}
    for x in g.alphabet:
        for e_set in subsets:
            tag = "+".join(sorted(e_set)) if e_set else "-"
            sym[(x, e_set)] = _fresh(used, f"{x}|{tag}")
    alphabet2 = tuple(
        sorted({start2, dead, *g.terminals, *sym.values()})
    )

    def enc(e_set: frozenset[str]) -> str:
        return "+".join(sorted(e_set)) if e_set else "-"

    def fill(rules: list[tuple[str, Word]]) -> WordTable:
        have = {l for l, _ in rules}
        rules += [(x, (dead,)) for x in alphabet2 if x not in have]
        return WordTable(tuple(rules), alphabet2)

    tables2: list[tuple[str, WordTable]] = [
        ("init", fill([(start2, (sym[(g.axiom, frozenset())],))]))
    ]
    decode = [(sym[(a, frozenset())], (a,)) for a in g.terminals]
    tables2.append(("dec", fill(decode)))

    reached: set[frozenset[str]] = {frozenset()}
    todo = [frozenset()]
    while todo:
        e_set = todo.pop()
        for index, t in g.tables:
            for e_next in subsets:
                ok = all(
                    any(set(w) <= e_next for w in t.by_symbol[x]) for x in e_set
                )
                if not ok:
                    continue
                rules: list[tuple[str, Word]] = []
                for x in g.alphabet:
                    variants: set[Word] = set()
                    for w in t.by_symbol[x]:
                        deletable = [i for i, a in enumerate(w) if a in e_next]
                        for drop_count in range(len(deletable) + 1):
                            for drop in itertools.combinations(deletable, drop_count):
                                kept = tuple(
                                    sym[(a, e_next)]
                                    for i, a in enumerate(w)
                                    if i not in set(drop)
                                )
                                if kept:
                                    variants.add(kept)
                    rules += [(sym[(x, e_set)], v) for v in sorted(variants)]
                tables2.append((f"t.{index}.{enc(e_set)}.{enc(e_next)}", fill(rules)))
                if len(tables2) > _TABLE_GUARD:
                    raise TransformError("commitment-set construction too large")
                if e_next not in reached:
                    reached.add(e_next)
                    todo.append(e_next)

    out = ET0LGrammar(
        alphabet=alphabet2,
        terminals=g.terminals,
        axiom=start2,
        tables=tuple(tables2),
    )
    return _trim_et0l(out)


def _trim_et0l(g: ET0LGrammar) -> ET0LGrammar:
    reachable = {g.axiom}
    changed = True
    while changed:
        changed = False
        for _, t in g.tables:
            for l, w in t.rules:
                if l in reachable:
                    for a in w:
                        if a not in reachable:
                            reachable.add(a)
                            changed = True
    keep = tuple(sorted(reachable))
    tables = tuple(
        (
            index,
            WordTable(
                rules=tuple(r for r in t.rules if r[0] in reachable), scope=keep
            ),
        )
        for index, t in g.tables
    )
    return ET0LGrammar(
        alphabet=keep,
        terminals=tuple(a for a in g.terminals if a in reachable),
        axiom=g.axiom,
        tables=tables,
    )


def et0l_to_phr(g: ET0LGrammar) -> PHRGrammar:
    """Embed a tabled word grammar as a string-graph grammar of order 2."""
    p = et0l_propagating(g)
    sig = Signature.of({a: 2 for a in p.alphabet})
    tables = tuple(
        (
            index,
            Table(
                rules=tuple(Rule(l, string_graph(w)) for l, w in t.rules),
                scope=sig.labels,
            ),
        )
        for index, t in p.tables
    )
    return PHRGrammar(
        signature=sig,
        terminals=p.terminals,
        start=p.axiom,
        tables=tables,
        order=2,
    )


def regular_to_phr(m: ControlAutomaton) -> PHRGrammar:
    """A string-graph grammar for L(M) (modulo the empty word).

    Right-linear: one nonterminal per state of the determinized
    automaton, one table.
    """
    if not m.alphabet:
        sig = Signature.of({"@start": 2})
        table = Table(rules=(Rule("@start", handle("@start", 2)),), scope=sig.labels)
        return PHRGrammar(
            signature=sig, terminals=(), start="@start", tables=(("1", table),), order=2
        )
    d = m.determinize_complete()
    used = set(m.alphabet)
    nsym = {q: _fresh(used, f"q{i}") for i, q in enumerate(d.states)}
    finals = set(d.finals)
    rules: list[Rule] = []
    for q in d.states:
        for a in d.alphabet:
            q2 = d.step(q, a)
            rules.append(Rule(nsym[q], string_graph((a, nsym[q2]))))
            if q2 in finals:
                rules.append(Rule(nsym[q], string_graph((a,))))
    sig = Signature.of({**{a: 2 for a in d.alphabet}, **{n: 2 for n in nsym.values()}})
    rules += [Rule(a, handle(a, 2)) for a in d.alphabet]
    table = Table(rules=tuple(rules), scope=sig.labels)
    return PHRGrammar(
        signature=sig,
        terminals=d.alphabet,
        start=nsym[d.initial],
        tables=(("1", table),),
        order=2,
    )


# -------------------------------------------------------- control removal


def remove_control(cg: ControlledPHRGrammar) -> PHRGrammar:
    """An uncontrolled grammar with the same derived language.

    The start rule spawns a state marker (a 0-ary edge) next to a copy of
    the start handle whose terminals are tagged; each new table simulates
    one old table on tagged labels and advances the marker; a final table
    erases an accepting marker and untags the terminals.  Underivable
    situations are routed to dead labels that can never become terminal,
    so exactly the controlled language survives.
    """
    g = cg.grammar
    d = cg.control.determinize_complete()
    terminals = set(g.terminals)
    used = set(g.signature.labels)
    state_sym = {q: _fresh(used, f"q{i}") for i, q in enumerate(d.states)}
    bar = {a: _fresh_bar(used, a) for a in sorted(terminals)}
    start2 = _fresh(used, "start")
    k = g.order
    dead = {j: _fresh(used, f"dead{j}") for j in range(k + 1)}

    arities = {l: g.signature.arity(l) for l in g.signature.labels}
    arities.update({s: 0 for s in state_sym.values()})
    arities.update({bar[a]: g.signature.arity(a) for a in bar})
    arities[start2] = g.signature.arity(g.start)
    arities.update({dead[j]: j for j in dead})
    sig = Signature.of(arities)

    def barred(h: Hypergraph) -> Hypergraph:
        return relabel_graph(h, bar)

    def to_dead(label: str) -> Rule:
        return Rule(label, handle(dead[arities[label]], arities[label]))

    empty = Hypergraph((), (), ())
    finals = set(d.finals)
    t0_rules = [
        Rule(
            start2,
            disjoint_union(
                barred(handle(g.start, g.signature)),
                handle(state_sym[d.initial], 0),
            ),
        )
    ]
    t0_rules += [Rule(state_sym[q], empty) for q in sorted(finals)]
    t0_rules += [Rule(bar[a], handle(a, g.signature)) for a in sorted(terminals)]
    t0_rules += [to_dead(state_sym[q]) for q in sorted(set(d.states) - finals)]
    t0_rules += [to_dead(l) for l in g.signature.labels]
    t0_rules += [to_dead(dead[j]) for j in dead]
    t0 = Table(rules=tuple(t0_rules), scope=sig.labels)

    index0 = "0"
    taken = {i for i, _ in g.tables}
    while index0 in taken:
        index0 = "." + index0
    tables: list[tuple[str, Table]] = [(index0, t0)]
    for index, t in g.tables:
        rules: list[Rule] = []
        for r in t.rules:
            lhs = bar[r.lhs] if r.lhs in terminals else r.lhs
            rules.append(Rule(lhs, barred(r.rhs)))
        rules += [
            Rule(state_sym[q], handle(state_sym[d.step(q, index)], 0))
            for q in d.states
        ]
        rules.append(Rule(start2, handle(start2, sig)))
        rules += [Rule(a, handle(a, sig)) for a in sorted(terminals)]
        rules += [Rule(dead[j], handle(dead[j], sig)) for j in dead]
        tables.append((index, Table(rules=tuple(rules), scope=sig.labels)))

    return PHRGrammar(
        signature=sig,
        terminals=g.terminals,
        start=start2,
        tables=tuple(tables),
        order=k,
    )


# ----------------------------------------------------------- substitution


@dataclass(frozen=True)
class SubstitutionSpec:
    """Per-letter image grammars for substitution into string languages."""

    images: tuple[tuple[str, PHRGrammar], ...]

    def as_dict(self) -> dict[str, PHRGrammar]:
        return dict(self.images)

    @classmethod
    def of(cls, mapping: Mapping[str, PHRGrammar]) -> "SubstitutionSpec":
        return cls(tuple(sorted(mapping.items())))


def _coerce_spec(spec) -> dict[str, PHRGrammar]:
    if isinstance(spec, SubstitutionSpec):
        return spec.as_dict()
    return dict(spec)


def _start_hygienic(g: PHRGrammar, used: set[str]) -> PHRGrammar:
    """Ensure the start never occurs in a right-hand side nor is terminal."""
    occurs = any(
        e.label == g.start for _, t in g.tables for r in t.rules for e in r.rhs.edges
    )
    used.update(g.signature.labels)
    if not occurs and g.start not in set(g.terminals):
        return g
    start2 = _fresh(used, "start")
    arity = g.signature.arity(g.start)
    sig = g.signature.merged(Signature.of({start2: arity}))
    # A terminal start means the bare start handle is itself a 0-step
    # word of the language; copied rules only reach words needing a real
    # first step, so a unit rule keeps that word derivable.
    unit = (
        (Rule(start2, handle(g.start, arity)),)
        if g.start in set(g.terminals)
        else ()
    )
    tables = tuple(
        (
            index,
            Table(
                rules=t.rules
                + tuple(Rule(start2, r.rhs) for r in t.rules if r.lhs == g.start)
                + unit,
                scope=sig.labels,
            ),
        )
        for index, t in g.tables
    )
    return PHRGrammar(
        signature=sig,
        terminals=g.terminals,
        start=start2,
        tables=tables,
        order=max(g.order, sig.arity(start2)),
    )


def _pad_terminals(g: PHRGrammar, target: Sequence[str]) -> PHRGrammar:
    """Extend the terminal alphabet to ``target`` with inert fresh letters."""
    if not set(g.terminals) <= set(target):
        raise TransformError("cannot pad: grammar already has terminals outside target")
    extra = [b for b in target if b not in g.signature]
    for b in target:
        if b in g.signature and g.signature.arity(b) != 2:
            raise TransformError(f"letter {b!r} has arity {g.signature.arity(b)}")
    sig = g.signature.merged(Signature.of({b: 2 for b in extra}))
    tables = tuple(
        (
            index,
            Table(
                rules=t.rules + tuple(Rule(b, handle(b, 2)) for b in extra),
                scope=sig.labels,
            ),
        )
        for index, t in g.tables
    )
    return PHRGrammar(
        signature=sig,
        terminals=tuple(sorted(target)),
        start=g.start,
        tables=tables,
        order=g.order,
    )


def _substitution_build(
    g: PHRGrammar, image_map: dict[str, PHRGrammar], with_restart: bool
) -> PHRGrammar:
    letters = sorted(image_map)
    missing = set(g.terminals) - set(letters)
    if missing:
        raise TransformError(f"no image for terminals: {sorted(missing)}")
    for a in set(letters) & set(g.signature.labels):
        if g.signature.arity(a) != 2:
            raise TransformError(f"substituted letter {a!r} must have arity 2")

    target = sorted({b for img in image_map.values() for b in img.terminals})
    used: set[str] = set(target)

    images: dict[str, PHRGrammar] = {}
    for a in letters:
        img = image_map[a]
        clash = {
            l: None
            for l in img.signature.labels
            if l in set(target) and l not in set(img.terminals)
        }
        if clash:
            tmp = set(used) | set(img.signature.labels)
            img = relabel_grammar(
                img, {l: _fresh(tmp, l) for l in clash}
            )
            used |= tmp
        img = _start_hygienic(img, used)
        if img.signature.arity(img.start) != 2:
            raise TransformError(f"image for {a!r} must have a type-2 start")
        img = _pad_terminals(img, target)
        used.update(img.signature.labels)
        images[a] = img

    used.update(g.signature.labels)
    gmap = {
        l: _fresh(used, l) for l in g.signature.labels if l in set(target)
    }
    host = relabel_grammar(g, gmap) if gmap else g

    bars = {
        a: {x: _fresh_bar(used, f"{a}.{x}") for x in images[a].signature.labels}
        for a in letters
    }
    k = max([g.order, 2] + [images[a].order for a in letters])
    dead = {j: _fresh(used, f"dead{j}") for j in range(k + 1)}

    arities = {l: host.signature.arity(l) for l in host.signature.labels}
    for b in target:
        if b in arities and arities[b] != 2:
            raise TransformError(f"letter {b!r} has arity {arities[b]}")
        arities[b] = 2
    for a in letters:
        isig = images[a].signature
        for x in isig.labels:
            arities[bars[a][x]] = isig.arity(x)
    for j, f in dead.items():
        arities[f] = j
    sig = Signature.of(arities)

    base = identity_table(sig)
    failure = Table(
        rules=tuple(
            Rule(l, handle(dead[sig.arity(l)], sig.arity(l))) for l in sig.labels
        ),
        scope=sig.labels,
    )

    tables: list[tuple[str, Table]] = []
    for gi, (index, t) in enumerate(host.tables):
        tables.append((f"g.{gi}", override_table(base, t.rules)))

    switch = [
        Rule(gmap.get(a, a), handle(bars[a][images[a].start], 2))
        for a in sorted(set(g.terminals))
    ]
    tables.append(("sub", override_table(failure, switch)))

    for li, a in enumerate(letters):
        img = images[a]
        bm = bars[a]
        delay = Rule(bm[img.start], handle(bm[img.start], 2))
        for ti, (index, t) in enumerate(img.tables):
            overlay = [Rule(bm[r.lhs], relabel_graph(r.rhs, bm)) for r in t.rules]
            overlay.append(delay)
            tables.append((f"im.{li}.{ti}", override_table(base, overlay)))
        decode = []
        for x in img.signature.labels:
            if x == img.start:
                continue  # delayed starts survive decoding untouched
            if x in set(target):
                decode.append(Rule(bm[x], handle(x, 2)))
            else:
                ar = img.signature.arity(x)
                decode.append(Rule(bm[x], handle(dead[ar], ar)))
        tables.append((f"dec.{li}", override_table(base, decode)))

    if with_restart:
        restart = [
            Rule(b, handle(bars[b][images[b].start], 2)) for b in target
        ]
        tables.append(("restart", override_table(failure, restart)))

    return PHRGrammar(
        signature=sig,
        terminals=tuple(target),
        start=gmap.get(g.start, g.start),
        tables=tuple(tables),
        order=k,
    )


def substitute(g: PHRGrammar, spec) -> PHRGrammar:
    """Replace each terminal letter by a whole string language.

    ``spec`` maps every terminal of ``g`` to a grammar; the result
    derives every graph obtained from a graph of L(g) by substituting,
    per terminal edge, some string graph of that letter's image language.
    """
    return _substitution_build(g, _coerce_spec(spec), with_restart=False)


def iterate_substitution(g: PHRGrammar, spec) -> PHRGrammar:
    """Close L(g) under repeatedly applying the substitution.

    Every letter of the common image alphabet must itself have an image,
    since substituted letters may be substituted again.
    """
    image_map = _coerce_spec(spec)
    target = {b for img in image_map.values() for b in img.terminals}
    uncovered = target - set(image_map)
    if uncovered:
        raise TransformError(
            f"iterated substitution needs images for: {sorted(uncovered)}"
        )
    return _substitution_build(g, image_map, with_restart=True)


# ------------------------------------------------------- rational closure


def _word_grammar(word: Word) -> PHRGrammar:
    """The grammar of the singleton language {word}."""
    letters = sorted(set(word))
    used = set(letters)
    start = _fresh(used, "start")
    sig = Signature.of({start: 2, **{a: 2 for a in letters}})
    rules = (Rule(start, string_graph(word)),) + tuple(
        Rule(a, handle(a, 2)) for a in letters
    )
    return PHRGrammar(
        signature=sig,
        terminals=tuple(letters),
        start=start,
        tables=(("1", Table(rules=rules, scope=sig.labels)),),
        order=2,
    )


def _k_host(words: Sequence[Word], letters: Sequence[str]) -> PHRGrammar:
    """A host grammar with language ``set(words)`` over ``letters``."""
    used = set(letters)
    start = _fresh(used, "start")
    sig = Signature.of({start: 2, **{x: 2 for x in letters}})
    rules = tuple(Rule(start, string_graph(w)) for w in words) + tuple(
        Rule(x, handle(x, 2)) for x in letters
    )
    return PHRGrammar(
        signature=sig,
        terminals=tuple(letters),
        start=start,
        tables=(("1", Table(rules=rules, scope=sig.labels)),),
        order=2,
    )


def rational_union(g1: PHRGrammar, g2: PHRGrammar) -> PHRGrammar:
    return substitute(
        _k_host([("X",), ("Y",)], ("X", "Y")), {"X": g1, "Y": g2}
    )


def rational_concat(g1: PHRGrammar, g2: PHRGrammar) -> PHRGrammar:
    return substitute(_k_host([("X", "Y")], ("X", "Y")), {"X": g1, "Y": g2})


def rational_plus(g: PHRGrammar) -> PHRGrammar:
    used = {"X"}
    start = _fresh(used, "start")
    sig = Signature.of({start: 2, "X": 2})
    rules = (
        Rule(start, string_graph(("X",))),
        Rule(start, string_graph(("X", start))),
        Rule("X", handle("X", 2)),
    )
    host = PHRGrammar(
        signature=sig,
        terminals=("X",),
        start=start,
        tables=(("1", Table(rules=rules, scope=sig.labels)),),
        order=2,
    )
    return substitute(host, {"X": g})


# ---------------------------------------------------------- homomorphisms


@dataclass(frozen=True)
class Homomorphism:
    """A letter-to-word map, extended to words by concatenation."""

    mapping: tuple[tuple[str, Word], ...]

    def as_dict(self) -> dict[str, Word]:
        return dict(self.mapping)

    @classmethod
    def of(cls, mapping: Mapping[str, Sequence[str] | str]) -> "Homomorphism":
        return cls(
            tuple(sorted((a, tuple(w)) for a, w in mapping.items()))
        )

    @property
    def erasing(self) -> bool:
        return any(not w for _, w in self.mapping)


def _coerce_hom(hom) -> dict[str, Word]:
    if isinstance(hom, Homomorphism):
        return hom.as_dict()
    return {a: tuple(w) for a, w in dict(hom).items()}


def apply_hom(g: PHRGrammar, hom, mode: str = "rf") -> PHRGrammar:
    """The image language h(L(g)), via singleton-word substitution.

    ``mode="rf"`` rejects erasing maps (they would introduce rules whose
    right-hand sides merge external nodes); ``mode="general"`` allows
    them.
    """
    mapping = _coerce_hom(hom)
    if mode not in ("rf", "general"):
        raise TransformError(f"unknown mode {mode!r}")
    if mode == "rf" and any(not w for w in mapping.values()):
        raise TransformError('erasing homomorphism needs mode="general"')
    return substitute(g, {a: _word_grammar(w) for a, w in mapping.items()})


def _block_product(g: PHRGrammar, mapping: Mapping[str, Word]) -> PHRGrammar:
    """Words over the mapping's letters whose spelled images lie in L(g).

    Product of g with the nondeterministic block automaton that reads an
    image word and guesses where each preimage letter's block ends.
    Node annotations carry single automaton states, so adjacent edges
    must agree on one run; a letter edge inside a block decodes by
    merging its endpoints, and the edge finishing a block decodes to the
    block's preimage letter.
    """
    if g.signature.arity(g.start) != 2:
        raise TransformError("preimage needs a string grammar (type-2 start)")
    letters = sorted(mapping)
    gterm = set(g.terminals)
    hub = "hub"
    block_states = [hub]
    rel: dict[tuple[str, str], set[tuple[str, str | None]]] = {}
    for b in letters:
        word = mapping[b]
        if not all(a in gterm and g.signature.arity(a) == 2 for a in word):
            continue
        prev = hub
        for i, a in enumerate(word[:-1]):
            nxt = f"{b}.{i + 1}"
            block_states.append(nxt)
            rel.setdefault((prev, a), set()).add((nxt, None))
            prev = nxt
        rel.setdefault((prev, word[-1]), set()).add((hub, b))
    useful = tuple(block_states)

    active: set[str] = set()
    for _, t in g.tables:
        active |= t.active_labels
    inert = {
        a
        for a in gterm
        if g.signature.arity(a) == 2 and a not in active and a != g.start
    }

    used = set(g.signature.labels) | set(letters)
    enc: dict[tuple[str, tuple[str, ...]], str] = {}
    total = 0
    for x in g.signature.labels:
        ar = g.signature.arity(x)
        total += len(useful) ** ar
        if total > _STATE_GUARD:
            raise TransformError("state-annotation blowup in preimage")
        for assignment in itertools.product(useful, repeat=ar):
            if x in inert:
                targets = rel.get((assignment[0], x), ())
                if not any(q == assignment[1] for q, _ in targets):
                    continue
            enc[(x, assignment)] = _fresh(used, f"{x}({'|'.join(assignment)})")

    arities = {enc[(x, s)]: g.signature.arity(x) for (x, s) in enc}
    arities[g.start] = 2
    for b in letters:
        if b in arities and arities[b] != 2:
            raise TransformError(f"preimage letter {b!r} collides with a label")
        arities[b] = 2
    sig = Signature.of(arities)
    base = identity_table(sig)

    def annotate(rule: Rule) -> list[Rule]:
        ar = g.signature.arity(rule.lhs)
        rhs = rule.rhs
        internal = [v for v in rhs.nodes if v not in set(rhs.ext)]
        if len(useful) ** len(internal) > _STATE_GUARD:
            raise TransformError("state-annotation blowup in preimage")
        out = []
        for boundary in itertools.product(useful, repeat=ar):
            node_state: dict[str, str] = {}
            consistent = True
            for node, q in zip(rhs.ext, boundary):
                if node_state.setdefault(node, q) != q:
                    consistent = False
                    break
            if not consistent:
                continue
            if (rule.lhs, boundary) not in enc:
                continue
            for inner in itertools.product(useful, repeat=len(internal)):
                assign = {**node_state, **dict(zip(internal, inner))}
                labs = []
                for e in rhs.edges:
                    key = (e.label, tuple(assign[v] for v in e.att))
                    if key not in enc:
                        break
                    labs.append(enc[key])
                else:
                    image = Hypergraph(
                        nodes=rhs.nodes,
                        edges=tuple(
                            Hyperedge(e.id, lab, e.att)
                            for e, lab in zip(rhs.edges, labs)
                        ),
                        ext=rhs.ext,
                    )
                    out.append(Rule(enc[(rule.lhs, boundary)], image))
        return out

    tables: list[tuple[str, Table]] = []
    decode = []
    for (q, a), targets in sorted(rel.items()):
        for nq, out in sorted(targets, key=lambda t: (t[0], t[1] or "")):
            if (a, (q, nq)) not in enc:
                continue
            rhs = string_graph(()) if out is None else handle(out, 2)
            decode.append(Rule(enc[(a, (q, nq))], rhs))
    tables.append(("0", override_table(base, decode)))
    seeds = (
        [Rule(g.start, handle(enc[(g.start, (hub, hub))], 2))]
        if (g.start, (hub, hub)) in enc
        else []
    )
    for j, (index, t) in enumerate(g.tables, start=1):
        overlay: list[Rule] = list(seeds)
        for rule in t.rules:
            overlay += annotate(rule)
        tables.append((str(j), override_table(base, overlay)))

    indices = [i for i, _ in tables]
    control = ControlAutomaton(
        states=("c0", "c1", "c2"),
        alphabet=tuple(indices),
        transitions=tuple(
            [("c0", i, "c1") for i in indices if i != "0"]
            + [("c1", i, "c1") for i in indices if i != "0"]
            + [("c1", "0", "c2")]
        ),
        initial="c0",
        finals=("c2",),
    )
    grammar = PHRGrammar(
        signature=sig,
        terminals=tuple(letters),
        start=g.start,
        tables=tuple(tables),
        order=max(g.order, 2),
    )
    return remove_control(ControlledPHRGrammar(grammar=grammar, control=control))


def inverse_hom(g: PHRGrammar, hom) -> PHRGrammar:
    """The preimage language h^{-1}(L(g)), modulo the empty word.

    Letters with nonempty images are found by a block-automaton product
    with g; letters whose image is the empty word may then appear
    anywhere, which one substitution inserts around the found letters.
    """
    mapping = _coerce_hom(hom)
    carriers = sorted(b for b, w in mapping.items() if w)
    erasers = tuple(sorted(b for b, w in mapping.items() if not w))
    if not carriers:
        used = set(mapping)
        start = _fresh(used, "start")
        sig = Signature.of({start: 2, **{b: 2 for b in sorted(mapping)}})
        return PHRGrammar(
            signature=sig,
            terminals=tuple(sorted(mapping)),
            start=start,
            tables=(("1", identity_table(sig)),),
            order=2,
        )
    carried = _block_product(g, {b: mapping[b] for b in carriers})
    if not erasers:
        return carried
    images = {}
    for b in carriers:
        transitions = [("0", t, "0") for t in erasers]
        transitions += [("0", b, "1")]
        transitions += [("1", t, "1") for t in erasers]
        machine = ControlAutomaton(
            states=("0", "1"),
            alphabet=tuple(sorted({b, *erasers})),
            transitions=tuple(transitions),
            initial="0",
            finals=("1",),
        )
        images[b] = regular_to_phr(machine)
    return substitute(carried, images)


# ----------------------------------------------------------- intersection

_STATE_GUARD = 10**6


def rational_intersect_controlled(
    g: PHRGrammar, m: ControlAutomaton
) -> ControlledPHRGrammar:
    """Controlled grammar for L(g) with only words accepted by ``m``.

    Every label is annotated with one automaton state per tentacle; a
    rule instance exists for each consistent state assignment to the
    right-hand side's nodes, and an annotated terminal decodes exactly
    when it matches a transition.  The control insists on at least one
    simulation step and exactly one final decoding step.

    Assignments are drawn only from states on some accepting path, and
    letters that no table rewrites are pinned to the transition their
    endpoints spell.  Both restrictions drop annotation variants that
    could never take part in an accepted derivation.
    """
    if g.signature.arity(g.start) != 2:
        raise TransformError("intersection needs a string grammar (type-2 start)")
    d = m.determinize_complete()
    both = sorted(set(g.terminals) & set(m.alphabet))

    fwd = {d.initial}
    stack = [d.initial]
    while stack:
        q = stack.pop()
        for a in d.alphabet:
            nq = d.step(q, a)
            if nq not in fwd:
                fwd.add(nq)
                stack.append(nq)
    rev: dict[str, set[str]] = {q: set() for q in d.states}
    for q, _, nq in d.transitions:
        rev[nq].add(q)
    back = set(d.finals)
    stack = list(d.finals)
    while stack:
        q = stack.pop()
        for p in rev[q]:
            if p not in back:
                back.add(p)
                stack.append(p)
    useful = tuple(sorted(fwd & back))

    active: set[str] = set()
    for _, t in g.tables:
        active |= t.active_labels
    inert = {
        a
        for a in both
        if g.signature.arity(a) == 2 and a not in active and a != g.start
    }

    used = set(g.signature.labels) | set(both)
    enc: dict[tuple[str, tuple[str, ...]], str] = {}
    total = 0
    for x in g.signature.labels:
        ar = g.signature.arity(x)
        total += len(useful) ** ar
        if total > _STATE_GUARD:
            raise TransformError("state-annotation blowup in intersection")
        for assignment in itertools.product(useful, repeat=ar):
            if x in inert and d.step(assignment[0], x) != assignment[1]:
                continue
            enc[(x, assignment)] = _fresh(used, f"{x}({'|'.join(assignment)})")

    arities = {enc[(x, s)]: g.signature.arity(x) for (x, s) in enc}
    arities[g.start] = 2
    for a in both:
        arities.setdefault(a, g.signature.arity(a))
    sig = Signature.of(arities)
    base = identity_table(sig)

    def annotate(rule: Rule) -> list[Rule]:
        ar = g.signature.arity(rule.lhs)
        rhs = rule.rhs
        internal = [v for v in rhs.nodes if v not in set(rhs.ext)]
        if len(useful) ** len(internal) > _STATE_GUARD:
            raise TransformError("state-annotation blowup in intersection")
        out = []
        for boundary in itertools.product(useful, repeat=ar):
            node_state: dict[str, str] = {}
            consistent = True
            for node, q in zip(rhs.ext, boundary):
                if node_state.setdefault(node, q) != q:
                    consistent = False
                    break
            if not consistent:
                continue
            if (rule.lhs, boundary) not in enc:
                continue
            for inner in itertools.product(useful, repeat=len(internal)):
                assign = {**node_state, **dict(zip(internal, inner))}
                labels = []
                for e in rhs.edges:
                    key = (e.label, tuple(assign[v] for v in e.att))
                    if key not in enc:
                        break
                    labels.append(enc[key])
                else:
                    image = Hypergraph(
                        nodes=rhs.nodes,
                        edges=tuple(
                            Hyperedge(e.id, lab, e.att)
                            for e, lab in zip(rhs.edges, labels)
                        ),
                        ext=rhs.ext,
                    )
                    out.append(Rule(enc[(rule.lhs, boundary)], image))
        return out

    tables: list[tuple[str, Table]] = []
    decode = [
        Rule(enc[(a, (q, d.step(q, a)))], handle(a, 2))
        for a in both
        if g.signature.arity(a) == 2
        for q in useful
        if (a, (q, d.step(q, a))) in enc
    ]
    tables.append(("0", override_table(base, decode)))
    seeds = [
        Rule(g.start, handle(enc[(g.start, (d.initial, qf))], 2))
        for qf in d.finals
        if (g.start, (d.initial, qf)) in enc
    ]
    for j, (index, t) in enumerate(g.tables, start=1):
        overlay: list[Rule] = list(seeds)
        for rule in t.rules:
            overlay += annotate(rule)
        tables.append((str(j), override_table(base, overlay)))

    indices = [i for i, _ in tables]
    control = ControlAutomaton(
        states=("c0", "c1", "c2"),
        alphabet=tuple(indices),
        transitions=tuple(
            [("c0", i, "c1") for i in indices if i != "0"]
            + [("c1", i, "c1") for i in indices if i != "0"]
            + [("c1", "0", "c2")]
        ),
        initial="c0",
        finals=("c2",),
    )
    grammar = PHRGrammar(
        signature=sig,
        terminals=tuple(both),
        start=g.start,
        tables=tuple(tables),
        order=max(g.order, 2),
    )
    return ControlledPHRGrammar(grammar=grammar, control=control)


def rational_intersect(g: PHRGrammar, m: ControlAutomaton) -> PHRGrammar:
    """Uncontrolled grammar for the intersection, via control removal."""
    return remove_control(rational_intersect_controlled(g, m))


# ----------------------------------------------------------- free products


def free_product_wp(g1: PHRGrammar, g2: PHRGrammar) -> PHRGrammar:
    """Word problem of a free product from the factors' word problems.

    Expects grammars for the words equal to the identity in each factor,
    over disjoint letter alphabets.  A word over the union alphabet is
    trivial in the free product iff it reduces to the empty word by
    cutting out nonempty trivial factor words; equivalently, it is built
    from one factor word by repeatedly inserting trivial words at seams.
    A fresh start symbol derives either factor's start, and every letter
    edge a factor rule creates may carry an optional start-labelled
    flank on either side, so insertions are available at every seam when
    they are needed and absent otherwise.  No rule erases, so forms
    never shrink and bounded enumeration is complete up to the edge
    budget.
    """
    a1, a2 = set(g1.terminals), set(g2.terminals)
    if a1 & a2:
        raise TransformError("factor alphabets must be disjoint")
    for g in (g1, g2):
        if g.signature.arity(g.start) != 2:
            raise TransformError("factors must be string grammars (type-2 start)")

    used = set(g1.signature.labels) | set(g2.signature.labels)
    start = _fresh(used, "start")

    def apart(g: PHRGrammar, which: str) -> PHRGrammar:
        mapping = {}
        for x in g.signature.labels:
            if x in g.terminals:
                mapping[x] = x
            else:
                mapping[x] = _fresh(used, f"{which}.{x}")
        return relabel_grammar(g, mapping)

    h1 = apart(g1, "1")
    h2 = apart(g2, "2")
    letters = a1 | a2

    sig = Signature.of(
        {
            start: 2,
            **{x: h1.signature.arity(x) for x in h1.signature.labels},
            **{x: h2.signature.arity(x) for x in h2.signature.labels},
        }
    )
    base = identity_table(sig)

    def flanked(rule: Rule) -> list[Rule]:
        spots = [
            e.id for e in rule.rhs.edges if e.label in letters and len(e.att) == 2
        ]
        out = []
        for picks in itertools.product((0, 1, 2, 3), repeat=len(spots)):
            sides = dict(zip(spots, picks))
            nodes = list(rule.rhs.nodes)
            edges = []
            serial = 0
            for e in rule.rhs.edges:
                pick = sides.get(e.id, 0)
                if e.id not in sides or pick == 0:
                    edges.append(e)
                    continue
                u, v = e.att
                left, right = pick in (1, 3), pick in (2, 3)
                if left:
                    m = f"{e.id}.l{serial}"
                    serial += 1
                    nodes.append(m)
                    edges.append(Hyperedge(f"{e.id}.sl", start, (u, m)))
                    u = m
                if right:
                    m = f"{e.id}.r{serial}"
                    serial += 1
                    nodes.append(m)
                    edges.append(Hyperedge(f"{e.id}.sr", start, (m, v)))
                    v = m
                edges.append(Hyperedge(e.id, e.label, (u, v)))
            out.append(
                Rule(rule.lhs, Hypergraph(nodes=tuple(nodes), edges=tuple(edges), ext=rule.rhs.ext))
            )
        return out

    start_rules = [
        Rule(start, handle(start, 2)),
        Rule(start, handle(h1.start, 2)),
        Rule(start, handle(h2.start, 2)),
    ]

    tables: list[tuple[str, Table]] = []
    for i1, t1 in h1.tables:
        for i2, t2 in h2.tables:
            overlay: list[Rule] = list(start_rules)
            for t in (t1, t2):
                for rule in t.rules:
                    if is_identity_rule(rule):
                        overlay.append(rule)
                    else:
                        overlay += flanked(rule)
            tables.append((f"{i1}.{i2}", override_table(base, overlay)))

    out = PHRGrammar(
        signature=sig,
        terminals=tuple(sorted(letters)),
        start=start,
        tables=tuple(tables),
        order=max(2, g1.order, g2.order),
    )
    return remove_unreachable(out)
