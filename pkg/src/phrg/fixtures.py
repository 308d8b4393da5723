"""Built-in example grammars.

Each fixture is a document builder; ``fixture(name)`` returns a fresh
``GrammarDocument``.  These cover the main language families the test
suite exercises: an exponential graph family, a doubling string family,
bracket languages, a copy language that is not context-free, and word
problems of free groups and free products.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

from .grammar import (
    ControlAutomaton,
    ET0LGrammar,
    HRGrammar,
    PHRGrammar,
    Rule,
    Table,
    WordTable,
)
from .hypergraph import Signature, disjoint_union, handle, hypergraph, string_graph
from .textfmt import GrammarDocument
from .transforms import et0l_to_phr, free_product_wp, hr_to_phr, relabel_grammar


def _fig5_squares() -> GrammarDocument:
    sig = Signature.of({"box": 0})
    double = disjoint_union(handle("box", 0), handle("box", 0))
    table = Table(rules=(Rule("box", double),), scope=sig.labels)
    g = PHRGrammar(
        signature=sig,
        terminals=("box",),
        start="box",
        tables=(("1", table),),
        order=0,
    )
    return GrammarDocument(kind="phr", grammar=g, name="fig5_squares")


def _a_pow2_et0l() -> GrammarDocument:
    g = ET0LGrammar(
        alphabet=("a",),
        terminals=("a",),
        axiom="a",
        tables=(("1", WordTable(rules=(("a", ("a", "a")),), scope=("a",))),),
    )
    return GrammarDocument(kind="et0l", grammar=g, name="a_pow2_et0l")


def _a_pow2() -> GrammarDocument:
    g = et0l_to_phr(_a_pow2_et0l().grammar)
    return GrammarDocument(kind="phr", grammar=g, name="a_pow2")


def _dyck_hr() -> GrammarDocument:
    sig = Signature.of({"S": 2, "a": 2, "b": 2})
    rules = (
        Rule("S", string_graph(("a", "b"))),
        Rule("S", string_graph(("a", "S", "b"))),
        Rule("S", string_graph(("S", "S"))),
    )
    g = HRGrammar(
        signature=sig, nonterminals=("S",), start="S", rules=rules, order=2
    )
    return GrammarDocument(kind="hr", grammar=g, name="dyck_hr")


def _dyck_phr() -> GrammarDocument:
    g = hr_to_phr(_dyck_hr().grammar)
    return GrammarDocument(kind="phr", grammar=g, name="dyck_phr")


def _copy_dyck_K() -> GrammarDocument:
    """Words w tagged-copy(w) with w a bracket word; not context-free.

    A type-4 nonterminal W grows two tracks in lockstep: its external
    sequence is (track1 from, track1 to, track2 from, track2 to).  The
    start rule splices the two tracks into one path, so the second track
    is read right after the first.
    """
    sig = Signature.of(
        {"S": 2, "W": 4, "a": 2, "b": 2, "abar": 2, "bbar": 2}
    )
    start_rhs = hypergraph(
        nodes=["u", "m", "v"],
        edges=[("e", "W", ("u", "m", "m", "v"))],
        ext=("u", "v"),
    )
    pair_rhs = hypergraph(
        nodes=["x1", "x2", "p", "y1", "y2", "q"],
        edges=[
            ("e1", "a", ("x1", "p")),
            ("e2", "b", ("p", "x2")),
            ("e3", "abar", ("y1", "q")),
            ("e4", "bbar", ("q", "y2")),
        ],
        ext=("x1", "x2", "y1", "y2"),
    )
    nest_rhs = hypergraph(
        nodes=["x1", "x2", "p", "p2", "y1", "y2", "q", "q2"],
        edges=[
            ("e1", "a", ("x1", "p")),
            ("e2", "W", ("p", "p2", "q", "q2")),
            ("e3", "b", ("p2", "x2")),
            ("e4", "abar", ("y1", "q")),
            ("e5", "bbar", ("q2", "y2")),
        ],
        ext=("x1", "x2", "y1", "y2"),
    )
    chain_rhs = hypergraph(
        nodes=["x1", "x2", "m1", "y1", "y2", "m2"],
        edges=[
            ("e1", "W", ("x1", "m1", "y1", "m2")),
            ("e2", "W", ("m1", "x2", "m2", "y2")),
        ],
        ext=("x1", "x2", "y1", "y2"),
    )
    g = HRGrammar(
        signature=sig,
        nonterminals=("S", "W"),
        start="S",
        rules=(
            Rule("S", start_rhs),
            Rule("W", pair_rhs),
            Rule("W", nest_rhs),
            Rule("W", chain_rhs),
        ),
        order=4,
    )
    return GrammarDocument(kind="phr", grammar=hr_to_phr(g), name="copy_dyck_K")


def _z_wp() -> GrammarDocument:
    """Word problem of the integers: words with equally many a and A."""
    sig = Signature.of({"S": 2, "a": 2, "A": 2})
    rules = (
        Rule("S", string_graph(("S", "S"))),
        Rule("S", string_graph(("a", "S", "A"))),
        Rule("S", string_graph(("A", "S", "a"))),
        Rule("S", string_graph(("a", "A"))),
        Rule("S", string_graph(("A", "a"))),
    )
    g = HRGrammar(
        signature=sig, nonterminals=("S",), start="S", rules=rules, order=2
    )
    return GrammarDocument(kind="phr", grammar=hr_to_phr(g), name="z_wp")


@lru_cache(maxsize=1)
def _f2_wp_grammar() -> PHRGrammar:
    z1 = _z_wp().grammar
    assert isinstance(z1, PHRGrammar)
    z2 = relabel_grammar(z1, {"a": "b", "A": "B"})
    return free_product_wp(z1, z2)


def _f2_wp() -> GrammarDocument:
    return GrammarDocument(kind="phr", grammar=_f2_wp_grammar(), name="f2_wp")


def _z2_wp() -> GrammarDocument:
    """Word problem of the order-two group: even powers of a."""
    sig = Signature.of({"S": 2, "a": 2})
    rules = (
        Rule("S", string_graph(("S", "S"))),
        Rule("S", string_graph(("a", "a"))),
        Rule("S", string_graph(("a", "S", "a"))),
    )
    g = HRGrammar(
        signature=sig, nonterminals=("S",), start="S", rules=rules, order=2
    )
    return GrammarDocument(kind="phr", grammar=hr_to_phr(g), name="z2_wp")


def _dihedral_wp() -> GrammarDocument:
    z2a = _z2_wp().grammar
    assert isinstance(z2a, PHRGrammar)
    z2b = relabel_grammar(z2a, {"a": "b"})
    return GrammarDocument(
        kind="phr", grammar=free_product_wp(z2a, z2b), name="dihedral_wp"
    )


def _ctl_base() -> PHRGrammar:
    sig = Signature.of({"s": 2, "a": 2, "b": 2})
    ids = (Rule("a", handle("a", 2)), Rule("b", handle("b", 2)))
    t1 = Table(rules=(Rule("s", string_graph(("a", "s"))),) + ids, scope=sig.labels)
    t2 = Table(rules=(Rule("s", string_graph(("b", "s"))),) + ids, scope=sig.labels)
    t0 = Table(rules=(Rule("s", string_graph(("b",))),) + ids, scope=sig.labels)
    return PHRGrammar(
        signature=sig,
        terminals=("a", "b"),
        start="s",
        tables=(("1", t1), ("2", t2), ("0", t0)),
        order=2,
    )


def _ctl(name: str, control: ControlAutomaton) -> GrammarDocument:
    return GrammarDocument(kind="phr", grammar=_ctl_base(), control=control, name=name)


def _ctl_none() -> GrammarDocument:
    control = ControlAutomaton(
        states=("q",),
        alphabet=("0", "1", "2"),
        transitions=(("q", "0", "q"), ("q", "1", "q"), ("q", "2", "q")),
        initial="q",
        finals=(),
    )
    return _ctl("ctl_none", control)


def _ctl_all() -> GrammarDocument:
    control = ControlAutomaton(
        states=("q",),
        alphabet=("0", "1", "2"),
        transitions=(("q", "0", "q"), ("q", "1", "q"), ("q", "2", "q")),
        initial="q",
        finals=("q",),
    )
    return _ctl("ctl_all", control)


def _ctl_plus0() -> GrammarDocument:
    control = ControlAutomaton(
        states=("p", "r", "f"),
        alphabet=("0", "1", "2"),
        transitions=(
            ("p", "1", "r"),
            ("p", "2", "r"),
            ("r", "1", "r"),
            ("r", "2", "r"),
            ("r", "0", "f"),
        ),
        initial="p",
        finals=("f",),
    )
    return _ctl("ctl_plus0", control)


_BUILDERS: dict[str, tuple[str, Callable[[], GrammarDocument]]] = {
    "fig5_squares": ("doubling family of 0-ary edges", _fig5_squares),
    "a_pow2_et0l": ("word grammar doubling a run of a", _a_pow2_et0l),
    "a_pow2": ("string graphs a^(2^n)", _a_pow2),
    "dyck_hr": ("balanced brackets, sequential grammar", _dyck_hr),
    "dyck_phr": ("balanced brackets, embedded", _dyck_phr),
    "copy_dyck_K": ("bracket word followed by its tagged copy", _copy_dyck_K),
    "z_wp": ("words with equally many a and A", _z_wp),
    "f2_wp": ("word problem of the rank-2 free group", _f2_wp),
    "z2_wp": ("nonempty even powers of a", _z2_wp),
    "dihedral_wp": ("word problem of the infinite dihedral group", _dihedral_wp),
    "ctl_none": ("appending grammar, empty control", _ctl_none),
    "ctl_all": ("appending grammar, unrestricted control", _ctl_all),
    "ctl_plus0": ("appending grammar, grow-then-stop control", _ctl_plus0),
}


def fixture_names() -> tuple[str, ...]:
    return tuple(_BUILDERS)


def fixture_description(name: str) -> str:
    return _BUILDERS[name][0]


def fixture(name: str) -> GrammarDocument:
    if name not in _BUILDERS:
        raise KeyError(f"no fixture named {name!r}")
    return _BUILDERS[name][1]()
