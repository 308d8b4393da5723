"""Parallel hyperedge replacement grammars.

A library for hypergraphs with ordered tentacles, grammars that rewrite
every edge of a graph in one synchronized step, table-sequence control
by finite automata, and a collection of constructions that combine and
translate such grammars while preserving their languages.
"""

from .hypergraph import (
    Hyperedge,
    Hypergraph,
    HypergraphError,
    Signature,
    Violation,
    discrete_graph,
    disjoint_union,
    extract_string,
    from_json,
    from_json_obj,
    handle,
    hypergraph,
    replace,
    string_graph,
    to_json,
    to_json_obj,
    validate,
)
from .canonical import (
    IsoWitness,
    canonical_graph,
    canonical_key,
    is_isomorphic,
    isomorphism,
)
from .grammar import (
    AnyPHR,
    ControlAutomaton,
    ControlledPHRGrammar,
    ET0LGrammar,
    GrammarError,
    HRGrammar,
    PHRGrammar,
    Rule,
    Table,
    WordTable,
    direct_derivations,
    et0l_step,
    identity_table,
    is_identity_rule,
    override_table,
    parallel_successors,
    split_control,
    trace_successors,
)
from .engine import (
    LanguageEnumeration,
    Limits,
    MemberVerdict,
    StringEnumeration,
    enumerate_language,
    enumerate_strings,
    member_string,
    remove_unreachable,
)
from .transforms import (
    Homomorphism,
    SubstitutionSpec,
    TransformError,
    apply_hom,
    et0l_propagating,
    et0l_to_phr,
    free_product_wp,
    hr_to_phr,
    inverse_hom,
    iterate_substitution,
    rational_concat,
    rational_intersect,
    rational_intersect_controlled,
    rational_plus,
    rational_union,
    regular_to_phr,
    relabel_grammar,
    relabel_graph,
    remove_control,
    substitute,
)
from .textfmt import (
    GrammarDocument,
    ParseError,
    parse_document,
    parse_fsa,
    serialize_document,
    serialize_fsa,
)
from .dot import export_dot
from .fixtures import fixture, fixture_description, fixture_names

__version__ = "0.1.0"

__all__ = [
    "AnyPHR",
    "ControlAutomaton",
    "ControlledPHRGrammar",
    "ET0LGrammar",
    "GrammarDocument",
    "GrammarError",
    "HRGrammar",
    "Homomorphism",
    "Hyperedge",
    "Hypergraph",
    "HypergraphError",
    "IsoWitness",
    "LanguageEnumeration",
    "Limits",
    "MemberVerdict",
    "PHRGrammar",
    "ParseError",
    "Rule",
    "Signature",
    "StringEnumeration",
    "SubstitutionSpec",
    "Table",
    "TransformError",
    "Violation",
    "WordTable",
    "apply_hom",
    "canonical_graph",
    "canonical_key",
    "direct_derivations",
    "discrete_graph",
    "disjoint_union",
    "enumerate_language",
    "enumerate_strings",
    "et0l_propagating",
    "et0l_step",
    "et0l_to_phr",
    "export_dot",
    "extract_string",
    "fixture",
    "fixture_description",
    "fixture_names",
    "free_product_wp",
    "from_json",
    "from_json_obj",
    "handle",
    "hr_to_phr",
    "hypergraph",
    "identity_table",
    "inverse_hom",
    "is_identity_rule",
    "is_isomorphic",
    "isomorphism",
    "iterate_substitution",
    "member_string",
    "override_table",
    "parallel_successors",
    "parse_document",
    "parse_fsa",
    "rational_concat",
    "rational_intersect",
    "rational_intersect_controlled",
    "rational_plus",
    "rational_union",
    "regular_to_phr",
    "relabel_grammar",
    "relabel_graph",
    "remove_control",
    "remove_unreachable",
    "replace",
    "serialize_document",
    "serialize_fsa",
    "split_control",
    "string_graph",
    "substitute",
    "to_json",
    "to_json_obj",
    "trace_successors",
    "validate",
]
