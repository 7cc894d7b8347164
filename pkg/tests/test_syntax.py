import random
import string

import pytest

from salogic.core import (
    And,
    Atom,
    AxiomProfile,
    Box,
    Diamond,
    Implies,
    Not,
    Or,
)
from salogic.errors import (
    CycleError,
    ForwardReference,
    ParseError,
    SalError,
    UndeclaredIdentifier,
)
from salogic.proofs import Axiom, Necessitation
from salogic.syntax import (
    parse_formula,
    parse_model,
    parse_poset,
    parse_proof,
    print_formula,
    print_model,
    print_proof,
)

from fuzz import random_formula, random_model

P, Q = Atom("p"), Atom("q")


# --- formulas ---------------------------------------------------------------


def test_parse_examples():
    assert parse_formula("<beta> p") == Diamond("beta", P)
    assert parse_formula("p") == P
    assert parse_formula("[a](p -> q) -> ([a]p -> [a]q)") == Implies(
        Box("a", Implies(P, Q)), Implies(Box("a", P), Box("a", Q))
    )


def test_parse_precedence_and_associativity():
    assert parse_formula("p -> q -> p") == Implies(P, Implies(Q, P))
    assert parse_formula("p & q | p") == Or(And(P, Q), P)
    assert parse_formula("p | q -> p") == Implies(Or(P, Q), P)
    assert parse_formula("p & q & p") == And(And(P, Q), P)
    assert parse_formula("~[a]p & q") == And(Not(Box("a", P)), Q)
    assert parse_formula("~ ~ p") == Not(Not(P))
    assert parse_formula("<a>[b]~p") == Diamond("a", Box("b", Not(P)))
    assert parse_formula("  p   ->(q)  ") == Implies(P, Q)


def test_print_examples():
    assert print_formula(Diamond("beta", P)) == "<beta> p"
    assert print_formula(Not(Not(P))) == "~~p"
    assert print_formula(Implies(P, Implies(Q, P))) == "p -> q -> p"
    assert print_formula(Implies(Implies(P, Q), P)) == "(p -> q) -> p"
    assert print_formula(And(Or(P, Q), P)) == "(p | q) & p"
    assert print_formula(Box("a", And(P, Q))) == "[a] (p & q)"
    assert print_formula(Not(And(P, Q))) == "~(p & q)"


def test_parse_errors_carry_spans_and_expectations():
    with pytest.raises(ParseError) as err:
        parse_formula("p -> ")
    assert err.value.span.start <= err.value.span.end <= len("p -> ")
    assert err.value.expected

    with pytest.raises(ParseError):
        parse_formula("p q")
    with pytest.raises(ParseError):
        parse_formula("(p")
    with pytest.raises(ParseError):
        parse_formula("[a p")
    with pytest.raises(ParseError):
        parse_formula("p -")
    with pytest.raises(ParseError):
        parse_formula("")


def test_pathological_nesting_is_a_diagnostic_not_a_crash():
    for text in (
        "(" * 600 + "p" + ")" * 600,
        "~" * 600 + "p",
        "p -> " * 600 + "p",
        "[a]" * 600 + "p",
    ):
        with pytest.raises(ParseError):
            parse_formula(text)
    # comfortably deep input still parses
    deep = "~" * 100 + "p"
    assert parse_formula(deep) == parse_formula(deep)


def test_parse_rejects_non_ascii_gracefully():
    with pytest.raises(ParseError) as err:
        parse_formula("p ∧ q")
    text = "p ∧ q"
    assert 0 <= err.value.span.start <= err.value.span.end <= len(text.encode())


def test_formula_round_trip_fuzz():
    rng = random.Random(23)
    for _ in range(400):
        f = random_formula(rng, 8)
        assert parse_formula(print_formula(f)) == f


def test_parse_totality_on_garbage():
    rng = random.Random(29)
    alphabet = "pq ab()[]<>~&|-> \t\n∀αβ✗" + string.ascii_letters + string.digits
    for _ in range(500):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 24)))
        try:
            parse_formula(text)
        except ParseError as err:
            assert 0 <= err.span.start <= err.span.end <= len(text.encode())


# --- models -----------------------------------------------------------------

SEC33 = """\
indices: alpha beta gamma
order: alpha<=beta beta<=gamma
worlds: w0 w1 w2
worldorder: w0<=w1 w1<=w2
rel alpha: w0->w0
rel beta: w1->w0 w1->w1
rel gamma: w2->w1 w2->w2
val p: w0
"""


def test_parse_model_example():
    m = parse_model(SEC33)
    assert m.worlds == ("w0", "w1", "w2")
    assert m.poset.indices == ("alpha", "beta", "gamma")
    assert m.poset.leq("alpha", "gamma")  # closure computed
    assert m.relations["alpha"] == frozenset({("w0", "w0")})
    assert m.relations["beta"] == frozenset({("w1", "w0"), ("w1", "w1")})
    assert m.relations["gamma"] == frozenset({("w2", "w1"), ("w2", "w2")})
    assert m.valuation == {"p": frozenset({"w0"})}
    assert ("w0", "w2") in m.world_order


def test_parse_minimal_model():
    m = parse_model("indices: a\nworlds: w\n")
    assert m.relations == {"a": frozenset()}
    assert m.valuation == {}
    assert m.world_order is None


def test_parse_model_undeclared_identifiers():
    with pytest.raises(UndeclaredIdentifier):
        parse_model("indices: a\nworlds: w\nrel b: w->w\n")
    with pytest.raises(UndeclaredIdentifier):
        parse_model("indices: a\nworlds: w\nrel a: w->v\n")
    with pytest.raises(UndeclaredIdentifier):
        parse_model("indices: a\nworlds: w\nval p: v\n")
    with pytest.raises(UndeclaredIdentifier):
        parse_model("indices: a\nworlds: w\nstable: b\n")
    with pytest.raises(UndeclaredIdentifier):
        parse_model("indices: a\nworlds: w0 w1\nworldorder: w0<=w9\n")


def test_parse_model_structural_errors():
    with pytest.raises(ParseError):
        parse_model("")
    with pytest.raises(ParseError):
        parse_model("indices: a\n")  # no worlds
    with pytest.raises(ParseError):
        parse_model("worlds: w\n")  # no indices
    with pytest.raises(ParseError):
        parse_model("indices: a a\nworlds: w\n")
    with pytest.raises(ParseError):
        parse_model("indices: a\nworlds: w\nrelation a: w->w\n")
    with pytest.raises(CycleError):
        parse_model("indices: a b\norder: a<=b b<=a\nworlds: w\n")


def test_model_sections_union_and_comments():
    text = """\
# a comment line
indices: a   # trailing comment
worlds: w0 w1
rel a: w0->w1
rel a: w1->w1
val p: w0
val p: w1
"""
    m = parse_model(text)
    assert m.relations["a"] == frozenset({("w0", "w1"), ("w1", "w1")})
    assert m.valuation["p"] == frozenset({"w0", "w1"})


def test_model_round_trip_fuzz():
    rng = random.Random(31)
    for _ in range(120):
        m = random_model(rng)
        assert parse_model(print_model(m)) == m


def test_model_print_keeps_empty_valuation_entries():
    m = parse_model("indices: a\nworlds: w\nval p:\n")
    assert m.valuation == {"p": frozenset()}
    again = parse_model(print_model(m))
    assert again == m


def test_parse_poset():
    poset = parse_poset("indices: a b\norder: a<=b\nstable: a\n")
    assert poset.leq("a", "b")
    assert poset.stable == frozenset({"a"})
    with pytest.raises(ParseError):
        parse_poset("indices: a\nworlds: w\n")


# --- proof scripts ----------------------------------------------------------


def test_parse_proof_example():
    d = parse_proof("1. p -> p ; A1\n2. [a](p -> p) ; NEC a 1\n")
    assert len(d.lines) == 2
    assert d.lines[0].formula == Implies(P, P)
    assert d.lines[0].justification == Axiom("A1")
    assert d.lines[1].formula == Box("a", Implies(P, P))
    assert d.lines[1].justification == Necessitation("a", 1)
    assert d.poset.indices == ("a",)  # auto-collected antichain
    assert d.poset.stable == frozenset()


def test_parse_proof_forward_reference():
    with pytest.raises(ForwardReference):
        parse_proof("1. q ; MP 2 3\n")
    with pytest.raises(ForwardReference):
        parse_proof("1. p -> p ; A1\n2. [a]p ; NEC a 2\n")


def test_parse_proof_stores_tags_uninterpreted():
    d = parse_proof("1. [a]p -> [b]p ; A2\n")
    assert d.lines[0].justification == Axiom("A2")
    assert d.poset.indices == ("a", "b")


def test_parse_proof_header_and_validation():
    d = parse_proof(
        "indices: a b\norder: a<=b\nstable: a\n1. [a]p -> [b]p ; A2\n",
        profile=AxiomProfile.SECTION3,
        nec_requires_stable=False,
    )
    assert d.poset.leq("a", "b")
    assert d.profile is AxiomProfile.SECTION3
    assert d.nec_requires_stable is False
    with pytest.raises(UndeclaredIdentifier):
        parse_proof("indices: a\n1. [b]p -> [b]p ; A1\n")
    with pytest.raises(ParseError):
        parse_proof("order: a<=b\n1. p -> p ; A1\n")
    with pytest.raises(ParseError):
        parse_proof("1. p -> p ; A1\n3. p -> p ; A1\n")
    with pytest.raises(ParseError):
        parse_proof("1. p -> p\n")
    with pytest.raises(ParseError):
        parse_proof("1. p -> p ; NOPE\n")
    with pytest.raises(ParseError):
        parse_proof("1. p @ p ; A1\n")


def test_proof_round_trip():
    rng = random.Random(37)
    from fuzz import SWEEP_POSETS, random_derivation

    for _ in range(40):
        poset = rng.choice(SWEEP_POSETS)
        profile = rng.choice(list(AxiomProfile))
        d = random_derivation(rng, poset, profile=profile, max_lines=5)
        again = parse_proof(
            print_proof(d),
            profile=d.profile,
            nec_requires_stable=d.nec_requires_stable,
        )
        assert again == d


def test_model_parse_totality_on_garbage():
    rng = random.Random(41)
    fragments = [
        "indices:", "worlds:", "rel", "val", "order:", "stable:", "worldorder:",
        "a", "b", "w0", "w1", "a<=b", "w0->w1", ":", "#x", "->", "<=", "µ", "1.",
    ]
    for _ in range(400):
        text = "\n".join(
            " ".join(rng.choice(fragments) for _ in range(rng.randint(0, 5)))
            for _ in range(rng.randint(0, 5))
        )
        try:
            parse_model(text)
        except ParseError as err:
            assert 0 <= err.span.start <= err.span.end <= len(text.encode())
        except SalError:
            pass  # undeclared identifiers / cycles are fine diagnostics too
