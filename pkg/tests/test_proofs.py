import random

import pytest

from salogic.core import (
    Atom,
    AxiomProfile,
    Box,
    CoherenceMode,
    Diamond,
    Implies,
    IndexPoset,
    Not,
    Or,
)
from salogic.errors import ForwardReference, IllegalTagForProfile, UndeclaredIdentifier
from salogic.proofs import (
    Axiom,
    Derivation,
    ModusPonens,
    Necessitation,
    ProofLine,
    REASON_BAD_MODUS_PONENS,
    REASON_CITED_LINE_REJECTED,
    REASON_ILLEGAL_TAG,
    REASON_NON_STABLE_NECESSITATION,
    REASON_NOT_A_TAUTOLOGY,
    REASON_SCHEMA_MISMATCH,
    check_derivation,
    is_tautology,
    match_axiom,
    propositional_skeleton,
)
from salogic.search import SearchBounds, ValidUpTo, decide_valid
from salogic.semantics import FramePolicy
from salogic.syntax import parse_formula, parse_proof

from fuzz import SWEEP_POSETS, random_derivation, random_formula
from oracles import matches_schema, propositional_tautology

P, Q = Atom("p"), Atom("q")
CHAIN = IndexPoset.from_order(("a", "b"), [("a", "b")])
CHAIN_STABLE_A = IndexPoset.from_order(("a", "b"), [("a", "b")], stable=("a",))
S2, S3 = AxiomProfile.SECTION2, AxiomProfile.SECTION3


# --- schema matching --------------------------------------------------------


def test_match_a2_example():
    assert match_axiom(parse_formula("[a]p -> [b]p"), "A2", CHAIN, S2) is True
    assert match_axiom(parse_formula("[b]p -> [a]p"), "A2", CHAIN, S2) is False
    assert match_axiom(parse_formula("[a]p -> [a]p"), "A2", CHAIN, S2) is True


def test_match_a3_depends_on_stability():
    f = parse_formula("[a]p -> p")
    assert match_axiom(f, "A3", CHAIN_STABLE_A, S2) is True
    assert match_axiom(f, "A3", CHAIN, S2) is False
    assert match_axiom(parse_formula("[a]p -> q"), "A3", CHAIN_STABLE_A, S2) is False


def test_match_a1_examples():
    assert match_axiom(parse_formula("p -> q -> p"), "A1", CHAIN, S2) is True
    assert match_axiom(P, "A1", CHAIN, S2) is False
    # modal subformulas are abstracted, equal ones shared
    assert match_axiom(parse_formula("[a]p -> [a]p"), "A1", CHAIN, S2) is True
    assert match_axiom(parse_formula("[a]p -> [b]p"), "A1", CHAIN, S2) is False
    assert match_axiom(parse_formula("<a>p | ~<a>p"), "A1", CHAIN, S2) is True


def test_match_k():
    assert match_axiom(
        parse_formula("[a](p -> q) -> ([a]p -> [a]q)"), "K", CHAIN, S2
    ) is True
    assert match_axiom(
        parse_formula("[a](p -> q) -> ([b]p -> [a]q)"), "K", CHAIN, S2
    ) is False
    assert match_axiom(
        parse_formula("[a](p -> q) -> ([a]q -> [a]p)"), "K", CHAIN, S2
    ) is False


def test_profile_legality():
    ddown = parse_formula("<b>p -> <a>p")
    assert match_axiom(ddown, "DDOWN", CHAIN, S2) is True
    with pytest.raises(IllegalTagForProfile):
        match_axiom(ddown, "DDOWN", CHAIN, S3)
    a4 = parse_formula("<a>p -> <b>p")
    assert match_axiom(a4, "A4", CHAIN, S3) is True
    with pytest.raises(IllegalTagForProfile):
        match_axiom(a4, "A4", CHAIN, S2)


def test_match_raises_on_undeclared_index():
    with pytest.raises(UndeclaredIdentifier):
        match_axiom(parse_formula("[z]p -> [z]p"), "A2", CHAIN, S2)


def _schema_like(rng):
    """Half genuine schema instances, half near misses and noise."""
    phi = random_formula(rng, rng.randint(0, 2), atoms=("p", "q"), indices=("a", "b"))
    psi = random_formula(rng, rng.randint(0, 2), atoms=("p", "q"), indices=("a", "b"))
    x, y = rng.choice([("a", "b"), ("b", "a"), ("a", "a"), ("b", "b")])
    shapes = [
        Implies(Box(x, phi), Box(y, phi)),
        Implies(Box(x, phi), Box(y, psi)),
        Implies(Diamond(x, phi), Diamond(y, phi)),
        Implies(Diamond(x, phi), Diamond(y, psi)),
        Implies(Box(x, phi), phi),
        Implies(Box(x, phi), psi),
        Implies(Box(x, Implies(phi, psi)), Implies(Box(y, phi), Box(y, psi))),
        Implies(Box(x, Implies(phi, psi)), Implies(Box(x, phi), Box(x, psi))),
        random_formula(rng, 3, atoms=("p", "q"), indices=("a", "b")),
    ]
    return rng.choice(shapes)


def test_match_agrees_with_pattern_oracle():
    rng = random.Random(211)
    tags = ("K", "A2", "A3", "A4", "DDOWN")
    hits = 0
    for _ in range(800):
        f = _schema_like(rng)
        for tag in tags:
            profile = S3 if tag == "A4" else S2
            try:
                got = match_axiom(f, tag, CHAIN_STABLE_A, profile)
            except UndeclaredIdentifier:
                continue
            assert got == matches_schema(f, tag, CHAIN_STABLE_A), (f, tag)
            hits += got
    assert hits > 100  # the generator produced plenty of real instances


def test_a1_agrees_with_truth_table_oracle():
    rng = random.Random(223)
    for _ in range(500):
        f = random_formula(rng, 4)
        assert match_axiom(f, "A1", CHAIN, S2) == propositional_tautology(f)


def test_skeleton_shares_placeholders():
    f = Implies(Box("a", P), Box("a", P))
    skel = propositional_skeleton(f)
    assert isinstance(skel, Implies) and skel.left == skel.right
    assert is_tautology(skel)
    # placeholders dodge the formula's own atoms
    g = Implies(Box("a", Atom("m0_")), Atom("m0_"))
    names = {a.name for a in [propositional_skeleton(g).left]}
    assert "m0_" not in names


# --- derivation checking ----------------------------------------------------


def test_check_necessitation_example():
    d = parse_proof("indices: a\nstable: a\n1. p -> p ; A1\n2. [a](p -> p) ; NEC a 1\n")
    report = check_derivation(d)
    assert report.valid
    assert [line.accepted for line in report.lines] == [True, True]


def test_check_rejects_non_stable_necessitation():
    d = parse_proof("1. p -> p ; A1\n2. [a](p -> p) ; NEC a 1\n")
    report = check_derivation(d)
    assert not report.valid
    assert report.lines[1].reason == REASON_NON_STABLE_NECESSITATION
    # with the restriction lifted the same script passes
    relaxed = parse_proof(
        "1. p -> p ; A1\n2. [a](p -> p) ; NEC a 1\n", nec_requires_stable=False
    )
    assert check_derivation(relaxed).valid


def test_check_rejects_non_tautology():
    report = check_derivation(parse_proof("1. p ; A1\n"))
    assert not report.valid
    assert report.lines[0].reason == REASON_NOT_A_TAUTOLOGY


def test_check_modus_ponens_shapes():
    good = parse_proof(
        "1. p -> p | q ; A1\n2. (p -> p | q) -> (p -> p | q) ; A1\n"
        "3. p -> p | q ; MP 1 2\n"
    )
    # line 2 is (line1 -> line1), so MP 1 2 re-derives line 1's formula
    assert check_derivation(good).valid
    bad = Derivation(
        (
            ProofLine(1, Implies(P, P), Axiom("A1")),
            ProofLine(2, Q, ModusPonens(1, 1)),
        ),
        CHAIN,
    )
    report = check_derivation(bad)
    assert report.lines[1].reason == REASON_BAD_MODUS_PONENS


def test_check_poisons_dependents_of_rejected_lines():
    d = Derivation(
        (
            ProofLine(1, P, Axiom("A1")),  # rejected: not a tautology
            ProofLine(2, Box("a", P), Necessitation("a", 1)),
        ),
        IndexPoset.from_order(("a",), stable=("a",)),
    )
    report = check_derivation(d)
    assert report.lines[1].reason == REASON_CITED_LINE_REJECTED


def test_check_reports_illegal_tag():
    d = Derivation(
        (ProofLine(1, parse_formula("<b>p -> <a>p"), Axiom("DDOWN")),),
        CHAIN,
        profile=S3,
    )
    report = check_derivation(d)
    assert report.lines[0].reason == REASON_ILLEGAL_TAG


def test_check_schema_mismatch_reason():
    d = Derivation(
        (ProofLine(1, parse_formula("[b]p -> [a]p"), Axiom("A2")),),
        CHAIN,
    )
    assert check_derivation(d).lines[0].reason == REASON_SCHEMA_MISMATCH


def test_derivation_construction_guards():
    with pytest.raises(ForwardReference):
        Derivation(
            (ProofLine(1, P, ModusPonens(1, 1)),),
            CHAIN,
        )
    with pytest.raises(ValueError):
        Derivation((ProofLine(2, P, Axiom("A1")),), CHAIN)


def test_fuzzed_derivations_all_check_out():
    rng = random.Random(227)
    for _ in range(60):
        poset = rng.choice(SWEEP_POSETS)
        d = random_derivation(rng, poset)
        report = check_derivation(d)
        assert report.valid, report.rejected()


def test_prefixing_accepted_lines_preserves_acceptance():
    rng = random.Random(229)
    for _ in range(30):
        poset = rng.choice(SWEEP_POSETS)
        first = random_derivation(rng, poset, max_lines=4)
        second = random_derivation(rng, poset, max_lines=4)
        shift = len(first.lines)

        def renumber(justification):
            if isinstance(justification, ModusPonens):
                return ModusPonens(
                    justification.premise + shift, justification.implication + shift
                )
            if isinstance(justification, Necessitation):
                return Necessitation(justification.index, justification.premise + shift)
            return justification

        combined = Derivation(
            first.lines
            + tuple(
                ProofLine(line.number + shift, line.formula, renumber(line.justification))
                for line in second.lines
            ),
            poset,
            first.profile,
            first.nec_requires_stable,
        )
        report = check_derivation(combined)
        assert report.valid


# --- the soundness bridge against the semantics -----------------------------


def _valid_on_chain(formula, mode) -> bool:
    verdict = decide_valid(
        formula,
        SearchBounds(2, 2, poset=CHAIN_STABLE_A),
        FramePolicy(mode),
    )
    return isinstance(verdict, ValidUpTo)


def test_section3_fails_exactly_where_the_matrix_says():
    """SECTION3 is unsound under either single coherence convention, and
    the failing schemas are exactly the matrix's countermodeled cells:
    A4 under SHRINK, A2 under GROW."""
    instances = {
        "K": parse_formula("[a](p -> q) -> ([a]p -> [a]q)"),
        "A2": parse_formula("[a]p -> [b]p"),
        "A3": parse_formula("[a]p -> p"),
        "A4": parse_formula("<a>p -> <b>p"),
    }
    for tag, formula in instances.items():
        assert match_axiom(formula, tag, CHAIN_STABLE_A, S3) is True
    failures_shrink = {
        tag
        for tag, f in instances.items()
        if not _valid_on_chain(f, CoherenceMode.SHRINK)
    }
    failures_grow = {
        tag for tag, f in instances.items() if not _valid_on_chain(f, CoherenceMode.GROW)
    }
    assert failures_shrink == {"A4"}
    assert failures_grow == {"A2"}
    # SECTION2 swaps A4 for DDOWN and is sound under SHRINK
    ddown = parse_formula("<b>p -> <a>p")
    assert match_axiom(ddown, "DDOWN", CHAIN_STABLE_A, S2) is True
    assert _valid_on_chain(ddown, CoherenceMode.SHRINK)
