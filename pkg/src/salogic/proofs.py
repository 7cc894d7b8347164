"""Hilbert-style proof checking for the stratified proof system.

Schemas, with phi/psi arbitrary formulas and the side conditions read
against the derivation's index poset:

    A1     any formula whose propositional skeleton is a tautology
    K      [g](phi -> psi) -> ([g]phi -> [g]psi)
    A2     [a]phi -> [b]phi          for a <= b
    A3     [a]phi -> phi             for stable a
    A4     <a>phi -> <b>phi          for a <= b   (SECTION3 only)
    DDOWN  <b>phi -> <a>phi          for a <= b   (SECTION2 only)

Rules: modus ponens, and index-local necessitation from an earlier line,
optionally restricted to stable indices (the default).  Derivations are
hypothesis-free: every accepted line is a theorem, so necessitation may
cite any earlier accepted line.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    And,
    Atom,
    AxiomProfile,
    Box,
    Diamond,
    Formula,
    Implies,
    IndexPoset,
    Not,
    Or,
    atom_names,
)
from .errors import ForwardReference, IllegalTagForProfile, UndeclaredIdentifier

__all__ = [
    "Axiom",
    "CheckReport",
    "Derivation",
    "LineVerdict",
    "ModusPonens",
    "Necessitation",
    "PROFILE_SCHEMAS",
    "ProofLine",
    "SCHEMA_TAGS",
    "check_derivation",
    "is_tautology",
    "match_axiom",
    "propositional_skeleton",
]

SCHEMA_TAGS = ("A1", "K", "A2", "A3", "A4", "DDOWN")

PROFILE_SCHEMAS = {
    AxiomProfile.SECTION3: frozenset({"A1", "K", "A2", "A3", "A4"}),
    AxiomProfile.SECTION2: frozenset({"A1", "K", "A2", "A3", "DDOWN"}),
}

# Rejection reasons reported by check_derivation.
REASON_NOT_A_TAUTOLOGY = "not-a-tautology"
REASON_SCHEMA_MISMATCH = "schema-mismatch"
REASON_ILLEGAL_TAG = "illegal-tag-for-profile"
REASON_BAD_MODUS_PONENS = "modus-ponens-shape-mismatch"
REASON_BAD_NECESSITATION = "necessitation-shape-mismatch"
REASON_NON_STABLE_NECESSITATION = "non-stable-necessitation"
REASON_UNDECLARED_INDEX = "undeclared-index"
REASON_CITED_LINE_REJECTED = "cited-line-rejected"


@dataclass(frozen=True)
class Axiom:
    """Justification by an axiom schema tag (one of SCHEMA_TAGS)."""

    tag: str

    def __post_init__(self):
        if self.tag not in SCHEMA_TAGS:
            raise ValueError(f"unknown axiom tag {self.tag!r}")


@dataclass(frozen=True)
class ModusPonens:
    """From line `premise` and line `implication` = (premise -> current)."""

    premise: int
    implication: int


@dataclass(frozen=True)
class Necessitation:
    """From line `premise`, infer [index] applied to it."""

    index: str
    premise: int


Justification = Axiom | ModusPonens | Necessitation


@dataclass(frozen=True)
class ProofLine:
    number: int
    formula: Formula
    justification: Justification


@dataclass(frozen=True)
class Derivation:
    """A sequence of justified proof lines over a fixed index poset.

    Lines must be numbered 1..n in order and may only cite strictly
    earlier lines; both are enforced at construction.
    """

    lines: tuple[ProofLine, ...]
    poset: IndexPoset
    profile: AxiomProfile = AxiomProfile.SECTION2
    nec_requires_stable: bool = True

    def __post_init__(self):
        for position, line in enumerate(self.lines, start=1):
            if line.number != position:
                raise ValueError(
                    f"line numbers must run 1..n; found {line.number} at position {position}"
                )
            cited = []
            if isinstance(line.justification, ModusPonens):
                cited = [line.justification.premise, line.justification.implication]
            elif isinstance(line.justification, Necessitation):
                cited = [line.justification.premise]
            for ref in cited:
                if not 1 <= ref < line.number:
                    raise ForwardReference(
                        f"line {line.number} cites line {ref}, which is not an earlier line"
                    )


def propositional_skeleton(formula: Formula) -> Formula:
    """`formula` with each maximal modal subformula replaced by a fresh
    placeholder atom; syntactically equal modal subformulas share one
    placeholder.  Placeholder names avoid the formula's own atoms."""
    taken = set(atom_names(formula))
    placeholders: dict[Formula, Atom] = {}
    counter = 0

    def fresh() -> Atom:
        nonlocal counter
        while True:
            name = f"m{counter}_"
            counter += 1
            if name not in taken:
                taken.add(name)
                return Atom(name)

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Box, Diamond)):
            if g not in placeholders:
                placeholders[g] = fresh()
            return placeholders[g]
        if isinstance(g, Atom):
            return g
        if isinstance(g, Not):
            return Not(walk(g.operand))
        if isinstance(g, And):
            return And(walk(g.left), walk(g.right))
        if isinstance(g, Or):
            return Or(walk(g.left), walk(g.right))
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        raise TypeError(f"not a formula: {g!r}")

    return walk(formula)


def _truth(formula: Formula, env: dict[str, bool]) -> bool:
    if isinstance(formula, Atom):
        return env[formula.name]
    if isinstance(formula, Not):
        return not _truth(formula.operand, env)
    if isinstance(formula, And):
        return _truth(formula.left, env) and _truth(formula.right, env)
    if isinstance(formula, Or):
        return _truth(formula.left, env) or _truth(formula.right, env)
    if isinstance(formula, Implies):
        return (not _truth(formula.left, env)) or _truth(formula.right, env)
    raise TypeError(f"modal operator in a propositional context: {formula!r}")


def is_tautology(formula: Formula) -> bool:
    """Truth-table check; `formula` must be purely propositional."""
    names = atom_names(formula)
    for bits in range(1 << len(names)):
        env = {name: bool(bits >> i & 1) for i, name in enumerate(names)}
        if not _truth(formula, env):
            return False
    return True


def _as_implication(formula: Formula) -> tuple[Formula, Formula] | None:
    if isinstance(formula, Implies):
        return formula.left, formula.right
    return None


def match_axiom(
    formula: Formula, tag: str, poset: IndexPoset, profile: AxiomProfile
) -> bool:
    """Whether `formula` instantiates the schema named by `tag`.

    Raises IllegalTagForProfile when `profile` does not include the tag
    (A4 is SECTION3-only, DDOWN is SECTION2-only) and UndeclaredIdentifier
    when a matching formula names an index the poset does not declare.
    """
    if tag not in SCHEMA_TAGS:
        raise ValueError(f"unknown axiom tag {tag!r}")
    if tag not in PROFILE_SCHEMAS[profile]:
        raise IllegalTagForProfile(f"{tag} is not part of profile {profile.value}")

    if tag == "A1":
        return is_tautology(propositional_skeleton(formula))

    parts = _as_implication(formula)
    if parts is None:
        return False
    left, right = parts

    if tag == "K":
        # [g](phi -> psi) -> ([g]phi -> [g]psi)
        if not (isinstance(left, Box) and isinstance(left.operand, Implies)):
            return False
        inner = _as_implication(right)
        if inner is None or not isinstance(inner[0], Box) or not isinstance(inner[1], Box):
            return False
        same_index = left.index == inner[0].index == inner[1].index
        if not same_index:
            return False
        if left.index not in poset.indices:
            raise UndeclaredIdentifier(f"unknown index {left.index!r}")
        return (
            left.operand.left == inner[0].operand
            and left.operand.right == inner[1].operand
        )

    if tag == "A2":
        if not (isinstance(left, Box) and isinstance(right, Box)):
            return False
        return left.operand == right.operand and poset.leq(left.index, right.index)

    if tag == "A3":
        if not isinstance(left, Box) or left.operand != right:
            return False
        if left.index not in poset.indices:
            raise UndeclaredIdentifier(f"unknown index {left.index!r}")
        return left.index in poset.stable

    if tag == "A4":
        if not (isinstance(left, Diamond) and isinstance(right, Diamond)):
            return False
        return left.operand == right.operand and poset.leq(left.index, right.index)

    # DDOWN: <b>phi -> <a>phi for a <= b.
    if not (isinstance(left, Diamond) and isinstance(right, Diamond)):
        return False
    return left.operand == right.operand and poset.leq(right.index, left.index)


@dataclass(frozen=True)
class LineVerdict:
    number: int
    formula: Formula
    justification: Justification
    accepted: bool
    reason: str | None = None


@dataclass(frozen=True)
class CheckReport:
    """Per-line accept/reject outcome for one derivation."""

    lines: tuple[LineVerdict, ...]

    @property
    def valid(self) -> bool:
        return all(line.accepted for line in self.lines)

    def rejected(self) -> tuple[LineVerdict, ...]:
        return tuple(line for line in self.lines if not line.accepted)


def check_derivation(derivation: Derivation) -> CheckReport:
    """Check every line of `derivation` against its profile and poset.

    A line is accepted when its own justification checks out and every
    line it cites was itself accepted, so accepted lines are genuine
    theorems even inside partially rejected derivations.  The derivation
    is valid iff all lines are accepted.
    """
    verdicts: list[LineVerdict] = []
    accepted: dict[int, bool] = {}
    by_number = {line.number: line for line in derivation.lines}
    for line in derivation.lines:
        reason: str | None = None
        just = line.justification
        if isinstance(just, Axiom):
            try:
                if not match_axiom(line.formula, just.tag, derivation.poset, derivation.profile):
                    reason = (
                        REASON_NOT_A_TAUTOLOGY if just.tag == "A1" else REASON_SCHEMA_MISMATCH
                    )
            except IllegalTagForProfile:
                reason = REASON_ILLEGAL_TAG
            except UndeclaredIdentifier:
                reason = REASON_UNDECLARED_INDEX
        elif isinstance(just, ModusPonens):
            if not (accepted[just.premise] and accepted[just.implication]):
                reason = REASON_CITED_LINE_REJECTED
            elif by_number[just.implication].formula != Implies(
                by_number[just.premise].formula, line.formula
            ):
                reason = REASON_BAD_MODUS_PONENS
        elif isinstance(just, Necessitation):
            if just.index not in derivation.poset.indices:
                reason = REASON_UNDECLARED_INDEX
            elif not accepted[just.premise]:
                reason = REASON_CITED_LINE_REJECTED
            elif line.formula != Box(just.index, by_number[just.premise].formula):
                reason = REASON_BAD_NECESSITATION
            elif derivation.nec_requires_stable and just.index not in derivation.poset.stable:
                reason = REASON_NON_STABLE_NECESSITATION
        else:
            raise TypeError(f"not a justification: {just!r}")
        accepted[line.number] = reason is None
        verdicts.append(
            LineVerdict(line.number, line.formula, just, reason is None, reason)
        )
    return CheckReport(tuple(verdicts))
