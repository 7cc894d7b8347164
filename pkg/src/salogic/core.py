"""Core vocabulary shared by every other module: index posets, the formula
AST, stratified models, and the configuration enums for coherence checking
and for the two axiom profiles.

Everything defined here is immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import CycleError, UndeclaredIdentifier

__all__ = [
    "And",
    "Atom",
    "AxiomProfile",
    "Box",
    "CoherenceMode",
    "Diamond",
    "Formula",
    "Implies",
    "IndexPoset",
    "Not",
    "Or",
    "StratifiedModel",
    "atom_names",
    "children",
    "is_identifier",
    "modal_indices",
    "poset_closure",
    "subformulas",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(name: object) -> bool:
    """True when `name` is a legal index/world/atom identifier."""
    return isinstance(name, str) and bool(_IDENT.match(name))


def _require_identifier(name: object, role: str) -> None:
    if not is_identifier(name):
        raise ValueError(f"{role} must match [A-Za-z_][A-Za-z0-9_]*, got {name!r}")


def poset_closure(
    pairs: Iterable[tuple[str, str]], elements: Iterable[str]
) -> frozenset[tuple[str, str]]:
    """Reflexive-transitive closure of the generators `pairs` over `elements`.

    A pair (a, b) reads "a is below b".  The result contains every
    reflexive pair and every pair forced by transitivity; applying the
    function to its own output changes nothing.

    Raises CycleError when two distinct elements end up related in both
    directions, i.e. the generators do not describe a partial order, and
    UndeclaredIdentifier when a generator mentions an unknown element.
    """
    elems = tuple(elements)
    known = set(elems)
    below = {e: {e} for e in elems}
    for a, b in pairs:
        for name in (a, b):
            if name not in known:
                raise UndeclaredIdentifier(
                    f"order generator mentions undeclared element {name!r}"
                )
        below[a].add(b)
    # The element sets are tiny; a quadratic saturation sweep is fine.
    changed = True
    while changed:
        changed = False
        for a in elems:
            extra: set[str] = set()
            for b in below[a]:
                extra |= below[b]
            if not extra <= below[a]:
                below[a] |= extra
                changed = True
    for a in elems:
        for b in below[a]:
            if a != b and a in below[b]:
                raise CycleError(f"{a!r} and {b!r} are ordered in both directions")
    return frozenset((a, b) for a in elems for b in below[a])


@dataclass(frozen=True)
class IndexPoset:
    """Finite partially ordered set of admissibility levels.

    `indices` keeps declaration order, which is what makes printing and
    enumeration deterministic.  `order` must be stored as its full
    reflexive-transitive closure (use `from_order` to build one from
    generators).  `stable` marks the levels where necessity is required
    to entail truth; no closure condition is imposed on it.
    """

    indices: tuple[str, ...]
    order: frozenset[tuple[str, str]]
    stable: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.indices:
            raise ValueError("a poset needs at least one index")
        seen: set[str] = set()
        for name in self.indices:
            _require_identifier(name, "index")
            if name in seen:
                raise ValueError(f"duplicate index {name!r}")
            seen.add(name)
        for a, b in self.order:
            if a not in seen or b not in seen:
                raise UndeclaredIdentifier(
                    f"order pair ({a!r}, {b!r}) mentions an undeclared index"
                )
        for name in self.indices:
            if (name, name) not in self.order:
                raise ValueError("order must be stored reflexively closed")
        for a, b in self.order:
            if a != b and (b, a) in self.order:
                raise CycleError(f"{a!r} and {b!r} are ordered in both directions")
        for a, b in self.order:
            for c, d in self.order:
                if b == c and (a, d) not in self.order:
                    raise ValueError("order must be stored transitively closed")
        extra = self.stable - seen
        if extra:
            raise UndeclaredIdentifier(
                f"stable set mentions undeclared indices: {sorted(extra)}"
            )

    @classmethod
    def from_order(
        cls,
        indices: Iterable[str],
        order: Iterable[tuple[str, str]] = (),
        stable: Iterable[str] = (),
    ) -> "IndexPoset":
        """Build a poset from order generators; the closure is computed here."""
        indices = tuple(indices)
        return cls(indices, poset_closure(order, indices), frozenset(stable))

    def leq(self, a: str, b: str) -> bool:
        """Whether a <= b in this poset."""
        for name in (a, b):
            if name not in self.indices:
                raise UndeclaredIdentifier(f"unknown index {name!r}")
        return (a, b) in self.order

    def strict_pairs(self) -> tuple[tuple[str, str], ...]:
        """Comparable pairs (a, b) with a <= b and a != b, in declaration order."""
        pos = {name: i for i, name in enumerate(self.indices)}
        pairs = [(a, b) for (a, b) in self.order if a != b]
        pairs.sort(key=lambda ab: (pos[ab[0]], pos[ab[1]]))
        return tuple(pairs)

    def ordered_pairs(self) -> tuple[tuple[str, str], ...]:
        """All pairs (a, b) with a <= b, reflexive ones included, in declaration order."""
        pos = {name: i for i, name in enumerate(self.indices)}
        pairs = sorted(self.order, key=lambda ab: (pos[ab[0]], pos[ab[1]]))
        return tuple(pairs)


class Formula:
    """Base class for formula AST nodes.

    Nodes are frozen dataclasses; equality and hashing are syntactic and
    no normalization happens on construction.
    """


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        _require_identifier(self.name, "atom")


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Box(Formula):
    """Necessity at one admissibility level: true at w when the operand
    holds at every successor through that level's relation."""

    index: str
    operand: Formula

    def __post_init__(self):
        _require_identifier(self.index, "index")


@dataclass(frozen=True)
class Diamond(Formula):
    """Possibility at one admissibility level: true at w when the operand
    holds at some successor through that level's relation."""

    index: str
    operand: Formula

    def __post_init__(self):
        _require_identifier(self.index, "index")


def children(formula: Formula) -> tuple[Formula, ...]:
    """Immediate subformulas of an AST node."""
    if isinstance(formula, Atom):
        return ()
    if isinstance(formula, Not):
        return (formula.operand,)
    if isinstance(formula, (And, Or, Implies)):
        return (formula.left, formula.right)
    if isinstance(formula, (Box, Diamond)):
        return (formula.operand,)
    raise TypeError(f"not a formula: {formula!r}")


def subformulas(formula: Formula) -> tuple[Formula, ...]:
    """Every subformula of `formula` including itself, deduplicated, in
    bottom-up order (children strictly before parents, `formula` last)."""
    found: dict[Formula, None] = {}

    def walk(g: Formula) -> None:
        if g in found:
            return
        for child in children(g):
            walk(child)
        found[g] = None

    walk(formula)
    return tuple(found)


def atom_names(formula: Formula) -> tuple[str, ...]:
    """Sorted names of the atoms occurring in `formula`."""
    return tuple(sorted({f.name for f in subformulas(formula) if isinstance(f, Atom)}))


def modal_indices(formula: Formula) -> tuple[str, ...]:
    """Sorted indices occurring on modal operators in `formula`."""
    return tuple(
        sorted({f.index for f in subformulas(formula) if isinstance(f, (Box, Diamond))})
    )


class CoherenceMode(Enum):
    """Direction of the cross-level inclusion constraint on relations.

    SHRINK: a <= b requires R_b to be a subset of R_a (stricter levels
    allow fewer transitions).  GROW is the reverse inclusion.  NONE
    imposes no cross-level constraint.
    """

    SHRINK = "shrink"
    GROW = "grow"
    NONE = "none"


class AxiomProfile(Enum):
    """Which persistence direction the diamond schema takes in the proof
    system: SECTION3 ships A4 (possibility persists upward along the
    index order), SECTION2 ships DDOWN (possibility persists downward).
    Both share A1, K, A2 and A3."""

    SECTION2 = "section2"
    SECTION3 = "section3"


@dataclass(frozen=True)
class StratifiedModel:
    """A stratified Kripke model: one accessibility relation per index, a
    valuation, and an optional order on worlds.

    The world order is validated and carried but never consulted during
    evaluation; no truth condition reads it.  Missing relation entries
    are normalized to empty relations, so `relations` always has one
    entry per declared index.  An atom counts as declared exactly when it
    has a valuation entry (possibly empty).  Instances are immutable.
    """

    poset: IndexPoset
    worlds: tuple[str, ...]
    relations: Mapping[str, frozenset[tuple[str, str]]]
    valuation: Mapping[str, frozenset[str]]
    world_order: frozenset[tuple[str, str]] | None = None

    def __post_init__(self):
        if not self.worlds:
            raise ValueError("a model needs at least one world")
        world_set: set[str] = set()
        for w in self.worlds:
            _require_identifier(w, "world")
            if w in world_set:
                raise ValueError(f"duplicate world {w!r}")
            world_set.add(w)
        for idx in self.relations:
            if idx not in self.poset.indices:
                raise UndeclaredIdentifier(f"relation given for undeclared index {idx!r}")
        relations: dict[str, frozenset[tuple[str, str]]] = {}
        for idx in self.poset.indices:
            pairs = frozenset(self.relations.get(idx, ()))
            for u, v in pairs:
                for w in (u, v):
                    if w not in world_set:
                        raise UndeclaredIdentifier(
                            f"relation for {idx!r} mentions undeclared world {w!r}"
                        )
            relations[idx] = pairs
        valuation: dict[str, frozenset[str]] = {}
        for atom, ws in self.valuation.items():
            _require_identifier(atom, "atom")
            ws = frozenset(ws)
            for w in ws:
                if w not in world_set:
                    raise UndeclaredIdentifier(
                        f"valuation of {atom!r} mentions undeclared world {w!r}"
                    )
            valuation[atom] = ws
        object.__setattr__(self, "relations", relations)
        object.__setattr__(self, "valuation", valuation)
        if self.world_order is not None:
            closed = poset_closure(self.world_order, self.worlds)
            object.__setattr__(self, "world_order", closed)

    def successors(self, index: str, world: str) -> tuple[str, ...]:
        """Successors of `world` through the relation at `index`, in world
        declaration order."""
        if index not in self.poset.indices:
            raise UndeclaredIdentifier(f"unknown index {index!r}")
        if world not in self.worlds:
            raise UndeclaredIdentifier(f"unknown world {world!r}")
        pairs = self.relations[index]
        return tuple(v for v in self.worlds if (world, v) in pairs)

    @property
    def atoms(self) -> tuple[str, ...]:
        """Sorted names of the declared atoms."""
        return tuple(sorted(self.valuation))
