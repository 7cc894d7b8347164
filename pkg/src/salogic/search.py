"""Bounded decision procedures by exhaustive enumeration of finite models:
validity and satisfiability up to size bounds, countermodel extraction,
and the empirical axiom-validity matrix across coherence modes.

Candidate order -- the contract behind "first countermodel" and behind
parallel/serial equivalence:

* Worlds are named w0..w{n-1}.  World counts run 1..max_worlds, smallest
  first (outermost loop).
* Without a user poset, shapes on exactly `max_indices` indices are tried
  in a fixed order: one index -> the single level ``a``; two indices ->
  the antichain ``a b`` and then the chain ``a <= b``.  Shapes for three
  or more indices are not enumerated; supply a poset instead.
* Within one (world count, poset) block a candidate is a single integer.
  Reading from the least significant bits: first the valuation (one bit
  per (atom, world) pair, atoms sorted, atom-major), then one n*n-bit
  relation mask per index with the *first* declared index in the most
  significant position.  Relation bit i*n + j stands for the world pair
  (w_i, w_j).  Candidates are scanned in increasing integer order, so
  relations vary lexicographically in index declaration order with
  valuations varying fastest.
* Candidates whose frame fails validate_frame under the active policy are
  skipped.  They still occupy their enumeration positions, so the
  reported countermodel -- defined as the enumeration-order minimum --
  does not depend on how the range is partitioned across workers.

Stable sets.  Stability never influences evaluation, and enforcing
stable reflexivity only shrinks a block's admissible relation space, so
scanning the empty-stable block yields the same verdict and the same
first witness as additionally scanning every stable-set variant.
decide_valid and decide_sat therefore enumerate machine-generated posets
with the empty stable set only.  axiom_matrix overrides this for the
reflection schema A3, whose side condition quantifies over stable
levels: its rows range over the stable sets containing the instance
index, whatever the reflexivity policy says, since otherwise the row
would be vacuous whenever the policy stops enforcing reflexivity.

Scanning is vectorized with numpy over chunks of candidate integers.  A
hit is rebuilt as a plain StratifiedModel and re-checked through
semantics.evaluate and semantics.validate_frame before it is reported,
so every emitted witness has already survived the independent scalar
evaluator.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    Atom,
    AxiomProfile,
    Box,
    CoherenceMode,
    Diamond,
    Formula,
    Implies,
    IndexPoset,
    Not,
    StratifiedModel,
    atom_names,
    modal_indices,
    subformulas,
)
from .errors import BoundsTooLarge, UndeclaredIdentifier
from .proofs import PROFILE_SCHEMAS
from .semantics import FramePolicy, evaluate, validate_frame

__all__ = [
    "Counterexample",
    "MatrixRow",
    "SCHEMA_ORDER",
    "Satisfiable",
    "SearchBounds",
    "UnsatUpTo",
    "ValidUpTo",
    "Verdict",
    "axiom_matrix",
    "decide_sat",
    "decide_valid",
    "enumerated_posets",
    "schema_instance",
]

DEFAULT_CEILING = 10**9
_CHUNK = 1 << 19
_MAX_CANDIDATE_BITS = 62  # candidates are scanned as int64 vectors


@dataclass(frozen=True)
class SearchBounds:
    """Size limits for the bounded search.

    With `poset` set, the search runs over exactly that poset (its stable
    set included); otherwise poset shapes on `max_indices` levels are
    enumerated.  `atoms` defaults to the query formula's own atoms; when
    given it must cover them.
    """

    max_worlds: int
    max_indices: int
    poset: IndexPoset | None = None
    atoms: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.max_worlds < 1 or self.max_indices < 1:
            raise ValueError("bounds must allow at least one world and one index")
        if self.atoms is not None:
            object.__setattr__(self, "atoms", tuple(sorted(set(self.atoms))))


@dataclass(frozen=True)
class ValidUpTo:
    """No countermodel exists within the bounds."""

    bounds: SearchBounds


@dataclass(frozen=True)
class Counterexample:
    """A model, world and ambient index falsifying the formula."""

    model: StratifiedModel
    world: str
    index: str


@dataclass(frozen=True)
class Satisfiable:
    """A model, world and ambient index satisfying the formula."""

    model: StratifiedModel
    world: str
    index: str


@dataclass(frozen=True)
class UnsatUpTo:
    """No satisfying model exists within the bounds."""

    bounds: SearchBounds


Verdict = ValidUpTo | Counterexample | Satisfiable | UnsatUpTo


def enumerated_posets(max_indices: int) -> tuple[IndexPoset, ...]:
    """The machine-generated poset shapes, in scan order."""
    if max_indices == 1:
        return (IndexPoset.from_order(("a",)),)
    if max_indices == 2:
        return (
            IndexPoset.from_order(("a", "b")),
            IndexPoset.from_order(("a", "b"), [("a", "b")]),
        )
    raise BoundsTooLarge(
        "poset enumeration is defined for at most 2 indices; pass bounds.poset "
        "for larger index sets"
    )


@dataclass(frozen=True)
class _Block:
    """One (poset, world count) slab of the candidate space."""

    poset: IndexPoset
    n: int
    atoms: tuple[str, ...]

    @property
    def worlds(self) -> tuple[str, ...]:
        return tuple(f"w{i}" for i in range(self.n))

    @property
    def rel_bits(self) -> int:
        return self.n * self.n

    @property
    def val_bits(self) -> int:
        return self.n * len(self.atoms)

    @property
    def total_bits(self) -> int:
        return self.rel_bits * len(self.poset.indices) + self.val_bits

    @property
    def size(self) -> int:
        return 1 << self.total_bits


def _blocks(
    posets: tuple[IndexPoset, ...], max_worlds: int, atoms: tuple[str, ...]
) -> tuple[_Block, ...]:
    return tuple(
        _Block(poset, n, atoms)
        for n in range(1, max_worlds + 1)
        for poset in posets
    )


def _decode(block: _Block, candidate: int) -> StratifiedModel:
    """Rebuild the StratifiedModel a candidate integer stands for."""
    n = block.n
    worlds = block.worlds
    value = candidate
    val = value & ((1 << block.val_bits) - 1)
    value >>= block.val_bits
    relations: dict[str, frozenset[tuple[str, str]]] = {}
    for idx in reversed(block.poset.indices):
        mask = value & ((1 << block.rel_bits) - 1)
        value >>= block.rel_bits
        relations[idx] = frozenset(
            (worlds[i], worlds[j])
            for i in range(n)
            for j in range(n)
            if mask >> (i * n + j) & 1
        )
    valuation = {
        atom: frozenset(worlds[w] for w in range(n) if val >> (ai * n + w) & 1)
        for ai, atom in enumerate(block.atoms)
    }
    return StratifiedModel(block.poset, worlds, relations, valuation)


def _compile(formula: Formula, atoms: tuple[str, ...]) -> list[tuple]:
    """Flatten the formula into postorder ops over deduplicated slots."""
    order = subformulas(formula)
    slot = {f: i for i, f in enumerate(order)}
    atom_slot = {name: i for i, name in enumerate(atoms)}
    ops: list[tuple] = []
    for f in order:
        if isinstance(f, Atom):
            ops.append(("atom", atom_slot[f.name]))
        elif isinstance(f, Not):
            ops.append(("not", slot[f.operand]))
        elif isinstance(f, Box):
            ops.append(("box", f.index, slot[f.operand]))
        elif isinstance(f, Diamond):
            ops.append(("dia", f.index, slot[f.operand]))
        else:
            ops.append((type(f).__name__.lower(), slot[f.left], slot[f.right]))
    return ops


def _scan_block(
    block: _Block, ops: list[tuple], policy: FramePolicy, lo: int, hi: int
) -> int | None:
    """First block-local candidate in [lo, hi) that passes frame validation
    and falsifies the formula somewhere, or None."""
    n = block.n
    k = len(block.poset.indices)
    full = (1 << n) - 1
    ipos = {idx: i for i, idx in enumerate(block.poset.indices)}
    diag = sum(1 << (i * n + i) for i in range(n))
    stable_slots = [
        ipos[idx] for idx in block.poset.indices if idx in block.poset.stable
    ]
    strict = block.poset.strict_pairs()

    for chunk_lo in range(lo, hi, _CHUNK):
        chunk_hi = min(chunk_lo + _CHUNK, hi)
        cand = np.arange(chunk_lo, chunk_hi, dtype=np.int64)
        val = cand & ((1 << block.val_bits) - 1)
        rel: list[np.ndarray] = [None] * k  # type: ignore[list-item]
        shifted = cand >> block.val_bits
        for j in range(k - 1, -1, -1):
            rel[j] = shifted & ((1 << block.rel_bits) - 1)
            shifted = shifted >> block.rel_bits

        ok = np.ones(cand.shape, dtype=bool)
        if policy.coherence is CoherenceMode.SHRINK:
            for low, high in strict:
                ok &= (rel[ipos[high]] & ~rel[ipos[low]]) == 0
        elif policy.coherence is CoherenceMode.GROW:
            for low, high in strict:
                ok &= (rel[ipos[low]] & ~rel[ipos[high]]) == 0
        if policy.require_stable_reflexive:
            for j in stable_slots:
                ok &= (rel[j] & diag) == diag
        if not ok.all():
            keep = np.flatnonzero(ok)
            if keep.size == 0:
                continue
            cand = cand[keep]
            val = val[keep]
            rel = [r[keep] for r in rel]

        rows = [[(rel[j] >> (w * n)) & full for w in range(n)] for j in range(k)]
        sat: list[np.ndarray] = [None] * len(ops)  # type: ignore[list-item]
        for si, op in enumerate(ops):
            kind = op[0]
            if kind == "atom":
                sat[si] = (val >> (op[1] * n)) & full
            elif kind == "not":
                sat[si] = sat[op[1]] ^ full
            elif kind == "and":
                sat[si] = sat[op[1]] & sat[op[2]]
            elif kind == "or":
                sat[si] = sat[op[1]] | sat[op[2]]
            elif kind == "implies":
                sat[si] = (sat[op[1]] ^ full) | sat[op[2]]
            elif kind == "box":
                child = sat[op[2]] ^ full  # worlds where the operand fails
                out = np.zeros(cand.shape, dtype=np.int64)
                for w in range(n):
                    out |= ((rows[ipos[op[1]]][w] & child) == 0).astype(np.int64) << w
                sat[si] = out
            else:  # dia
                child = sat[op[2]]
                out = np.zeros(cand.shape, dtype=np.int64)
                for w in range(n):
                    out |= ((rows[ipos[op[1]]][w] & child) != 0).astype(np.int64) << w
                sat[si] = out
        bad = np.flatnonzero(sat[-1] != full)
        if bad.size:
            return int(cand[bad[0]])
    return None


def _scan_range(
    blocks: tuple[_Block, ...],
    offsets: tuple[int, ...],
    plans: tuple[list[tuple], ...],
    policy: FramePolicy,
    lo: int,
    hi: int,
) -> int | None:
    """First failing global candidate index in [lo, hi), or None."""
    for block, offset, ops in zip(blocks, offsets, plans):
        block_lo = max(lo, offset)
        block_hi = min(hi, offset + block.size)
        if block_lo >= block_hi:
            continue
        local = _scan_block(block, ops, policy, block_lo - offset, block_hi - offset)
        if local is not None:
            return offset + local
    return None


def _scan(
    blocks: tuple[_Block, ...],
    formula: Formula,
    policy: FramePolicy,
    workers: int,
) -> int | None:
    offsets = []
    total = 0
    for block in blocks:
        offsets.append(total)
        total += block.size
    offsets = tuple(offsets)
    plans = tuple(_compile(formula, block.atoms) for block in blocks)
    if workers <= 1 or total < 2:
        return _scan_range(blocks, offsets, plans, policy, 0, total)
    workers = min(workers, total)
    step = -(-total // workers)
    spans = [(i * step, min((i + 1) * step, total)) for i in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        hits = list(
            pool.map(
                lambda span: _scan_range(blocks, offsets, plans, policy, *span), spans
            )
        )
    hits = [h for h in hits if h is not None]
    return min(hits) if hits else None


def _block_at(blocks: tuple[_Block, ...], global_index: int) -> tuple[_Block, int]:
    offset = 0
    for block in blocks:
        if global_index < offset + block.size:
            return block, global_index - offset
        offset += block.size
    raise IndexError(global_index)


def _resolve_atoms(formula: Formula, bounds: SearchBounds) -> tuple[str, ...]:
    needed = atom_names(formula)
    if bounds.atoms is None:
        return needed
    missing = set(needed) - set(bounds.atoms)
    if missing:
        raise ValueError(f"bounds.atoms is missing formula atoms: {sorted(missing)}")
    return bounds.atoms


def _check_indices(formula: Formula, posets: tuple[IndexPoset, ...]) -> None:
    for name in modal_indices(formula):
        for poset in posets:
            if name not in poset.indices:
                raise UndeclaredIdentifier(
                    f"formula index {name!r} is outside the searched index set "
                    f"{list(poset.indices)}"
                )


def _guard_ceiling(blocks: tuple[_Block, ...], ceiling: int) -> None:
    total = sum(block.size for block in blocks)
    if total > ceiling:
        raise BoundsTooLarge(
            f"search space of {total} candidates exceeds the ceiling of {ceiling}"
        )
    for block in blocks:
        if block.total_bits > _MAX_CANDIDATE_BITS:
            raise BoundsTooLarge(
                f"a block needs {block.total_bits} candidate bits; at most "
                f"{_MAX_CANDIDATE_BITS} are supported"
            )


def _first_counterexample(
    blocks: tuple[_Block, ...],
    formula: Formula,
    policy: FramePolicy,
    workers: int,
) -> Counterexample | None:
    hit = _scan(blocks, formula, policy, workers)
    if hit is None:
        return None
    block, local = _block_at(blocks, hit)
    model = _decode(block, local)
    if validate_frame(model, policy):
        raise RuntimeError("scan reported a model that fails frame validation")
    index = model.poset.indices[0]
    for world in model.worlds:
        if not evaluate(model, world, index, formula):
            return Counterexample(model, world, index)
    raise RuntimeError("scan reported a model the scalar evaluator cannot falsify")


def decide_valid(
    formula: Formula,
    bounds: SearchBounds,
    policy: FramePolicy = FramePolicy(),
    *,
    workers: int = 1,
    ceiling: int = DEFAULT_CEILING,
) -> Verdict:
    """Exhaustively test `formula` on every model within `bounds` whose
    frame passes `policy`, at every world (the ambient index is
    universally quantified too, but cannot change a verdict).

    Returns ValidUpTo, or the enumeration-order-first Counterexample.
    Deterministic: identical inputs give identical verdicts and identical
    countermodels, for any worker count.  Raises BoundsTooLarge when the
    candidate estimate exceeds `ceiling`.
    """
    atoms = _resolve_atoms(formula, bounds)
    if bounds.poset is not None:
        posets: tuple[IndexPoset, ...] = (bounds.poset,)
    else:
        posets = enumerated_posets(bounds.max_indices)
    _check_indices(formula, posets)
    blocks = _blocks(posets, bounds.max_worlds, atoms)
    _guard_ceiling(blocks, ceiling)
    found = _first_counterexample(blocks, formula, policy, workers)
    if found is None:
        return ValidUpTo(bounds)
    return found


def decide_sat(
    formula: Formula,
    bounds: SearchBounds,
    policy: FramePolicy = FramePolicy(),
    *,
    workers: int = 1,
    ceiling: int = DEFAULT_CEILING,
) -> Verdict:
    """Bounded satisfiability as the exact dual of decide_valid: the
    verdict and witness are those of decide_valid on the negation."""
    verdict = decide_valid(
        Not(formula), bounds, policy, workers=workers, ceiling=ceiling
    )
    if isinstance(verdict, ValidUpTo):
        return UnsatUpTo(verdict.bounds)
    return Satisfiable(verdict.model, verdict.world, verdict.index)


# ---------------------------------------------------------------------------
# Axiom-validity matrix

SCHEMA_ORDER = ("K", "A2", "A3", "A4", "DDOWN")


def schema_instance(schema: str, alpha: str, beta: str) -> Formula:
    """The concrete instance of a schema at the given indices.

    Single-index schemas (K, A3) ignore `beta`.  K is instantiated with
    two atoms because its one-atom instances collapse into tautologies
    that would test nothing.
    """
    p = Atom("p")
    if schema == "K":
        q = Atom("q")
        return Implies(
            Box(alpha, Implies(p, q)), Implies(Box(alpha, p), Box(alpha, q))
        )
    if schema == "A2":
        return Implies(Box(alpha, p), Box(beta, p))
    if schema == "A3":
        return Implies(Box(alpha, p), p)
    if schema == "A4":
        return Implies(Diamond(alpha, p), Diamond(beta, p))
    if schema == "DDOWN":
        return Implies(Diamond(beta, p), Diamond(alpha, p))
    raise ValueError(f"unknown schema {schema!r}")


@dataclass(frozen=True)
class MatrixRow:
    """One empirical matrix entry: a schema instance, the frame convention
    it was tested under, and the verdict."""

    schema: str
    mode: CoherenceMode
    poset: IndexPoset
    alpha: str
    beta: str
    formula: Formula
    require_stable_reflexive: bool
    verdict: Verdict


def _schema_instances(schema: str, poset: IndexPoset) -> tuple[tuple[str, str], ...]:
    if schema in ("K", "A3"):
        return tuple((idx, idx) for idx in poset.indices)
    return poset.ordered_pairs()


def _stable_variants(schema: str, poset: IndexPoset, alpha: str) -> tuple[IndexPoset, ...]:
    if schema != "A3":
        return (poset,)
    # Reflection quantifies over stability: range over every stable set
    # containing the instance index, in subset-mask order.
    rest = [idx for idx in poset.indices if idx != alpha]
    variants = []
    for mask in range(1 << len(rest)):
        stable = {alpha} | {idx for i, idx in enumerate(rest) if mask >> i & 1}
        variants.append(IndexPoset(poset.indices, poset.order, frozenset(stable)))
    return tuple(variants)


def _memo_key(
    formula: Formula,
    posets: tuple[IndexPoset, ...],
    max_worlds: int,
    policy: FramePolicy,
):
    # Coherence only bites through strict comparable pairs, and stable
    # reflexivity only through non-empty stable sets; normalizing makes
    # e.g. the antichain rows shared across modes.
    mode = policy.coherence
    if all(not poset.strict_pairs() for poset in posets):
        mode = CoherenceMode.NONE
    require = policy.require_stable_reflexive and any(p.stable for p in posets)
    return (formula, posets, max_worlds, mode, require)


def _scan_validity(
    formula: Formula,
    posets: tuple[IndexPoset, ...],
    max_worlds: int,
    policy: FramePolicy,
    memo: dict,
    workers: int,
    ceiling: int,
) -> Verdict:
    key = _memo_key(formula, posets, max_worlds, policy)
    if key in memo:
        return memo[key]
    blocks = _blocks(posets, max_worlds, atom_names(formula))
    _guard_ceiling(blocks, ceiling)
    found = _first_counterexample(blocks, formula, policy, workers)
    if found is None:
        bounds = SearchBounds(max_worlds, max(len(p.indices) for p in posets))
        verdict: Verdict = ValidUpTo(bounds)
    else:
        verdict = found
    memo[key] = verdict
    return verdict


def axiom_matrix(
    profiles,
    modes,
    bounds: SearchBounds,
    *,
    require_stable_reflexive: bool = True,
    workers: int = 1,
    ceiling: int = DEFAULT_CEILING,
) -> tuple[MatrixRow, ...]:
    """Empirically decide each modal schema of the given profiles under
    each coherence mode, instantiated at every ordered index pair of every
    searched poset (reflexive pairs included).

    Rows come out in a fixed order: mode, then poset, then schema in
    SCHEMA_ORDER, then instance indices in declaration order.  Every
    countermodel carried by a row re-verifies through the scalar
    evaluator before it is returned.
    """
    profiles = tuple(profiles)
    if not profiles:
        raise ValueError("at least one profile is required")
    for profile in profiles:
        if not isinstance(profile, AxiomProfile):
            raise TypeError(f"not a profile: {profile!r}")
    allowed = frozenset().union(*(PROFILE_SCHEMAS[p] for p in profiles))
    schemas = [s for s in SCHEMA_ORDER if s in allowed]
    if bounds.poset is not None:
        posets: tuple[IndexPoset, ...] = (bounds.poset,)
    else:
        posets = enumerated_posets(bounds.max_indices)
    memo: dict = {}
    rows: list[MatrixRow] = []
    for mode in modes:
        policy = FramePolicy(mode, require_stable_reflexive)
        for poset in posets:
            for schema in schemas:
                for alpha, beta in _schema_instances(schema, poset):
                    formula = schema_instance(schema, alpha, beta)
                    variants = _stable_variants(schema, poset, alpha)
                    verdict = _scan_validity(
                        formula,
                        variants,
                        bounds.max_worlds,
                        policy,
                        memo,
                        workers,
                        ceiling,
                    )
                    rows.append(
                        MatrixRow(
                            schema,
                            mode,
                            poset,
                            alpha,
                            beta,
                            formula,
                            require_stable_reflexive,
                            verdict,
                        )
                    )
    return tuple(rows)
