"""Concrete syntax: the formula grammar, the model file format, the proof
script format, and canonical printers for each.

Formula grammar (ASCII), loosest binding first::

    formula  ::= or_expr | or_expr '->' formula           (right associative)
    or_expr  ::= and_expr ('|' and_expr)*                  (left associative)
    and_expr ::= prefix ('&' prefix)*                      (left associative)
    prefix   ::= '~' prefix | '[' IDENT ']' prefix
               | '<' IDENT '>' prefix | atom
    atom     ::= IDENT | '(' formula ')'

`[a]F` is necessity at level a, `<a>F` possibility at level a.
Identifiers match `[A-Za-z_][A-Za-z0-9_]*`; whitespace is insignificant.

Model files are line oriented and `#` starts a comment::

    indices: a b          # required, non-empty
    order: a<=b           # order generators, closure is computed
    stable: a             # optional, default empty
    worlds: w0 w1         # required, non-empty
    worldorder: w0<=w1    # optional
    rel a: w0->w0 w0->w1  # omitted index means empty relation
    val p: w1             # omitted atom means the atom is undeclared

Sections may appear in any order.  Repeated `rel`/`val` lines for the
same index/atom union their contents; repeating a declaration inside
`indices`/`worlds` is an error.

Proof scripts hold numbered lines `N. FORMULA ; JUSTIFICATION`, numbered
1..n in order.  The justification is one of the axiom tags `A1 K A2 A3
A4 DDOWN`, `MP i j` (line j must be line i -> current), or `NEC a i`
(current must be [a] applied to line i).  An optional header of
`indices:`, `order:` and `stable:` lines fixes the index poset; without
one, the indices appearing in the script form an antichain with no
stable levels.

Printers emit LF line endings and single-space token separation, and
parsing a printed artifact reproduces it exactly (models: up to closure
of the order sections, which the parser computes anyway).
"""

from __future__ import annotations

import re
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
    StratifiedModel,
    children,
    is_identifier,
)
from .errors import (
    ForwardReference,
    ParseError,
    SourceSpan,
    UndeclaredIdentifier,
)
from .proofs import Axiom, Derivation, ModusPonens, Necessitation, ProofLine, SCHEMA_TAGS

__all__ = [
    "parse_formula",
    "parse_model",
    "parse_poset",
    "parse_proof",
    "print_formula",
    "print_model",
    "print_proof",
]

_IDENT_AT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _byte_span(text: str, start: int, end: int) -> SourceSpan:
    """Convert character offsets into the byte offsets SourceSpan carries."""
    return SourceSpan(
        len(text[:start].encode("utf-8")), len(text[:end].encode("utf-8"))
    )


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class _Token:
    kind: str  # 'ident', 'eof', or the operator text itself
    text: str
    start: int  # character offsets; converted to bytes only for diagnostics
    end: int


def _tokenize_formula(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        m = _IDENT_AT.match(text, i)
        if m:
            tokens.append(_Token("ident", m.group(), i, m.end()))
            i = m.end()
            continue
        if ch in "~&|()[]<>":
            tokens.append(_Token(ch, ch, i, i + 1))
            i += 1
            continue
        if ch == "-":
            if text[i : i + 2] == "->":
                tokens.append(_Token("->", "->", i, i + 2))
                i += 2
                continue
            raise ParseError("stray '-'", _byte_span(text, i, i + 1), {"->"})
        raise ParseError(
            f"unexpected character {ch!r}", _byte_span(text, i, i + 1)
        )
    tokens.append(_Token("eof", "", n, n))
    return tokens


_ATOM_STARTERS = frozenset({"identifier", "'('", "'~'", "'['", "'<'"})

# Recursion guard: parsing is promised to be total, so pathological nesting
# must surface as a diagnostic rather than a RecursionError.  Parenthesis
# nesting costs several interpreter frames per level; 128 stays well inside
# the default recursion limit while being far beyond hand-written formulas.
_MAX_NESTING = 128


class _FormulaParser:
    def __init__(self, text: str, tokens: list[_Token]):
        self.text = text
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, expected) -> None:
        tok = self.peek()
        raise ParseError(
            message, _byte_span(self.text, tok.start, tok.end), expected
        )

    def expect(self, kind: str, expected_name: str) -> _Token:
        if self.peek().kind != kind:
            self.fail(f"expected {expected_name}", {expected_name})
        return self.advance()

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "->":
            self.advance()
            self.nest()
            try:
                return Implies(left, self.implication())
            finally:
                self.depth -= 1
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.peek().kind == "|":
            self.advance()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.prefix()
        while self.peek().kind == "&":
            self.advance()
            out = And(out, self.prefix())
        return out

    def nest(self) -> None:
        self.depth += 1
        if self.depth > _MAX_NESTING:
            self.fail(f"formula nesting deeper than {_MAX_NESTING}", set())

    def prefix(self) -> Formula:
        kind = self.peek().kind
        if kind == "~":
            self.nest()
            try:
                self.advance()
                return Not(self.prefix())
            finally:
                self.depth -= 1
        if kind == "[":
            self.nest()
            try:
                self.advance()
                idx = self.expect("ident", "identifier")
                self.expect("]", "']'")
                return Box(idx.text, self.prefix())
            finally:
                self.depth -= 1
        if kind == "<":
            self.nest()
            try:
                self.advance()
                idx = self.expect("ident", "identifier")
                self.expect(">", "'>'")
                return Diamond(idx.text, self.prefix())
            finally:
                self.depth -= 1
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "ident":
            self.advance()
            return Atom(tok.text)
        if tok.kind == "(":
            self.nest()
            try:
                self.advance()
                out = self.implication()
                self.expect(")", "')'")
                return out
            finally:
                self.depth -= 1
        self.fail("expected a formula", _ATOM_STARTERS)
        raise AssertionError("unreachable")


def parse_formula(text: str) -> Formula:
    """Parse the formula grammar (see module docstring).

    Raises ParseError carrying a byte span and the expected-token set on
    malformed input; never raises anything else on string input.
    """
    parser = _FormulaParser(text, _tokenize_formula(text))
    out = parser.implication()
    if parser.peek().kind != "eof":
        parser.fail("trailing input after formula", {"end of input"})
    return out


_PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_PREFIX, _PREC_ATOM = range(5)


def _fmt(formula: Formula, minimum: int) -> str:
    if isinstance(formula, Atom):
        text, level = formula.name, _PREC_ATOM
    elif isinstance(formula, Not):
        text, level = "~" + _fmt(formula.operand, _PREC_PREFIX), _PREC_PREFIX
    elif isinstance(formula, Box):
        text = f"[{formula.index}] " + _fmt(formula.operand, _PREC_PREFIX)
        level = _PREC_PREFIX
    elif isinstance(formula, Diamond):
        text = f"<{formula.index}> " + _fmt(formula.operand, _PREC_PREFIX)
        level = _PREC_PREFIX
    elif isinstance(formula, And):
        text = _fmt(formula.left, _PREC_AND) + " & " + _fmt(formula.right, _PREC_PREFIX)
        level = _PREC_AND
    elif isinstance(formula, Or):
        text = _fmt(formula.left, _PREC_OR) + " | " + _fmt(formula.right, _PREC_AND)
        level = _PREC_OR
    elif isinstance(formula, Implies):
        text = _fmt(formula.left, _PREC_OR) + " -> " + _fmt(formula.right, _PREC_IMPLIES)
        level = _PREC_IMPLIES
    else:
        raise TypeError(f"not a formula: {formula!r}")
    if level < minimum:
        return "(" + text + ")"
    return text


def print_formula(formula: Formula) -> str:
    """Canonical text with minimal parenthesization.

    parse_formula(print_formula(f)) == f for every AST f.
    """
    return _fmt(formula, _PREC_IMPLIES)


# ---------------------------------------------------------------------------
# Model files

_MODEL_SECTIONS = ("indices", "order", "stable", "worlds", "worldorder")
_POSET_SECTIONS = ("indices", "order", "stable")


def _logical_lines(text: str):
    """Yield (content, char_offset) per line, with comments stripped."""
    offset = 0
    for raw in text.split("\n"):
        yield raw.split("#", 1)[0], offset
        offset += len(raw) + 1


def _words_with_offsets(content: str, base: int):
    return [(m.group(), base + m.start(), base + m.end()) for m in re.finditer(r"\S+", content)]


def _idents(text, words, role):
    names = []
    for word, start, end in words:
        if not is_identifier(word):
            raise ParseError(
                f"{role} {word!r} is not an identifier",
                _byte_span(text, start, end),
                {"identifier"},
            )
        names.append(word)
    return names


def _pairs(text, words, separator, role):
    pairs = []
    for word, start, end in words:
        left, sep, right = word.partition(separator)
        if not sep or not is_identifier(left) or not is_identifier(right):
            raise ParseError(
                f"malformed {role} pair {word!r}",
                _byte_span(text, start, end),
                {f"identifier{separator}identifier"},
            )
        pairs.append((left, right))
    return pairs


class _Sections:
    """Accumulator for the line-oriented model/poset/proof-header format."""

    def __init__(self):
        self.indices: list[str] = []
        self.order: list[tuple[str, str]] = []
        self.stable: list[str] = []
        self.worlds: list[str] = []
        self.worldorder: list[tuple[str, str]] = []
        self.worldorder_declared = False
        self.rel: dict[str, set[tuple[str, str]]] = {}
        self.val: dict[str, set[str]] = {}

    @staticmethod
    def _declare(target: list[str], names: list[str], span, role: str):
        for name in names:
            if name in target:
                raise ParseError(f"duplicate {role} {name!r}", span, set())
            target.append(name)

    def feed(self, text: str, content: str, offset: int, allowed: tuple[str, ...]) -> bool:
        """Consume one line; returns False when the line is blank."""
        if not content.strip():
            return False
        head, sep, rest = content.partition(":")
        stripped = head.strip()
        lead = len(content) - len(content.lstrip())
        span = _byte_span(
            text,
            offset + lead,
            offset + max(len(head.rstrip()), lead + 1),
        )
        if not sep:
            raise ParseError("expected a 'section:' line", span, {"':'"})
        words = _words_with_offsets(rest, offset + len(head) + 1)
        parts = stripped.split()
        keyword = parts[0] if parts else ""
        if keyword not in allowed or len(parts) != (2 if keyword in ("rel", "val") else 1):
            raise ParseError(f"unknown section {stripped!r}", span, set(allowed))
        if keyword == "indices":
            self._declare(self.indices, _idents(text, words, "index"), span, "index")
        elif keyword == "worlds":
            self._declare(self.worlds, _idents(text, words, "world"), span, "world")
        elif keyword == "order":
            self.order.extend(_pairs(text, words, "<=", "order"))
        elif keyword == "worldorder":
            self.worldorder_declared = True
            self.worldorder.extend(_pairs(text, words, "<=", "world order"))
        elif keyword == "stable":
            for name in _idents(text, words, "index"):
                if name not in self.stable:
                    self.stable.append(name)
        elif keyword == "rel":
            name = parts[1]
            if not is_identifier(name):
                raise ParseError(f"bad index name {name!r}", span, {"identifier"})
            self.rel.setdefault(name, set()).update(_pairs(text, words, "->", "relation"))
        elif keyword == "val":
            name = parts[1]
            if not is_identifier(name):
                raise ParseError(f"bad atom name {name!r}", span, {"identifier"})
            self.val.setdefault(name, set()).update(_idents(text, words, "world"))
        return True

    def build_poset(self, text: str) -> IndexPoset:
        if not self.indices:
            raise ParseError(
                "no indices declared", _byte_span(text, 0, len(text)), {"indices:"}
            )
        declared = set(self.indices)
        for name in self.stable:
            if name not in declared:
                raise UndeclaredIdentifier(f"stable mentions undeclared index {name!r}")
        for a, b in self.order:
            for name in (a, b):
                if name not in declared:
                    raise UndeclaredIdentifier(f"order mentions undeclared index {name!r}")
        return IndexPoset.from_order(self.indices, self.order, self.stable)

    def build_model(self, text: str) -> StratifiedModel:
        poset = self.build_poset(text)
        if not self.worlds:
            raise ParseError(
                "no worlds declared", _byte_span(text, 0, len(text)), {"worlds:"}
            )
        world_set = set(self.worlds)
        for idx in self.rel:
            if idx not in poset.indices:
                raise UndeclaredIdentifier(f"rel given for undeclared index {idx!r}")
        for idx, pairs in self.rel.items():
            for u, v in pairs:
                for w in (u, v):
                    if w not in world_set:
                        raise UndeclaredIdentifier(
                            f"rel {idx}: mentions undeclared world {w!r}"
                        )
        for atom, ws in self.val.items():
            for w in ws:
                if w not in world_set:
                    raise UndeclaredIdentifier(
                        f"val {atom}: mentions undeclared world {w!r}"
                    )
        for u, v in self.worldorder:
            for w in (u, v):
                if w not in world_set:
                    raise UndeclaredIdentifier(
                        f"worldorder mentions undeclared world {w!r}"
                    )
        return StratifiedModel(
            poset=poset,
            worlds=tuple(self.worlds),
            relations={idx: frozenset(pairs) for idx, pairs in self.rel.items()},
            valuation={atom: frozenset(ws) for atom, ws in self.val.items()},
            world_order=frozenset(self.worldorder) if self.worldorder_declared else None,
        )


def parse_model(text: str) -> StratifiedModel:
    """Parse the model file format (see module docstring).

    Raises ParseError on malformed lines, UndeclaredIdentifier when a
    section refers to an unknown world or index, and CycleError when an
    order section is not antisymmetric.
    """
    sections = _Sections()
    for content, offset in _logical_lines(text):
        sections.feed(text, content, offset, _MODEL_SECTIONS + ("rel", "val"))
    return sections.build_model(text)


def parse_poset(text: str) -> IndexPoset:
    """Parse a poset file: the model format restricted to the `indices:`,
    `order:` and `stable:` sections."""
    sections = _Sections()
    for content, offset in _logical_lines(text):
        sections.feed(text, content, offset, _POSET_SECTIONS)
    return sections.build_poset(text)


def _poset_lines(poset: IndexPoset) -> list[str]:
    lines = ["indices: " + " ".join(poset.indices)]
    strict = poset.strict_pairs()
    if strict:
        lines.append("order: " + " ".join(f"{a}<={b}" for a, b in strict))
    if poset.stable:
        members = [i for i in poset.indices if i in poset.stable]
        lines.append("stable: " + " ".join(members))
    return lines


def print_model(model: StratifiedModel) -> str:
    """Canonical model text; parse_model(print_model(m)) == m.

    Order sections are emitted as the non-reflexive pairs of the stored
    closure, relations in index declaration order, valuation entries
    sorted by atom name (empty ones as bare `val atom:` lines so the
    atom stays declared).
    """
    lines = _poset_lines(model.poset)
    lines.append("worlds: " + " ".join(model.worlds))
    wpos = {w: i for i, w in enumerate(model.worlds)}
    if model.world_order is not None:
        strict = sorted(
            ((u, v) for u, v in model.world_order if u != v),
            key=lambda uv: (wpos[uv[0]], wpos[uv[1]]),
        )
        text = " ".join(f"{u}<={v}" for u, v in strict)
        lines.append("worldorder:" + (" " + text if text else ""))
    for idx in model.poset.indices:
        pairs = sorted(model.relations[idx], key=lambda uv: (wpos[uv[0]], wpos[uv[1]]))
        if pairs:
            lines.append(f"rel {idx}: " + " ".join(f"{u}->{v}" for u, v in pairs))
    for atom in sorted(model.valuation):
        members = [w for w in model.worlds if w in model.valuation[atom]]
        lines.append(f"val {atom}:" + (" " + " ".join(members) if members else ""))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Proof scripts

_PROOF_LINE = re.compile(r"\s*(\d+)\s*\.")


def _collect_indices_in_order(formula: Formula, into: list[str]) -> None:
    if isinstance(formula, (Box, Diamond)):
        if formula.index not in into:
            into.append(formula.index)
    for child in children(formula):
        _collect_indices_in_order(child, into)


def _parse_justification(text, words, line_no):
    if not words:
        raise ParseError(
            "missing justification",
            _byte_span(text, 0, len(text)),
            set(SCHEMA_TAGS) | {"MP", "NEC"},
        )
    word, start, end = words[0]
    span = _byte_span(text, start, words[-1][2])
    if word in SCHEMA_TAGS:
        if len(words) != 1:
            raise ParseError(f"{word} takes no arguments", span, set())
        return Axiom(word)
    if word == "MP":
        if len(words) != 3 or not all(w[0].isdigit() for w in words[1:]):
            raise ParseError("MP needs two line numbers", span, {"MP i j"})
        premise, implication = int(words[1][0]), int(words[2][0])
        for cited in (premise, implication):
            if not 1 <= cited < line_no:
                raise ForwardReference(
                    f"line {line_no} cites line {cited}, which is not an earlier line"
                )
        return ModusPonens(premise, implication)
    if word == "NEC":
        if len(words) != 3 or not is_identifier(words[1][0]) or not words[2][0].isdigit():
            raise ParseError("NEC needs an index and a line number", span, {"NEC a i"})
        cited = int(words[2][0])
        if not 1 <= cited < line_no:
            raise ForwardReference(
                f"line {line_no} cites line {cited}, which is not an earlier line"
            )
        return Necessitation(words[1][0], cited)
    raise ParseError(
        f"unknown justification {word!r}", span, set(SCHEMA_TAGS) | {"MP", "NEC"}
    )


def parse_proof(
    text: str,
    *,
    profile: AxiomProfile = AxiomProfile.SECTION2,
    nec_requires_stable: bool = True,
) -> Derivation:
    """Parse a proof script (see module docstring).

    `profile` and `nec_requires_stable` are carried onto the Derivation
    unchanged; all rule checking happens in proofs.check_derivation.
    Lines must be numbered 1..n in order.  Citing the current or a later
    line raises ForwardReference.
    """
    sections = _Sections()
    lines: list[ProofLine] = []
    for content, offset in _logical_lines(text):
        if not content.strip():
            continue
        head = _PROOF_LINE.match(content)
        if head is None:
            sections.feed(text, content, offset, _POSET_SECTIONS)
            continue
        number = int(head.group(1))
        if number != len(lines) + 1:
            raise ParseError(
                f"expected line number {len(lines) + 1}",
                _byte_span(text, offset + head.start(1), offset + head.end(1)),
                {str(len(lines) + 1)},
            )
        body = content[head.end() :]
        formula_text, sep, just_text = body.partition(";")
        if not sep:
            raise ParseError(
                "missing ';' before the justification",
                _byte_span(text, offset + head.end(), offset + len(content)),
                {"';'"},
            )
        try:
            formula = parse_formula(formula_text)
        except ParseError as err:
            base = len(text[: offset + head.end()].encode("utf-8"))
            raise ParseError(
                str(err).rsplit(" at bytes", 1)[0],
                SourceSpan(base + err.span.start, base + err.span.end),
                err.expected,
            ) from None
        just_words = _words_with_offsets(just_text, offset + head.end() + len(formula_text) + 1)
        justification = _parse_justification(text, just_words, number)
        lines.append(ProofLine(number, formula, justification))

    if sections.order and not sections.indices:
        raise ParseError(
            "order: requires an indices: header",
            _byte_span(text, 0, len(text)),
            {"indices:"},
        )
    if sections.stable and not sections.indices:
        raise ParseError(
            "stable: requires an indices: header",
            _byte_span(text, 0, len(text)),
            {"indices:"},
        )
    if sections.indices:
        poset = sections.build_poset(text)
        declared = set(poset.indices)
        for line in lines:
            used: list[str] = []
            _collect_indices_in_order(line.formula, used)
            if isinstance(line.justification, Necessitation):
                used.append(line.justification.index)
            for name in used:
                if name not in declared:
                    raise UndeclaredIdentifier(
                        f"line {line.number} uses undeclared index {name!r}"
                    )
    else:
        # Headerless scripts: indices in order of first appearance form an
        # antichain with no stable levels.
        used = []
        for line in lines:
            _collect_indices_in_order(line.formula, used)
            if isinstance(line.justification, Necessitation):
                if line.justification.index not in used:
                    used.append(line.justification.index)
        poset = IndexPoset.from_order(used or ("a",))
    return Derivation(
        lines=tuple(lines),
        poset=poset,
        profile=profile,
        nec_requires_stable=nec_requires_stable,
    )


def _print_justification(justification) -> str:
    if isinstance(justification, Axiom):
        return justification.tag
    if isinstance(justification, ModusPonens):
        return f"MP {justification.premise} {justification.implication}"
    if isinstance(justification, Necessitation):
        return f"NEC {justification.index} {justification.premise}"
    raise TypeError(f"not a justification: {justification!r}")


def print_proof(derivation: Derivation) -> str:
    """Canonical proof script: poset header, then one numbered line per step."""
    lines = _poset_lines(derivation.poset)
    for line in derivation.lines:
        lines.append(
            f"{line.number}. {print_formula(line.formula)} ; "
            f"{_print_justification(line.justification)}"
        )
    return "\n".join(lines) + "\n"
