"""Stratified multi-modal logic toolkit.

A library and CLI for logics whose modal operators are indexed by a
partially ordered set of admissibility levels, each level carrying its
own accessibility relation: parse formulas, models and proof scripts,
evaluate the layered satisfaction relation, validate cross-level frame
conditions, check Hilbert-style derivations, and decide validity or
satisfiability over bounded finite models with countermodel extraction.
"""

from __future__ import annotations

from importlib.resources import files as _files
from pathlib import Path

from .core import (
    And,
    Atom,
    AxiomProfile,
    Box,
    CoherenceMode,
    Diamond,
    Formula,
    Implies,
    IndexPoset,
    Not,
    Or,
    StratifiedModel,
    atom_names,
    modal_indices,
    poset_closure,
    subformulas,
)
from .errors import (
    BoundsTooLarge,
    CycleError,
    ForwardReference,
    FrameViolation,
    IllegalTagForProfile,
    ParseError,
    SalError,
    SourceSpan,
    UndeclaredIdentifier,
)
from .proofs import (
    Axiom,
    CheckReport,
    Derivation,
    LineVerdict,
    ModusPonens,
    Necessitation,
    ProofLine,
    check_derivation,
    match_axiom,
)
from .search import (
    Counterexample,
    MatrixRow,
    Satisfiable,
    SearchBounds,
    UnsatUpTo,
    ValidUpTo,
    Verdict,
    axiom_matrix,
    decide_sat,
    decide_valid,
)
from .semantics import (
    EvalTrace,
    FramePolicy,
    Violation,
    evaluate,
    evaluate_with_trace,
    is_admissible,
    render_trace,
    satisfying_worlds,
    validate_frame,
)
from .syntax import (
    parse_formula,
    parse_model,
    parse_poset,
    parse_proof,
    print_formula,
    print_model,
    print_proof,
)

__version__ = "0.1.0"

EXAMPLE_MODELS = ("sec33", "temporal", "decoherence")


def example_model_path(name: str) -> Path:
    """Filesystem path of a bundled example model (see EXAMPLE_MODELS)."""
    if name not in EXAMPLE_MODELS:
        raise KeyError(f"no bundled model named {name!r}; have {EXAMPLE_MODELS}")
    return Path(str(_files("salogic").joinpath("examples", f"{name}.salm")))


def load_example_model(name: str) -> StratifiedModel:
    """Parse and return a bundled example model."""
    return parse_model(example_model_path(name).read_text(encoding="utf-8"))
