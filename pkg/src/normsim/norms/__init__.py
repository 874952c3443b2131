"""ADICO norm statements: model, DSL reader/writer, and evaluation."""

from .engine import (
    AppliedConsequence,
    applies,
    consequences_for,
    evaluate_predicate,
    gate_actions,
    instantiate_fine,
)
from .model import (
    ALWAYS,
    ActionRef,
    And,
    Compare,
    Consequence,
    NO_CONSEQUENCE,
    NormError,
    NormStatement,
    NormSyntaxError,
    NormValidationError,
    Not,
    Or,
    Performed,
    TruePred,
    UnknownFieldError,
    with_active,
)
from .parser import canonicalize, format_norm, format_predicate, parse_norms, parse_predicate

__all__ = [
    "ALWAYS",
    "ActionRef",
    "And",
    "AppliedConsequence",
    "Compare",
    "Consequence",
    "NO_CONSEQUENCE",
    "NormError",
    "NormStatement",
    "NormSyntaxError",
    "NormValidationError",
    "Not",
    "Or",
    "Performed",
    "TruePred",
    "UnknownFieldError",
    "applies",
    "canonicalize",
    "consequences_for",
    "evaluate_predicate",
    "format_norm",
    "format_predicate",
    "gate_actions",
    "instantiate_fine",
    "parse_norms",
    "parse_predicate",
    "with_active",
]
