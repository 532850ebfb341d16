"""The .cbm modeling language: parser, validator, and canonical printer."""

from .ast import (
    AGG_FNS,
    CATEGORY_KINDS,
    COMPARATORS,
    FIELD_KINDS,
    NUMERIC_KINDS,
    Agg,
    BinOp,
    Datasource,
    Duration,
    Entity,
    Expr,
    Field,
    KpiDef,
    Model,
    Number,
    Target,
    walk_exprs,
)
from .diagnostics import Diagnostic, ValidationReport
from .parser import parse_model
from .printer import format_expr, model_hash, model_to_dict, print_model
from .validator import validate_model

__all__ = [
    "AGG_FNS", "CATEGORY_KINDS", "COMPARATORS", "FIELD_KINDS", "NUMERIC_KINDS",
    "Agg", "BinOp", "Datasource", "Duration", "Entity", "Expr", "Field",
    "KpiDef", "Model", "Number", "Target", "walk_exprs",
    "Diagnostic", "ValidationReport",
    "parse_model", "validate_model", "load_model",
    "format_expr", "model_hash", "model_to_dict", "print_model",
]


def load_model(source: str | bytes) -> Model | ValidationReport:
    """Parse and validate in one step; returns the Model only if fully valid."""
    parsed = parse_model(source)
    if isinstance(parsed, ValidationReport):
        return parsed
    report = validate_model(parsed)
    if not report.ok:
        return report
    return parsed
