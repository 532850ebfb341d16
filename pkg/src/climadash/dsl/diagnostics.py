"""Diagnostics with stable codes and 1-based source positions."""

from __future__ import annotations

from dataclasses import dataclass, field

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"

# Stable diagnostic codes. E-SYNTAX / E-LEX come from the parser; the rest
# from semantic validation.
E_LEX = "E-LEX"
E_SYNTAX = "E-SYNTAX"
E_DUP = "E-DUP"
E_ENTITY_EMPTY = "E-ENTITY-EMPTY"
E_DS_ENTITY = "E-DS-ENTITY"
E_KPI_SOURCE = "E-KPI-SOURCE"
E_KPI_EXPR = "E-KPI-EXPR"
E_EXPR_FIELD = "E-EXPR-FIELD"
E_EXPR_TYPE = "E-EXPR-TYPE"
E_KPI_TIME = "E-KPI-TIME"
E_KPI_GROUP = "E-KPI-GROUP"
E_NUM_RANGE = "E-NUM-RANGE"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col} {self.severity} {self.code}: {self.message}"


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def add(self, code: str, line: int, col: int, message: str,
            severity: str = SEVERITY_ERROR) -> None:
        self.diagnostics.append(Diagnostic(code, severity, line, col, message))

    def extend(self, other: "ValidationReport") -> None:
        self.diagnostics.extend(other.diagnostics)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == SEVERITY_ERROR]

    @property
    def ok(self) -> bool:
        # empty report <=> valid model
        return not self.diagnostics

    def sort(self) -> None:
        self.diagnostics.sort(key=lambda d: (d.line, d.col, d.code, d.message))

    def to_jsonable(self) -> list[dict]:
        return [
            {"code": d.code, "severity": d.severity, "line": d.line,
             "col": d.col, "message": d.message}
            for d in self.diagnostics
        ]

    def __str__(self) -> str:
        if not self.diagnostics:
            return "0 errors"
        body = "\n".join(str(d) for d in self.diagnostics)
        n = len(self.errors)
        return f"{body}\n{n} error{'s' if n != 1 else ''}"
