"""AST for the .cbm modeling language: entities, datasources, KPI definitions.

All nodes are frozen dataclasses; source positions are carried for
diagnostics but excluded from structural equality so that round-tripped
models compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

FIELD_KINDS = ("string", "int", "float", "bool", "datetime", "enum")
NUMERIC_KINDS = ("int", "float")
CATEGORY_KINDS = ("string", "enum")
AGG_FNS = ("sum", "avg", "min", "max", "first", "last")
COMPARATORS = ("<=", ">=", "<", ">", "==")

DURATION_UNIT_MS = {
    "m": 60_000,
    "h": 3_600_000,
    "d": 86_400_000,  # fixed-length days, no DST handling
    "w": 604_800_000,
}


@dataclass(frozen=True)
class Duration:
    magnitude: int
    unit: str  # one of m, h, d, w

    @property
    def ms(self) -> int:
        return self.magnitude * DURATION_UNIT_MS[self.unit]

    def __str__(self) -> str:
        return f"{self.magnitude}{self.unit}"

    @classmethod
    def parse(cls, text: str) -> Duration:
        """Parse a duration literal like '30d'. Raises ValueError on bad input."""
        if len(text) < 2 or text[-1] not in DURATION_UNIT_MS or not text[:-1].isdigit():
            raise ValueError(f"bad duration: {text!r}")
        magnitude = int(text[:-1])
        if magnitude < 1:
            raise ValueError(f"duration magnitude must be >= 1: {text!r}")
        return cls(magnitude, text[-1])


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Agg:
    fn: str  # sum|avg|min|max|first|last|count
    field: str | None  # None only for count()


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


Expr = Number | Agg | BinOp


def walk_exprs(expr: Expr):
    """Yield every node of an expression tree, preorder."""
    yield expr
    if isinstance(expr, BinOp):
        yield from walk_exprs(expr.left)
        yield from walk_exprs(expr.right)


@dataclass(frozen=True)
class Field:
    name: str
    kind: str  # one of FIELD_KINDS
    enum_values: tuple[str, ...] = ()
    unit: str | None = None
    optional: bool = False
    line: int = dc_field(default=0, compare=False)
    col: int = dc_field(default=0, compare=False)

    @property
    def is_numeric(self) -> bool:
        return self.kind in NUMERIC_KINDS

    @property
    def is_category(self) -> bool:
        return self.kind in CATEGORY_KINDS


@dataclass(frozen=True)
class Entity:
    name: str
    fields: tuple[Field, ...]
    line: int = dc_field(default=0, compare=False)
    col: int = dc_field(default=0, compare=False)

    def field(self, name: str) -> Field | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None

    @property
    def time_field(self) -> Field | None:
        """The implicit time axis: the first datetime field, if any."""
        for f in self.fields:
            if f.kind == "datetime":
                return f
        return None

    def numeric_fields(self) -> list[Field]:
        return [f for f in self.fields if f.is_numeric]

    def category_fields(self) -> list[Field]:
        return [f for f in self.fields if f.is_category]


@dataclass(frozen=True)
class Datasource:
    name: str
    entity: str
    line: int = dc_field(default=0, compare=False)
    col: int = dc_field(default=0, compare=False)


@dataclass(frozen=True)
class Target:
    cmp: str  # one of COMPARATORS
    value: float


@dataclass(frozen=True)
class KpiDef:
    name: str
    source: str | None = None
    expr: Expr | None = None
    window: Duration | None = None
    unit: str | None = None
    target: Target | None = None
    baseline: float | None = None
    group_by: str | None = None
    line: int = dc_field(default=0, compare=False)
    col: int = dc_field(default=0, compare=False)


@dataclass(frozen=True)
class Model:
    entities: tuple[Entity, ...] = ()
    datasources: tuple[Datasource, ...] = ()
    kpis: tuple[KpiDef, ...] = ()

    def entity(self, name: str) -> Entity | None:
        for e in self.entities:
            if e.name == name:
                return e
        return None

    def datasource(self, name: str) -> Datasource | None:
        for d in self.datasources:
            if d.name == name:
                return d
        return None

    def kpi(self, name: str) -> KpiDef | None:
        for k in self.kpis:
            if k.name == name:
                return k
        return None

    def datasource_entity(self, datasource: str) -> Entity | None:
        ds = self.datasource(datasource)
        if ds is None:
            return None
        return self.entity(ds.entity)

    def kpi_entity(self, kpi: KpiDef) -> Entity | None:
        if kpi.source is None:
            return None
        return self.datasource_entity(kpi.source)
