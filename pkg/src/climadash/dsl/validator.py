"""Semantic validation of parsed models.

Every rule violation is reported (not just the first), with stable codes
and the position of the offending declaration. Checks that depend on a
broken reference (e.g. expression typing when the KPI's source is
dangling) are skipped to avoid cascading noise.
"""

from __future__ import annotations

import math

from .ast import Agg, Entity, KpiDef, Model, Number, walk_exprs
from .diagnostics import (
    E_DS_ENTITY,
    E_DUP,
    E_ENTITY_EMPTY,
    E_EXPR_FIELD,
    E_EXPR_TYPE,
    E_KPI_EXPR,
    E_KPI_GROUP,
    E_KPI_SOURCE,
    E_KPI_TIME,
    E_NUM_RANGE,
    ValidationReport,
)


def validate_model(m: Model) -> ValidationReport:
    report = ValidationReport()
    _check_duplicates(m, report)
    for entity in m.entities:
        _check_entity(entity, report)
    entity_names = {e.name for e in m.entities}
    for ds in m.datasources:
        if ds.entity not in entity_names:
            report.add(E_DS_ENTITY, ds.line, ds.col,
                       f"datasource {ds.name!r} references unknown entity {ds.entity!r}")
    datasource_names = {d.name for d in m.datasources}
    for kpi in m.kpis:
        _check_kpi(m, kpi, datasource_names, report)
    report.sort()
    return report


def _check_duplicates(m: Model, report: ValidationReport) -> None:
    for label, decls in (("entity", m.entities),
                         ("datasource", m.datasources),
                         ("kpi", m.kpis)):
        seen: set[str] = set()
        for d in decls:
            if d.name in seen:
                report.add(E_DUP, d.line, d.col, f"duplicate {label} name {d.name!r}")
            seen.add(d.name)


def _check_entity(entity: Entity, report: ValidationReport) -> None:
    if not entity.fields:
        report.add(E_ENTITY_EMPTY, entity.line, entity.col,
                   f"entity {entity.name!r} has no fields")
    seen: set[str] = set()
    for f in entity.fields:
        if f.name in seen:
            report.add(E_DUP, f.line, f.col,
                       f"duplicate field name {f.name!r} in entity {entity.name!r}")
        seen.add(f.name)
        if f.kind == "enum":
            values: set[str] = set()
            for v in f.enum_values:
                if v in values:
                    report.add(E_DUP, f.line, f.col,
                               f"duplicate enum value {v!r} in field {f.name!r}")
                values.add(v)


def _check_kpi(m: Model, kpi: KpiDef, datasource_names: set[str],
               report: ValidationReport) -> None:
    if kpi.source is None:
        report.add(E_KPI_SOURCE, kpi.line, kpi.col, f"kpi {kpi.name!r} has no source")
    elif kpi.source not in datasource_names:
        report.add(E_KPI_SOURCE, kpi.line, kpi.col,
                   f"kpi {kpi.name!r} references unknown datasource {kpi.source!r}")
    if kpi.expr is None:
        report.add(E_KPI_EXPR, kpi.line, kpi.col, f"kpi {kpi.name!r} has no expr")
    if kpi.target is not None and not math.isfinite(kpi.target.value):
        report.add(E_NUM_RANGE, kpi.line, kpi.col,
                   f"kpi {kpi.name!r} target bound is out of range")
    if kpi.baseline is not None and not math.isfinite(kpi.baseline):
        report.add(E_NUM_RANGE, kpi.line, kpi.col,
                   f"kpi {kpi.name!r} baseline is out of range")
    if kpi.expr is not None:
        for node in walk_exprs(kpi.expr):
            if isinstance(node, Number) and not math.isfinite(node.value):
                report.add(E_NUM_RANGE, kpi.line, kpi.col,
                           f"numeric literal in kpi {kpi.name!r} is out of range")

    entity = m.kpi_entity(kpi)
    if entity is None:
        return  # dangling source already reported; skip dependent checks

    if kpi.expr is not None:
        for node in walk_exprs(kpi.expr):
            if not isinstance(node, Agg) or node.field is None:
                continue
            field = entity.field(node.field)
            if field is None:
                report.add(E_EXPR_FIELD, kpi.line, kpi.col,
                           f"kpi {kpi.name!r}: {node.fn}() references unknown field "
                           f"{node.field!r} of entity {entity.name!r}")
            elif not field.is_numeric:
                report.add(E_EXPR_TYPE, kpi.line, kpi.col,
                           f"kpi {kpi.name!r}: {node.fn}({node.field}) applies to "
                           f"{field.kind} field, expected int or float")
    if kpi.window is not None and entity.time_field is None:
        report.add(E_KPI_TIME, kpi.line, kpi.col,
                   f"kpi {kpi.name!r} has a window but entity {entity.name!r} "
                   f"has no datetime field")
    if kpi.group_by is not None:
        field = entity.field(kpi.group_by)
        if field is None or not field.is_category:
            report.add(E_KPI_GROUP, kpi.line, kpi.col,
                       f"kpi {kpi.name!r}: group_by {kpi.group_by!r} is not a "
                       f"string or enum field of entity {entity.name!r}")
