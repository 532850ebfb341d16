"""Canonical pretty-printer for models.

print_model is the inverse of parse_model over valid models: the printed
text re-parses to a structurally equal AST. The printed form is also the
canonical text hashed into generated artifact headers.
"""

from __future__ import annotations

import hashlib

from .ast import Agg, BinOp, Datasource, Entity, Expr, Field, KpiDef, Model, Number

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _prec(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return _PRECEDENCE[expr.op]
    return 3


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Number):
        return format_number(expr.value)
    if isinstance(expr, Agg):
        return f"{expr.fn}({expr.field or ''})"
    left = format_expr(expr.left)
    right = format_expr(expr.right)
    # parser is left-associative: parenthesize to preserve tree shape
    if _prec(expr.left) < _PRECEDENCE[expr.op]:
        left = f"({left})"
    if _prec(expr.right) <= _PRECEDENCE[expr.op]:
        right = f"({right})"
    return f"{left} {expr.op} {right}"


def _quote(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def _print_field(f: Field) -> str:
    if f.kind == "enum":
        kind = f"enum({', '.join(f.enum_values)})"
    else:
        kind = f.kind
    parts = [f"  {f.name}: {kind}"]
    if f.unit is not None:
        parts.append(f"unit {_quote(f.unit)}")
    if f.optional:
        parts.append("optional")
    return " ".join(parts)


def _print_entity(e: Entity) -> str:
    lines = [f"entity {e.name} {{"]
    lines.extend(_print_field(f) for f in e.fields)
    lines.append("}")
    return "\n".join(lines)


def _print_datasource(d: Datasource) -> str:
    return f"datasource {d.name}: {d.entity}"


def _print_kpi(k: KpiDef) -> str:
    lines = [f"kpi {k.name} {{"]
    if k.source is not None:
        lines.append(f"  source: {k.source}")
    if k.expr is not None:
        lines.append(f"  expr: {format_expr(k.expr)}")
    if k.window is not None:
        lines.append(f"  window: {k.window}")
    if k.unit is not None:
        lines.append(f"  unit: {_quote(k.unit)}")
    if k.target is not None:
        lines.append(f"  target: {k.target.cmp} {format_number(k.target.value)}")
    if k.baseline is not None:
        lines.append(f"  baseline: {format_number(k.baseline)}")
    if k.group_by is not None:
        lines.append(f"  group_by: {k.group_by}")
    lines.append("}")
    return "\n".join(lines)


def print_model(m: Model) -> str:
    blocks = [_print_entity(e) for e in m.entities]
    blocks.extend(_print_datasource(d) for d in m.datasources)
    blocks.extend(_print_kpi(k) for k in m.kpis)
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"


def model_hash(m: Model) -> str:
    """Hex sha256 of the canonical printed model text."""
    return hashlib.sha256(print_model(m).encode("utf-8")).hexdigest()


def model_to_dict(m: Model) -> dict:
    """JSON-friendly description of a model, used by the HTTP model endpoint."""
    entities = []
    for e in m.entities:
        fields = []
        for f in e.fields:
            fd: dict = {"name": f.name, "kind": f.kind, "optional": f.optional}
            if f.kind == "enum":
                fd["enum_values"] = list(f.enum_values)
            if f.unit is not None:
                fd["unit"] = f.unit
            fields.append(fd)
        entities.append({
            "name": e.name,
            "fields": fields,
            "time_field": e.time_field.name if e.time_field else None,
        })
    kpis = []
    for k in m.kpis:
        kd: dict = {
            "name": k.name,
            "source": k.source,
            "expr": format_expr(k.expr) if k.expr is not None else None,
            "window": str(k.window) if k.window is not None else None,
        }
        if k.unit is not None:
            kd["unit"] = k.unit
        if k.target is not None:
            kd["target"] = {"cmp": k.target.cmp, "value": k.target.value}
        if k.baseline is not None:
            kd["baseline"] = k.baseline
        if k.group_by is not None:
            kd["group_by"] = k.group_by
        kpis.append(kd)
    return {
        "entities": entities,
        "datasources": [{"name": d.name, "entity": d.entity} for d in m.datasources],
        "kpis": kpis,
    }
