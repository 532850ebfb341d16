"""Deterministic translation of a validated model into backend artifacts.

Three generators (SQL DDL, API description, default dashboard) plus a
file writer that skips byte-identical outputs so regeneration only touches
what actually changed. All output is a pure function of the model: no
timestamps, no randomness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .dsl.ast import Entity, Field, Model
from .dsl.printer import model_hash
from .dsl.validator import validate_model

TOOL_NAME = "climadash"

SCHEMA_PATH = "gen/schema.sql"
API_PATH = "gen/api.json"
DASHBOARD_PATH = "gen/dashboard.default.json"

KIND_SCHEMA = "schema"
KIND_API = "api"
KIND_DASHBOARD = "dashboard"
ALL_KINDS = (KIND_SCHEMA, KIND_API, KIND_DASHBOARD)

_SQL_TYPES = {
    "string": "TEXT",
    "int": "BIGINT",
    "float": "DOUBLE PRECISION",
    "bool": "BOOLEAN",
    "datetime": "TIMESTAMP",
}

_JSON_TYPES = {
    "string": {"type": "string"},
    "int": {"type": "integer"},
    "float": {"type": "number"},
    "bool": {"type": "boolean"},
    "datetime": {"type": "string", "format": "date-time"},
}


@dataclass(frozen=True)
class GeneratedArtifact:
    path: str
    content: bytes
    kind: str


class UnvalidatedModelError(ValueError):
    """Caller error: generators require a model that validates cleanly."""


def _require_valid(m: Model) -> None:
    report = validate_model(m)
    if not report.ok:
        raise UnvalidatedModelError(
            f"model has {len(report.errors)} validation error(s); "
            f"first: {report.diagnostics[0]}")


def _column_sql(f: Field) -> str:
    parts = [f.name, _SQL_TYPES.get(f.kind, "TEXT")]
    if not f.optional:
        parts.append("NOT NULL")
    if f.kind == "enum":
        allowed = ",".join(f"'{v}'" for v in f.enum_values)
        parts.append(f"CHECK ({f.name} IN ({allowed}))")
    return " ".join(parts)


def generate_schema(m: Model) -> GeneratedArtifact:
    """One CREATE TABLE per entity, declaration order, portable ANSI DDL."""
    _require_valid(m)
    lines = [f"-- generated by {TOOL_NAME}; model {model_hash(m)}"]
    for entity in m.entities:
        columns = ", ".join(_column_sql(f) for f in entity.fields)
        lines.append("")
        lines.append(f"CREATE TABLE {entity.name} ({columns});")
    return GeneratedArtifact(SCHEMA_PATH, ("\n".join(lines) + "\n").encode("utf-8"),
                             KIND_SCHEMA)


def _entity_schema(entity: Entity) -> dict:
    properties = {}
    for f in entity.fields:
        prop = dict(_JSON_TYPES.get(f.kind, {"type": "string"}))
        if f.kind == "enum":
            prop = {"type": "string", "enum": list(f.enum_values)}
        if f.unit is not None:
            prop["unit"] = f.unit
        properties[f.name] = prop
    return {
        "type": "object",
        "properties": properties,
        "required": [f.name for f in entity.fields if not f.optional],
        "additionalProperties": False,
    }


def generate_api_spec(m: Model) -> GeneratedArtifact:
    """Route listing with JSON-Schema-style entity schemas, shared via $ref."""
    _require_valid(m)
    routes = []
    schemas: dict[str, dict] = {}
    for ds in m.datasources:
        entity = m.entity(ds.entity)
        assert entity is not None
        if entity.name not in schemas:
            schemas[entity.name] = _entity_schema(entity)
        ref = {"$ref": f"#/schemas/{entity.name}"}
        per_ds = [
            {
                "method": "GET",
                "path": f"/api/v1/data/{ds.name}",
                "datasource": ds.name,
                "response_items": ref,
            },
            {
                "method": "POST",
                "path": f"/api/v1/ingest/{ds.name}",
                "datasource": ds.name,
                "request_items": ref,
            },
        ]
        per_ds.sort(key=lambda r: r["path"])
        routes.extend(per_ds)
    for kpi in m.kpis:
        routes.append({
            "method": "GET",
            "path": f"/api/v1/kpi/{kpi.name}",
            "kpi": kpi.name,
        })
    doc = {
        "_generator": {"tool": TOOL_NAME, "model_hash": model_hash(m)},
        "routes": routes,
        "schemas": schemas,
    }
    return GeneratedArtifact(API_PATH, _encode_json(doc), KIND_API)


def generate_dashboard_config(m: Model) -> GeneratedArtifact:
    """Default dashboard: one widget per KPI, then one table per datasource."""
    _require_valid(m)
    from .dashboards import default_dashboard  # local import: avoid cycle

    dashboard = default_dashboard(m)
    doc = {"_generator": {"tool": TOOL_NAME, "model_hash": model_hash(m)}}
    doc.update(dashboard.to_jsonable())
    return GeneratedArtifact(DASHBOARD_PATH, _encode_json(doc), KIND_DASHBOARD)


def _encode_json(doc: dict) -> bytes:
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def generate_all(m: Model, selection: set[str] | None = None) -> list[GeneratedArtifact]:
    """Generate the selected artifact kinds (all three by default)."""
    selection = set(ALL_KINDS) if selection is None else set(selection)
    if not selection:
        raise ValueError("empty generation selection")
    unknown = selection - set(ALL_KINDS)
    if unknown:
        raise ValueError(f"unknown artifact kinds: {sorted(unknown)}")
    artifacts = []
    if KIND_SCHEMA in selection:
        artifacts.append(generate_schema(m))
    if KIND_API in selection:
        artifacts.append(generate_api_spec(m))
    if KIND_DASHBOARD in selection:
        artifacts.append(generate_dashboard_config(m))
    return artifacts


def write_artifacts(artifacts: list[GeneratedArtifact],
                    out_dir: Path | str = ".") -> list[tuple[str, str]]:
    """Write artifacts under out_dir, skipping byte-identical files.

    Returns a manifest of (path, status) with status in
    {created, updated, unchanged}.
    """
    out_dir = Path(out_dir)
    manifest: list[tuple[str, str]] = []
    for artifact in artifacts:
        path = out_dir / artifact.path
        if path.exists():
            if path.read_bytes() == artifact.content:
                manifest.append((artifact.path, "unchanged"))
                continue
            status = "updated"
        else:
            status = "created"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(artifact.content)
        manifest.append((artifact.path, status))
    return manifest
