"""Generator tests: type map, route rules, placement defaults, byte
determinism, golden files, and the schema/api cross-walk."""

import json
import random
import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from climadash.codegen import (
    UnvalidatedModelError,
    generate_all,
    generate_api_spec,
    generate_dashboard_config,
    generate_schema,
    write_artifacts,
)
from climadash.dsl import Model, load_model, parse_model

from gen import random_model

GOLDENS = Path(__file__).parent / "goldens"


def model_of(text: str) -> Model:
    m = load_model(text)
    assert isinstance(m, Model), f"fixture model invalid:\n{m}"
    return m


# -- schema --------------------------------------------------------------------


def test_schema_type_map():
    m = model_of("entity air_quality_reading { station: string "
                 "measured_at: datetime pm25: float }")
    sql = generate_schema(m).content.decode()
    assert ("CREATE TABLE air_quality_reading (station TEXT NOT NULL, "
            "measured_at TIMESTAMP NOT NULL, pm25 DOUBLE PRECISION NOT NULL);"
            ) in sql


def test_schema_empty_model_is_header_only():
    content = generate_schema(Model()).content.decode()
    lines = [line for line in content.splitlines() if line.strip()]
    assert len(lines) == 1 and lines[0].startswith("--")


def test_schema_enum_check_constraint():
    m = model_of("entity t { status: enum(open, closed) }")
    sql = generate_schema(m).content.decode()
    assert "status TEXT NOT NULL CHECK (status IN ('open','closed'))" in sql


def test_schema_optional_fields_are_nullable():
    m = model_of("entity t { a: int optional b: bool }")
    sql = generate_schema(m).content.decode()
    assert "a BIGINT," in sql and "a BIGINT NOT NULL" not in sql
    assert "b BOOLEAN NOT NULL" in sql


def test_schema_rejects_invalid_model():
    invalid = parse_model("datasource d: ghost")
    # parse succeeds; validation would fail
    assert isinstance(invalid, Model)
    with pytest.raises(UnvalidatedModelError):
        generate_schema(invalid)


def test_schema_table_per_entity_in_order():
    m = model_of("entity b { x: int }\nentity a { y: int }")
    sql = generate_schema(m).content.decode()
    assert sql.index("CREATE TABLE b ") < sql.index("CREATE TABLE a ")


# -- api spec --------------------------------------------------------------------


def test_api_routes_for_reference(reference_model):
    doc = json.loads(generate_api_spec(reference_model).content)
    paths = [r["path"] for r in doc["routes"]]
    assert paths == [
        "/api/v1/data/air_quality",
        "/api/v1/ingest/air_quality",
        "/api/v1/kpi/avg_pm25",
    ]


def test_api_empty_model():
    doc = json.loads(generate_api_spec(Model()).content)
    assert doc["routes"] == []


def test_api_shared_entity_one_schema():
    m = model_of("entity e { x: int }\ndatasource d1: e\ndatasource d2: e")
    doc = json.loads(generate_api_spec(m).content)
    ingest = [r for r in doc["routes"] if r["method"] == "POST"]
    assert len(ingest) == 2
    assert len(doc["schemas"]) == 1
    refs = {r["request_items"]["$ref"] for r in ingest}
    assert refs == {"#/schemas/e"}


# -- default dashboard -------------------------------------------------------------


def test_dashboard_default_layout(reference_model):
    doc = json.loads(generate_dashboard_config(reference_model).content)
    kinds = [(w["kind"], w["layout"]["x"], w["layout"]["y"],
              w["layout"]["w"], w["layout"]["h"]) for w in doc["widgets"]]
    assert kinds == [("gauge", 0, 0, 6, 4), ("table", 6, 0, 6, 4)]
    assert doc["version"] == 1


def test_dashboard_empty_model():
    doc = json.loads(generate_dashboard_config(Model()).content)
    assert doc["widgets"] == []


def test_dashboard_windowed_kpis_become_lines():
    m = model_of("""
    entity e { t: datetime v: float }
    datasource d: e
    kpi k1 { source: d expr: avg(v) window: 7d }
    kpi k2 { source: d expr: max(v) window: 1d }
    """)
    doc = json.loads(generate_dashboard_config(m).content)
    assert [w["kind"] for w in doc["widgets"][:2]] == ["line", "line"]


# -- generate_all / writing -----------------------------------------------------------


def test_generate_all_selection(reference_model):
    only_schema = generate_all(reference_model, {"schema"})
    assert [a.path for a in only_schema] == ["gen/schema.sql"]
    everything = generate_all(reference_model)
    assert [a.path for a in everything] == [
        "gen/schema.sql", "gen/api.json", "gen/dashboard.default.json"]


def test_generate_all_rejects_bad_selection(reference_model):
    with pytest.raises(ValueError):
        generate_all(reference_model, set())
    with pytest.raises(ValueError):
        generate_all(reference_model, {"schema", "nope"})


def test_write_artifacts_reports_unchanged(reference_model, tmp_path):
    first = write_artifacts(generate_all(reference_model), tmp_path)
    assert [status for _, status in first] == ["created"] * 3
    second = write_artifacts(generate_all(reference_model), tmp_path)
    assert [status for _, status in second] == ["unchanged"] * 3
    (tmp_path / "gen/schema.sql").write_text("tampered")
    third = write_artifacts(generate_all(reference_model), tmp_path)
    assert dict(third)["gen/schema.sql"] == "updated"
    assert dict(third)["gen/api.json"] == "unchanged"


def test_byte_determinism(reference_model):
    a = generate_all(reference_model)
    b = generate_all(reference_model)
    assert [(x.path, x.content) for x in a] == [(y.path, y.content) for y in b]


def test_golden_files(reference_model):
    for artifact in generate_all(reference_model):
        golden = (GOLDENS / Path(artifact.path).name).read_bytes()
        assert artifact.content == golden, f"{artifact.path} drifted from golden"


# -- consistency cross-walk ------------------------------------------------------------


def crosswalk(model: Model) -> None:
    sql = generate_schema(model).content.decode()
    api = json.loads(generate_api_spec(model).content)
    tables = set(re.findall(r"CREATE TABLE (\w+) ", sql))
    assert tables == {e.name for e in model.entities}
    for route_kind, method in (("data", "GET"), ("ingest", "POST")):
        names = [r["datasource"] for r in api["routes"]
                 if r["method"] == method and f"/{route_kind}/" in r["path"]]
        assert names == [d.name for d in model.datasources]
        assert len(set(names)) == len(names)
    for ds in model.datasources:
        assert ds.entity in tables  # every ingest route has a table behind it
    kpi_routes = [r["kpi"] for r in api["routes"] if "kpi" in r]
    assert kpi_routes == [k.name for k in model.kpis]


def test_crosswalk_reference(reference_model):
    crosswalk(reference_model)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000_000))
def test_crosswalk_random_models(seed):
    crosswalk(random_model(random.Random(seed)))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000_000))
def test_random_model_byte_determinism(seed):
    m = random_model(random.Random(seed))
    assert [a.content for a in generate_all(m)] == [a.content for a in generate_all(m)]
