"""Parser, validator, and printer tests, including the round-trip and
fuzz-totality properties."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from climadash.dsl import (
    Duration,
    Model,
    ValidationReport,
    load_model,
    parse_model,
    print_model,
    validate_model,
)
from climadash.dsl.ast import Agg, BinOp, Number
from climadash.dsl.diagnostics import (
    E_DS_ENTITY,
    E_DUP,
    E_ENTITY_EMPTY,
    E_EXPR_FIELD,
    E_EXPR_TYPE,
    E_KPI_GROUP,
    E_KPI_SOURCE,
    E_KPI_TIME,
    E_NUM_RANGE,
)

from gen import random_model


def parse_ok(text) -> Model:
    result = parse_model(text)
    assert isinstance(result, Model), f"expected Model, got:\n{result}"
    return result


def parse_err(text) -> ValidationReport:
    result = parse_model(text)
    assert isinstance(result, ValidationReport), "expected a failed parse"
    return result


# -- parse_model spec examples ---------------------------------------------------


def test_parse_minimal_model():
    m = parse_ok("entity A { v: float }\ndatasource d: A")
    assert len(m.entities) == 1
    assert len(m.entities[0].fields) == 1
    assert len(m.datasources) == 1
    assert len(m.kpis) == 0


def test_parse_empty_input_is_empty_model():
    m = parse_ok("")
    assert m == Model()


def test_parse_unknown_type_reports_line_and_name():
    report = parse_err("entity A { v: floot }")
    assert any(d.line == 1 and "floot" in d.message for d in report.diagnostics)


def test_parse_preserves_declaration_order():
    m = parse_ok("""
    entity b { x: int }
    entity a { y: int }
    datasource z: b
    datasource y: a
    kpi second { source: z expr: count() }
    kpi first { source: y expr: count() }
    """)
    assert [e.name for e in m.entities] == ["b", "a"]
    assert [d.name for d in m.datasources] == ["z", "y"]
    assert [k.name for k in m.kpis] == ["second", "first"]


def test_parse_full_kpi_attributes():
    m = parse_ok("""
    entity e { ts: datetime level: float kind: enum(a, b) }
    datasource d: e
    kpi k {
      source: d
      expr: (sum(level) + 1) / count() * 2 - min(level)
      window: 12h
      unit: "µg/m³"
      target: >= -1.5
      baseline: -20
      group_by: kind
    }
    """)
    k = m.kpis[0]
    assert k.window == Duration(12, "h")
    assert k.unit == "µg/m³"
    assert k.target.cmp == ">=" and k.target.value == -1.5
    assert k.baseline == -20
    assert k.group_by == "kind"
    assert validate_model(m).ok


def test_parse_comments_and_whitespace():
    m = parse_ok("# header\nentity a{x:int# trailing\n}\n\n\ndatasource d : a # done")
    assert m.entities[0].fields[0].name == "x"


def test_duplicate_kpi_attribute_is_error():
    report = parse_err("entity e { x: int }\ndatasource d: e\n"
                       "kpi k { source: d source: d expr: count() }")
    assert any("duplicate attribute" in d.message for d in report.diagnostics)


def test_multiple_errors_reported_with_recovery():
    report = parse_err("""
    entity a { v: floot }
    entity b { w: intt }
    datasource ok: a
    """)
    messages = " | ".join(d.message for d in report.diagnostics)
    assert "floot" in messages and "intt" in messages


def test_reserved_field_names_rejected():
    report = parse_err("entity a { unit: string }")
    assert any("reserved" in d.message for d in report.diagnostics)


def test_count_takes_no_field():
    report = parse_err("entity e { x: int }\ndatasource d: e\n"
                       "kpi k { source: d expr: count(x) }")
    assert any("count()" in d.message for d in report.diagnostics)


def test_deep_nesting_is_reported_not_crashed():
    text = ("entity e { x: int }\ndatasource d: e\nkpi k { source: d expr: "
            + "(" * 5000 + "1" + ")" * 5000 + " }")
    result = parse_model(text)
    assert isinstance(result, ValidationReport)


# -- validate_model rule table ----------------------------------------------------


def codes(report: ValidationReport) -> list[str]:
    return [d.code for d in report.diagnostics]


def test_validate_dangling_kpi_source():
    m = parse_ok("kpi k { source: nope expr: count() }")
    assert codes(validate_model(m)) == [E_KPI_SOURCE]


def test_validate_entities_only_is_valid():
    m = parse_ok("entity a { x: int }")
    assert validate_model(m).ok


def test_validate_non_numeric_aggregate():
    m = parse_ok("entity e { station: string pm25: float }\ndatasource d: e\n"
                 "kpi k { source: d expr: avg(station) }")
    assert codes(validate_model(m)) == [E_EXPR_TYPE]


def test_validate_unknown_field_in_expr():
    m = parse_ok("entity e { x: int }\ndatasource d: e\n"
                 "kpi k { source: d expr: avg(zz) }")
    assert codes(validate_model(m)) == [E_EXPR_FIELD]


def test_validate_duplicates_all_reported():
    m = parse_ok("""
    entity a { x: int x: int }
    entity a { y: int }
    datasource d: a
    datasource d: a
    kpi k { source: d expr: count() }
    kpi k { source: d expr: count() }
    """)
    assert codes(validate_model(m)).count(E_DUP) == 4


def test_validate_empty_entity():
    m = parse_ok("entity a { }")
    assert codes(validate_model(m)) == [E_ENTITY_EMPTY]


def test_validate_dangling_datasource_entity():
    m = parse_ok("datasource d: ghost")
    assert codes(validate_model(m)) == [E_DS_ENTITY]


def test_validate_window_needs_datetime():
    m = parse_ok("entity e { x: int }\ndatasource d: e\n"
                 "kpi k { source: d expr: count() window: 1d }")
    assert codes(validate_model(m)) == [E_KPI_TIME]


def test_validate_group_by_must_be_category():
    m = parse_ok("entity e { x: int t: datetime }\ndatasource d: e\n"
                 "kpi k { source: d expr: count() group_by: x }")
    assert codes(validate_model(m)) == [E_KPI_GROUP]


def test_validate_overflowed_literal():
    m = parse_ok("entity e { x: int }\ndatasource d: e\n"
                 "kpi k { source: d expr: 1e999 }")
    assert E_NUM_RANGE in codes(validate_model(m))


def test_validate_k_violations_give_k_diagnostics():
    m = parse_ok("""
    entity e { station: string pm25: float }
    datasource d: e
    datasource dangling: ghost
    kpi k1 { source: missing expr: count() }
    kpi k2 { source: d expr: avg(station) }
    kpi k3 { source: d expr: count() window: 7d }
    """)
    report = validate_model(m)
    assert len(report.diagnostics) >= 4  # ds-entity, kpi-source, expr-type, kpi-time


def test_load_model_runs_both_stages():
    assert isinstance(load_model("datasource d: ghost"), ValidationReport)
    assert isinstance(load_model("entity a { x: int }"), Model)


# -- printer round-trip -------------------------------------------------------------


def test_roundtrip_reference(reference_text):
    m = parse_ok(reference_text)
    assert parse_ok(print_model(m)) == m


def test_print_empty_model():
    assert print_model(Model()) == ""


def test_print_escapes_strings():
    m = parse_ok('entity e { x: int unit "say \\"hi\\"\\n" }')
    again = parse_ok(print_model(m))
    assert again.entities[0].fields[0].unit == 'say "hi"\n'


def test_expr_parens_preserve_shape():
    left = BinOp("-", BinOp("-", Number(1.0), Number(2.0)), Number(3.0))
    right = BinOp("-", Number(1.0), BinOp("-", Number(2.0), Number(3.0)))
    m_left = Model(
        entities=parse_ok("entity e { x: int }").entities,
        datasources=parse_ok("entity e {x: int}\ndatasource d: e").datasources,
    )
    for expr in (left, right, BinOp("/", Agg("count", None), Number(2.0))):
        from climadash.dsl.ast import KpiDef
        m = Model(m_left.entities, m_left.datasources,
                  (KpiDef("k", source="d", expr=expr),))
        assert parse_ok(print_model(m)) == m


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10_000_000))
def test_roundtrip_random_models(seed):
    m = random_model(random.Random(seed))
    assert validate_model(m).ok, f"generator produced invalid model (seed {seed})"
    printed = print_model(m)
    assert parse_ok(printed) == m


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10_000_000))
def test_parse_deterministic(seed):
    text = print_model(random_model(random.Random(seed)))
    assert parse_ok(text) == parse_ok(text)


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=400))
def test_parser_total_on_arbitrary_bytes(data):
    result = parse_model(data)
    assert isinstance(result, (Model, ValidationReport))


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**9), st.data())
def test_parser_total_on_mutated_models(seed, data):
    rng = random.Random(seed)
    text = print_model(random_model(rng)).encode("utf-8")
    buf = bytearray(text)
    for _ in range(data.draw(st.integers(min_value=1, max_value=8))):
        if not buf:
            break
        op = rng.randint(0, 2)
        pos = rng.randrange(len(buf))
        if op == 0:
            buf[pos] = rng.randrange(256)
        elif op == 1:
            del buf[pos]
        else:
            buf.insert(pos, rng.randrange(256))
    result = parse_model(bytes(buf))
    assert isinstance(result, (Model, ValidationReport))
