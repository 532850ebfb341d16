"""Record validation, batch/CSV ingest, query windows, and journal replay."""

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from climadash.dsl import Model, load_model
from climadash.ingestion import (
    BAD_DATETIME,
    BAD_ENUM,
    MISSING,
    TYPE_MISMATCH,
    UNKNOWN_FIELD,
    Store,
    UnknownDatasourceError,
    validate_record,
)

AQ_TEXT = """
entity air_quality_reading {
  station: string
  measured_at: datetime
  pm25: float
  status: enum(open, closed) optional
  note: string optional
}
datasource air_quality: air_quality_reading
"""


@pytest.fixture()
def model() -> Model:
    m = load_model(AQ_TEXT)
    assert isinstance(m, Model)
    return m


@pytest.fixture()
def entity(model):
    return model.entities[0]


def reasons(errors):
    return {(e.field, e.reason) for e in errors}


# -- validate_record ---------------------------------------------------------------


def test_validate_good_record(entity):
    record, errors = validate_record(entity, {
        "station": "S1", "measured_at": "2024-06-01T00:00:00Z", "pm25": 8.0})
    assert errors == []
    assert record.values["measured_at"] == 1717200000000
    assert record.values["pm25"] == 8.0


def test_validate_missing_required(entity):
    record, errors = validate_record(entity, {
        "station": "S1", "measured_at": "2024-06-01T00:00:00Z"})
    assert record is None
    assert reasons(errors) == {("pm25", MISSING)}


def test_validate_no_string_to_number_coercion(entity):
    _, errors = validate_record(entity, {
        "station": "S1", "measured_at": "2024-06-01T00:00:00Z", "pm25": "high"})
    assert reasons(errors) == {("pm25", TYPE_MISMATCH)}


def test_validate_integral_float_coerces_to_int():
    m = load_model("entity e { n: int }\ndatasource d: e")
    record, errors = validate_record(m.entities[0], {"n": 5.0})
    assert errors == [] and record.values["n"] == 5
    _, errors = validate_record(m.entities[0], {"n": 5.5})
    assert reasons(errors) == {("n", TYPE_MISMATCH)}


def test_validate_bool_is_not_a_number():
    m = load_model("entity e { n: int f: float b: bool }\ndatasource d: e")
    _, errors = validate_record(m.entities[0], {"n": True, "f": False, "b": 1})
    assert reasons(errors) == {("n", TYPE_MISMATCH), ("f", TYPE_MISMATCH),
                               ("b", TYPE_MISMATCH)}


def test_validate_unknown_field(entity):
    _, errors = validate_record(entity, {
        "station": "S1", "measured_at": "2024-06-01T00:00:00Z", "pm25": 1.0,
        "extra": 1})
    assert reasons(errors) == {("extra", UNKNOWN_FIELD)}


def test_validate_enum_and_datetime_codes(entity):
    _, errors = validate_record(entity, {
        "station": "S1", "measured_at": "yesterday", "pm25": 1.0,
        "status": "half-open"})
    assert reasons(errors) == {("measured_at", BAD_DATETIME),
                               ("status", BAD_ENUM)}


def test_validate_null_counts_as_missing(entity):
    record, errors = validate_record(entity, {
        "station": None, "measured_at": "2024-06-01T00:00:00Z", "pm25": 1.0,
        "note": None})
    assert reasons(errors) == {("station", MISSING)}  # optional null is fine


def test_validate_non_dict_input(entity):
    record, errors = validate_record(entity, [1, 2, 3])
    assert record is None and errors


@settings(max_examples=200, deadline=None)
@given(st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False)
    | st.text(max_size=8),
    lambda children: st.lists(children, max_size=4)
    | st.dictionaries(st.text(max_size=8), children, max_size=6),
    max_leaves=20))
def test_validate_total_on_arbitrary_json(payload):
    m = load_model(AQ_TEXT)
    record, errors = validate_record(m.entities[0], payload)
    assert (record is None) == bool(errors)


# -- batch ingest --------------------------------------------------------------------


def good(i: int, pm: float = 8.0) -> dict:
    return {"station": f"S{i}", "measured_at": f"2024-06-0{i}T00:00:00Z",
            "pm25": pm}


def test_ingest_batch_all_valid(model):
    store = Store(model)
    result = store.ingest_batch("air_quality", [good(1), good(2), good(3)])
    assert result.accepted == 3 and result.rejected == []


def test_ingest_batch_partial(model):
    store = Store(model)
    bad = dict(good(2), status="bogus")
    result = store.ingest_batch("air_quality", [good(1), bad, good(3)])
    assert result.accepted == 2
    assert [(r.ordinal, r.field, r.reason) for r in result.rejected] == [
        (1, "status", BAD_ENUM)]
    assert store.count("air_quality") == 2


def test_ingest_unknown_datasource(model):
    store = Store(model)
    with pytest.raises(UnknownDatasourceError):
        store.ingest_batch("xyz", [good(1)])
    assert store.count("air_quality") == 0


def test_ingest_conservation_random(model):
    rng = random.Random(7)
    store = Store(model)
    for _ in range(50):
        batch = []
        for _ in range(rng.randint(0, 10)):
            if rng.random() < 0.5:
                batch.append(good(rng.randint(1, 9), rng.uniform(0, 50)))
            else:
                batch.append({"station": "S", "pm25": "oops"})
        result = store.ingest_batch("air_quality", batch)
        assert result.accepted + len(result.rejected) == len(batch)


# -- CSV ingest -----------------------------------------------------------------------


CSV_OK = ("station,measured_at,pm25\n"
          "S1,2024-06-01T00:00:00Z,8.0\n"
          "S2,2024-06-02T00:00:00Z,12.5\n")


def test_ingest_csv_valid(model):
    store = Store(model)
    result = store.ingest_csv("air_quality", CSV_OK)
    assert result.accepted == 2 and result.rejected == []


def test_ingest_csv_bad_cell_reports_line(model):
    store = Store(model)
    text = CSV_OK + "S3,2024-06-03T00:00:00Z,abc\n"
    result = store.ingest_csv("air_quality", text)
    assert result.accepted == 2
    assert [(r.ordinal, r.field, r.reason) for r in result.rejected] == [
        (4, "pm25", TYPE_MISMATCH)]


def test_ingest_csv_header_only(model):
    store = Store(model)
    result = store.ingest_csv("air_quality", "station,measured_at,pm25\n")
    assert result.accepted == 0 and result.rejected == []


def test_ingest_csv_unknown_header_is_request_error(model):
    store = Store(model)
    with pytest.raises(ValueError):
        store.ingest_csv("air_quality", "station,wat\nS1,x\n")
    assert store.count("air_quality") == 0


def test_ingest_csv_any_column_order_and_quoting(model):
    text = ('pm25,station,measured_at\n'
            '8.25,"South, Gate",2024-06-01T12:30:00+02:00\n')
    store = Store(model)
    result = store.ingest_csv("air_quality", text)
    assert result.accepted == 1
    record = store.query("air_quality")[0]
    assert record.values["station"] == "South, Gate"
    assert record.values["measured_at"] == 1717237800000  # 10:30 UTC


def test_ingest_csv_empty_optional_cells(model):
    text = "station,measured_at,pm25,note\nS1,2024-06-01T00:00:00Z,1.0,\n"
    store = Store(model)
    result = store.ingest_csv("air_quality", text)
    assert result.accepted == 1
    assert "note" not in store.query("air_quality")[0].values


# -- query ------------------------------------------------------------------------------


def at(t_ms: int, pm: float = 1.0) -> dict:
    from climadash.timeutil import format_rfc3339_ms
    return {"station": "S", "measured_at": format_rfc3339_ms(t_ms), "pm25": pm}


def test_query_half_open_window(model):
    store = Store(model)
    store.ingest_batch("air_quality", [at(1), at(2), at(3)])
    got = [r.values["measured_at"] for r in
           store.query("air_quality", from_ms=1, to_ms=3)]
    assert got == [2, 3]


def test_query_from_equals_to_is_empty(model):
    store = Store(model)
    store.ingest_batch("air_quality", [at(1), at(2)])
    assert store.query("air_quality", from_ms=2, to_ms=2) == []


def test_query_limit_keeps_most_recent(model):
    store = Store(model)
    store.ingest_batch("air_quality", [at(1), at(2), at(3)])
    got = store.query("air_quality", limit=1)
    assert [r.values["measured_at"] for r in got] == [3]


def test_query_orders_by_time_not_arrival(model):
    store = Store(model)
    store.ingest_batch("air_quality", [at(5, 1.0), at(1, 2.0), at(3, 3.0)])
    got = [r.values["measured_at"] for r in store.query("air_quality")]
    assert got == [1, 3, 5]


def test_query_equal_timestamps_keep_arrival_order(model):
    store = Store(model)
    store.ingest_batch("air_quality", [at(1, 1.0), at(1, 2.0), at(1, 3.0)])
    assert [r.values["pm25"] for r in store.query("air_quality")] == [1.0, 2.0, 3.0]


def test_query_bad_range_and_limit(model):
    store = Store(model)
    with pytest.raises(ValueError):
        store.query("air_quality", from_ms=5, to_ms=1)
    with pytest.raises(ValueError):
        store.query("air_quality", limit=0)


def test_query_no_time_axis_ignores_bounds():
    m = load_model("entity plain { label: string }\ndatasource d: plain")
    store = Store(m)
    store.ingest_batch("d", [{"label": "a"}, {"label": "b"}])
    got = store.query("d", from_ms=100, to_ms=200)
    assert [r.values["label"] for r in got] == ["a", "b"]


def test_monotone_reads(model):
    store = Store(model)
    store.ingest_batch("air_quality", [at(10), at(20)])
    before = [r.values for r in store.query("air_quality", from_ms=0, to_ms=15)]
    store.ingest_batch("air_quality", [at(30)])  # outside the queried range
    after = [r.values for r in store.query("air_quality", from_ms=0, to_ms=15)]
    assert before == after


# -- journal ----------------------------------------------------------------------------


def test_journal_roundtrip(model, tmp_path):
    store = Store(model, tmp_path)
    store.ingest_batch("air_quality", [good(1), good(2)])
    store.ingest_csv("air_quality", CSV_OK)
    baseline = [r.values for r in store.query("air_quality")]
    store.close()

    reborn = Store(model, tmp_path)
    assert [r.values for r in reborn.query("air_quality")] == baseline
    assert reborn.replay_warnings == []
    reborn.close()


def test_journal_is_flat_jsonl_with_t(model, tmp_path):
    store = Store(model, tmp_path)
    store.ingest_batch("air_quality", [good(1)])
    store.close()
    lines = (tmp_path / "air_quality.jsonl").read_text().splitlines()
    doc = json.loads(lines[0])
    assert doc["_t"] == 1717200000000
    assert doc["station"] == "S1" and doc["measured_at"] == "2024-06-01T00:00:00Z"


def test_journal_rejected_records_not_written(model, tmp_path):
    store = Store(model, tmp_path)
    store.ingest_batch("air_quality", [dict(good(1), pm25="nope")])
    store.close()
    path = tmp_path / "air_quality.jsonl"
    assert not path.exists() or path.read_text() == ""


def test_journal_tolerates_torn_tail(model, tmp_path):
    store = Store(model, tmp_path)
    store.ingest_batch("air_quality", [good(1), good(2)])
    store.close()
    path = tmp_path / "air_quality.jsonl"
    with open(path, "a", encoding="utf-8") as fh:
        fh.write('{"station": "S9", "measu')  # simulated crash mid-write
    reborn = Store(model, tmp_path)
    assert reborn.count("air_quality") == 2
    assert len(reborn.replay_warnings) == 1
    reborn.close()


def test_journal_random_roundtrip(model, tmp_path):
    rng = random.Random(99)
    store = Store(model, tmp_path / "j")
    for _ in range(20):
        batch = [at(rng.randint(0, 10_000), rng.uniform(0, 99))
                 for _ in range(rng.randint(1, 10))]
        store.ingest_batch("air_quality", batch)
    queries = [(rng.randint(0, 5000), rng.randint(5000, 10_000))
               for _ in range(25)]
    baseline = [[r.values for r in store.query("air_quality", from_ms=a, to_ms=b)]
                for a, b in queries]
    store.close()
    reborn = Store(model, tmp_path / "j")
    again = [[r.values for r in reborn.query("air_quality", from_ms=a, to_ms=b)]
             for a, b in queries]
    assert again == baseline
    reborn.close()
