"""KPI engine: expression semantics, windowing, grouping, status, progress,
and equivalence against the naive brute-force oracle."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from climadash.dsl import Model, load_model
from climadash.dsl.ast import Agg, BinOp, Duration, KpiDef, Number, Target
from climadash.ingestion import Record, Store
from climadash.kpi import (
    EVAL_ERROR,
    NO_DATA,
    STATUS_NO_DATA,
    STATUS_OFF_TRACK,
    STATUS_ON_TRACK,
    evaluate_expr,
    evaluate_kpi,
    kpi_status,
    progress,
)
from climadash.timeutil import format_rfc3339_ms

from brute import brute_eval, brute_window, close
from gen import random_expr

DAY = 86_400_000


def records(values, field="pm25"):
    return [Record("d", {field: v}) for v in values]


# -- evaluate_expr --------------------------------------------------------------


def test_avg_example():
    assert evaluate_expr(Agg("avg", "pm25"), records([8.0, 12.0, 10.0])) == 10.0


def test_sum_single():
    assert evaluate_expr(Agg("sum", "pm25"), records([7.5])) == 7.5


def test_empty_aggregates():
    assert evaluate_expr(Agg("count", None), []) == 0.0
    assert evaluate_expr(Agg("avg", "pm25"), []) is NO_DATA


def test_first_last_order_and_min_max():
    rs = records([3.0, 1.0, 2.0])
    assert evaluate_expr(Agg("first", "pm25"), rs) == 3.0
    assert evaluate_expr(Agg("last", "pm25"), rs) == 2.0
    assert evaluate_expr(Agg("min", "pm25"), rs) == 1.0
    assert evaluate_expr(Agg("max", "pm25"), rs) == 3.0


def test_aggregates_skip_records_missing_the_field():
    rs = records([1.0, 2.0]) + [Record("d", {})]
    assert evaluate_expr(Agg("sum", "pm25"), rs) == 3.0
    assert evaluate_expr(Agg("count", None), rs) == 3.0  # count sees every record


def test_arithmetic_and_division_by_zero():
    expr = BinOp("/", Agg("sum", "pm25"), Agg("count", None))
    assert evaluate_expr(expr, records([2.0, 4.0])) == 3.0
    assert evaluate_expr(expr, []) is NO_DATA  # no-data wins over div-by-zero
    zero_div = BinOp("/", Number(1.0), Number(0.0))
    assert evaluate_expr(zero_div, records([1.0])) is EVAL_ERROR


def test_no_data_propagates_through_arithmetic():
    expr = BinOp("+", Number(1.0), Agg("avg", "pm25"))
    assert evaluate_expr(expr, []) is NO_DATA


def test_error_propagates():
    expr = BinOp("+", BinOp("/", Number(1.0), Number(0.0)), Agg("count", None))
    assert evaluate_expr(expr, records([1.0])) is EVAL_ERROR


# -- kpi_status / progress ----------------------------------------------------------


@pytest.mark.parametrize("value,cmp,bound,expected", [
    (8.0, "<=", 10.0, STATUS_ON_TRACK),
    (10.0, "<=", 10.0, STATUS_ON_TRACK),   # boundary inclusive
    (12.0, "<=", 10.0, STATUS_OFF_TRACK),
    (12.0, ">=", 10.0, STATUS_ON_TRACK),
    (10.0, "<", 10.0, STATUS_OFF_TRACK),
    (10.0, ">", 10.0, STATUS_OFF_TRACK),
    (10.0, "==", 10.0, STATUS_ON_TRACK),
])
def test_kpi_status_comparators(value, cmp, bound, expected):
    assert kpi_status(value, Target(cmp, bound)) == expected


def test_kpi_status_without_target_is_ok():
    assert kpi_status(5.0, None) == "ok"


def test_progress_examples():
    assert progress(15.0, 20.0, 10.0) == 0.5
    assert progress(10.0, 20.0, 10.0) == 1.0   # current = target
    assert progress(20.0, 20.0, 10.0) == 0.0   # current = baseline
    assert progress(25.0, 20.0, 10.0) == 0.0   # clamped below
    assert progress(5.0, 20.0, 10.0) == 1.0    # clamped above
    assert progress(15.0, 10.0, 20.0) == 0.5   # increasing target symmetric


def test_progress_undefined():
    with pytest.raises(ValueError):
        progress(5.0, 10.0, 10.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-100, 100), st.floats(-100, 100))
def test_progress_monotone_for_reduction_targets(a, b):
    current_lo, current_hi = sorted([a, b])
    baseline, bound = 50.0, -50.0  # reduction target
    assert progress(current_lo, baseline, bound) >= progress(current_hi, baseline, bound)


# -- evaluate_kpi ----------------------------------------------------------------------


def build_store(rows) -> tuple[Model, Store]:
    model = load_model("entity reading { station: string measured_at: datetime "
                       "pm25: float }\ndatasource air: reading")
    assert isinstance(model, Model)
    store = Store(model)
    batch = [{"station": s, "measured_at": format_rfc3339_ms(t), "pm25": v}
             for s, t, v in rows]
    result = store.ingest_batch("air", batch)
    assert not result.rejected
    return model, store


def kpi(expr, window=None, target=None, group_by=None, baseline=None) -> KpiDef:
    return KpiDef("k", source="air", expr=expr, window=window, target=target,
                  group_by=group_by, baseline=baseline)


def test_window_half_open_boundary():
    end = 100 * DAY
    model, store = build_store([
        ("S1", end - 31 * DAY, 1.0),
        ("S1", end - 1 * DAY, 2.0),
    ])
    value = evaluate_kpi(kpi(Agg("count", None), window=Duration(30, "d")),
                         store, at=end)
    assert value.value == 1.0
    assert value.window_end == end


def test_no_records_is_no_data():
    model, store = build_store([])
    value = evaluate_kpi(kpi(Agg("avg", "pm25"), window=Duration(30, "d")),
                         store, at=DAY)
    assert value.status == STATUS_NO_DATA and value.value is None


def test_grouped_evaluation_with_target():
    end = 10 * DAY
    model, store = build_store([
        ("S1", end - DAY, 8.0),
        ("S1", end - DAY, 12.0),
        ("S2", end - DAY, 20.0),
    ])
    value = evaluate_kpi(
        kpi(Agg("avg", "pm25"), window=Duration(30, "d"),
            target=Target("<=", 10.0), group_by="station"),
        store, at=end)
    assert value.groups is not None
    assert value.groups["S1"].value == 10.0
    assert value.groups["S1"].status == STATUS_ON_TRACK
    assert value.groups["S2"].value == 20.0
    assert value.groups["S2"].status == STATUS_OFF_TRACK


def test_unknown_datasource_is_error_status():
    model, store = build_store([])
    broken = KpiDef("k", source="ghost", expr=Agg("count", None))
    assert evaluate_kpi(broken, store, at=0).status == "error"


def test_no_window_uses_all_records():
    end = 10 * DAY
    model, store = build_store([("S1", DAY, 1.0), ("S1", 9 * DAY, 3.0)])
    value = evaluate_kpi(kpi(Agg("sum", "pm25")), store, at=end)
    assert value.value == 4.0
    assert value.window is None


def test_progress_attached_when_baseline_and_target():
    end = 10 * DAY
    model, store = build_store([("S1", end - DAY, 15.0)])
    value = evaluate_kpi(
        kpi(Agg("avg", "pm25"), window=Duration(30, "d"),
            target=Target("<=", 10.0), baseline=20.0),
        store, at=end)
    assert value.progress == 0.5


def test_explicit_at_is_deterministic():
    end = 42 * DAY
    model, store = build_store([("S1", end - DAY, 5.0)])
    k = kpi(Agg("avg", "pm25"), window=Duration(7, "d"))
    assert (evaluate_kpi(k, store, at=end).to_jsonable()
            == evaluate_kpi(k, store, at=end).to_jsonable())


# -- window partition and group consistency properties --------------------------------


def test_adjacent_windows_partition_counts():
    rng = random.Random(5)
    rows = [("S", rng.randint(0, 9 * DAY), 1.0) for _ in range(300)]
    model, store = build_store(rows)
    k = kpi(Agg("count", None))
    a, b, c = 2 * DAY, 5 * DAY, 9 * DAY
    left = evaluate_kpi(k, store, at=b, window=Duration(3, "d")).value   # (b-3d, b]
    right = evaluate_kpi(k, store, at=c, window=Duration(4, "d")).value  # (c-4d, c]
    whole = evaluate_kpi(k, store, at=c, window=Duration(7, "d")).value  # (a, c]
    assert left + right == whole


def test_grouped_counts_sum_to_ungrouped():
    rng = random.Random(6)
    rows = [(rng.choice(["S1", "S2", "S3"]), rng.randint(0, DAY), 1.0)
            for _ in range(100)]
    model, store = build_store(rows)
    plain = evaluate_kpi(kpi(Agg("count", None)), store, at=2 * DAY)
    grouped = evaluate_kpi(kpi(Agg("count", None), group_by="station"),
                           store, at=2 * DAY)
    assert plain.value == sum(g.value for g in grouped.groups.values())


# -- oracle equivalence -----------------------------------------------------------------


def engine_to_oracle(value) -> object:
    if value is NO_DATA:
        return "no-data"
    if value is EVAL_ERROR:
        return "error"
    return value


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_expr_matches_brute_force(seed):
    rng = random.Random(seed)
    fields = ["a", "b"]
    rs = []
    for _ in range(rng.randint(0, 40)):
        values = {}
        for f in fields:
            if rng.random() < 0.8:
                values[f] = rng.uniform(-100, 100)
        rs.append(Record("d", values))
    expr = random_expr(rng, fields)
    engine = engine_to_oracle(evaluate_expr(expr, rs))
    oracle = brute_eval(expr, rs)
    assert close(engine, oracle), (expr, engine, oracle)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_windowed_kpi_matches_brute_force(seed):
    rng = random.Random(seed)
    rows = [("S" + str(rng.randint(1, 3)), rng.randint(0, 20 * DAY),
             rng.uniform(0, 50)) for _ in range(rng.randint(0, 60))]
    model, store = build_store(rows)
    expr = random_expr(rng, ["pm25"])
    window = Duration(rng.randint(1, 10), "d")
    end = rng.randint(0, 22 * DAY)
    engine = evaluate_kpi(kpi(expr, window=window), store, at=end)

    ordered = store.query("air")  # ascending (t, arrival)
    pairs = [(r.values["measured_at"], r) for r in ordered]
    expected_records = brute_window(pairs, end - window.ms, end)
    if not expected_records:
        assert engine.status == STATUS_NO_DATA
    else:
        oracle = brute_eval(expr, expected_records)
        assert close(engine_to_oracle(
            engine.value if engine.value is not None
            else (NO_DATA if engine.status == STATUS_NO_DATA else EVAL_ERROR)),
            oracle)
