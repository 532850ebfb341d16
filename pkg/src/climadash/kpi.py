"""KPI evaluation over windowed record sets.

Aggregates run in IEEE double precision with plain sequential summation.
Empty aggregates (other than count) yield NO_DATA, which propagates through
arithmetic like a null; division by zero yields EVAL_ERROR, kept distinct.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dsl.ast import Agg, BinOp, Duration, Expr, KpiDef, Number, Target
from .ingestion import Record, Store, UnknownDatasourceError
from .timeutil import now_ms

STATUS_NO_DATA = "no_data"
STATUS_OK = "ok"
STATUS_ON_TRACK = "on_track"
STATUS_OFF_TRACK = "off_track"
STATUS_ERROR = "error"


class _Marker:
    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name


NO_DATA = _Marker("NO_DATA")
EVAL_ERROR = _Marker("EVAL_ERROR")

EvalResult = float | _Marker


def evaluate_expr(expr: Expr, records: list[Record]) -> EvalResult:
    """Evaluate an expression over records already in (time, arrival) order."""
    if isinstance(expr, Number):
        return expr.value
    if isinstance(expr, Agg):
        return _aggregate(expr, records)
    left = evaluate_expr(expr.left, records)
    right = evaluate_expr(expr.right, records)
    if left is NO_DATA or right is NO_DATA:
        return NO_DATA
    if left is EVAL_ERROR or right is EVAL_ERROR:
        return EVAL_ERROR
    assert isinstance(left, float) and isinstance(right, float)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if right == 0.0:
        return EVAL_ERROR
    return left / right


def _aggregate(agg: Agg, records: list[Record]) -> EvalResult:
    if agg.fn == "count":
        return float(len(records))
    values = [float(r.values[agg.field]) for r in records  # type: ignore[arg-type]
              if agg.field in r.values]
    if not values:
        return NO_DATA
    if agg.fn == "sum":
        return sum(values)
    if agg.fn == "avg":
        return sum(values) / len(values)
    if agg.fn == "min":
        return min(values)
    if agg.fn == "max":
        return max(values)
    if agg.fn == "first":
        return values[0]
    if agg.fn == "last":
        return values[-1]
    raise AssertionError(agg.fn)


def kpi_status(value: float, target: Target | None) -> str:
    """Status of a numeric value versus an optional target bound."""
    if target is None:
        return STATUS_OK
    bound = target.value
    held = {
        "<=": value <= bound,
        ">=": value >= bound,
        "<": value < bound,
        ">": value > bound,
        "==": value == bound,
    }[target.cmp]
    return STATUS_ON_TRACK if held else STATUS_OFF_TRACK


def progress(current: float, baseline: float, target_bound: float) -> float:
    """Fraction of the way from baseline to target, clamped to [0, 1]."""
    if baseline == target_bound:
        raise ValueError("progress undefined: baseline equals target bound")
    fraction = (baseline - current) / (baseline - target_bound)
    return min(1.0, max(0.0, fraction))


@dataclass
class GroupValue:
    value: float | None
    status: str


@dataclass
class KpiValue:
    kpi: str
    value: float | None
    unit: str | None
    window_end: int
    window: Duration | None
    status: str
    groups: dict[str, GroupValue] | None = None
    progress: float | None = None

    def to_jsonable(self) -> dict:
        out: dict = {
            "kpi": self.kpi,
            "value": self.value,
            "unit": self.unit,
            "window_end": self.window_end,
            "window": str(self.window) if self.window is not None else None,
            "status": self.status,
        }
        if self.groups is not None:
            out["groups"] = {
                key: {"value": g.value, "status": g.status}
                for key, g in sorted(self.groups.items())
            }
        if self.progress is not None:
            out["progress"] = self.progress
        return out


def _status_of(result: EvalResult, target: Target | None) -> tuple[float | None, str]:
    if result is NO_DATA:
        return None, STATUS_NO_DATA
    if result is EVAL_ERROR:
        return None, STATUS_ERROR
    assert isinstance(result, float)
    return result, kpi_status(result, target)


def evaluate_kpi(kpi: KpiDef, store: Store, at: int | None = None,
                 window: Duration | None = None,
                 group_by: str | None = None) -> KpiValue:
    """Evaluate a KPI over its window ending at `at` (wall clock if omitted).

    window/group_by arguments override the KPI's own settings (used for
    widget-level overrides); pass None to keep the definition's values.
    """
    end = at if at is not None else now_ms()
    window = window if window is not None else kpi.window
    group_by = group_by if group_by is not None else kpi.group_by
    out = KpiValue(kpi=kpi.name, value=None, unit=kpi.unit, window_end=end,
                   window=window, status=STATUS_ERROR)
    if kpi.source is None or kpi.expr is None:
        return out
    from_ms = end - window.ms if window is not None else None
    try:
        records = store.query(kpi.source, from_ms=from_ms, to_ms=end)
    except UnknownDatasourceError:
        return out

    if not records:
        out.status = STATUS_NO_DATA
        return out
    result = evaluate_expr(kpi.expr, records)
    out.value, out.status = _status_of(result, kpi.target)

    if group_by is not None:
        partitions: dict[str, list[Record]] = {}
        for record in records:
            key = str(record.values.get(group_by, ""))
            partitions.setdefault(key, []).append(record)
        out.groups = {}
        for key, part in partitions.items():
            value, status = _status_of(evaluate_expr(kpi.expr, part), kpi.target)
            out.groups[key] = GroupValue(value, status)

    if (kpi.baseline is not None and kpi.target is not None
            and out.value is not None and kpi.baseline != kpi.target.value):
        out.progress = progress(out.value, kpi.baseline, kpi.target.value)
    return out
