"""Versioned dashboards: widget auto-configuration, first-fit placement,
optimistic-concurrency mutations, and widget data payloads.

Grid is 12 columns wide and grows downward without bound; widgets are at
least 2x2 and never overlap. Mutations carry an expected version and are
rejected wholesale on any mismatch or geometry violation.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from .dsl.ast import Duration, KpiDef, Model
from .ingestion import Store, UnknownDatasourceError
from .kpi import STATUS_NO_DATA, KpiValue, evaluate_kpi
from .timeutil import now_ms

GRID_COLUMNS = 12
MIN_SIZE = 2
DEFAULT_W = 6
DEFAULT_H = 4
TABLE_ROW_LIMIT = 100
LINE_WINDOW_SAMPLES = 12  # points on a KPI line: the N most recent adjacent windows

WIDGET_KINDS = ("line", "bar", "gauge", "stat", "table")


class DashboardError(Exception):
    """Base for mutation failures; subclasses map to HTTP statuses."""


class UnknownDashboardError(DashboardError):
    pass


class UnknownWidgetError(DashboardError):
    pass


class VersionConflictError(DashboardError):
    def __init__(self, message: str, current: "Dashboard"):
        super().__init__(message)
        self.current = current


class GeometryError(DashboardError):
    pass


class BadSourceError(DashboardError):
    pass


@dataclass(frozen=True)
class SourceRef:
    kind: str  # "datasource" | "kpi"
    name: str

    def __str__(self) -> str:
        return f"{self.kind}:{self.name}"

    @classmethod
    def parse(cls, text: str) -> "SourceRef":
        kind, sep, name = text.partition(":")
        if not sep or kind not in ("datasource", "kpi") or not name:
            raise ValueError(f"bad source reference: {text!r}")
        return cls(kind, name)

    def resolve(self, model: Model) -> bool:
        if self.kind == "kpi":
            return model.kpi(self.name) is not None
        return model.datasource(self.name) is not None


@dataclass(frozen=True)
class Layout:
    x: int
    y: int
    w: int
    h: int

    def overlaps(self, other: "Layout") -> bool:
        return (self.x < other.x + other.w and other.x < self.x + self.w
                and self.y < other.y + other.h and other.y < self.y + self.h)


@dataclass(frozen=True)
class WidgetConfig:
    title: str = ""
    color: str | None = None
    window_override: Duration | None = None
    group_by_override: str | None = None


@dataclass(frozen=True)
class Widget:
    id: str
    kind: str
    source: SourceRef
    layout: Layout
    config: WidgetConfig

    def to_jsonable(self) -> dict:
        config: dict = {"title": self.config.title}
        if self.config.color is not None:
            config["color"] = self.config.color
        if self.config.window_override is not None:
            config["window_override"] = str(self.config.window_override)
        if self.config.group_by_override is not None:
            config["group_by_override"] = self.config.group_by_override
        return {
            "id": self.id,
            "kind": self.kind,
            "source": str(self.source),
            "layout": {"x": self.layout.x, "y": self.layout.y,
                       "w": self.layout.w, "h": self.layout.h},
            "config": config,
        }


@dataclass(frozen=True)
class Dashboard:
    id: str
    name: str
    version: int
    widgets: tuple[Widget, ...] = ()

    def widget(self, widget_id: str) -> Widget | None:
        for w in self.widgets:
            if w.id == widget_id:
                return w
        return None

    def to_jsonable(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "version": self.version,
            "widgets": [w.to_jsonable() for w in self.widgets],
        }


def widget_from_jsonable(doc: dict) -> Widget:
    config = doc.get("config", {})
    override = config.get("window_override")
    return Widget(
        id=doc["id"],
        kind=doc["kind"],
        source=SourceRef.parse(doc["source"]),
        layout=Layout(doc["layout"]["x"], doc["layout"]["y"],
                      doc["layout"]["w"], doc["layout"]["h"]),
        config=WidgetConfig(
            title=config.get("title", ""),
            color=config.get("color"),
            window_override=Duration.parse(override) if override else None,
            group_by_override=config.get("group_by_override"),
        ),
    )


def dashboard_from_jsonable(doc: dict) -> Dashboard:
    return Dashboard(
        id=doc["id"],
        name=doc["name"],
        version=doc["version"],
        widgets=tuple(widget_from_jsonable(w) for w in doc["widgets"]),
    )


# -- auto-configuration -------------------------------------------------------


@dataclass(frozen=True)
class AutoConfig:
    kind: str
    value_field: str | None = None     # numeric field a chart plots
    category_field: str | None = None  # bar-chart category


def auto_configure(source: SourceRef, model: Model) -> AutoConfig:
    """Pick a widget kind from the source's schema; first matching rule wins."""
    if source.kind == "kpi":
        kpi = model.kpi(source.name)
        if kpi is None:
            raise BadSourceError(f"unknown kpi {source.name!r}")
        if kpi.window is not None and kpi.target is None:
            return AutoConfig("line")
        if kpi.target is not None:
            return AutoConfig("gauge")
        return AutoConfig("stat")
    entity = model.datasource_entity(source.name)
    if entity is None:
        raise BadSourceError(f"unknown datasource {source.name!r}")
    numeric = entity.numeric_fields()
    if entity.time_field is not None and numeric:
        return AutoConfig("line", value_field=numeric[0].name)
    categories = entity.category_fields()
    if categories and numeric:
        return AutoConfig("bar", value_field=numeric[0].name,
                          category_field=categories[0].name)
    return AutoConfig("table")


def auto_place(existing: list[Layout], w: int, h: int) -> tuple[int, int]:
    """First-fit: scan rows top to bottom, columns left to right."""
    if not (MIN_SIZE <= w <= GRID_COLUMNS) or h < MIN_SIZE:
        raise GeometryError(f"bad widget size {w}x{h}")
    max_y = max((r.y + r.h for r in existing), default=0)
    for y in range(max_y + 1):
        for x in range(GRID_COLUMNS - w + 1):
            candidate = Layout(x, y, w, h)
            if not any(candidate.overlaps(r) for r in existing):
                return x, y
    return 0, max_y  # unreachable: the row below everything always fits


def _check_geometry(layout: Layout, others: list[Layout]) -> None:
    if layout.w < MIN_SIZE or layout.h < MIN_SIZE:
        raise GeometryError(f"widget smaller than {MIN_SIZE}x{MIN_SIZE}")
    if layout.x < 0 or layout.y < 0 or layout.x + layout.w > GRID_COLUMNS:
        raise GeometryError("widget outside the 12-column grid")
    for other in others:
        if layout.overlaps(other):
            raise GeometryError("widget overlaps an existing widget")


# -- mutations ----------------------------------------------------------------


@dataclass(frozen=True)
class AddWidget:
    source: SourceRef
    kind: str | None = None       # None -> auto_configure
    x: int | None = None          # None -> auto_place
    y: int | None = None
    w: int = DEFAULT_W
    h: int = DEFAULT_H
    title: str | None = None
    color: str | None = None
    window_override: Duration | None = None
    group_by_override: str | None = None


@dataclass(frozen=True)
class RemoveWidget:
    widget_id: str


@dataclass(frozen=True)
class MoveWidget:
    widget_id: str
    x: int
    y: int


@dataclass(frozen=True)
class ResizeWidget:
    widget_id: str
    w: int
    h: int


@dataclass(frozen=True)
class RetitleWidget:
    widget_id: str
    title: str


@dataclass(frozen=True)
class RecolorWidget:
    widget_id: str
    color: str


@dataclass(frozen=True)
class RenameDashboard:
    name: str


Mutation = (AddWidget | RemoveWidget | MoveWidget | ResizeWidget
            | RetitleWidget | RecolorWidget | RenameDashboard)


def default_title(source: SourceRef) -> str:
    return source.name.replace("_", " ")


def default_dashboard(model: Model, dashboard_id: str = "default",
                      name: str = "Default") -> Dashboard:
    """Model-derived starter dashboard: KPI widgets first, then one table
    per datasource, all auto-placed."""
    widgets: list[Widget] = []
    seq = 1
    for kpi in model.kpis:
        source = SourceRef("kpi", kpi.name)
        auto = auto_configure(source, model)
        x, y = auto_place([w.layout for w in widgets], DEFAULT_W, DEFAULT_H)
        widgets.append(Widget(f"{dashboard_id}-{seq}", auto.kind, source,
                              Layout(x, y, DEFAULT_W, DEFAULT_H),
                              WidgetConfig(title=default_title(source))))
        seq += 1
    for ds in model.datasources:
        source = SourceRef("datasource", ds.name)
        x, y = auto_place([w.layout for w in widgets], DEFAULT_W, DEFAULT_H)
        widgets.append(Widget(f"{dashboard_id}-{seq}", "table", source,
                              Layout(x, y, DEFAULT_W, DEFAULT_H),
                              WidgetConfig(title=default_title(source))))
        seq += 1
    return Dashboard(dashboard_id, name, 1, tuple(widgets))


_ID_SUFFIX = re.compile(r"-(\d+)$")


class DashboardService:
    """In-memory dashboard store with JSON persistence and single-writer
    mutations per service (desk scale)."""

    def __init__(self, model: Model, data_dir: Path | str | None = None):
        self.model = model
        self.dir = Path(data_dir) / "dashboards" if data_dir is not None else None
        self._dashboards: dict[str, Dashboard] = {}
        self._widget_seq: dict[str, int] = {}
        self._lock = threading.RLock()
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
            for path in sorted(self.dir.glob("*.json")):
                doc = json.loads(path.read_text(encoding="utf-8"))
                dashboard = dashboard_from_jsonable(doc)
                self._dashboards[dashboard.id] = dashboard
                self._widget_seq[dashboard.id] = doc.get(
                    "widget_seq", _max_widget_seq(dashboard))

    # -- persistence -----------------------------------------------------------

    def _persist(self, dashboard: Dashboard) -> None:
        if self.dir is None:
            return
        doc = dashboard.to_jsonable()
        doc["widget_seq"] = self._widget_seq.get(dashboard.id, 0)
        path = self.dir / f"{dashboard.id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n",
                       encoding="utf-8")
        tmp.replace(path)

    # -- CRUD -------------------------------------------------------------------

    def list(self) -> list[Dashboard]:
        with self._lock:
            return [self._dashboards[k] for k in sorted(self._dashboards)]

    def get(self, dashboard_id: str) -> Dashboard:
        with self._lock:
            dashboard = self._dashboards.get(dashboard_id)
        if dashboard is None:
            raise UnknownDashboardError(f"no dashboard {dashboard_id!r}")
        return dashboard

    def create(self, name: str, dashboard_id: str | None = None) -> Dashboard:
        with self._lock:
            if dashboard_id is None:
                n = 1
                while f"d{n}" in self._dashboards:
                    n += 1
                dashboard_id = f"d{n}"
            elif dashboard_id in self._dashboards:
                raise ValueError(f"dashboard {dashboard_id!r} already exists")
            dashboard = Dashboard(dashboard_id, name, 1)
            self._dashboards[dashboard_id] = dashboard
            self._widget_seq[dashboard_id] = 0
            self._persist(dashboard)
            return dashboard

    def adopt(self, dashboard: Dashboard) -> None:
        """Register a prebuilt dashboard (e.g. the model-derived default)."""
        with self._lock:
            self._dashboards[dashboard.id] = dashboard
            self._widget_seq[dashboard.id] = _max_widget_seq(dashboard)
            self._persist(dashboard)

    def delete(self, dashboard_id: str) -> None:
        with self._lock:
            if dashboard_id not in self._dashboards:
                raise UnknownDashboardError(f"no dashboard {dashboard_id!r}")
            del self._dashboards[dashboard_id]
            self._widget_seq.pop(dashboard_id, None)
            if self.dir is not None:
                path = self.dir / f"{dashboard_id}.json"
                if path.exists():
                    path.unlink()

    def find_widget(self, widget_id: str) -> tuple[Dashboard, Widget]:
        with self._lock:
            for key in sorted(self._dashboards):
                widget = self._dashboards[key].widget(widget_id)
                if widget is not None:
                    return self._dashboards[key], widget
        raise UnknownWidgetError(f"no widget {widget_id!r}")

    # -- mutation ---------------------------------------------------------------

    def mutate(self, dashboard_id: str, expected_version: int,
               mutation: Mutation) -> Dashboard:
        """Apply one mutation atomically; version bumps by exactly 1."""
        with self._lock:
            dashboard = self.get(dashboard_id)
            if dashboard.version != expected_version:
                raise VersionConflictError(
                    f"expected version {expected_version}, "
                    f"dashboard is at {dashboard.version}", dashboard)
            updated = self._apply(dashboard, mutation)
            updated = replace(updated, version=dashboard.version + 1)
            self._dashboards[dashboard_id] = updated
            self._persist(updated)
            return updated

    def _apply(self, dashboard: Dashboard, mutation: Mutation) -> Dashboard:
        if isinstance(mutation, AddWidget):
            return self._add_widget(dashboard, mutation)
        if isinstance(mutation, RenameDashboard):
            return replace(dashboard, name=mutation.name)
        if isinstance(mutation, RemoveWidget):
            widget = self._require_widget(dashboard, mutation.widget_id)
            return replace(dashboard, widgets=tuple(
                w for w in dashboard.widgets if w.id != widget.id))

        widget = self._require_widget(dashboard, mutation.widget_id)
        if isinstance(mutation, MoveWidget):
            layout = replace(widget.layout, x=mutation.x, y=mutation.y)
            return self._relayout(dashboard, widget, layout)
        if isinstance(mutation, ResizeWidget):
            layout = replace(widget.layout, w=mutation.w, h=mutation.h)
            return self._relayout(dashboard, widget, layout)
        if isinstance(mutation, RetitleWidget):
            config = replace(widget.config, title=mutation.title)
            return self._swap(dashboard, replace(widget, config=config))
        if isinstance(mutation, RecolorWidget):
            config = replace(widget.config, color=mutation.color)
            return self._swap(dashboard, replace(widget, config=config))
        raise TypeError(f"unknown mutation {mutation!r}")

    def _require_widget(self, dashboard: Dashboard, widget_id: str) -> Widget:
        widget = dashboard.widget(widget_id)
        if widget is None:
            raise UnknownWidgetError(f"no widget {widget_id!r}")
        return widget

    def _relayout(self, dashboard: Dashboard, widget: Widget,
                  layout: Layout) -> Dashboard:
        others = [w.layout for w in dashboard.widgets if w.id != widget.id]
        _check_geometry(layout, others)
        return self._swap(dashboard, replace(widget, layout=layout))

    def _swap(self, dashboard: Dashboard, widget: Widget) -> Dashboard:
        return replace(dashboard, widgets=tuple(
            widget if w.id == widget.id else w for w in dashboard.widgets))

    def _add_widget(self, dashboard: Dashboard, spec: AddWidget) -> Dashboard:
        if not spec.source.resolve(self.model):
            raise BadSourceError(f"source {spec.source} does not resolve")
        kind = spec.kind
        if kind is None:
            kind = auto_configure(spec.source, self.model).kind
        elif kind not in WIDGET_KINDS:
            raise BadSourceError(f"unknown widget kind {kind!r}")
        existing = [w.layout for w in dashboard.widgets]
        if spec.x is None or spec.y is None:
            x, y = auto_place(existing, spec.w, spec.h)
        else:
            x, y = spec.x, spec.y
        layout = Layout(x, y, spec.w, spec.h)
        _check_geometry(layout, existing)
        seq = self._widget_seq.get(dashboard.id, _max_widget_seq(dashboard)) + 1
        self._widget_seq[dashboard.id] = seq
        widget = Widget(
            id=f"{dashboard.id}-{seq}",
            kind=kind,
            source=spec.source,
            layout=layout,
            config=WidgetConfig(
                title=spec.title if spec.title is not None
                else default_title(spec.source),
                color=spec.color,
                window_override=spec.window_override,
                group_by_override=spec.group_by_override,
            ),
        )
        return replace(dashboard, widgets=dashboard.widgets + (widget,))


def _max_widget_seq(dashboard: Dashboard) -> int:
    best = 0
    for widget in dashboard.widgets:
        m = _ID_SUFFIX.search(widget.id)
        if m:
            best = max(best, int(m.group(1)))
    return best


# -- widget data ---------------------------------------------------------------


def widget_data(widget: Widget, model: Model, store: Store,
                at: int | None = None) -> dict:
    """Data payload for one widget. Statuses travel in the payload; this
    never raises for empty or erroring sources."""
    end = at if at is not None else now_ms()
    if widget.source.kind == "kpi":
        return _kpi_payload(widget, model, store, end)
    return _datasource_payload(widget, model, store, end)


def _widget_kpi(widget: Widget, model: Model) -> KpiDef | None:
    return model.kpi(widget.source.name)


def _kpi_payload(widget: Widget, model: Model, store: Store, end: int) -> dict:
    kpi = _widget_kpi(widget, model)
    if kpi is None:
        return {"type": "error", "message": f"unknown kpi {widget.source.name!r}"}
    override = widget.config.window_override
    group_override = widget.config.group_by_override
    if widget.kind == "line":
        window = override if override is not None else kpi.window
        if window is None:
            value = evaluate_kpi(kpi, store, at=end, group_by=group_override)
            return {"type": "line", "points": [
                {"t": end, "value": value.value, "status": value.status}]}
        points = []
        for i in range(LINE_WINDOW_SAMPLES - 1, -1, -1):
            sample_end = end - i * window.ms
            value = evaluate_kpi(kpi, store, at=sample_end, window=window,
                                 group_by=group_override)
            points.append({"t": sample_end, "value": value.value,
                           "status": value.status})
        return {"type": "line", "points": points}
    if widget.kind == "bar":
        value = evaluate_kpi(kpi, store, at=end, window=override,
                             group_by=group_override)
        categories = []
        if value.groups:
            for key in sorted(value.groups):
                group = value.groups[key]
                categories.append({"key": key, "value": group.value,
                                   "status": group.status})
        return {"type": "bar", "categories": categories, "status": value.status}
    # gauge, stat, table on a KPI all reduce to the evaluated value
    value = evaluate_kpi(kpi, store, at=end, window=override,
                         group_by=group_override)
    payload = value.to_jsonable()
    payload["type"] = "kpi"
    if kpi.target is not None:
        payload["target"] = {"cmp": kpi.target.cmp, "value": kpi.target.value}
    return payload


def _datasource_payload(widget: Widget, model: Model, store: Store,
                        end: int) -> dict:
    entity = model.datasource_entity(widget.source.name)
    if entity is None:
        return {"type": "error",
                "message": f"unknown datasource {widget.source.name!r}"}
    override = widget.config.window_override
    from_ms = end - override.ms if override is not None else None
    try:
        if widget.kind == "line":
            value_field = None
            numeric = entity.numeric_fields()
            if numeric:
                value_field = numeric[0].name
            tf = entity.time_field
            records = store.query(widget.source.name, from_ms=from_ms, to_ms=end)
            points = []
            for r in records:
                t = int(r.values.get(tf.name, 0)) if tf else 0
                v = r.values.get(value_field) if value_field else None
                points.append({"t": t, "value": v})
            return {"type": "line", "points": points, "field": value_field}
        if widget.kind == "bar":
            categories_fields = entity.category_fields()
            numeric = entity.numeric_fields()
            if not categories_fields or not numeric:
                return {"type": "bar", "categories": [],
                        "status": STATUS_NO_DATA}
            cat, val = categories_fields[0].name, numeric[0].name
            sums: dict[str, list[float]] = {}
            for r in store.query(widget.source.name, from_ms=from_ms, to_ms=end):
                key = str(r.values.get(cat, ""))
                if val in r.values:
                    sums.setdefault(key, []).append(float(r.values[val]))  # type: ignore[arg-type]
            categories = [
                {"key": key, "value": sum(vs) / len(vs), "status": "ok"}
                for key, vs in sorted(sums.items())
            ]
            return {"type": "bar", "categories": categories,
                    "status": "ok" if categories else STATUS_NO_DATA}
        if widget.kind in ("gauge", "stat"):
            records = store.query(widget.source.name, from_ms=from_ms, to_ms=end)
            return {"type": "kpi", "kpi": widget.source.name,
                    "value": float(len(records)), "unit": "records",
                    "window_end": end, "window": str(override) if override else None,
                    "status": "ok" if records else STATUS_NO_DATA}
        # table
        records = store.query(widget.source.name, limit=TABLE_ROW_LIMIT)
        return {
            "type": "table",
            "fields": [f.name for f in entity.fields],
            "rows": [r.values for r in records],
        }
    except UnknownDatasourceError:
        return {"type": "error",
                "message": f"datasource {widget.source.name!r} not in store"}
