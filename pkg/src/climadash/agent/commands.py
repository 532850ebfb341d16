"""Apply parsed agent commands to a dashboard and phrase the outcome."""

from __future__ import annotations

from dataclasses import dataclass

from ..dashboards import (
    AddWidget,
    Dashboard,
    DashboardError,
    DashboardService,
    MoveWidget,
    RecolorWidget,
    RemoveWidget,
    ResizeWidget,
    RetitleWidget,
    SourceRef,
    Widget,
)
from ..ingestion import Store
from ..kpi import (
    STATUS_ERROR,
    STATUS_NO_DATA,
    STATUS_OFF_TRACK,
    STATUS_ON_TRACK,
    KpiValue,
    evaluate_kpi,
)
from .grammar import AgentCommand

_UNIT_WORDS = {"m": "minute", "h": "hour", "d": "day", "w": "week"}


@dataclass
class AgentReply:
    ok: bool
    message: str
    dashboard: Dashboard | None = None
    kpi_value: KpiValue | None = None


def _window_phrase(window) -> str:
    word = _UNIT_WORDS[window.unit]
    if window.magnitude == 1:
        return f"in the last {word}"
    return f"in the last {window.magnitude} {word}s"


def verbalize_kpi(value: KpiValue) -> str:
    """One sentence for a KPI value, e.g. "avg_pm25 is 9.8 ug/m3, on track"."""
    if value.status == STATUS_NO_DATA:
        if value.window is not None:
            return f"{value.kpi}: no data {_window_phrase(value.window)}"
        return f"{value.kpi}: no data"
    if value.status == STATUS_ERROR:
        return f"{value.kpi}: could not be evaluated"
    amount = _format_value(value.value)
    text = f"{value.kpi} is {amount}"
    if value.unit:
        text += f" {value.unit}"
    if value.status == STATUS_ON_TRACK:
        text += ", on track"
    elif value.status == STATUS_OFF_TRACK:
        text += ", off track"
    return text


def _format_value(value: float | None) -> str:
    if value is None:
        return "unknown"
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return f"{value:.4g}"


def _resolve_widget(dashboard: Dashboard, ref: dict) -> Widget | None:
    if "index" in ref:
        index = ref["index"]
        if 1 <= index <= len(dashboard.widgets):
            return dashboard.widgets[index - 1]
        return None
    title = ref.get("title", "").lower()
    for widget in dashboard.widgets:
        if widget.config.title.lower() == title:
            return widget
    return None


def _describe_ref(ref: dict) -> str:
    if "index" in ref:
        return f"widget {ref['index']}"
    return f"widget \"{ref.get('title', '')}\""


def apply_command(cmd: AgentCommand, dashboard_id: str, *,
                  dashboards: DashboardService, store: Store,
                  at: int | None = None) -> AgentReply:
    """Apply one command against a dashboard; never raises for user errors."""
    model = dashboards.model
    try:
        dashboard = dashboards.get(dashboard_id)
    except DashboardError as exc:
        return AgentReply(False, str(exc))

    if cmd.intent == "show_value":
        source = SourceRef.parse(cmd.slots["source"])
        if source.kind == "kpi":
            kpi = model.kpi(source.name)
            if kpi is None:
                return AgentReply(False, f"no kpi named {source.name}")
            value = evaluate_kpi(kpi, store, at=at,
                                 window=cmd.slots.get("window"),
                                 group_by=cmd.slots.get("group_by"))
            return AgentReply(True, verbalize_kpi(value), kpi_value=value)
        count = store.count(source.name)
        return AgentReply(True, f"{source.name} has {count} record"
                                f"{'s' if count != 1 else ''}")

    version = dashboard.version
    try:
        if cmd.intent == "add_widget":
            source = SourceRef.parse(cmd.slots["source"])
            spec = AddWidget(
                source=source,
                kind=cmd.slots.get("kind"),
                window_override=cmd.slots.get("window"),
                group_by_override=cmd.slots.get("group_by"),
            )
            updated = dashboards.mutate(dashboard_id, version, spec)
            widget = updated.widgets[-1]
            return AgentReply(
                True,
                f'added {widget.kind} widget "{widget.config.title}" at '
                f"({widget.layout.x}, {widget.layout.y})",
                dashboard=updated)

        ref = cmd.slots["widget_ref"]
        widget = _resolve_widget(dashboard, ref)
        if widget is None:
            return AgentReply(False, f"no {_describe_ref(ref)}")

        if cmd.intent == "remove_widget":
            updated = dashboards.mutate(dashboard_id, version,
                                        RemoveWidget(widget.id))
            return AgentReply(True, f'removed widget "{widget.config.title}"',
                              dashboard=updated)
        if cmd.intent == "move":
            updated = dashboards.mutate(
                dashboard_id, version,
                MoveWidget(widget.id, cmd.slots["x"], cmd.slots["y"]))
            return AgentReply(
                True, f'moved widget "{widget.config.title}" to '
                      f"({cmd.slots['x']}, {cmd.slots['y']})",
                dashboard=updated)
        if cmd.intent == "resize":
            updated = dashboards.mutate(
                dashboard_id, version,
                ResizeWidget(widget.id, cmd.slots["w"], cmd.slots["h"]))
            return AgentReply(
                True, f'resized widget "{widget.config.title}" to '
                      f"{cmd.slots['w']}x{cmd.slots['h']}",
                dashboard=updated)
        if cmd.intent == "retitle":
            updated = dashboards.mutate(
                dashboard_id, version,
                RetitleWidget(widget.id, cmd.slots["title"]))
            return AgentReply(
                True, f'renamed widget to "{cmd.slots["title"]}"',
                dashboard=updated)
        if cmd.intent == "recolor":
            updated = dashboards.mutate(
                dashboard_id, version,
                RecolorWidget(widget.id, cmd.slots["color"]))
            return AgentReply(
                True, f'set widget "{widget.config.title}" color to '
                      f"{cmd.slots['color']}",
                dashboard=updated)
    except DashboardError as exc:
        return AgentReply(False, f"could not apply the change: {exc}")
    return AgentReply(False, f"unsupported command {cmd.intent!r}")
