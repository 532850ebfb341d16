// Dashboard rendering: a 12-column CSS grid mirroring server layout rects,
// widget bodies by kind, and in-widget notices for no_data/error payloads.
import { barChartSvg, formatValue, gaugeSvg, lineChartSvg } from "./charts.js";
export function renderDashboard(grid, state, callbacks) {
    grid.textContent = "";
    const dashboard = state.dashboard;
    if (!dashboard)
        return;
    if (dashboard.widgets.length === 0) {
        const hint = document.createElement("div");
        hint.className = "empty-hint";
        hint.textContent =
            "Empty dashboard: drag a source from the palette, or ask the assistant " +
                'to "add a line chart of …".';
        grid.appendChild(hint);
        return;
    }
    for (const widget of dashboard.widgets) {
        grid.appendChild(renderWidget(widget, callbacks));
    }
}
function renderWidget(widget, callbacks) {
    const el = document.createElement("article");
    el.className = `widget widget-${widget.kind}`;
    el.dataset["widgetId"] = widget.id;
    el.style.gridColumn = `${widget.layout.x + 1} / span ${widget.layout.w}`;
    el.style.gridRow = `${widget.layout.y + 1} / span ${widget.layout.h}`;
    if (widget.config.color)
        el.style.borderTopColor = widget.config.color;
    const header = document.createElement("header");
    header.draggable = true;
    header.addEventListener("dragstart", (event) => callbacks.onWidgetDragStart(widget.id, event));
    const title = document.createElement("span");
    title.className = "widget-title";
    title.textContent = widget.config.title;
    const kind = document.createElement("span");
    kind.className = "widget-kind";
    kind.textContent = widget.kind;
    const remove = document.createElement("button");
    remove.className = "widget-remove";
    remove.title = "Remove widget";
    remove.textContent = "×";
    remove.addEventListener("click", () => callbacks.onRemove(widget.id));
    header.append(title, kind, remove);
    const body = document.createElement("div");
    body.className = "widget-body";
    body.textContent = "loading…";
    const resize = document.createElement("div");
    resize.className = "widget-resize";
    resize.title = "Drag to resize";
    resize.addEventListener("pointerdown", (event) => callbacks.onResizeStart(widget.id, event));
    el.append(header, body, resize);
    return el;
}
/** Fill one widget's body from its data payload; statuses become badges. */
export function renderWidgetData(el, widget, payload) {
    const body = el.querySelector(".widget-body");
    if (!body)
        return;
    body.textContent = "";
    const color = widget.config.color || "#2a7de1";
    if (payload.type === "error") {
        body.appendChild(badge("error", payload.message));
        return;
    }
    if (payload.type === "line") {
        if (payload.points.every((p) => p.value === null || p.value === undefined)) {
            body.appendChild(badge("no data", "no data in range"));
            return;
        }
        body.innerHTML = lineChartSvg(payload.points, color);
        return;
    }
    if (payload.type === "bar") {
        if (payload.categories.length === 0) {
            body.appendChild(badge("no data", "no categories"));
            return;
        }
        body.innerHTML = barChartSvg(payload.categories, color);
        return;
    }
    if (payload.type === "table") {
        if (payload.rows.length === 0) {
            body.appendChild(badge("no data", "no rows yet"));
            return;
        }
        body.appendChild(renderTable(payload.fields, payload.rows));
        return;
    }
    // kpi payload: gauge gets the dial, stat (and anything else) the number
    if (payload.status === "no_data") {
        body.appendChild(badge("no data", "no data in window"));
        return;
    }
    if (payload.status === "error") {
        body.appendChild(badge("error", "evaluation failed"));
        return;
    }
    if (widget.kind === "gauge" && payload.value !== null) {
        body.innerHTML = gaugeSvg(payload.value, payload.target?.value ?? null, color);
    }
    const stat = document.createElement("div");
    stat.className = "stat-value";
    stat.textContent = formatValue(payload.value, payload.unit);
    const status = document.createElement("div");
    status.className = `stat-status status-${payload.status}`;
    status.textContent = payload.status.replace("_", " ");
    body.append(stat, status);
}
function badge(label, detail) {
    const el = document.createElement("div");
    el.className = `widget-badge badge-${label.replace(" ", "-")}`;
    el.textContent = label;
    el.title = detail;
    return el;
}
function renderTable(fields, rows) {
    const table = document.createElement("table");
    const head = table.createTHead().insertRow();
    for (const field of fields) {
        const th = document.createElement("th");
        th.textContent = field;
        head.appendChild(th);
    }
    const tbody = table.createTBody();
    for (const row of rows.slice(-12).reverse()) {
        const tr = tbody.insertRow();
        for (const field of fields) {
            const value = row[field];
            tr.insertCell().textContent =
                value === undefined || value === null ? "" : String(value);
        }
    }
    return table;
}
