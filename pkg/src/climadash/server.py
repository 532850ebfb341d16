"""HTTP service tying ingestion, KPI evaluation, dashboards, and the agent
together. stdlib http.server with a small path-pattern router; JSON bodies,
UTF-8, concurrent handlers (per-dashboard mutations serialize inside
DashboardService).

Status codes: 400 validation, 404 unknown id/name, 409 version conflict,
422 geometry violation.
"""

from __future__ import annotations

import json
import mimetypes
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import agent
from .dashboards import (
    AddWidget,
    BadSourceError,
    DashboardService,
    GeometryError,
    MoveWidget,
    RecolorWidget,
    RemoveWidget,
    RenameDashboard,
    ResizeWidget,
    RetitleWidget,
    SourceRef,
    UnknownDashboardError,
    UnknownWidgetError,
    VersionConflictError,
    default_dashboard,
    widget_data,
)
from .dsl.ast import Duration, Model
from .dsl.printer import model_to_dict
from .ingestion import Store, UnknownDatasourceError
from .kpi import evaluate_kpi
from .timeutil import parse_rfc3339_ms


class ApiError(Exception):
    def __init__(self, status: int, message: str, **extra):
        super().__init__(message)
        self.status = status
        self.payload = {"error": message, **extra}


class App:
    """Shared state behind the HTTP handlers."""

    def __init__(self, model: Model, data_dir: Path | str | None = None,
                 corpus_dir: Path | str | None = None,
                 web_dir: Path | str | None = None):
        self.model = model
        self.store = Store(model, data_dir)
        self.dashboards = DashboardService(model, data_dir)
        self.web_dir = Path(web_dir) if web_dir else None
        self._index_lock = threading.Lock()
        self.index = (agent.build_index(corpus_dir)
                      if corpus_dir else agent.index_texts([]))
        try:
            self.dashboards.get("default")
        except UnknownDashboardError:
            self.dashboards.adopt(default_dashboard(model))

    def rebuild_index(self, corpus_dir: Path | str) -> None:
        new_index = agent.build_index(corpus_dir)
        with self._index_lock:
            self.index = new_index


# -- request plumbing -----------------------------------------------------------


def _int_param(query: dict, name: str) -> int | None:
    values = query.get(name)
    if not values or values[-1] == "":
        return None
    try:
        return int(values[-1])
    except ValueError:
        raise ApiError(400, f"query parameter {name!r} must be an integer")


def _at_param(query: dict) -> int | None:
    values = query.get("at")
    if not values or values[-1] == "":
        return None
    raw = values[-1]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return parse_rfc3339_ms(raw)
    except ValueError:
        raise ApiError(400, "query parameter 'at' must be epoch-ms or RFC 3339")


def _require(body: dict, key: str):
    if not isinstance(body, dict) or key not in body:
        raise ApiError(400, f"missing field {key!r} in request body")
    return body[key]


def _expected_version(body: dict) -> int:
    value = _require(body, "expected_version")
    if not isinstance(value, int) or isinstance(value, bool):
        raise ApiError(400, "expected_version must be an integer")
    return value


def _duration_field(body: dict, key: str) -> Duration | None:
    raw = body.get(key)
    if raw is None:
        return None
    try:
        return Duration.parse(str(raw))
    except ValueError:
        raise ApiError(400, f"bad duration in {key!r}: {raw!r}")


# -- handlers ---------------------------------------------------------------------


def h_ingest(app: App, match: dict, query: dict, body, raw_body: bytes,
             content_type: str):
    datasource = match["datasource"]
    try:
        if "csv" in content_type:
            text = raw_body.decode("utf-8", errors="replace")
            result = app.store.ingest_csv(datasource, text)
        else:
            records = body
            if isinstance(records, dict) and "records" in records:
                records = records["records"]
            if not isinstance(records, list):
                raise ApiError(400, "body must be a JSON array of records")
            result = app.store.ingest_batch(datasource, records)
    except UnknownDatasourceError:
        raise ApiError(404, f"unknown datasource {datasource!r}")
    except ValueError as exc:
        raise ApiError(400, str(exc))
    return 200, result.to_jsonable()


def h_data(app: App, match: dict, query: dict, **_):
    datasource = match["datasource"]
    try:
        records = app.store.query(
            datasource,
            from_ms=_int_param(query, "from"),
            to_ms=_int_param(query, "to"),
            limit=_int_param(query, "limit"),
        )
    except UnknownDatasourceError:
        raise ApiError(404, f"unknown datasource {datasource!r}")
    except ValueError as exc:
        raise ApiError(400, str(exc))
    return 200, {"datasource": datasource, "records": [r.values for r in records]}


def h_kpi(app: App, match: dict, query: dict, **_):
    kpi = app.model.kpi(match["name"])
    if kpi is None:
        raise ApiError(404, f"unknown kpi {match['name']!r}")
    value = evaluate_kpi(kpi, app.store, at=_at_param(query))
    return 200, value.to_jsonable()


def h_model(app: App, **_):
    return 200, model_to_dict(app.model)


def h_dashboards_list(app: App, **_):
    return 200, {"dashboards": [d.to_jsonable() for d in app.dashboards.list()]}


def h_dashboards_create(app: App, body=None, **_):
    name = _require(body, "name")
    if not isinstance(name, str) or not name:
        raise ApiError(400, "dashboard name must be a non-empty string")
    dashboard = app.dashboards.create(name)
    return 201, dashboard.to_jsonable()


def h_dashboard_get(app: App, match: dict, **_):
    return 200, app.dashboards.get(match["id"]).to_jsonable()


def h_dashboard_put(app: App, match: dict, body=None, **_):
    version = _expected_version(body)
    name = _require(body, "name")
    if not isinstance(name, str) or not name:
        raise ApiError(400, "dashboard name must be a non-empty string")
    updated = app.dashboards.mutate(match["id"], version, RenameDashboard(name))
    return 200, updated.to_jsonable()


def h_dashboard_delete(app: App, match: dict, **_):
    app.dashboards.delete(match["id"])
    return 200, {"deleted": match["id"]}


def h_widget_add(app: App, match: dict, body=None, **_):
    version = _expected_version(body)
    source_text = _require(body, "source")
    try:
        source = SourceRef.parse(str(source_text))
    except ValueError as exc:
        raise ApiError(400, str(exc))
    kind = body.get("kind")
    spec = AddWidget(
        source=source,
        kind=kind,
        x=body.get("x"),
        y=body.get("y"),
        w=body.get("w", 6),
        h=body.get("h", 4),
        title=body.get("title"),
        color=body.get("color"),
        window_override=_duration_field(body, "window_override"),
        group_by_override=body.get("group_by_override"),
    )
    updated = app.dashboards.mutate(match["id"], version, spec)
    return 201, {"dashboard": updated.to_jsonable(),
                 "widget": updated.widgets[-1].to_jsonable()}


def h_widget_patch(app: App, match: dict, body=None, **_):
    version = _expected_version(body)
    wid = match["wid"]
    groups = []
    if "x" in body or "y" in body:
        groups.append("move")
    if "w" in body or "h" in body:
        groups.append("resize")
    if "title" in body:
        groups.append("retitle")
    if "color" in body:
        groups.append("recolor")
    if len(groups) != 1:
        raise ApiError(400, "PATCH must carry exactly one of: x+y, w+h, title, color")
    if groups[0] == "move":
        mutation = MoveWidget(wid, _int_body(body, "x"), _int_body(body, "y"))
    elif groups[0] == "resize":
        mutation = ResizeWidget(wid, _int_body(body, "w"), _int_body(body, "h"))
    elif groups[0] == "retitle":
        mutation = RetitleWidget(wid, str(body["title"]))
    else:
        mutation = RecolorWidget(wid, str(body["color"]))
    updated = app.dashboards.mutate(match["id"], version, mutation)
    return 200, updated.to_jsonable()


def _int_body(body: dict, key: str) -> int:
    value = _require(body, key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ApiError(400, f"{key!r} must be an integer")
    return value


def h_widget_delete(app: App, match: dict, query: dict, **_):
    version = _int_param(query, "expected_version")
    if version is None:
        raise ApiError(400, "expected_version query parameter required")
    updated = app.dashboards.mutate(match["id"], version,
                                    RemoveWidget(match["wid"]))
    return 200, updated.to_jsonable()


def h_widget_data(app: App, match: dict, query: dict, **_):
    dashboard, widget = app.dashboards.find_widget(match["wid"])
    payload = widget_data(widget, app.model, app.store, at=_at_param(query))
    return 200, {"widget": widget.id, "dashboard": dashboard.id, "data": payload}


def h_agent_command(app: App, body=None, **_):
    dashboard_id = str(_require(body, "dashboard_id"))
    utterance = str(_require(body, "utterance"))
    titles = []
    try:
        titles = [w.config.title for w in app.dashboards.get(dashboard_id).widgets]
    except UnknownDashboardError:
        raise ApiError(404, f"unknown dashboard {dashboard_id!r}")
    cmd = agent.parse_utterance(utterance, agent.known_sources(app.model), titles)
    if isinstance(cmd, agent.NoMatch):
        return 200, {"ok": False, "no_match": cmd.to_jsonable()}
    reply = agent.apply_command(cmd, dashboard_id,
                                dashboards=app.dashboards, store=app.store)
    out = {
        "ok": reply.ok,
        "message": reply.message,
        "command": cmd.to_jsonable(),
    }
    if reply.dashboard is not None:
        out["dashboard"] = reply.dashboard.to_jsonable()
    if reply.kpi_value is not None:
        out["kpi_value"] = reply.kpi_value.to_jsonable()
    return 200, out


def h_agent_ask(app: App, body=None, **_):
    question = str(_require(body, "question"))
    k = body.get("k", 3)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ApiError(400, "k must be a positive integer")
    results = agent.answer(question, app.index, k=k)
    return 200, {"results": [r.to_jsonable() for r in results]}


ROUTES = [
    ("POST", "/api/v1/ingest/{datasource}", h_ingest),
    ("GET", "/api/v1/data/{datasource}", h_data),
    ("GET", "/api/v1/kpi/{name}", h_kpi),
    ("GET", "/api/v1/model", h_model),
    ("GET", "/api/v1/dashboards", h_dashboards_list),
    ("POST", "/api/v1/dashboards", h_dashboards_create),
    ("GET", "/api/v1/dashboards/{id}", h_dashboard_get),
    ("PUT", "/api/v1/dashboards/{id}", h_dashboard_put),
    ("DELETE", "/api/v1/dashboards/{id}", h_dashboard_delete),
    ("POST", "/api/v1/dashboards/{id}/widgets", h_widget_add),
    ("PATCH", "/api/v1/dashboards/{id}/widgets/{wid}", h_widget_patch),
    ("DELETE", "/api/v1/dashboards/{id}/widgets/{wid}", h_widget_delete),
    ("GET", "/api/v1/widgets/{wid}/data", h_widget_data),
    ("POST", "/api/v1/agent/command", h_agent_command),
    ("POST", "/api/v1/agent/ask", h_agent_ask),
]


def _compile(pattern: str) -> re.Pattern:
    regex = re.sub(r"\{(\w+)\}", r"(?P<\1>[^/]+)", pattern)
    return re.compile(f"^{regex}$")


_COMPILED = [(method, _compile(pattern), handler)
             for method, pattern, handler in ROUTES]


class _Handler(BaseHTTPRequestHandler):
    app: App
    server_version = "climadash"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        path = parsed.path
        query = parse_qs(parsed.query)
        if method == "GET" and not path.startswith("/api/"):
            self._serve_static(path)
            return
        raw_body = b""
        length = int(self.headers.get("Content-Length") or 0)
        if length:
            raw_body = self.rfile.read(length)
        content_type = self.headers.get("Content-Type", "")
        try:
            for route_method, regex, handler in _COMPILED:
                if route_method != method:
                    continue
                m = regex.match(path)
                if m is None:
                    continue
                body = None
                if raw_body and "csv" not in content_type:
                    try:
                        body = json.loads(raw_body)
                    except json.JSONDecodeError:
                        raise ApiError(400, "request body is not valid JSON")
                status, payload = handler(
                    self.app, match=m.groupdict(), query=query, body=body,
                    raw_body=raw_body, content_type=content_type)
                self._send(status, payload)
                return
            raise ApiError(404, f"no route for {method} {path}")
        except ApiError as exc:
            self._send(exc.status, exc.payload)
        except VersionConflictError as exc:
            self._send(409, {"error": str(exc),
                             "dashboard": exc.current.to_jsonable()})
        except GeometryError as exc:
            self._send(422, {"error": str(exc)})
        except (UnknownDashboardError, UnknownWidgetError) as exc:
            self._send(404, {"error": str(exc)})
        except BadSourceError as exc:
            self._send(400, {"error": str(exc)})
        except Exception as exc:  # pragma: no cover - last-resort guard
            self._send(500, {"error": f"internal error: {exc.__class__.__name__}"})

    def _send(self, status: int, payload: dict) -> None:
        data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _serve_static(self, path: str) -> None:
        web_dir = self.app.web_dir
        if web_dir is None or not web_dir.is_dir():
            body = (b"climadash service is running; "
                    b"no web bundle configured (start serve with --web DIR)")
            self.send_response(200)
            self.send_header("Content-Type", "text/plain; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        rel = path.lstrip("/") or "index.html"
        target = (web_dir / rel).resolve()
        if not str(target).startswith(str(web_dir.resolve())) or not target.is_file():
            if (web_dir / "index.html").is_file() and "." not in rel:
                target = web_dir / "index.html"  # SPA fallback
            else:
                self._send(404, {"error": f"no such file {rel!r}"})
                return
        data = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_PATCH(self):
        self._dispatch("PATCH")

    def do_DELETE(self):
        self._dispatch("DELETE")


def make_server(app: App, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    """Bind a server for the app; port 0 picks an ephemeral port."""
    handler = type("BoundHandler", (_Handler,), {"app": app})
    httpd = ThreadingHTTPServer((host, port), handler)
    httpd.daemon_threads = True
    return httpd


def serve_forever(app: App, host: str, port: int) -> None:
    httpd = make_server(app, host, port)
    actual_host, actual_port = httpd.server_address[:2]
    print(f"climadash serving on http://{actual_host}:{actual_port}/", flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
        app.store.close()
