"""Operator entry point: validate, generate, serve, ingest, evaluate, ask.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.
Every subcommand takes --json for machine-readable output. Flags beat the
CLIMADASH_DATA / CLIMADASH_CORPUS / CLIMADASH_ADDR environment variables.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import agent
from .codegen import ALL_KINDS, generate_all, write_artifacts
from .dashboards import DashboardService, default_dashboard
from .dsl import ValidationReport, load_model, parse_model, validate_model
from .dsl.ast import Model
from .ingestion import Store, UnknownDatasourceError
from .kpi import evaluate_kpi
from .server import App, serve_forever
from .timeutil import parse_rfc3339_ms

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _env_default(name: str, fallback: str | None = None) -> str | None:
    return os.environ.get(name, fallback)


def _read_model_file(path: str) -> Model:
    try:
        source = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read model {path}: {exc}", EXIT_IO)
    result = load_model(source)
    if isinstance(result, ValidationReport):
        raise CliError(f"model {path} is invalid:\n{result}", EXIT_VALIDATION)
    return result


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=True))


# -- subcommands ------------------------------------------------------------------


def cmd_check(args) -> int:
    try:
        source = Path(args.model).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read model {args.model}: {exc}", EXIT_IO)
    parsed = parse_model(source)
    if isinstance(parsed, ValidationReport):
        report = parsed
    else:
        report = validate_model(parsed)
    if args.json:
        _print_json({"valid": report.ok, "diagnostics": report.to_jsonable()})
    else:
        print(report)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_generate(args) -> int:
    model = _read_model_file(args.model)
    selection = set(ALL_KINDS)
    if args.only:
        selection = {part.strip() for part in args.only.split(",") if part.strip()}
        unknown = selection - set(ALL_KINDS)
        if unknown:
            raise CliError(f"unknown --only kinds: {', '.join(sorted(unknown))} "
                           f"(choose from {', '.join(ALL_KINDS)})", EXIT_USAGE)
        if not selection:
            raise CliError("--only selected nothing", EXIT_USAGE)
    artifacts = generate_all(model, selection)
    try:
        manifest = write_artifacts(artifacts, args.out)
    except OSError as exc:
        raise CliError(f"cannot write artifacts under {args.out}: {exc}", EXIT_IO)
    if args.json:
        _print_json({"manifest": [{"path": p, "status": s} for p, s in manifest]})
    else:
        for path, status in manifest:
            print(f"{status:9s} {path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    model = _read_model_file(args.model)
    addr = args.addr or _env_default("CLIMADASH_ADDR", "127.0.0.1:8764")
    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise CliError(f"bad --addr {addr!r}, expected HOST:PORT", EXIT_USAGE)
    data_dir = args.data or _env_default("CLIMADASH_DATA", "data")
    corpus = args.corpus or _env_default("CLIMADASH_CORPUS")
    web = args.web or _env_default("CLIMADASH_WEB")
    app = App(model, data_dir=data_dir, corpus_dir=corpus, web_dir=web)
    serve_forever(app, host, int(port_text))
    return EXIT_OK


def cmd_ingest(args) -> int:
    model = _read_model_file(args.model)
    data_dir = args.data or _env_default("CLIMADASH_DATA", "data")
    store = Store(model, data_dir)
    path = Path(args.file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO)
    try:
        if path.suffix.lower() == ".csv":
            result = store.ingest_csv(args.datasource, text)
        else:
            records = json.loads(text)
            if isinstance(records, dict) and "records" in records:
                records = records["records"]
            if not isinstance(records, list):
                raise CliError(f"{path} must hold a JSON array of records",
                               EXIT_VALIDATION)
            result = store.ingest_batch(args.datasource, records)
    except UnknownDatasourceError:
        raise CliError(f"unknown datasource {args.datasource!r}", EXIT_VALIDATION)
    except (ValueError, json.JSONDecodeError) as exc:
        raise CliError(str(exc), EXIT_VALIDATION)
    finally:
        store.close()
    if args.json:
        _print_json(result.to_jsonable())
    else:
        print(f"accepted {result.accepted}, rejected {len(result.rejected)}")
        for r in result.rejected:
            print(f"  #{r.ordinal} {r.field}: {r.reason}")
    return EXIT_OK


def cmd_kpi(args) -> int:
    model = _read_model_file(args.model)
    kpi = model.kpi(args.name)
    if kpi is None:
        raise CliError(f"no kpi {args.name!r} in model", EXIT_VALIDATION)
    at = None
    if args.at:
        try:
            at = parse_rfc3339_ms(args.at)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE)
    data_dir = args.data or _env_default("CLIMADASH_DATA", "data")
    store = Store(model, data_dir)
    try:
        value = evaluate_kpi(kpi, store, at=at)
    finally:
        store.close()
    _print_json(value.to_jsonable())
    return EXIT_OK


def cmd_ask(args) -> int:
    corpus = args.corpus or _env_default("CLIMADASH_CORPUS")
    if not corpus:
        raise CliError("no corpus: pass --corpus DIR or set CLIMADASH_CORPUS",
                       EXIT_USAGE)
    index = agent.build_index(corpus)
    results = agent.answer(args.question, index, k=args.k)
    if args.json:
        _print_json({"results": [r.to_jsonable() for r in results]})
    else:
        if not results:
            print("no matching passages")
        for r in results:
            print(f"[{r.score:.3f}] {r.passage.doc_id}#{r.passage.ordinal}")
            print(f"  {r.passage.text}")
    return EXIT_OK


def cmd_index(args) -> int:
    corpus = args.corpus or _env_default("CLIMADASH_CORPUS")
    if not corpus:
        raise CliError("no corpus: pass --corpus DIR or set CLIMADASH_CORPUS",
                       EXIT_USAGE)
    index = agent.build_index(corpus)
    try:
        agent.save_index(index, args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO)
    summary = {"passages": index.n, "out": args.out, "warnings": index.warnings}
    if args.json:
        _print_json(summary)
    else:
        print(f"indexed {index.n} passages -> {args.out}")
        for warning in index.warnings:
            print(f"  warning: {warning}")
    return EXIT_OK


def cmd_agent(args) -> int:
    model = _read_model_file(args.model)
    data_dir = args.data or _env_default("CLIMADASH_DATA", "data")
    store = Store(model, data_dir)
    dashboards = DashboardService(model, data_dir)
    try:
        try:
            dashboards.get(args.dashboard_id)
        except Exception:
            if args.dashboard_id == "default":
                dashboards.adopt(default_dashboard(model))
            else:
                raise CliError(f"no dashboard {args.dashboard_id!r}",
                               EXIT_VALIDATION)
        titles = [w.config.title
                  for w in dashboards.get(args.dashboard_id).widgets]
        cmd = agent.parse_utterance(args.utterance,
                                    agent.known_sources(model), titles)
        if isinstance(cmd, agent.NoMatch):
            if args.json:
                _print_json({"ok": False, "no_match": cmd.to_jsonable()})
            else:
                print(f"no match: {cmd.reason}")
                for s in cmd.suggestions:
                    print(f"  try: {s}")
            return EXIT_VALIDATION
        reply = agent.apply_command(cmd, args.dashboard_id,
                                    dashboards=dashboards, store=store)
    finally:
        store.close()
    if args.json:
        out = {"ok": reply.ok, "message": reply.message,
               "command": cmd.to_jsonable()}
        if reply.dashboard is not None:
            out["dashboard"] = reply.dashboard.to_jsonable()
        _print_json(out)
    else:
        print(reply.message)
    return EXIT_OK if reply.ok else EXIT_VALIDATION


# -- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="climadash",
        description="Model-driven city dashboards: validate, generate, serve, "
                    "ingest, evaluate, ask.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a model")
    p.add_argument("model")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("generate", help="generate schema/api/dashboard artifacts")
    p.add_argument("model")
    p.add_argument("--only", help="comma list from: schema,api,dashboard")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("model")
    p.add_argument("--addr", help="HOST:PORT (default 127.0.0.1:8764)")
    p.add_argument("--data", help="data directory (default ./data)")
    p.add_argument("--corpus", help="knowledge corpus directory")
    p.add_argument("--web", help="static web bundle directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("ingest", help="ingest a CSV or JSON file")
    p.add_argument("model")
    p.add_argument("datasource")
    p.add_argument("file")
    p.add_argument("--data", help="data directory (default ./data)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("kpi", help="evaluate a KPI and print it as JSON")
    p.add_argument("model")
    p.add_argument("name")
    p.add_argument("--at", help="RFC 3339 evaluation time (default: now)")
    p.add_argument("--data", help="data directory (default ./data)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_kpi)

    p = sub.add_parser("ask", help="retrieve passages for a question")
    p.add_argument("question")
    p.add_argument("--corpus", help="knowledge corpus directory")
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_ask)

    p = sub.add_parser("index", help="build and persist the retrieval index")
    p.add_argument("--corpus", help="knowledge corpus directory")
    p.add_argument("--out", default="data/index.json")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("agent", help="apply a natural-language command")
    p.add_argument("model")
    p.add_argument("dashboard_id")
    p.add_argument("utterance")
    p.add_argument("--data", help="data directory (default ./data)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_agent)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
