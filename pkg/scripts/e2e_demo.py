#!/usr/bin/env python3
"""Desk-scale end-to-end run against a live service.

Generates artifacts from a model, starts the HTTP service, ingests
synthetic records over CSV and JSON, evaluates a windowed KPI at a fixed
timestamp (checked against an independent naive computation), and creates
a widget through one agent command. Prints a JSON summary.

Usage: python scripts/e2e_demo.py [model.cbm] [--records N] [--out DIR]
"""

from __future__ import annotations

import argparse
import json
import math
import shutil
import socket
import subprocess
import sys
import tempfile
import time
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

import requests  # noqa: E402

DAY = 86_400_000
AT_TEXT = "2024-07-01T00:00:00Z"
AT_MS = 1719792000000


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def wait_port(port: int, proc, timeout: float = 15.0) -> None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if proc.poll() is not None:
            raise RuntimeError("serve exited early: "
                               + proc.stdout.read().decode(errors="replace"))
        with socket.socket() as sock:
            sock.settimeout(0.2)
            try:
                sock.connect(("127.0.0.1", port))
                return
            except OSError:
                time.sleep(0.02)
    raise TimeoutError("service never came up")


def rfc3339(ms: int) -> str:
    from datetime import datetime, timezone
    return datetime.fromtimestamp(ms / 1000, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ")


def synthetic_rows(n: int) -> list[tuple[str, int, float]]:
    rows = []
    for i in range(n):
        t = AT_MS - (i % 45 + 1) * DAY // 2  # spread over ~22 days back
        rows.append((f"S{i % 7}", t, round(5.0 + (i * 37 % 200) / 10.0, 1)))
    return rows


def main(argv: list[str] | None = None) -> dict:
    parser = argparse.ArgumentParser()
    parser.add_argument("model", nargs="?",
                        default=str(REPO / "models" / "air_quality.cbm"))
    parser.add_argument("--records", type=int, default=1000)
    parser.add_argument("--out", help="work dir (default: a fresh temp dir)")
    args = parser.parse_args(argv)

    started = time.monotonic()
    work = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="climadash-e2e-"))
    work.mkdir(parents=True, exist_ok=True)
    summary: dict = {"work_dir": str(work)}

    # 1. generate artifacts
    gen = subprocess.run(
        [sys.executable, "-m", "climadash.cli", "generate", args.model,
         "--out", str(work), "--json"],
        capture_output=True, cwd=str(REPO))
    if gen.returncode != 0:
        raise RuntimeError(f"generate failed: {gen.stderr.decode()}")
    summary["generated"] = [m["path"] for m in
                            json.loads(gen.stdout)["manifest"]]

    # 2. serve
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "climadash.cli", "serve", args.model,
         "--addr", f"127.0.0.1:{port}", "--data", str(work / "data")],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, cwd=str(REPO))
    base = f"http://127.0.0.1:{port}"
    try:
        wait_port(port, proc)
        session = requests.Session()

        # 3. ingest half via CSV, half via JSON
        rows = synthetic_rows(args.records)
        half = len(rows) // 2
        csv_lines = ["station,measured_at,pm25"]
        csv_lines += [f"{s},{rfc3339(t)},{v}" for s, t, v in rows[:half]]
        r = session.post(f"{base}/api/v1/ingest/air_quality",
                         data="\n".join(csv_lines).encode(),
                         headers={"Content-Type": "text/csv"})
        r.raise_for_status()
        accepted = r.json()["accepted"]
        payload = [{"station": s, "measured_at": rfc3339(t), "pm25": v}
                   for s, t, v in rows[half:]]
        r = session.post(f"{base}/api/v1/ingest/air_quality", json=payload)
        r.raise_for_status()
        accepted += r.json()["accepted"]
        summary["ingested"] = accepted
        if accepted != len(rows):
            raise RuntimeError(f"expected {len(rows)} accepted, got {accepted}")

        # 4. windowed KPI at a fixed time, cross-checked naively
        r = session.get(f"{base}/api/v1/kpi/avg_pm25", params={"at": AT_TEXT})
        r.raise_for_status()
        kpi = r.json()
        window_lo = AT_MS - 30 * DAY
        values = [v for _, t, v in rows if window_lo < t <= AT_MS]
        total = 0.0
        for v in values:
            total += v
        expected = total / len(values)
        if not math.isclose(kpi["value"], expected, rel_tol=1e-9):
            raise RuntimeError(f"kpi mismatch: {kpi['value']} vs {expected}")
        summary["kpi"] = kpi

        # 5. one agent command creates a widget
        r = session.post(f"{base}/api/v1/agent/command", json={
            "dashboard_id": "default",
            "utterance": "add a line chart of avg pm25 for the last 7 days"})
        r.raise_for_status()
        body = r.json()
        if not body["ok"]:
            raise RuntimeError(f"agent command failed: {body}")
        kinds = [w["kind"] for w in body["dashboard"]["widgets"]]
        if "line" not in kinds:
            raise RuntimeError(f"no line widget created: {kinds}")
        summary["agent"] = body["message"]
    finally:
        proc.terminate()
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
        if not args.out:
            shutil.rmtree(work, ignore_errors=True)

    summary["elapsed_s"] = round(time.monotonic() - started, 3)
    return summary


if __name__ == "__main__":
    print(json.dumps(main(), indent=2))
