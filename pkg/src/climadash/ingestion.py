"""Record validation, storage, and querying.

Storage is in-memory per datasource, ordered by (time-axis value, arrival),
with an append-only JSON Lines journal per datasource so a restart
reconstructs exactly the same state. Many readers / one writer per
datasource; readers get consistent snapshots.
"""

from __future__ import annotations

import bisect
import csv as csv_mod
import io
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .dsl.ast import Entity, Field, Model
from .timeutil import parse_rfc3339_ms

# reason codes for rejected fields
MISSING = "missing"
UNKNOWN_FIELD = "unknown-field"
TYPE_MISMATCH = "type-mismatch"
BAD_DATETIME = "bad-datetime"
BAD_ENUM = "bad-enum"


class UnknownDatasourceError(KeyError):
    """Request-level failure: the named datasource is not in the model."""


@dataclass(frozen=True)
class FieldError:
    field: str
    reason: str


@dataclass(frozen=True)
class Rejected:
    ordinal: int  # batch: 0-based record position; CSV: 1-based file line
    field: str
    reason: str


@dataclass
class IngestResult:
    accepted: int = 0
    rejected: list[Rejected] = field(default_factory=list)

    @property
    def submitted(self) -> int:
        return self.accepted + len(self.rejected)

    def to_jsonable(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": [
                {"ordinal": r.ordinal, "field": r.field, "reason": r.reason}
                for r in self.rejected
            ],
        }


@dataclass
class Record:
    datasource: str
    values: dict[str, object]  # field name -> typed value; datetimes are epoch-ms ints


def _check_value(f: Field, value: object) -> tuple[object | None, str | None]:
    """Coerce/validate one raw JSON value. Returns (typed value, reason code)."""
    if f.kind == "bool":
        if isinstance(value, bool):
            return value, None
        return None, TYPE_MISMATCH
    if isinstance(value, bool):
        # bool is an int subclass; never valid for non-bool fields
        return None, TYPE_MISMATCH
    if f.kind == "int":
        if isinstance(value, int):
            return value, None
        if isinstance(value, float) and value.is_integer():
            return int(value), None
        return None, TYPE_MISMATCH
    if f.kind == "float":
        if isinstance(value, (int, float)):
            return float(value), None
        return None, TYPE_MISMATCH
    if f.kind == "string":
        if isinstance(value, str):
            return value, None
        return None, TYPE_MISMATCH
    if f.kind == "enum":
        if not isinstance(value, str):
            return None, TYPE_MISMATCH
        if value not in f.enum_values:
            return None, BAD_ENUM
        return value, None
    if f.kind == "datetime":
        if not isinstance(value, str):
            return None, TYPE_MISMATCH
        try:
            return parse_rfc3339_ms(value), None
        except ValueError:
            return None, BAD_DATETIME
    raise AssertionError(f.kind)


def validate_record(entity: Entity, raw: object,
                    datasource: str = "") -> tuple[Record | None, list[FieldError]]:
    """Validate a raw JSON-shaped map against an entity schema.

    Returns (record, []) on success or (None, errors). Never raises on
    arbitrary JSON-shaped input.
    """
    if not isinstance(raw, dict):
        return None, [FieldError("", TYPE_MISMATCH)]
    errors: list[FieldError] = []
    known = {f.name for f in entity.fields}
    for key in raw:
        if not isinstance(key, str) or key not in known:
            errors.append(FieldError(str(key), UNKNOWN_FIELD))
    values: dict[str, object] = {}
    for f in entity.fields:
        value = raw.get(f.name)
        if value is None:  # absent or explicit null
            if not f.optional:
                errors.append(FieldError(f.name, MISSING))
            continue
        typed, reason = _check_value(f, value)
        if reason is not None:
            errors.append(FieldError(f.name, reason))
        else:
            values[f.name] = typed
    if errors:
        return None, errors
    return Record(datasource, values), []


def coerce_csv_cell(f: Field, text: str) -> object | None:
    """Schema-driven text -> JSON-typed conversion for one CSV cell.

    Returns None for an empty cell (treated as absent). Unconvertible text
    is passed through so validate_record reports the proper reason code.
    """
    if text == "":
        return None
    if f.kind == "int":
        try:
            return int(text)
        except ValueError:
            return text
    if f.kind == "float":
        try:
            return float(text)
        except ValueError:
            return text
    if f.kind == "bool":
        low = text.lower()
        if low == "true":
            return True
        if low == "false":
            return False
        return text
    return text  # string, enum, datetime stay textual


class _Log:
    """Per-datasource record sequence ordered by (time-axis, arrival)."""

    def __init__(self) -> None:
        self.keys: list[tuple[int, int]] = []
        self.records: list[Record] = []
        self.seq = 0

    def insert(self, t: int, record: Record) -> None:
        key = (t, self.seq)
        self.seq += 1
        pos = bisect.bisect_right(self.keys, key)
        self.keys.insert(pos, key)
        self.records.insert(pos, record)


class Store:
    """Validated record store for one model, with optional journal directory."""

    def __init__(self, model: Model, data_dir: Path | str | None = None):
        self.model = model
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self._logs: dict[str, _Log] = {d.name: _Log() for d in model.datasources}
        self._locks: dict[str, threading.Lock] = {
            d.name: threading.Lock() for d in model.datasources
        }
        self._journals: dict[str, io.TextIOWrapper] = {}
        self.replay_warnings: list[str] = []
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._replay()

    # -- internals ----------------------------------------------------------

    def _entity_for(self, datasource: str) -> Entity:
        entity = self.model.datasource_entity(datasource)
        if entity is None:
            raise UnknownDatasourceError(datasource)
        return entity

    def _time_of(self, entity: Entity, record: Record) -> int:
        tf = entity.time_field
        if tf is None:
            return 0
        return int(record.values.get(tf.name, 0))  # type: ignore[arg-type]

    def _journal_path(self, datasource: str) -> Path:
        assert self.data_dir is not None
        return self.data_dir / f"{datasource}.jsonl"

    def _journal_handle(self, datasource: str) -> io.TextIOWrapper:
        handle = self._journals.get(datasource)
        if handle is None:
            handle = open(self._journal_path(datasource), "a", encoding="utf-8")
            self._journals[datasource] = handle
        return handle

    def _replay(self) -> None:
        for ds in self.model.datasources:
            path = self._journal_path(ds.name)
            if not path.exists():
                continue
            entity = self.model.entity(ds.entity)
            if entity is None:
                continue
            log = self._logs[ds.name]
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        raw = json.loads(line)
                    except json.JSONDecodeError:
                        # tolerate a torn trailing write
                        self.replay_warnings.append(
                            f"{path.name}:{lineno}: unparseable journal line skipped")
                        continue
                    if isinstance(raw, dict):
                        raw.pop("_t", None)
                    record, errors = validate_record(entity, raw, ds.name)
                    if record is None:
                        self.replay_warnings.append(
                            f"{path.name}:{lineno}: invalid journal record skipped "
                            f"({errors[0].field}: {errors[0].reason})")
                        continue
                    log.insert(self._time_of(entity, record), record)

    def _append(self, datasource: str, entity: Entity, raw: dict,
                record: Record) -> None:
        t = self._time_of(entity, record)
        if self.data_dir is not None:
            handle = self._journal_handle(datasource)
            line = dict(raw)
            line["_t"] = t
            handle.write(json.dumps(line, ensure_ascii=False) + "\n")
            handle.flush()  # journal entry lands before the record is acknowledged
        self._logs[datasource].insert(t, record)

    # -- public API -----------------------------------------------------------

    def ingest_batch(self, datasource: str, records: list[object]) -> IngestResult:
        """Validate and append a batch; per-record acceptance, rejects never stored."""
        entity = self._entity_for(datasource)
        result = IngestResult()
        with self._locks[datasource]:
            for ordinal, raw in enumerate(records):
                record, errors = validate_record(entity, raw, datasource)
                if record is None:
                    first = errors[0]
                    result.rejected.append(Rejected(ordinal, first.field, first.reason))
                    continue
                self._append(datasource, entity, raw, record)  # type: ignore[arg-type]
                result.accepted += 1
        return result

    def ingest_csv(self, datasource: str, text: str) -> IngestResult:
        """Ingest RFC 4180 CSV with a header row naming entity fields."""
        entity = self._entity_for(datasource)
        reader = csv_mod.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            return IngestResult()
        header = [h.strip() for h in header]
        known = {f.name for f in entity.fields}
        for name in header:
            if name not in known:
                raise ValueError(f"CSV header names unknown field {name!r}")
        fields_by_name = {f.name: f for f in entity.fields}
        result = IngestResult()
        with self._locks[datasource]:
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) > len(header):
                    result.rejected.append(
                        Rejected(lineno, f"column{len(header) + 1}", UNKNOWN_FIELD))
                    continue
                raw: dict[str, object] = {}
                for name, cell in zip(header, row):
                    value = coerce_csv_cell(fields_by_name[name], cell)
                    if value is not None:
                        raw[name] = value
                record, errors = validate_record(entity, raw, datasource)
                if record is None:
                    first = errors[0]
                    result.rejected.append(Rejected(lineno, first.field, first.reason))
                    continue
                self._append(datasource, entity, raw, record)
                result.accepted += 1
        return result

    def query(self, datasource: str, from_ms: int | None = None,
              to_ms: int | None = None, limit: int | None = None) -> list[Record]:
        """Records with from < t <= to, ascending by (t, arrival).

        limit keeps the most recent records. Entities without a datetime
        field ignore the bounds and return arrival order.
        """
        entity = self._entity_for(datasource)
        if from_ms is not None and to_ms is not None and from_ms > to_ms:
            raise ValueError("query range has from > to")
        if limit is not None and limit <= 0:
            raise ValueError("limit must be positive")
        log = self._logs[datasource]
        with self._locks[datasource]:
            if entity.time_field is None:
                out = list(log.records)
            else:
                lo = 0
                if from_ms is not None:
                    lo = bisect.bisect_right(log.keys, (from_ms, float("inf")))
                hi = len(log.keys)
                if to_ms is not None:
                    hi = bisect.bisect_right(log.keys, (to_ms, float("inf")))
                out = log.records[lo:hi]
        if limit is not None and len(out) > limit:
            out = out[-limit:]
        return out

    def count(self, datasource: str) -> int:
        self._entity_for(datasource)
        with self._locks[datasource]:
            return len(self._logs[datasource].records)

    def close(self) -> None:
        for handle in self._journals.values():
            handle.close()
        self._journals.clear()
