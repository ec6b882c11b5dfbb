import csv
import json
import re
from datetime import datetime, timezone
from pathlib import Path

from tiletensor.settings import get_run_log_path

CSV_COLUMNS = (
    "x",
    "y",
    "z",
    "Bx",
    "By",
    "Bz",
    "Hx",
    "Hy",
    "Hz",
    "H_norm",
    "inside",
    "on_surface",
    "provenance",
    "error",
)
MAX_ERROR_LENGTH = 500


def _utc_now():
    return datetime.now(timezone.utc).isoformat()


_REDACTION_RULES = [
    (re.compile(r"(/home/|/Users/)[^/\s]+"), r"\1~"),
    (re.compile(r"(?i)([A-Z]:\\Users\\)[^\\\s]+"), r"\1~"),
    (re.compile(r"\s+"), " "),
]


def sanitize_error_message(value):
    if not value or not isinstance(value, str):
        return value
    sanitized = value
    for pattern, replacement in _REDACTION_RULES:
        sanitized = pattern.sub(replacement, sanitized)
    sanitized = sanitized.strip()
    if len(sanitized) > MAX_ERROR_LENGTH:
        sanitized = sanitized[: MAX_ERROR_LENGTH - 3] + "..."
    return sanitized


def format_float(value):
    return format(float(value), ".17g")


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(path, rows):
    """Header plus one line per row dict; LF line endings, floats at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_csv_cell(row.get(column)) for column in CSV_COLUMNS])
    return path


def write_jsonl(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for row in rows:
            handle.write(json.dumps({column: row.get(column) for column in CSV_COLUMNS}, ensure_ascii=True) + "\n")
    return path


def write_rows(path, rows, output_format="csv"):
    if output_format == "jsonl":
        return write_jsonl(path, rows)
    return write_csv(path, rows)


def append_run_log(entry):
    path = get_run_log_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"created_at": _utc_now(), **entry}
    if payload.get("error"):
        payload["error"] = sanitize_error_message(payload["error"])
    with path.open("a", encoding="utf-8") as handle:
        handle.write(json.dumps(payload, ensure_ascii=True) + "\n")
    return payload


def list_run_log(limit=50, command=None):
    """Most recent run-log entries first."""
    path = get_run_log_path()
    if not path.exists():
        return []
    entries = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError:
            continue
        if command and entry.get("command") != command:
            continue
        entries.append(entry)
    entries.reverse()
    return entries[:limit]
