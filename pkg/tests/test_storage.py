import json

from tiletensor.storage import (
    CSV_COLUMNS,
    append_run_log,
    format_float,
    list_run_log,
    sanitize_error_message,
    write_csv,
    write_jsonl,
)


def test_sanitize_error_message():
    assert sanitize_error_message(None) is None
    assert sanitize_error_message("failed in /home/bob/x.json") == "failed in /home/~/x.json"
    assert sanitize_error_message(r"C:\Users\bob\x") == r"C:\Users\~\x"
    assert sanitize_error_message("a\n  b\tc ") == "a b c"
    long = sanitize_error_message("x" * 2000)
    assert len(long) == 500
    assert long.endswith("...")


def test_format_float_round_trips():
    value = 0.1 + 0.2
    assert float(format_float(value)) == value
    assert format_float(2.5) == "2.5"
    assert format_float(1) == "1"


def test_write_csv_cells(tmp_path):
    row = {"x": 1.5, "y": 0.1, "z": -2.0, "inside": True, "on_surface": False, "provenance": "nudged", "error": None}
    path = write_csv(tmp_path / "nested" / "out.csv", [row])
    lines = path.read_bytes().decode("utf-8").split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    cells = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert cells["x"] == "1.5"
    assert cells["y"] == "0.10000000000000001"
    assert cells["inside"] == "1"
    assert cells["on_surface"] == "0"
    assert cells["Bx"] == ""
    assert cells["provenance"] == "nudged"
    assert lines[2] == ""


def test_write_jsonl_keeps_columns(tmp_path):
    path = write_jsonl(tmp_path / "out.jsonl", [{"x": 1.0, "extra": 5}])
    record = json.loads(path.read_text(encoding="utf-8"))
    assert list(record) == list(CSV_COLUMNS)
    assert record["x"] == 1.0
    assert record["Bx"] is None


def test_run_log_newest_first_and_filtered(isolated_run_log):
    append_run_log({"command": "field", "points": 1})
    append_run_log({"command": "verify", "points": 2, "error": "at /home/carol/scene.json"})
    append_run_log({"command": "field", "points": 3})
    with isolated_run_log.open("a", encoding="utf-8") as handle:
        handle.write("not json\n")

    entries = list_run_log()
    assert [entry["points"] for entry in entries] == [3, 2, 1]
    assert entries[1]["error"] == "at /home/~/scene.json"
    assert "created_at" in entries[0]
    assert [entry["points"] for entry in list_run_log(command="field")] == [3, 1]
    assert len(list_run_log(limit=1)) == 1


def test_missing_run_log(isolated_run_log):
    assert not isolated_run_log.exists()
    assert list_run_log() == []
