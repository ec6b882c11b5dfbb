import json

from tiletensor import pipeline
from tiletensor.cli import EXIT_EVALUATION, EXIT_OK, EXIT_VALIDATION, EXIT_VERIFY_FAILED, main


def _scene(tmp_path, points=((5, 2, 0),)):
    payload = {
        "schema_version": 1,
        "units": "mm",
        "tiles": [{"preset": "example1"}],
        "sampling": {"kind": "points", "points": [list(p) for p in points]},
    }
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_field_writes_output(tmp_path, capsys):
    output = tmp_path / "field.csv"
    code = main(["field", str(_scene(tmp_path)), "--workers", "1", "-o", str(output)])
    assert code == EXIT_OK
    assert output.read_text(encoding="utf-8").startswith("x,y,z,Bx,By,Bz")
    out = capsys.readouterr().out
    summary = json.loads(out[out.index("{") :])
    assert summary["points"] == 1


def test_field_with_failed_points(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("no")

    monkeypatch.setattr(pipeline, "field_at", broken)
    code = main(["field", str(_scene(tmp_path)), "--workers", "1", "-o", str(tmp_path / "f.csv")])
    assert code == EXIT_EVALUATION


def test_invalid_scene_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"units": "mm", "tiles": [{"r1": 2, "r2": 1}]}), encoding="utf-8")
    assert main(["field", str(path)]) == EXIT_VALIDATION
    assert "invalid scene" in capsys.readouterr().err
    assert main(["verify", str(tmp_path / "missing.json")]) == EXIT_VALIDATION


def test_usage_error_exit_code(tmp_path):
    assert main(["field", str(_scene(tmp_path)), "--workers", "0"]) == EXIT_VALIDATION
    assert main(["verify", str(_scene(tmp_path)), "--tol", "-1"]) == EXIT_VALIDATION


def test_verify_exit_codes(tmp_path, capsys):
    scene = str(_scene(tmp_path))
    assert main(["verify", scene, "--oracle", "surface", "--workers", "1"]) == EXIT_OK
    assert "[verify] passed" in capsys.readouterr().out
    assert main(["verify", scene, "--oracle", "surface", "--workers", "1", "--tol", "0"]) == EXIT_VERIFY_FAILED


def test_history_lists_runs(tmp_path, capsys):
    main(["field", str(_scene(tmp_path)), "--workers", "1", "-o", str(tmp_path / "f.csv")])
    capsys.readouterr()
    assert main(["history", "--command", "field"]) == EXIT_OK
    entries = json.loads(capsys.readouterr().out)
    assert len(entries) == 1
    assert entries[0]["command"] == "field"
