import math

import numpy as np
import pytest

from tiletensor.config_loader import describe_presets, load_presets
from tiletensor.geometry import MU0
from tiletensor.scene import SceneError, build_tiles, dump_scene, load_scene, parse_scene
from tiletensor.settings import SCENES_DIR

MM = 1e-3


def _scene(**overrides):
    payload = {
        "schema_version": 1,
        "units": "mm",
        "tiles": [{"r1": 1, "r2": 2, "theta1": 0, "theta2": 90, "z1": 0, "z2": 1}],
        "sampling": {"kind": "points", "points": [[3, 0, 0], [0, 3, 0.5]]},
    }
    payload.update(overrides)
    return payload


def test_example1_scene_matches_reference_tile(example1_tile):
    scene = load_scene(SCENES_DIR / "example1_line.json")
    (tile,) = build_tiles(scene, load_presets())
    for name in ("r1", "r2", "theta1", "theta2", "z1", "z2"):
        assert getattr(tile, name) == pytest.approx(getattr(example1_tile, name), rel=1e-12, abs=1e-15)
    assert tile.magnetization == pytest.approx(example1_tile.magnetization, rel=1e-12)

    (points,) = scene.sample_points().values()
    assert points.shape == (100, 3)
    assert points[0] == pytest.approx([2 * MM, -1 * MM, -3 * MM])
    assert points[-1] == pytest.approx([8 * MM, 5 * MM, 3 * MM])


def test_example2_scene_has_three_axes(example2_tile):
    scene = load_scene(SCENES_DIR / "example2_axes.json")
    (tile,) = build_tiles(scene, load_presets())
    assert tile.offset == pytest.approx(example2_tile.offset)
    assert tile.theta1 == pytest.approx(math.radians(67.5))
    samples = scene.sample_points()
    assert sorted(samples) == ["x", "y", "z"]
    assert all(points.shape == (50, 3) for points in samples.values())


def test_all_bundled_scenes_load():
    presets = load_presets()
    for path in sorted(SCENES_DIR.glob("*.json")):
        scene = load_scene(path)
        assert build_tiles(scene, presets)


def test_degrees_and_radians():
    degrees = build_tiles(parse_scene(_scene()))[0]
    radians = build_tiles(
        parse_scene(
            _scene(
                radians=True,
                tiles=[{"r1": 1, "r2": 2, "theta1": 0, "theta2": math.pi / 2, "z1": 0, "z2": 1}],
            )
        )
    )[0]
    assert degrees.theta2 == pytest.approx(radians.theta2)


def test_meters_scene_is_not_scaled():
    scene = parse_scene(_scene(units="m"))
    assert build_tiles(scene)[0].r2 == 2.0
    assert scene.sample_points()[""][1] == pytest.approx([0.0, 3.0, 0.5])


def test_magnetization_forms():
    tiles = build_tiles(
        parse_scene(
            _scene(
                tiles=[
                    {"r1": 1, "r2": 2, "theta1": 0, "theta2": 90, "z1": 0, "z2": 1, "mu0_magnetization": [0, 0, 1.0]},
                    {"r1": 1, "r2": 2, "theta1": 0, "theta2": 90, "z1": 0, "z2": 1, "magnetization": [0, 0, 5e5]},
                    {
                        "r1": 1,
                        "r2": 2,
                        "theta1": 0,
                        "theta2": 90,
                        "z1": 0,
                        "z2": 1,
                        "spherical": {"mu0_magnitude": 1.0, "azimuth": 0, "polar": 0},
                    },
                ]
            )
        )
    )
    assert tiles[0].magnetization[2] == pytest.approx(1.0 / MU0)
    assert tiles[1].magnetization == (0.0, 0.0, 5e5)
    assert tiles[2].magnetization == pytest.approx(tiles[0].magnetization)


def test_preset_fields_can_be_overridden():
    scene = parse_scene(_scene(tiles=[{"preset": "example1", "z2": 2.0}]))
    (tile,) = build_tiles(scene, load_presets())
    assert tile.z2 == pytest.approx(2 * MM)
    assert tile.r1 == pytest.approx(4.3296 * MM)


def test_ring_expands_into_segments():
    scene = parse_scene(
        _scene(
            tiles=[],
            rings=[{"segments": 6, "r1": 10, "r2": 20, "z1": -5, "z2": 5, "mu0_magnitude": 1.2}],
        )
    )
    tiles = build_tiles(scene)
    assert len(tiles) == 6
    assert tiles[0].r2 == pytest.approx(0.02)
    assert np.linalg.norm(tiles[3].magnetization) == pytest.approx(1.2 / MU0)


def test_grid_sampling_order():
    scene = parse_scene(
        _scene(sampling={"kind": "grid", "origin": [0, 0, 0], "axes": [[2, 0, 0], [0, 4, 0]], "counts": [3, 2]})
    )
    points = scene.sample_points()[""] / MM
    expected = [[i, 4.0 * j, 0.0] for i in (0.0, 1.0, 2.0) for j in (0, 1)]
    assert np.allclose(points, expected)


def test_random_sampling_is_reproducible():
    sampling = {"kind": "random", "low": [-1, -1, -1], "high": [1, 1, 1], "count": 20, "seed": 3}
    first = parse_scene(_scene(sampling=sampling)).sample_points()[""]
    second = parse_scene(_scene(sampling=sampling)).sample_points()[""]
    assert np.array_equal(first, second)
    assert np.all(np.abs(first) <= MM)


def test_single_point_line():
    scene = parse_scene(_scene(sampling={"kind": "line", "start": [1, 2, 3], "end": [4, 5, 6], "count": 1}))
    assert np.allclose(scene.sample_points()[""], [[1 * MM, 2 * MM, 3 * MM]])


@pytest.mark.parametrize(
    "overrides, fragment",
    [
        ({"schema_version": 2}, "schema_version"),
        ({"units": "in"}, "units"),
        ({"colour": "red"}, "colour"),
        ({"tiles": []}, "at least one tile"),
        ({"samplings": {"a": {"kind": "points", "points": [[0, 0, 0]]}}}, "exactly one"),
        ({"sampling": {"kind": "spiral"}}, "sampling"),
        ({"sampling": {"kind": "random", "low": [0, 0, 0], "high": [1, 0, 1], "count": 3}}, "low < high"),
    ],
)
def test_invalid_scenes(overrides, fragment):
    with pytest.raises(SceneError) as excinfo:
        parse_scene(_scene(**overrides))
    assert fragment in str(excinfo.value)


def test_invalid_tile_reports_location():
    scene = parse_scene(_scene(tiles=[{"r1": 3, "r2": 2, "theta1": 0, "theta2": 90, "z1": 0, "z2": 1}]))
    with pytest.raises(SceneError, match="tiles.0"):
        build_tiles(scene)


def test_two_magnetizations_rejected():
    with pytest.raises(SceneError, match="at most one"):
        parse_scene(
            _scene(
                tiles=[
                    {
                        "r1": 1,
                        "r2": 2,
                        "theta1": 0,
                        "theta2": 90,
                        "z1": 0,
                        "z2": 1,
                        "magnetization": [1, 0, 0],
                        "mu0_magnetization": [1, 0, 0],
                    }
                ]
            )
        )


def test_unknown_preset():
    scene = parse_scene(_scene(tiles=[{"preset": "missing"}]))
    with pytest.raises(SceneError, match="unknown preset 'missing'"):
        build_tiles(scene, load_presets())


def test_load_scene_reports_json_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "units": "mm",\n  "tiles": [\n}\n', encoding="utf-8")
    with pytest.raises(SceneError, match="line 4"):
        load_scene(path)


def test_load_scene_missing_file(tmp_path):
    with pytest.raises(SceneError, match="missing.json"):
        load_scene(tmp_path / "missing.json")


def test_dump_scene_uses_file_names():
    payload = dump_scene(parse_scene(_scene()))
    assert payload["sampling"]["points"] == [[3.0, 0.0, 0.0], [0.0, 3.0, 0.5]]
    assert "points_list" not in payload["sampling"]
    assert dump_scene(parse_scene(payload)) == payload


def test_presets_from_bundled_file():
    presets = load_presets()
    assert {"example1", "example2", "example2_spherical"} <= set(presets)
    assert presets["example2"]["offset"] == pytest.approx((0.8, -0.1, 0.0))
    assert np.array(presets["example2"]["magnetization"]) * MU0 == pytest.approx([0.424, 0.424, 1.04])
    spherical = np.array(presets["example2_spherical"]["magnetization"]) * MU0
    assert spherical == pytest.approx([0.424, 0.424, 1.04], abs=2e-3)
    names = [entry["name"] for entry in describe_presets()]
    assert names[:3] == ["example1", "example2", "example2_spherical"]


def test_presets_env_override(tmp_path, monkeypatch):
    path = tmp_path / "tiles.yaml"
    path.write_text(
        "- name: unit\n  units: m\n  r1: 0\n  r2: 1\n  theta1: 0\n  theta2: 3.14159\n"
        "  radians: true\n  z1: 0\n  z2: 1\n",
        encoding="utf-8",
    )
    monkeypatch.setenv("TILETENSOR_PRESETS_PATH", str(path))
    presets = load_presets()
    assert presets == {"unit": {"r1": 0.0, "r2": 1.0, "theta1": 0.0, "theta2": 3.14159, "z1": 0.0, "z2": 1.0}}


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("- units: mm\n  r1: 1\n", "has no name"),
        ("- name: bad\n  units: ft\n", "unknown units"),
        ("- name: bad\n  r1: one\n", "bad.r1"),
    ],
)
def test_invalid_presets(tmp_path, text, fragment):
    path = tmp_path / "tiles.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(SceneError, match=fragment):
        load_presets(path)


def test_missing_presets_file(tmp_path):
    assert load_presets(tmp_path / "none.yaml") == {}
    assert describe_presets(tmp_path / "none.yaml") == []
