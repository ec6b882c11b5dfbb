import math
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from tiletensor.geometry import EvalPoint, Tile, classify_point, units_convert  # noqa: E402

MM = 1e-3


@pytest.fixture(autouse=True)
def isolated_run_log(tmp_path, monkeypatch):
    path = tmp_path / "logs" / "runs.jsonl"
    monkeypatch.setenv("TILETENSOR_RUN_LOG_PATH", str(path))
    return path


@pytest.fixture
def example1_tile():
    return Tile(
        r1=4.3296 * MM,
        r2=6.4672 * MM,
        theta1=0.0,
        theta2=math.pi / 4,
        z1=-0.5 * MM,
        z2=0.5 * MM,
        magnetization=tuple(float(v) for v in units_convert([0.6929, 0.6929, 0.6929])),
    )


@pytest.fixture
def example2_tile():
    return Tile(
        r1=150 * MM,
        r2=450 * MM,
        theta1=math.radians(67.5),
        theta2=math.radians(112.5),
        z1=750 * MM,
        z2=850 * MM,
        offset=(800 * MM, -100 * MM, 0.0),
        magnetization=tuple(float(v) for v in units_convert([0.424, 0.424, 1.04])),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _gaps(tile, point):
    dx = point.x - tile.offset[0]
    dy = point.y - tile.offset[1]
    dz = point.z - tile.offset[2]
    r = math.hypot(dx, dy)
    angle = math.atan2(dy, dx)
    angular = min(
        abs(math.remainder(angle - tile.theta1, 2 * math.pi)),
        abs(math.remainder(angle - tile.theta2, 2 * math.pi)),
    )
    return (
        abs(r - tile.r1),
        abs(r - tile.r2),
        abs(dz - tile.z1),
        abs(dz - tile.z2),
        r * math.sin(min(angular, math.pi / 2)),
        r,
    )


@pytest.fixture
def random_tile():
    def _make(rng, magnetized=True):
        r1 = rng.uniform(0.2, 1.0)
        theta1 = rng.uniform(-math.pi, math.pi)
        z1 = rng.uniform(-1.0, 0.0)
        magnetization = tuple(rng.uniform(-1e6, 1e6, size=3)) if magnetized else (0.0, 0.0, 0.0)
        return Tile(
            r1=r1,
            r2=r1 + rng.uniform(0.3, 1.0),
            theta1=theta1,
            theta2=theta1 + rng.uniform(0.3, 2.5),
            z1=z1,
            z2=z1 + rng.uniform(0.3, 1.5),
            magnetization=magnetization,
        )

    return _make


@pytest.fixture
def random_point():
    """Point at least ``clearance`` (relative to the tile size) from every face plane and the axis."""

    def _make(rng, tile, clearance=0.05, where="any"):
        scale = tile.characteristic_length
        for _ in range(10000):
            xyz = rng.uniform([-2.5, -2.5, -1.8], [2.5, 2.5, 1.8])
            point = EvalPoint.of(xyz)
            if min(_gaps(tile, point)) < clearance * scale:
                continue
            inside, _ = classify_point(tile, point)
            if where == "inside" and not inside:
                continue
            if where == "outside" and inside:
                continue
            return point
        raise RuntimeError("no admissible point found")

    return _make
