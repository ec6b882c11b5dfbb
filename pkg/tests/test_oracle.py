import math

import numpy as np
import pytest

from tiletensor.geometry import EvalPoint, Tile
from tiletensor.oracle import (
    OracleModel,
    SurfaceId,
    oracle_b_charge,
    oracle_b_surface,
    oracle_tensor,
    surfaces,
)
from tiletensor.quadrature import QuadratureError
from tiletensor.tensor import field_at

MM = 1e-3


def _rel_diff(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


@pytest.mark.parametrize(
    "overrides, expected",
    [
        ({}, 6),
        ({"r1": 0.0}, 5),
        ({"theta1": 0.0, "theta2": 2 * math.pi}, 4),
        ({"r1": 0.0, "theta1": 0.0, "theta2": 2 * math.pi}, 3),
    ],
)
def test_face_count(overrides, expected):
    fields = dict(r1=0.2, r2=0.5, theta1=0.1, theta2=1.2, z1=0.0, z2=0.3)
    fields.update(overrides)
    faces = surfaces(Tile(**fields), (1.0, 0.2, 0.1))
    assert len(faces) == expected
    assert faces[-1].surface_id == SurfaceId.HORIZONTAL_LO


def test_face_normals_point_outward(example1_tile):
    centroid = example1_tile.centroid()
    for face in surfaces(example1_tile, (0.01, 0.0, 0.0)):
        u = 0.5 * sum(face.u_range)
        v = 0.5 * sum(face.v_range)
        position, normal, area = face.locate(u, v)
        assert area > 0.0
        assert np.dot(np.subtract(position, centroid), normal) > 0.0


def test_models_agree_inside_and_outside(example1_tile):
    for xyz in ((5 * MM, 2 * MM, 0.1 * MM), (8 * MM, 5 * MM, 3 * MM)):
        point = EvalPoint.of(xyz)
        current = oracle_tensor(example1_tile, point, model=OracleModel.SURFACE)
        charge = oracle_tensor(example1_tile, point, model="charge")
        assert _rel_diff(charge, current) < 1e-6


def test_trace_inside(example1_tile):
    n = oracle_tensor(example1_tile, EvalPoint(x=5 * MM, y=2 * MM, z=0.0))
    assert np.trace(n) == pytest.approx(8 * math.pi, rel=1e-6)


def test_surface_point_is_rejected(example1_tile):
    with pytest.raises(QuadratureError):
        oracle_tensor(example1_tile, EvalPoint(x=5 * MM, y=0.0, z=0.0))


def test_empty_tile_gives_zero():
    tile = Tile(r1=0.1, r2=0.2, theta1=0.5, theta2=0.5, z1=0.0, z2=0.1)
    assert np.array_equal(oracle_tensor(tile, EvalPoint(x=0.15, y=0.0, z=0.05)), np.zeros((3, 3)))


def test_oracle_b_matches_analytic_field(example1_tile):
    point = EvalPoint(x=5 * MM, y=2 * MM, z=0.0)
    analytic = field_at([example1_tile], point).b
    assert _rel_diff(oracle_b_surface(example1_tile, point), analytic) < 1e-6
    assert _rel_diff(oracle_b_charge([example1_tile], point), analytic) < 1e-6


def test_oracle_b_superposes(example1_tile):
    other = example1_tile.model_copy(update={"offset": (0.0, 0.0, 2 * MM), "magnetization": (0.0, 0.0, 5e5)})
    point = EvalPoint(x=8 * MM, y=5 * MM, z=3 * MM)
    combined = oracle_b_surface([example1_tile, other], point)
    separate = oracle_b_surface(example1_tile, point) + oracle_b_surface(other, point)
    assert np.allclose(combined, separate, rtol=1e-13, atol=0.0)
