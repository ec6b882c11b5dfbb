"""Brute-force tensor by direct quadrature over the six tile faces.

Two independent kernels:

* ``surface``: bound surface current K = M x n, giving
  N = sum over faces of the integral of [n d^T - (n . d) I] / R^3 dA;
* ``charge``: surface charge sigma = M . n, giving
  N = sum over faces of the integral of d n^T / R^3 dA + 4 pi I [inside],

with d = P - r' and R = |d|. Both satisfy B = mu0/(4 pi) N . M.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from tiletensor.geometry import MU0, TWO_PI, classify_point
from tiletensor.quadrature import QuadratureError, graded_breakpoints, integrate_2d, oracle_spec

# Lower bound on breakpoint widths, relative to the tile size.
GEOM_FLOOR = 1e-12


class SurfaceId(str, Enum):
    ARC_OUTER = "arc_outer"
    ARC_INNER = "arc_inner"
    VERTICAL_HI = "vertical_hi"
    VERTICAL_LO = "vertical_lo"
    HORIZONTAL_HI = "horizontal_hi"
    HORIZONTAL_LO = "horizontal_lo"


class OracleModel(str, Enum):
    SURFACE = "surface"
    CHARGE = "charge"


@dataclass(frozen=True)
class Surface:
    """One oriented face. ``locate(u, v)`` returns (position, unit normal, area factor)."""

    surface_id: SurfaceId
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    locate: object
    breakpoints: tuple


def _angle_breaks(angle, width, lo, hi):
    points = []
    first = math.ceil((lo - (hi - lo) - angle) / TWO_PI)
    last = math.floor((hi + (hi - lo) - angle) / TWO_PI)
    for k in range(first, last + 1):
        points.extend(graded_breakpoints(angle + k * TWO_PI, width, lo, hi))
    return tuple(points)


def surfaces(tile, point):
    """Oriented faces of ``tile`` in fixed order, parametrized relative to the tile axis origin.

    Breakpoints cluster toward the projection of ``point`` (relative coordinates).
    """
    px, py, pz = point
    rho = math.hypot(px, py)
    psi = math.atan2(py, px)
    z_range = (tile.z1, tile.z2)
    theta_range = (tile.theta1, tile.theta2)
    tiny = GEOM_FLOOR * tile.characteristic_length
    faces = []

    for surface_id, r_s, sign in (
        (SurfaceId.ARC_OUTER, tile.r2, 1.0),
        (SurfaceId.ARC_INNER, tile.r1, -1.0),
    ):
        if r_s == 0.0:
            continue

        def locate(theta, z, r_s=r_s, sign=sign):
            c = math.cos(theta)
            s = math.sin(theta)
            return (r_s * c, r_s * s, z), (sign * c, sign * s, 0.0), r_s

        gap = max(abs(rho - r_s), tiny)
        faces.append(
            Surface(
                surface_id,
                theta_range,
                z_range,
                locate,
                (_angle_breaks(psi, gap / r_s, *theta_range), graded_breakpoints(pz, gap, *z_range)),
            )
        )

    if not tile.is_full_ring:
        for surface_id, theta_s, sign in (
            (SurfaceId.VERTICAL_HI, tile.theta2, 1.0),
            (SurfaceId.VERTICAL_LO, tile.theta1, -1.0),
        ):
            c = math.cos(theta_s)
            s = math.sin(theta_s)

            def locate(r, z, c=c, s=s, sign=sign):
                return (r * c, r * s, z), (-sign * s, sign * c, 0.0), 1.0

            along = px * c + py * s
            gap = max(abs(-px * s + py * c), tiny)
            faces.append(
                Surface(
                    surface_id,
                    (tile.r1, tile.r2),
                    z_range,
                    locate,
                    (graded_breakpoints(along, gap, tile.r1, tile.r2), graded_breakpoints(pz, gap, *z_range)),
                )
            )

    for surface_id, z_s, sign in (
        (SurfaceId.HORIZONTAL_HI, tile.z2, 1.0),
        (SurfaceId.HORIZONTAL_LO, tile.z1, -1.0),
    ):

        def locate(r, theta, z_s=z_s, sign=sign):
            return (r * math.cos(theta), r * math.sin(theta), z_s), (0.0, 0.0, sign), r

        gap = max(abs(pz - z_s), tiny)
        faces.append(
            Surface(
                surface_id,
                (tile.r1, tile.r2),
                theta_range,
                locate,
                (
                    graded_breakpoints(rho, gap, tile.r1, tile.r2),
                    _angle_breaks(psi, gap / max(rho, gap), *theta_range),
                ),
            )
        )
    return faces


def _kernel(model, point):
    p = np.asarray(point, dtype=float)
    identity = np.eye(3)

    def current(position, normal, area):
        d = p - np.asarray(position)
        n = np.asarray(normal)
        r3 = float(np.dot(d, d)) ** 1.5
        return ((np.outer(n, d) - np.dot(n, d) * identity) * (area / r3)).ravel()

    def charge(position, normal, area):
        d = p - np.asarray(position)
        r3 = float(np.dot(d, d)) ** 1.5
        return (np.outer(d, normal) * (area / r3)).ravel()

    return current if model == OracleModel.SURFACE else charge


def surface_contribution(face, kernel, spec):
    def integrand(u, v):
        return kernel(*face.locate(u, v))

    value, _ = integrate_2d(integrand, (face.u_range, face.v_range), spec, face.breakpoints)
    return np.asarray(value, dtype=float).reshape(3, 3)


def oracle_tensor(tile, point, spec=None, model=OracleModel.SURFACE):
    """N(point) by 2D quadrature over every face, summed in face order."""
    if tile.is_empty:
        return np.zeros((3, 3))
    inside, on_surface = classify_point(tile, point)
    if on_surface:
        raise QuadratureError("oracle point lies on a tile surface")
    spec = spec or oracle_spec()
    model = OracleModel(model)
    relative = point.as_array() - np.asarray(tile.offset, dtype=float)
    kernel = _kernel(model, relative)
    n = np.zeros((3, 3))
    for face in surfaces(tile, relative):
        n += surface_contribution(face, kernel, spec)
    if model == OracleModel.CHARGE and inside:
        n += 4.0 * math.pi * np.eye(3)
    return n


def _oracle_b(tiles, point, spec, model):
    b = np.zeros(3)
    for tile in tiles:
        n = oracle_tensor(tile, point, spec, model)
        b += MU0 / (4.0 * math.pi) * (n @ tile.magnetization_vector())
    return b


def oracle_b_surface(tiles, point, spec=None):
    """B (tesla) from the surface-current kernel. ``tiles`` may be one tile or a list."""
    return _oracle_b(_as_list(tiles), point, spec, OracleModel.SURFACE)


def oracle_b_charge(tiles, point, spec=None):
    """B (tesla) from the surface-charge kernel. ``tiles`` may be one tile or a list."""
    return _oracle_b(_as_list(tiles), point, spec, OracleModel.CHARGE)


def _as_list(tiles):
    return tiles if isinstance(tiles, (list, tuple)) else [tiles]
