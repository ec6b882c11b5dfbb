"""Adaptive Gauss-Kronrod (7/15) quadrature.

Plain global bisection: the interval with the largest error estimate is split
until the summed estimate meets the tolerance. No extrapolation. Integrands may
return floats or numpy arrays (all components share the subdivision).
"""

import heapq
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from tiletensor.settings import (
    get_oracle_rel_tol,
    get_quad_abs_tol,
    get_quad_max_subdivisions,
    get_quad_rel_tol,
)

_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)

# Nodes ordered -x0 .. 0 .. +x0; Gauss weights sit on the odd Kronrod indices.
_NODES = np.array([-v for v in _XGK[:7]] + [0.0] + list(reversed(_XGK[:7])))
_KRONROD_WEIGHTS = np.array(list(_WGK[:7]) + [_WGK[7]] + list(reversed(_WGK[:7])))
_gauss = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    _gauss[_i] = _w
    _gauss[14 - _i] = _w
_gauss[7] = _WG[3]
_GAUSS_WEIGHTS = _gauss

_EPMACH = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


class QuadratureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=1e-10, ge=1e-14)
    abs_tol: float = Field(default=1e-13, ge=0.0)
    max_subdivisions: int = Field(default=200, ge=1)

    def loosened(self, factor):
        return self.model_copy(update={"rel_tol": self.rel_tol * factor, "abs_tol": self.abs_tol * factor})


def default_spec():
    return QuadratureSpec(
        rel_tol=get_quad_rel_tol(),
        abs_tol=get_quad_abs_tol(),
        max_subdivisions=get_quad_max_subdivisions(),
    )


def oracle_spec():
    return QuadratureSpec(
        rel_tol=get_oracle_rel_tol(),
        abs_tol=get_quad_abs_tol(),
        max_subdivisions=get_quad_max_subdivisions(),
    )


class QuadratureError(RuntimeError):
    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class IntegrandNaNError(QuadratureError):
    pass


def _magnitude(value):
    return float(np.max(np.abs(value)))


def gauss_kronrod_15(f, a, b):
    """One G7/K15 pass on [a, b]: (value, error estimate, integral of |f|)."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    samples = np.array([f(center + half * t) for t in _NODES], dtype=float)
    if not np.all(np.isfinite(samples)):
        bad = "NaN" if np.any(np.isnan(samples)) else "infinite"
        raise IntegrandNaNError(f"integrand returned {bad} values on [{a!r}, {b!r}]")
    resk = np.tensordot(_KRONROD_WEIGHTS, samples, axes=1)
    resg = np.tensordot(_GAUSS_WEIGHTS, samples, axes=1)
    resabs = np.tensordot(_KRONROD_WEIGHTS, np.abs(samples), axes=1)
    resasc = np.tensordot(_KRONROD_WEIGHTS, np.abs(samples - 0.5 * resk), axes=1)

    scale = abs(half)
    value = resk * half
    resabs = resabs * scale
    resasc = resasc * scale
    raw = np.abs((resk - resg) * half)
    # QUADPACK error scaling, applied per component.
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * raw / resasc) ** 1.5)
    error = np.where((resasc != 0.0) & (raw != 0.0), scaled, raw)
    floor = 50.0 * _EPMACH * resabs
    error = np.where(resabs > _UFLOW / (50.0 * _EPMACH), np.maximum(floor, error), error)
    if np.ndim(value) == 0:
        return float(value), float(error), float(resabs)
    return value, float(np.max(error)), float(np.max(resabs))


def graded_breakpoints(center, width, lo, hi, ratio=8.0, max_levels=24):
    """Breakpoints clustering geometrically toward ``center`` inside (lo, hi).

    Used to pre-split near-singular peaks of characteristic ``width``; the
    center may sit just outside the interval.
    """
    points = [center] if lo < center < hi else []
    if not (width > 0.0 and math.isfinite(width)):
        return points
    reach = (hi - lo) + max(lo - center, center - hi, 0.0)
    step = width
    for _ in range(max_levels):
        if step >= reach:
            break
        for candidate in (center - step, center + step):
            if lo < candidate < hi:
                points.append(candidate)
        step *= ratio
    return points


def _initial_pieces(a, b, breakpoints):
    inner = sorted({float(p) for p in breakpoints if a < p < b})
    edges = [a] + inner + [b]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1) if edges[i + 1] > edges[i]]


def integrate_1d(f, a, b, spec=None, breakpoints=()):
    """Integrate ``f`` over [a, b]; returns (value, error estimate).

    ``breakpoints`` pre-split the interval at known interior features.
    Convergence means the summed error estimate is at most
    max(abs_tol, rel_tol * |value|), or below the roundoff floor of the
    summed |f|.
    """
    spec = spec or default_spec()
    if a == b:
        return 0.0, 0.0
    if b < a:
        value, error = integrate_1d(f, b, a, spec, breakpoints)
        return -value, error

    heap = []
    counter = 0
    for lo, hi in _initial_pieces(a, b, breakpoints):
        value, error, resabs = gauss_kronrod_15(f, lo, hi)
        heapq.heappush(heap, (-error, counter, lo, hi, value, error, resabs))
        counter += 1

    subdivisions = 0
    while True:
        total = sum(item[4] for item in heap)
        total_error = math.fsum(item[5] for item in heap)
        roundoff = 100.0 * _EPMACH * math.fsum(item[6] for item in heap)
        tolerance = max(spec.abs_tol, spec.rel_tol * _magnitude(total), roundoff)
        if total_error <= tolerance:
            return total, total_error
        if subdivisions >= spec.max_subdivisions:
            raise QuadratureError(
                f"no convergence after {subdivisions} subdivisions "
                f"(error estimate {total_error:.3e}, tolerance {tolerance:.3e})",
                value=total,
                error_estimate=total_error,
            )
        _, _, lo, hi, _, _, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            raise QuadratureError(
                f"interval [{lo!r}, {hi!r}] cannot be bisected further",
                value=total,
                error_estimate=total_error,
            )
        for left, right in ((lo, mid), (mid, hi)):
            value, error, resabs = gauss_kronrod_15(f, left, right)
            heapq.heappush(heap, (-error, counter, left, right, value, error, resabs))
            counter += 1
        subdivisions += 1


def integrate_2d(f, rectangle, spec=None, breakpoints=((), ())):
    """Nested integration of ``f(u, v)`` over ((u_lo, u_hi), (v_lo, v_hi)).

    The inner (v) integrals run at ``spec``; the outer one at 10x looser tolerance.
    """
    spec = spec or default_spec()
    (u_lo, u_hi), (v_lo, v_hi) = rectangle
    u_breaks, v_breaks = breakpoints
    outer_spec = spec.loosened(10.0)

    def inner(u):
        value, _ = integrate_1d(lambda v: f(u, v), v_lo, v_hi, spec, v_breaks)
        return value

    return integrate_1d(inner, u_lo, u_hi, outer_spec, u_breaks)
