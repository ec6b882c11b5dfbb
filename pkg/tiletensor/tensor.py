"""Tensor field N(r) of a tile and the B/H fields of tile collections.

B = mu0/(4 pi) * N . M. The nine components are signed sums of the surface
integrals in ``tiletensor.integrals`` taken at the six tile faces.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from tiletensor.elliptic import EllipticDomainError
from tiletensor.geometry import MU0, TWO_PI, canonicalize, classify_point, rotate_tensor_back
from tiletensor.integrals import (
    GuardReport,
    IntegralError,
    arc_integrals,
    horizontal_pair,
    integral_B,
    integral_F,
    integral_L,
    singularity_guard,
    vertical_H,
)
from tiletensor.oracle import oracle_tensor
from tiletensor.quadrature import QuadratureError

# Relative to max|N|.
SYMMETRY_CHECK_TOL = 1e-6
NUDGE_SENSITIVITY_TOL = 1e-6

_EVALUATION_ERRORS = (IntegralError, QuadratureError, EllipticDomainError)


class Provenance(str, Enum):
    ANALYTIC = "analytic"
    NUDGED = "nudged"
    QUADRATURE_FALLBACK = "quadrature_fallback"

    @property
    def rank(self):
        return _PROVENANCE_RANK[self]


_PROVENANCE_RANK = {
    Provenance.ANALYTIC: 0,
    Provenance.NUDGED: 1,
    Provenance.QUADRATURE_FALLBACK: 2,
}


def worst_provenance(values):
    return max(values, key=lambda p: p.rank, default=Provenance.ANALYTIC)


class TensorEvaluationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TensorResult:
    n: np.ndarray
    guard: GuardReport
    provenance: Provenance
    fallback_reason: str | None = None


@dataclass(frozen=True)
class FieldSample:
    point: object
    n: np.ndarray
    b: np.ndarray
    h: np.ndarray
    inside: bool
    on_surface: bool
    provenance: Provenance
    guards: tuple = field(default=())

    @property
    def h_norm(self):
        return float(np.linalg.norm(self.h))


def _is_full_ring(args):
    return abs((args.th_hi - args.th_lo) - TWO_PI) < 1e-12


def canonical_tensor(args, spec=None, independent=False):
    """N in the canonical frame (point at (x, 0, 0)).

    With ``independent`` all nine components are integrated; otherwise
    N_yx and N_zx are filled from N_xy and N_xz, and N_zy is checked
    against N_yz.
    """
    n = np.zeros((3, 3))
    arc_names = ("A", "D", "E", "G", "I", "J") if independent else ("A", "D", "E", "I", "J")

    for r_s, sign in ((args.r_hi, 1.0), (args.r_lo, -1.0)):
        if r_s == 0.0:
            continue
        v = arc_integrals(r_s, args, arc_names, spec)
        weight = sign * r_s
        n[0, 0] += weight * v["A"]
        n[1, 1] += weight * v["I"]
        n[2, 2] += weight * (v["A"] + v["I"])
        n[0, 1] -= weight * v["D"]
        n[0, 2] -= weight * v["E"]
        n[1, 2] -= weight * v["J"]
        if independent:
            n[1, 0] -= weight * v["G"]

    if not _is_full_ring(args):
        h_values = vertical_H(args, spec)
        for (theta_s, sign), h in zip(((args.th_hi, 1.0), (args.th_lo, -1.0)), h_values):
            c = math.cos(theta_s)
            s = math.sin(theta_s)
            b = integral_B(theta_s, args)
            f = integral_F(theta_s, args)
            n[0, 0] += sign * c * b
            n[0, 1] += sign * s * b
            n[0, 2] += sign * s * f
            n[1, 0] -= sign * c * h
            n[1, 1] -= sign * s * h
            n[1, 2] -= sign * c * f
            n[2, 2] += sign * (c * b - s * h)

    c_values = horizontal_pair("C", args, spec)
    k_values = horizontal_pair("K", args, spec) if independent else (0.0, 0.0)
    for (z_s, sign), cz, kz in zip(((args.z_hi, 1.0), (args.z_lo, -1.0)), c_values, k_values):
        n[0, 0] += sign * cz
        n[1, 1] += sign * cz
        n[2, 1] -= sign * integral_L(z_s, args)
        if independent:
            n[2, 0] -= sign * kz

    if independent:
        return n

    n[1, 0] = n[0, 1]
    n[2, 0] = n[0, 2]
    scale = float(np.max(np.abs(n)))
    if abs(n[2, 1] - n[1, 2]) > SYMMETRY_CHECK_TOL * scale:
        raise IntegralError("L", f"N_zy={n[2, 1]!r} disagrees with N_yz={n[1, 2]!r}")
    return n


def evaluate_tensor(canonical, args, spec=None, independent=False):
    """Canonical evaluation rotated back to the global frame."""
    return rotate_tensor_back(canonical_tensor(args, spec, independent), canonical.psi)


def tensor_at(tile, point, spec=None, oracle_spec=None):
    """N(point) of one tile in the global frame, with guard report and provenance."""
    if tile.is_empty:
        return TensorResult(np.zeros((3, 3)), GuardReport(), Provenance.ANALYTIC)

    canonical, args = canonicalize(point, tile)
    guarded, report = singularity_guard(canonical, args)
    evaluated_at = point.shifted(report.nudge_applied)
    try:
        n = evaluate_tensor(canonical, guarded, spec)
    except _EVALUATION_ERRORS as exc:
        try:
            n = oracle_tensor(tile, evaluated_at, spec=oracle_spec)
        except QuadratureError as oracle_exc:
            raise TensorEvaluationError(f"analytic path failed ({exc}); oracle failed ({oracle_exc})") from oracle_exc
        return TensorResult(n, report, Provenance.QUADRATURE_FALLBACK, fallback_reason=str(exc))

    if not report.nudged:
        return TensorResult(n, report, Provenance.ANALYTIC)

    scale = float(np.max(np.abs(n)))
    try:
        doubled, _ = singularity_guard(canonical, args, nudge_scale=2.0)
        n_doubled = evaluate_tensor(canonical, doubled, spec)
        if float(np.max(np.abs(n_doubled - n))) <= NUDGE_SENSITIVITY_TOL * scale:
            return TensorResult(n, report, Provenance.NUDGED)
        reason = "nudge sensitivity above tolerance"
    except _EVALUATION_ERRORS as exc:
        reason = f"nudge sensitivity check failed: {exc}"
    try:
        n_oracle = oracle_tensor(tile, evaluated_at, spec=oracle_spec)
    except QuadratureError:
        return TensorResult(n, report, Provenance.NUDGED, fallback_reason=reason)
    return TensorResult(n_oracle, report, Provenance.QUADRATURE_FALLBACK, fallback_reason=reason)


def tensor_symmetry_check(tile, point, spec=None):
    """max |N_ij - N_ji| with all nine components integrated independently."""
    if tile.is_empty:
        return 0.0
    canonical, args = canonicalize(point, tile)
    guarded, _ = singularity_guard(canonical, args)
    n = evaluate_tensor(canonical, guarded, spec, independent=True)
    return float(np.max(np.abs(n - n.T)))


def demag_tensor_at(tile, point, spec=None):
    """Classical demagnetization tensor N_d (H = -N_d . M) at ``point``."""
    result = tensor_at(tile, point, spec)
    inside, _ = classify_point(tile, point)
    return -result.n / (4.0 * math.pi) + (np.eye(3) if inside else 0.0)


def field_at(tiles, point, spec=None, oracle_spec=None):
    """Superposed B (tesla) and H (A/m) of ``tiles`` at ``point``."""
    n_total = np.zeros((3, 3))
    b = np.zeros(3)
    inside_m = np.zeros(3)
    inside_any = False
    on_surface_any = False
    provenances = []
    guards = []
    for tile in tiles:
        result = tensor_at(tile, point, spec, oracle_spec)
        magnetization = tile.magnetization_vector()
        n_total += result.n
        b += MU0 / (4.0 * math.pi) * (result.n @ magnetization)
        inside, on_surface = classify_point(tile, point)
        if inside:
            inside_any = True
            inside_m += magnetization
        on_surface_any = on_surface_any or on_surface
        provenances.append(result.provenance)
        if result.guard.triggered:
            guards.append(result.guard)
    h = b / MU0 - inside_m
    return FieldSample(
        point=point,
        n=n_total,
        b=b,
        h=h,
        inside=inside_any,
        on_surface=on_surface_any,
        provenance=worst_provenance(provenances),
        guards=tuple(guards),
    )
