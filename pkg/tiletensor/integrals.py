"""Surface integrals of a cylindrical tile seen from the canonical point (x, 0, 0).

Naming follows the face the integral lives on:

* arc faces (r' = r_s, variables theta', z'): A, D, E, G, I, J
* vertical faces (theta' = theta_s, variables r', z'): B, F, H
* horizontal faces (z' = z_s, variables r', theta'): C, K, L

Each is the definite double integral of a kernel derivative (with
D = 1/|r - r'|) times a trigonometric weight. Closed-form antiderivatives are
combined by corner differences; C, H and K keep one numeric quadrature after
the analytic inner integral.

Corner differences are written in cancellation-free forms: terms depending on
only one of the two variables are dropped where they cancel, and differences
like 1/R_hi - 1/R_lo are rationalized.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from tiletensor.elliptic import EllipticDomainError, amplitude_from_angle, carlson_terms
from tiletensor.geometry import GEOM_REL_EPS, TWO_PI
from tiletensor.quadrature import QuadratureError, default_spec, graded_breakpoints, integrate_1d

EPS_ANG = 1e-9
NUDGE_FACTOR = 10.0
# Below this ratio of min(x, r_s) to the local length scale the arc-face closed
# forms lose too many digits and the theta' integral is done numerically.
CLOSED_FORM_MIN_RATIO = 1e-2

ARC_TERMS = ("A", "D", "E", "G", "I", "J")


class IntegralError(RuntimeError):
    def __init__(self, term, message):
        super().__init__(f"integral {term}: {message}")
        self.term = term


class GuardCondition(str, Enum):
    THETA_NPI_Z0 = "theta_npi_z0"
    THETA_NPI_R_EQ_X = "theta_npi_r_eq_x"
    X_ZERO = "x_zero"
    R_ZERO = "r_zero"


@dataclass(frozen=True)
class GuardReport:
    triggered: bool = False
    condition: GuardCondition | None = None
    conditions: tuple = ()
    # Global frame, meters.
    nudge_applied: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def nudged(self):
        return any(v != 0.0 for v in self.nudge_applied)

    def as_dict(self):
        return {
            "triggered": self.triggered,
            "condition": self.condition.value if self.condition else None,
            "conditions": [c.value for c in self.conditions],
            "nudge_applied": list(self.nudge_applied),
        }


# --- helper functions -------------------------------------------------------


def _clamped_sqrt(radicand):
    """(sqrt, clamped) with a negative radicand clamped to 0."""
    if radicand < 0.0:
        return 0.0, True
    return math.sqrt(radicand), False


def helper_A_flagged(r, x, theta, z):
    """helper_A plus a flag set when rounding drove the radicand negative."""
    return _clamped_sqrt((r - x) ** 2 + 4.0 * r * x * math.sin(0.5 * theta) ** 2 + z * z)


def helper_A(r, x, theta, z):
    """Distance |r - r'| in canonical coordinates."""
    return helper_A_flagged(r, x, theta, z)[0]


def helper_B(x, theta, z):
    """x^2 (cos^2 theta - 1) - z^2, written with sin to keep digits near theta = 0."""
    return -((x * math.sin(theta)) ** 2) - z * z


def helper_C(r, x):
    return 4.0 * r * x / (r + x) ** 2


def helper_D(theta):
    return math.cos(0.5 * theta)


def helper_E(r, x, z):
    return 2.0 * math.sqrt(r * x / ((r + x) ** 2 + z * z))


def helper_Fpm(r, x, theta, z, sign=1):
    base = x * x + z * z
    if base <= 0.0:
        raise ValueError("helper_Fpm needs x^2 + z^2 > 0")
    return (helper_A(r, x, theta, z) + sign * r) / math.sqrt(base)


# --- stable differences -----------------------------------------------------


def _inv_r_diff(u_hi, r_hi, u_lo, r_lo):
    """1/R_hi - 1/R_lo for R^2 = u^2 + h^2 with common h."""
    return (u_lo * u_lo - u_hi * u_hi) / (r_hi * r_lo * (r_hi + r_lo))


def _u_over_r_diff(u_hi, r_hi, u_lo, r_lo, h2, term):
    """(u_hi/R_hi - u_lo/R_lo) / h^2 for R^2 = u^2 + h^2."""
    if u_hi * u_lo > 0.0:
        return (u_hi * u_hi - u_lo * u_lo) / (r_hi * r_lo * (u_hi * r_lo + u_lo * r_hi))
    if h2 <= 0.0:
        raise IntegralError(term, "evaluation point lies on an edge of the face")
    return (u_hi / r_hi - u_lo / r_lo) / h2


def _log_u_plus_r_diff(u_hi, r_hi, u_lo, r_lo, h2, term):
    """log(u_hi + R_hi) - log(u_lo + R_lo) for R^2 = u^2 + h^2."""
    if u_hi >= 0.0 and u_lo >= 0.0:
        return math.log((u_hi + r_hi) / (u_lo + r_lo))
    if u_hi < 0.0 and u_lo < 0.0:
        return math.log((r_lo - u_lo) / (r_hi - u_hi))
    if h2 <= 0.0:
        raise IntegralError(term, "logarithm branch point on the integration path")
    log_h2 = math.log(h2)
    hi = math.log(u_hi + r_hi) if u_hi >= 0.0 else log_h2 - math.log(r_hi - u_hi)
    lo = math.log(u_lo + r_lo) if u_lo >= 0.0 else log_h2 - math.log(r_lo - u_lo)
    return hi - lo


def _atan_ratio(num, den):
    """atan(num/den), with den -> +0 when den is exactly zero."""
    if den == 0.0:
        return 0.0 if num == 0.0 else math.copysign(0.5 * math.pi, num)
    if den > 0.0:
        return math.atan2(num, den)
    return math.atan2(-num, -den)


def _cos_diff(a, b):
    """cos(a) - cos(b) without cancellation."""
    return -2.0 * math.sin(0.5 * (a + b)) * math.sin(0.5 * (a - b))


def _is_empty(args):
    return args.th_lo == args.th_hi or args.z_lo == args.z_hi or args.r_lo == args.r_hi


def _multiples_in(period, offset, lo, hi, margin):
    """Points offset + n*period within [lo - margin, hi + margin]."""
    first = math.ceil((lo - margin - offset) / period)
    last = math.floor((hi + margin - offset) / period)
    return [offset + n * period for n in range(first, last + 1)]


def _angular_breakpoints(lo, hi, width):
    points = []
    for center in _multiples_in(TWO_PI, 0.0, lo, hi, hi - lo):
        points.extend(graded_breakpoints(center, width, lo, hi))
    return points


# --- arc faces (r' = r_s) ---------------------------------------------------


def _arc_closed_corner(r, x, th, z, names):
    """theta'-z' antiderivatives of the arc-face integrands at one corner."""
    a2 = (r - x) ** 2 + 4.0 * r * x * math.sin(0.5 * th) ** 2
    big_r = helper_A(r, x, th, z)
    values = {}

    if names & {"D", "G"}:
        if a2 <= 0.0:
            raise IntegralError("D/G", "kernel singular at an arc corner")
        ash = math.asinh(z / math.sqrt(a2))
        zr = z * big_r
        scale = 2.0 * r * x * x
        if "D" in names:
            values["D"] = -(zr + (r * r + x * x) * ash) / scale
        if "G" in names:
            values["G"] = -(zr + (r * r - x * x) * ash) / scale
    if "J" in names:
        values["J"] = -big_r / (r * x)

    elliptic = names & {"A", "E", "I"}
    if not elliptic:
        return values
    if z == 0.0:
        # A and I carry an overall factor z'.
        elliptic = elliptic - {"A", "I"}
        values.update({name: 0.0 for name in names & {"A", "I"}})
        if not elliptic:
            return values

    total = r + x
    sum2 = total * total
    q = sum2 + z * z
    sqrt_q = math.sqrt(q)
    diff = r - x
    rho = diff / total
    need_j = bool(elliptic & {"A", "I"}) and diff != 0.0
    terms = carlson_terms(
        amplitude_from_angle(th),
        helper_E(r, x, z) ** 2,
        helper_C(r, x) if need_j else None,
        delta2=(a2 + z * z) / q,
        p=a2 / sum2,
        kc2=(diff * diff + z * z) / q,
        nc=rho * rho,
    )
    j = terms.j if need_j else 0.0
    if "A" in elliptic:
        values["A"] = 2.0 * z / (3.0 * x * sqrt_q) * (rho * rho * j - terms.d)
    if "E" in elliptic:
        values["E"] = -2.0 / sqrt_q * (terms.f - 2.0 * terms.d / 3.0)
    if "I" in elliptic:
        bracket = terms.d / 3.0 - x * terms.f / total - diff * (r * r + x * x) * j / (3.0 * sum2 * total)
        values["I"] = 2.0 * z / (x * sqrt_q) * bracket
    return values


def _arc_closed(r_s, args, names):
    totals = dict.fromkeys(names, 0.0)
    for th, th_sign in ((args.th_hi, 1.0), (args.th_lo, -1.0)):
        for z, z_sign in ((args.z_hi, 1.0), (args.z_lo, -1.0)):
            corner = _arc_closed_corner(r_s, args.x, th, z, names)
            for name in names:
                totals[name] += th_sign * z_sign * corner[name]
    return totals


def _arc_semi_numeric(r_s, args, names, spec):
    """Analytic in z', numeric in theta'."""
    x = args.x
    z_hi = args.z_hi
    z_lo = args.z_lo
    order = sorted(names)

    def integrand(th):
        s = math.sin(th)
        c = math.cos(th)
        a2 = (r_s - x) ** 2 + 4.0 * r_s * x * math.sin(0.5 * th) ** 2
        big_hi = math.sqrt(a2 + z_hi * z_hi)
        big_lo = math.sqrt(a2 + z_lo * z_lo)
        # [z/(a^2 R)] and [1/R] over the z' limits.
        w = _u_over_r_diff(z_hi, big_hi, z_lo, big_lo, a2, "arc")
        v = _inv_r_diff(z_hi, big_hi, z_lo, big_lo)
        radial = r_s * c - x
        kernel = {
            "A": r_s * s * s * w,
            "D": r_s * c * s * w,
            "E": -c * v,
            "G": s * radial * w,
            "I": c * radial * w,
            "J": -s * v,
        }
        return [kernel[name] for name in order]

    z_near = 0.0 if z_hi * z_lo < 0.0 else min(abs(z_hi), abs(z_lo))
    width = math.hypot(r_s - x, z_near) / max(math.sqrt(r_s * x), args.characteristic_length * GEOM_REL_EPS)
    breaks = _angular_breakpoints(args.th_lo, args.th_hi, width)

    value, _ = integrate_1d(lambda th: np.array(integrand(th)), args.th_lo, args.th_hi, spec, breaks)
    return {name: float(value[i]) for i, name in enumerate(order)}


def _closed_form_ok(r_s, args):
    scale = max(args.x, r_s, abs(args.z_lo), abs(args.z_hi))
    return min(args.x, r_s) >= CLOSED_FORM_MIN_RATIO * scale


def arc_integrals(r_s, args, names=ARC_TERMS, spec=None):
    """Evaluate several arc-face integrals at r' = r_s sharing corner work."""
    names = set(names)
    if _is_empty(args):
        return dict.fromkeys(names, 0.0)
    if args.x <= 0.0:
        raise IntegralError("/".join(sorted(names)), "evaluation point on the axis; guard first")
    try:
        if _closed_form_ok(r_s, args):
            return _arc_closed(r_s, args, names)
        return _arc_semi_numeric(r_s, args, names, spec or default_spec())
    except (EllipticDomainError, QuadratureError, ZeroDivisionError, ValueError) as exc:
        if isinstance(exc, IntegralError):
            raise
        raise IntegralError("/".join(sorted(names)), str(exc)) from exc


def integral_A(r_s, args, spec=None):
    return arc_integrals(r_s, args, ("A",), spec)["A"]


def integral_D(r_s, args, spec=None):
    return arc_integrals(r_s, args, ("D",), spec)["D"]


def integral_E(r_s, args, spec=None):
    return arc_integrals(r_s, args, ("E",), spec)["E"]


def integral_G(r_s, args, spec=None):
    return arc_integrals(r_s, args, ("G",), spec)["G"]


def integral_I(r_s, args, spec=None):
    return arc_integrals(r_s, args, ("I",), spec)["I"]


def integral_J(r_s, args, spec=None):
    return arc_integrals(r_s, args, ("J",), spec)["J"]


# --- vertical faces (theta' = theta_s) --------------------------------------


def integral_B(theta_s, args):
    if _is_empty(args):
        return 0.0
    x = args.x
    c = math.cos(theta_s)
    s = math.sin(theta_s)
    total = 0.0
    for r, r_sign in ((args.r_hi, 1.0), (args.r_lo, -1.0)):
        u = r - x * c
        rho = math.hypot(u, x * s)
        for z, z_sign in ((args.z_hi, 1.0), (args.z_lo, -1.0)):
            big_r = math.hypot(rho, z)
            value = c * _atan_ratio(z * u, x * s * big_r)
            if s != 0.0:
                if rho == 0.0:
                    raise IntegralError("B", "atanh argument reaches 1 on the integration path")
                value -= s * math.asinh(z / rho)
            total += r_sign * z_sign * value
    return total


def integral_F(theta_s, args):
    if _is_empty(args):
        return 0.0
    x = args.x
    c = math.cos(theta_s)
    s = math.sin(theta_s)
    u_hi = args.r_hi - x * c
    u_lo = args.r_lo - x * c
    total = 0.0
    for z, z_sign in ((args.z_hi, 1.0), (args.z_lo, -1.0)):
        h2 = -helper_B(x, theta_s, z)
        big_hi = math.sqrt(u_hi * u_hi + h2)
        big_lo = math.sqrt(u_lo * u_lo + h2)
        total -= z_sign * _log_u_plus_r_diff(u_hi, big_hi, u_lo, big_lo, h2, "F")
    return total


def _integrate_faces(term, integrands, lo, hi, spec, breaks):
    """One quadrature pass over several face integrands sharing a variable.

    ``None`` entries stand for faces known to contribute 0.
    """
    live = [f for f in integrands if f is not None]
    if not live:
        return [0.0] * len(integrands)
    if len(live) == 1:
        integrand = live[0]
    else:
        def integrand(t):
            return np.array([f(t) for f in live])
    try:
        value, _ = integrate_1d(integrand, lo, hi, spec or default_spec(), breaks)
    except QuadratureError as exc:
        raise IntegralError(term, str(exc)) from exc
    values = iter(np.atleast_1d(value))
    return [float(next(values)) if f is not None else 0.0 for f in integrands]


def _h_integrand(args, theta_s):
    x = args.x
    c = math.cos(theta_s)
    s = math.sin(theta_s)
    xs = x * s
    u_hi = args.r_hi - x * c
    u_lo = args.r_lo - x * c

    def integrand(z):
        h2 = xs * xs + z * z
        big_hi = math.sqrt(u_hi * u_hi + h2)
        big_lo = math.sqrt(u_lo * u_lo + h2)
        value = -c * _inv_r_diff(u_hi, big_hi, u_lo, big_lo)
        if s != 0.0:
            value -= x * s * s * _u_over_r_diff(u_hi, big_hi, u_lo, big_lo, h2, "H")
        return value

    if u_hi * u_lo < 0.0:
        width = abs(xs)
    else:
        width = math.hypot(min(abs(u_hi), abs(u_lo)), xs)
    return integrand, graded_breakpoints(0.0, width, args.z_lo, args.z_hi)


def vertical_H(args, spec=None, faces=None):
    """H at several vertical faces (default: theta_hi and theta_lo) in one pass."""
    faces = (args.th_hi, args.th_lo) if faces is None else faces
    if _is_empty(args):
        return [0.0] * len(faces)
    built = [_h_integrand(args, theta_s) for theta_s in faces]
    breaks = [point for _, face_breaks in built for point in face_breaks]
    return _integrate_faces("H", [f for f, _ in built], args.z_lo, args.z_hi, spec, breaks)


def integral_H(args, theta_s, spec=None):
    """Analytic in r', numeric in z'."""
    return vertical_H(args, spec, faces=(theta_s,))[0]


# --- horizontal faces (z' = z_s) --------------------------------------------


def _horizontal_width(args, z_s):
    x = args.x
    if args.r_lo < x < args.r_hi:
        return abs(z_s) / x
    nearest = min(abs(args.r_lo - x), abs(args.r_hi - x))
    return math.hypot(nearest, z_s) / x


def _c_integrand(args, z_s):
    if z_s == 0.0:
        return None
    x = args.x
    z2 = z_s * z_s

    def integrand(th):
        c = math.cos(th)
        s = math.sin(th)
        h2 = (x * s) ** 2 + z2
        u_hi = args.r_hi - x * c
        u_lo = args.r_lo - x * c
        big_hi = math.sqrt(u_hi * u_hi + h2)
        big_lo = math.sqrt(u_lo * u_lo + h2)
        w = _u_over_r_diff(u_hi, big_hi, u_lo, big_lo, h2, "C")
        v = _inv_r_diff(u_hi, big_hi, u_lo, big_lo)
        return z_s * (x * c * w - v)

    return integrand


def _k_integrand(args, z_s):
    x = args.x
    z2 = z_s * z_s

    def integrand(th):
        c = math.cos(th)
        s = math.sin(th)
        h2 = (x * s) ** 2 + z2
        u_hi = args.r_hi - x * c
        u_lo = args.r_lo - x * c
        big_hi = math.sqrt(u_hi * u_hi + h2)
        big_lo = math.sqrt(u_lo * u_lo + h2)
        w = _u_over_r_diff(u_hi, big_hi, u_lo, big_lo, h2, "K")
        ratio = u_hi / big_hi - u_lo / big_lo
        log_term = _log_u_plus_r_diff(u_hi, big_hi, u_lo, big_lo, h2, "K")
        v = _inv_r_diff(u_hi, big_hi, u_lo, big_lo)
        return c * (log_term - ratio) - x * (c * c - s * s) * v - x * x * c * s * s * w

    return integrand


_HORIZONTAL_INTEGRANDS = {"C": _c_integrand, "K": _k_integrand}


def horizontal_pair(term, args, spec=None, faces=None):
    """C or K at several horizontal faces (default: z_hi and z_lo) in one pass.

    Analytic in r', numeric in theta'.
    """
    faces = (args.z_hi, args.z_lo) if faces is None else faces
    if _is_empty(args):
        return [0.0] * len(faces)
    build = _HORIZONTAL_INTEGRANDS[term]
    integrands = [build(args, z_s) for z_s in faces]
    breaks = []
    for z_s, integrand in zip(faces, integrands):
        if integrand is not None:
            breaks.extend(_angular_breakpoints(args.th_lo, args.th_hi, _horizontal_width(args, z_s)))
    return _integrate_faces(term, integrands, args.th_lo, args.th_hi, spec, breaks)


def integral_C(args, z_s, spec=None):
    """Analytic in r', numeric in theta'."""
    return horizontal_pair("C", args, spec, faces=(z_s,))[0]


def integral_K(args, z_s, spec=None):
    """Analytic in r', numeric in theta'."""
    return horizontal_pair("K", args, spec, faces=(z_s,))[0]


def integral_L(z_s, args):
    if _is_empty(args):
        return 0.0
    x = args.x
    total = 0.0
    # -c * log(u + R), differenced in r' first.
    for th, th_sign in ((args.th_hi, 1.0), (args.th_lo, -1.0)):
        c = math.cos(th)
        h2 = -helper_B(x, th, z_s)
        u_hi = args.r_hi - x * c
        u_lo = args.r_lo - x * c
        big_hi = math.sqrt(u_hi * u_hi + h2)
        big_lo = math.sqrt(u_lo * u_lo + h2)
        total -= th_sign * c * _log_u_plus_r_diff(u_hi, big_hi, u_lo, big_lo, h2, "L")
    # -R/x, differenced in theta' first.
    cos_gap = _cos_diff(args.th_hi, args.th_lo)
    for r, r_sign in ((args.r_hi, 1.0), (args.r_lo, -1.0)):
        if r == 0.0:
            continue
        big_hi, clamped_hi = helper_A_flagged(r, x, args.th_hi, z_s)
        big_lo, clamped_lo = helper_A_flagged(r, x, args.th_lo, z_s)
        if clamped_hi or clamped_lo:
            raise IntegralError("L", "negative distance radicand clamped to 0")
        total += r_sign * 2.0 * r * cos_gap / (big_hi + big_lo)
    return total


# --- singularity guard ------------------------------------------------------


def _near_multiple_of_pi(angle):
    return abs(angle - math.pi * round(angle / math.pi)) < EPS_ANG


def singularity_guard(point, args, nudge_scale=1.0):
    """Move the canonical point off the loci where the closed forms break down.

    Returns the adjusted limits and a report; the nudge never exceeds
    NUDGE_FACTOR * eps_geom * nudge_scale.
    """
    eps_geom = GEOM_REL_EPS * args.characteristic_length
    eps_nudge = NUDGE_FACTOR * eps_geom * nudge_scale
    conditions = []
    dx = 0.0
    dz = 0.0

    if args.x < eps_geom:
        conditions.append(GuardCondition.X_ZERO)
        dx = eps_nudge - args.x
    x_new = args.x + dx

    if _near_multiple_of_pi(args.th_lo) or _near_multiple_of_pi(args.th_hi):
        if abs(args.z_hi) < eps_geom:
            conditions.append(GuardCondition.THETA_NPI_Z0)
            dz = eps_nudge
        elif abs(args.z_lo) < eps_geom:
            conditions.append(GuardCondition.THETA_NPI_Z0)
            dz = -eps_nudge
        for r_lim, outward in ((args.r_hi, 1.0), (args.r_lo, -1.0)):
            if r_lim > 0.0 and abs(r_lim - x_new) < eps_geom:
                conditions.append(GuardCondition.THETA_NPI_R_EQ_X)
                step = outward * eps_nudge
                if x_new + step <= 0.0:
                    step = eps_nudge
                dx += step
                break

    # The r' = 0 edge of a solid tile only matters when the point sits on it.
    if args.r_lo < eps_geom and GuardCondition.X_ZERO in conditions:
        conditions.append(GuardCondition.R_ZERO)

    norm = math.hypot(dx, dz)
    if norm > eps_nudge:
        dx *= eps_nudge / norm
        dz *= eps_nudge / norm

    report = GuardReport(
        triggered=bool(conditions),
        condition=conditions[0] if conditions else None,
        conditions=tuple(conditions),
        nudge_applied=(dx * math.cos(point.psi), dx * math.sin(point.psi), dz),
    )
    return args.moved(dx=dx, dz=dz), report
