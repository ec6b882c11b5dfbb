"""Incomplete elliptic integrals of the first, second and third kind.

All three are built on Carlson's symmetric forms R_F, R_D and R_J (duplication
algorithm, as shipped by ``scipy.special``). Conventions:

* the first argument is the amplitude ``phi`` in radians,
* ``k`` is the modulus (not the parameter ``m = k**2``),
* the third kind integrates ``1 / ((1 - n sin^2) sqrt(1 - k^2 sin^2))``.

Amplitudes outside [-pi/2, pi/2] are continued quasi-periodically,
F(phi + m*pi) = F(phi) + 2 m K(k), and likewise for E and Pi, which also covers
negative amplitudes through odd symmetry.
"""

import math
from dataclasses import dataclass

from scipy.special import elliprd, elliprf, elliprj

DOMAIN_TOL = 1e-12
# Below this the characteristic term is treated as divergent.
MIN_CHARACTERISTIC_GAP = 1e-300


class EllipticDomainError(ValueError):
    """Raised when an argument combination makes the integral diverge or turn complex."""


@dataclass(frozen=True)
class CarlsonTerms:
    """Legendre integrals in difference form.

    ``f`` is F(phi|k); ``d`` is 3 (F - E) / k^2; ``j`` is 3 (Pi - F) / n (None when
    no characteristic was requested). Keeping the differences avoids the
    cancellation that E - F and Pi - F suffer for small k and n.
    """

    f: float
    d: float
    j: float | None = None


def amplitude_from_angle(theta):
    """Amplitude whose sine is cos(theta/2), unrolled continuously across theta = 2*pi*n."""
    return 0.5 * math.pi - 0.5 * theta


def reduce_amplitude(phi):
    """Split phi into (m, phi0) with phi = m*pi + phi0 and phi0 in [-pi/2, pi/2]."""
    m = math.floor(phi / math.pi + 0.5)
    return m, phi - m * math.pi


def carlson_rf(x, y, z):
    return float(elliprf(x, y, z))


def carlson_rd(x, y, z):
    return float(elliprd(x, y, z))


def carlson_rj(x, y, z, p):
    return float(elliprj(x, y, z, p))


def carlson_terms(phi, k2, n=None, *, delta2=None, p=None, kc2=None, nc=None):
    """Evaluate F and the Carlson differences at amplitude ``phi``.

    Callers that know ``1 - k2 sin^2(phi)``, ``1 - n sin^2(phi)``, ``1 - k2`` or
    ``1 - n`` in a cancellation-free closed form pass them as ``delta2``, ``p``,
    ``kc2`` and ``nc``.
    """
    if not (math.isfinite(phi) and math.isfinite(k2)):
        raise EllipticDomainError(f"non-finite elliptic argument phi={phi!r} k2={k2!r}")
    if n is not None and not math.isfinite(n):
        raise EllipticDomainError(f"non-finite characteristic n={n!r}")
    m, phi0 = reduce_amplitude(phi)
    s = math.sin(phi0)
    c = math.cos(phi0)
    s2 = s * s
    c2 = c * c
    if delta2 is None:
        delta2 = 1.0 - k2 * s2
    if delta2 < -DOMAIN_TOL:
        raise EllipticDomainError(f"k^2 sin^2(phi) exceeds 1 (1 - k^2 sin^2 = {delta2:.3e})")
    delta2 = max(delta2, 0.0)
    if delta2 == 0.0 and c2 == 0.0:
        raise EllipticDomainError("first-kind integral diverges at k sin(phi) = 1")

    if s == 0.0:
        f = 0.0
        d = 0.0
    else:
        s3 = s2 * s
        f = s * carlson_rf(c2, delta2, 1.0)
        d = s3 * carlson_rd(c2, delta2, 1.0)

    j = None
    if n is not None:
        if p is None:
            p = 1.0 - n * s2
        if p <= MIN_CHARACTERISTIC_GAP:
            raise EllipticDomainError(f"third-kind integral diverges (1 - n sin^2 = {p:.3e})")
        j = 0.0 if s == 0.0 else s2 * s * carlson_rj(c2, delta2, 1.0, p)

    if m:
        if kc2 is None:
            kc2 = 1.0 - k2
        if kc2 <= 0.0:
            raise EllipticDomainError("complete integral diverges at k = 1")
        f += 2 * m * carlson_rf(0.0, kc2, 1.0)
        d += 2 * m * carlson_rd(0.0, kc2, 1.0)
        if n is not None:
            if nc is None:
                nc = 1.0 - n
            if nc <= MIN_CHARACTERISTIC_GAP:
                raise EllipticDomainError("complete third-kind integral diverges at n = 1")
            j += 2 * m * carlson_rj(0.0, kc2, 1.0, nc)
    return CarlsonTerms(f=f, d=d, j=j)


def ellip_f(phi, k):
    return carlson_terms(phi, k * k).f


def ellip_e(phi, k):
    k2 = k * k
    terms = carlson_terms(phi, k2)
    return terms.f - k2 * terms.d / 3.0


def ellip_pi(phi, n, k):
    terms = carlson_terms(phi, k * k, n)
    if n == 0.0:
        return terms.f
    return terms.f + n * terms.j / 3.0
