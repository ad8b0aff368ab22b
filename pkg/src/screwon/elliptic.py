"""Complete elliptic integrals K, E and Pi via Carlson symmetric forms.

Arguments use the **modulus** convention: ``zeta`` is the modulus, not the
parameter ``m = zeta**2``.  So ``ellip_K(zeta)`` equals
``scipy.special.ellipk(zeta**2)``.

The Carlson kernels ``rf``, ``rd``, ``rj`` and ``rc`` use the duplication
theorem followed by a truncated Taylor series.  They are compiled with
numba when available and are also called from inside the compiled WKB
action kernel.
"""

import math

from ._jit import njit
from .errors import DomainError

__all__ = [
    "rf", "rd", "rj", "rc",
    "ellip_K", "ellip_E", "ellip_Pi",
    "EllipticModulus",
]

# Duplication stops once every relative deviation drops below these; the
# neglected series terms are then O(tol**6), well below 1e-15.
_RF_TOL = 0.0008
_RD_TOL = 0.0005
_RJ_TOL = 0.0005
_RC_TOL = 0.0005


@njit
def rc(x, y):
    """Carlson's degenerate integral R_C(x, y) for x >= 0, y > 0."""
    xt = x
    yt = y
    while True:
        alamb = 2.0 * math.sqrt(xt) * math.sqrt(yt) + yt
        xt = 0.25 * (xt + alamb)
        yt = 0.25 * (yt + alamb)
        ave = (xt + yt + yt) / 3.0
        s = (yt - ave) / ave
        if abs(s) <= _RC_TOL:
            break
    return (1.0 + s * s * (0.3 + s * (1.0 / 7.0 + s * (0.375 + s * 9.0 / 22.0)))) / math.sqrt(ave)


@njit
def rf(x, y, z):
    """Carlson's R_F(x, y, z); at most one argument may vanish."""
    xt = x
    yt = y
    zt = z
    while True:
        sx = math.sqrt(xt)
        sy = math.sqrt(yt)
        sz = math.sqrt(zt)
        alamb = sx * (sy + sz) + sy * sz
        xt = 0.25 * (xt + alamb)
        yt = 0.25 * (yt + alamb)
        zt = 0.25 * (zt + alamb)
        ave = (xt + yt + zt) / 3.0
        dx = (ave - xt) / ave
        dy = (ave - yt) / ave
        dz = (ave - zt) / ave
        if max(abs(dx), abs(dy), abs(dz)) <= _RF_TOL:
            break
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / math.sqrt(ave)


@njit
def rd(x, y, z):
    """Carlson's R_D(x, y, z) = R_J(x, y, z, z); z > 0."""
    xt = x
    yt = y
    zt = z
    acc = 0.0
    fac = 1.0
    while True:
        sx = math.sqrt(xt)
        sy = math.sqrt(yt)
        sz = math.sqrt(zt)
        alamb = sx * (sy + sz) + sy * sz
        acc += fac / (sz * (zt + alamb))
        fac *= 0.25
        xt = 0.25 * (xt + alamb)
        yt = 0.25 * (yt + alamb)
        zt = 0.25 * (zt + alamb)
        ave = 0.2 * (xt + yt + 3.0 * zt)
        dx = (ave - xt) / ave
        dy = (ave - yt) / ave
        dz = (ave - zt) / ave
        if max(abs(dx), abs(dy), abs(dz)) <= _RD_TOL:
            break
    c1 = 3.0 / 14.0
    c2 = 1.0 / 6.0
    c3 = 9.0 / 22.0
    c4 = 3.0 / 26.0
    c5 = 0.25 * c3
    c6 = 1.5 * c4
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + ec + ec
    series = (1.0 + ed * (-c1 + c5 * ed - c6 * dz * ee)
              + dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea)))
    return 3.0 * acc + fac * series / (ave * math.sqrt(ave))


@njit
def rj(x, y, z, p):
    """Carlson's R_J(x, y, z, p) for x, y, z >= 0 and p > 0."""
    xt = x
    yt = y
    zt = z
    pt = p
    acc = 0.0
    fac = 1.0
    while True:
        sx = math.sqrt(xt)
        sy = math.sqrt(yt)
        sz = math.sqrt(zt)
        alamb = sx * (sy + sz) + sy * sz
        a = pt * (sx + sy + sz) + sx * sy * sz
        a = a * a
        b = pt * (pt + alamb) * (pt + alamb)
        acc += fac * rc(a, b)
        fac *= 0.25
        xt = 0.25 * (xt + alamb)
        yt = 0.25 * (yt + alamb)
        zt = 0.25 * (zt + alamb)
        pt = 0.25 * (pt + alamb)
        ave = 0.2 * (xt + yt + zt + pt + pt)
        dx = (ave - xt) / ave
        dy = (ave - yt) / ave
        dz = (ave - zt) / ave
        dp = (ave - pt) / ave
        if max(abs(dx), abs(dy), abs(dz), abs(dp)) <= _RJ_TOL:
            break
    c1 = 3.0 / 14.0
    c2 = 1.0 / 3.0
    c3 = 3.0 / 22.0
    c4 = 3.0 / 26.0
    c5 = 0.75 * c3
    c6 = 1.5 * c4
    c7 = 0.5 * c2
    c8 = c3 + c3
    ea = dx * (dy + dz) + dy * dz
    eb = dx * dy * dz
    ec = dp * dp
    ed = ea - 3.0 * ec
    ee = eb + 2.0 * dp * (ea - ec)
    series = (1.0 + ed * (-c1 + c5 * ed - c6 * ee)
              + eb * (c7 + dp * (-c8 + dp * c4))
              + dp * ea * (c2 - dp * c3) - c2 * dp * ec)
    return 3.0 * acc + fac * series / (ave * math.sqrt(ave))


# Complete integrals in modulus form; callers guarantee 0 <= z2 < 1, n < 1.
@njit
def _k(z2):
    return rf(0.0, 1.0 - z2, 1.0)


@njit
def _e(z2):
    y = 1.0 - z2
    return rf(0.0, y, 1.0) - z2 * rd(0.0, y, 1.0) / 3.0


@njit
def _pi(n, z2):
    y = 1.0 - z2
    return rf(0.0, y, 1.0) + n * rj(0.0, y, 1.0, 1.0 - n) / 3.0


def _check_modulus(zeta):
    zeta = float(zeta)
    if not math.isfinite(zeta) or zeta < 0.0:
        raise DomainError(f"modulus must satisfy 0 <= zeta < 1, got {zeta!r}")
    if zeta >= 1.0:
        raise DomainError(
            f"modulus zeta={zeta!r} >= 1: K diverges logarithmically at zeta = 1")
    return zeta


class EllipticModulus:
    """Validated modulus with its square cached."""

    __slots__ = ("zeta", "zeta2")

    def __init__(self, zeta):
        z = _check_modulus(zeta)
        self.zeta = z
        self.zeta2 = z * z

    @classmethod
    def from_roots(cls, a, b, c):
        """zeta = sqrt((a - b) / (a - c)) for ordered roots c < b <= a."""
        return cls(math.sqrt((a - b) / (a - c)))

    def __repr__(self):
        return f"EllipticModulus({self.zeta!r})"


def ellip_K(zeta) -> float:
    """Complete elliptic integral of the first kind, modulus convention.

    Parameters
    ----------
    zeta : float
        Modulus in ``[0, 1)``.

    Returns
    -------
    float
        ``K(zeta) = int_0^{pi/2} dtheta / sqrt(1 - zeta^2 sin^2 theta)``.
    """
    z = _check_modulus(zeta)
    return float(_k(z * z))


def ellip_E(zeta) -> float:
    """Complete elliptic integral of the second kind, modulus convention.

    ``zeta = 1`` is allowed here and returns the limit ``E(1) = 1``.
    """
    z = float(zeta)
    if z == 1.0:
        return 1.0
    z = _check_modulus(z)
    return float(_e(z * z))


def ellip_Pi(n, zeta) -> float:
    """Complete elliptic integral of the third kind.

    ``Pi(n, zeta) = int_0^{pi/2} dtheta / ((1 - n sin^2) sqrt(1 - zeta^2 sin^2))``
    with characteristic ``n < 1`` (negative values allowed).
    """
    z = _check_modulus(zeta)
    n = float(n)
    if not math.isfinite(n) or n >= 1.0:
        raise DomainError(f"characteristic must satisfy n < 1, got {n!r}")
    return float(_pi(n, z * z))
