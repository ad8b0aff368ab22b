"""Leading-order WKB quantization of the radial motion.

With ``x = r**2`` the action between the turning points is

    S(E) = int_b^a dx/(2x) sqrt(Q(x)),
    Q(x) = A1 x - 2 mu alpha x^2 - 2 mu beta x^3 - p_theta^2,
    A1   = 2 mu E - p_z^2 - p_theta lambda k m - k^2 m^2 mu,

and levels solve ``S(E_n) = (n + maslov) pi hbar``.  ``maslov = 0`` is the
plain integer rule; ``maslov = 1/2`` is the usual Maslov-corrected rule
(exact for the isotropic harmonic oscillator when p_theta = l hbar).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from ._jit import njit
from .core import ModelParams, potential_coeffs
from .elliptic import EllipticModulus, _k, _pi, rd
from .errors import (
    BracketError,
    ClassicallyForbiddenError,
    DegenerateTurningPointsError,
    DomainError,
)

__all__ = [
    "ActionProblem",
    "SpectrumRow",
    "SpectrumTable",
    "effective_minimum",
    "turning_points",
    "action_integral",
    "action",
    "quantize",
    "quantize_sweep",
    "weak_coupling_spectrum",
    "fit_power_law",
    "PowerLawFit",
    "map_to_zj",
    "ZJMap",
]

# Elliptic terms may cancel; beyond this ratio of largest term to result
# the cancellation-free trapezoid form is used instead.
_CANCEL_LIMIT = 1.0e4


# ---------------------------------------------------------------------------
# kernels


@njit
def _g(x, A1, tma, tmb, p2):
    # Q(x)/x
    return A1 - tma * x - tmb * x * x - p2 / x


@njit
def _dg(x, tma, tmb, p2):
    return -tma - 2.0 * tmb * x + p2 / (x * x)


@njit
def _xstar(tma, tmb, p2):
    """Positive minimizer of f(x) = tma x + tmb x^2 + p2/x (0 if none)."""
    if p2 == 0.0:
        if tma >= 0.0 or tmb == 0.0:
            return 0.0
        return -tma / (2.0 * tmb)
    if tmb == 0.0:
        return math.sqrt(p2 / tma)
    # h(x) = 2 tmb x^3 + tma x^2 - p2 has a single positive root
    lo = 0.0
    hi = 1.0
    while 2.0 * tmb * hi ** 3 + tma * hi * hi - p2 < 0.0:
        lo = hi
        hi *= 2.0
    x = hi
    for _ in range(200):
        h = 2.0 * tmb * x ** 3 + tma * x * x - p2
        if h > 0.0:
            hi = x
        else:
            lo = x
        dh = 6.0 * tmb * x * x + 2.0 * tma * x
        xn = x - h / dh if dh > 0.0 else 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 4e-16 * x:
            return xn
        x = xn
    return x


@njit
def _root_in(lo, hi, A1, tma, tmb, p2):
    """Root of g on [lo, hi] where g changes sign; Newton with bisection."""
    glo = _g(lo, A1, tma, tmb, p2)
    x = 0.5 * (lo + hi)
    for _ in range(400):
        gx = _g(x, A1, tma, tmb, p2)
        if gx == 0.0:
            return x
        if (gx > 0.0) == (glo > 0.0):
            lo = x
            glo = gx
        else:
            hi = x
        d = _dg(x, tma, tmb, p2)
        xn = x - gx / d if d != 0.0 else 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 2e-16 * abs(x) or hi - lo <= 2e-16 * abs(x):
            return xn
        x = xn
    return x


@njit
def _window(A1, tma, tmb, p2):
    """Turning points (c, b, a) of Q for an energy above the minimum.

    Returns c = -inf when beta = 0 (Q is then quadratic).
    """
    if p2 == 0.0:
        # Q = x (A1 - tma x - tmb x^2): one root at 0, the rest a quadratic
        if tmb == 0.0:
            return -math.inf, 0.0, A1 / tma
        disc = tma * tma + 4.0 * tmb * A1
        sq = math.sqrt(max(disc, 0.0))
        # roots of tmb x^2 + tma x - A1 = 0
        q = -0.5 * (tma + math.copysign(sq, tma))
        r1 = q / tmb
        r2 = -A1 / q if q != 0.0 else 0.0
        hi = max(r1, r2)
        lo = min(r1, r2)
        if lo > 0.0:
            return 0.0, lo, hi
        return lo, 0.0, hi
    xs = _xstar(tma, tmb, p2)
    b = _root_in(0.0 + 1e-300, xs, A1, tma, tmb, p2) if xs > 0 else 0.0
    hi = 2.0 * xs
    while _g(hi, A1, tma, tmb, p2) > 0.0:
        hi *= 2.0
    a = _root_in(xs, hi, A1, tma, tmb, p2)
    if tmb == 0.0:
        return -math.inf, b, a
    # product of roots of the monic cubic is -p2 / tmb
    c = -p2 / (tmb * a * b)
    return c, b, a


@njit
def _action_elliptic(A1, tma, tmb, p2, c, b, a):
    """Action as the combination of complete elliptic integrals.

    Returns (S, largest |term|) so callers can judge cancellation.
    """
    s = a - c
    z2 = (a - b) / s
    y = 1.0 - z2
    sq = math.sqrt(s)
    K = _k(z2)
    D = z2 * rd(0.0, y, 1.0) / 3.0  # K - E
    E = K - D
    I0 = 2.0 * K / sq
    # (b - c) Pi(z2, z) = (a - c) E
    I1 = 2.0 * (s * E + c * K) / sq
    I2 = (4.0 * sq * (a + b + c) / 3.0) * E + 2.0 * (a * (c - b) + c * (b + 2.0 * c)) / (3.0 * sq) * K
    t0 = A1 * I0
    t1 = -tma * I1
    t2 = -tmb * I2
    # magnitudes before cancellation, inner sums included
    m1 = tma * 2.0 * (abs(s * E) + abs(c * K)) / sq
    m2 = tmb * (abs(4.0 * sq * (a + b + c) / 3.0 * E)
                + 2.0 * (abs(a * (c - b)) + abs(c * (b + 2.0 * c))) / (3.0 * sq) * K)
    t3 = 0.0
    m3 = 0.0
    if p2 != 0.0:
        P = _pi(z2 * c / b, z2)
        Im = 2.0 * ((c - b) * P + b * K) / (c * b * sq)
        t3 = -p2 * Im
        m3 = p2 * 2.0 * (abs((c - b) * P) + abs(b * K)) / abs(c * b * sq)
    pref = 0.5 / math.sqrt(tmb)
    big = (abs(t0) + m1 + m2 + m3) * pref
    return pref * (t0 + t1 + t2 + t3), big


@njit
def _trap_terms(theta_n, mid, half, tma, tmb, w0s):
    # both integrands of _action_trapezoid summed over the given nodes
    f1 = 0.0
    f2 = 0.0
    for j in range(theta_n.shape[0]):
        ct = math.cos(theta_n[j])
        x = mid + half * ct
        w = tma + tmb * (x + 2.0 * mid)
        sw = math.sqrt(w)
        f1 += (mid - half * ct) * sw
        f2 += 1.0 / (sw + w0s)
    return f1, f2


@njit
def _action_trapezoid(tma, tmb, p2, b, a):
    """Cancellation-free form of the action on theta in [0, pi].

    With x = m + h cos(theta) and w(x) = Q(x) / ((a - x)(x - b)),

        S = 1/2 int (m - h cos) sqrt(w) dtheta
            - mu beta a b int dtheta / (sqrt(w(x)) + sqrt(w(0)))
            - pi |p_theta| / 2,

    where both integrands are smooth and periodic, so the trapezoid rule
    converges geometrically.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (a - b)
    ab = a * b
    w0s = math.sqrt(tma + tmb * 2.0 * mid)
    n = 8
    # endpoints weighted 1/2
    x0 = mid + half
    x1 = mid - half
    w_a = math.sqrt(tma + tmb * (x0 + 2.0 * mid))
    w_b = math.sqrt(tma + tmb * (x1 + 2.0 * mid))
    e1 = 0.5 * ((mid - half) * w_a + (mid + half) * w_b)
    e2 = 0.5 * (1.0 / (w_a + w0s) + 1.0 / (w_b + w0s))
    nodes = np.empty(n - 1)
    for j in range(1, n):
        nodes[j - 1] = math.pi * j / n
    f1, f2 = _trap_terms(nodes, mid, half, tma, tmb, w0s)
    s1 = e1 + f1
    s2 = e2 + f2
    prev = math.inf
    cur = 0.0
    for _ in range(22):
        h = math.pi / n
        cur = 0.5 * (s1 * h) - 0.5 * tmb * ab * (s2 * h) - 0.5 * math.pi * math.sqrt(p2)
        scale = 0.5 * abs(s1 * h)
        if abs(cur - prev) <= 1e-15 * scale:
            break
        prev = cur
        # refine: add midpoints
        mids = np.empty(n)
        for j in range(n):
            mids[j] = math.pi * (j + 0.5) / n
        g1, g2 = _trap_terms(mids, mid, half, tma, tmb, w0s)
        s1 += g1
        s2 += g2
        n *= 2
    return cur


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class ActionProblem:
    """Turning-point data for one (params, energy) pair.

    ``cubic`` holds (c3, c2, c1, c0) with Q(x) = c3 x^3 + c2 x^2 + c1 x + c0;
    ``roots`` is (c, b, a) with the allowed window [b, a].  When beta = 0
    the cubic degenerates to a quadratic and ``c = -inf``.
    """

    params: ModelParams
    E0: float
    cubic: tuple
    roots: tuple
    zeta: EllipticModulus | None

    @property
    def A1(self) -> float:
        return self.cubic[2]

    def Q(self, x):
        c3, c2, c1, c0 = self.cubic
        return ((c3 * x + c2) * x + c1) * x + c0

    @property
    def scale(self) -> float:
        """Magnitude scale of Q on the window, for residual checks."""
        c3, c2, c1, c0 = self.cubic
        x = max(abs(self.roots[2]), 1e-300)
        return max(abs(c3) * x ** 3, abs(c2) * x * x, abs(c1) * x, abs(c0))


@dataclass(frozen=True)
class SpectrumRow:
    n: int
    l: int
    p_z: float
    E: float
    method: str
    residual: float


@dataclass
class SpectrumTable:
    """Energy levels with provenance.

    ``quantity`` is ``"E"`` for physical energies or ``"E1_t"`` for the
    dimensionless radial eigenvalue.
    """

    rows: list = field(default_factory=list)
    lam: float = math.nan
    k: float = math.nan
    quantity: str = "E"

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.E for r in self.rows])

    @property
    def ns(self) -> np.ndarray:
        return np.array([r.n for r in self.rows], dtype=int)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def is_increasing(self) -> bool:
        groups = {}
        for r in sorted(self.rows, key=lambda r: r.n):
            groups.setdefault((r.l, r.p_z, r.method), []).append(r.E)
        return all(np.all(np.diff(v) > 0) for v in groups.values())

    def to_csv(self, extra: dict | None = None) -> str:
        """CSV text with header ``n,l,pz,lambda,k,E,method,residual``.

        ``extra`` maps additional column names to per-row value lists.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["n", "l", "pz", "lambda", "k", "E", "method", "residual"]
        extra = extra or {}
        w.writerow(cols + list(extra))
        order = sorted(range(len(self.rows)), key=lambda i: self.rows[i].n)
        for i in order:
            r = self.rows[i]
            vals = [r.n, r.l, repr(float(r.p_z)), repr(float(self.lam)),
                    repr(float(self.k)), repr(float(r.E)), r.method,
                    repr(float(r.residual))]
            vals += [repr(float(v[i])) for v in extra.values()]
            w.writerow(vals)
        return buf.getvalue()


# ---------------------------------------------------------------------------
# operations


def _coeffs(p: ModelParams, E0: float):
    pc = potential_coeffs(p)
    pth = p.p_theta
    A1 = 2 * p.mu * E0 - p.p_z ** 2 - pth * p.lam * p.k * p.m - p.k ** 2 * p.m ** 2 * p.mu
    return A1, 2 * p.mu * pc.alpha, 2 * p.mu * pc.beta, pth * pth


def _energy_from_A1(p: ModelParams, A1: float) -> float:
    return (A1 + p.p_z ** 2 + p.p_theta * p.lam * p.k * p.m + p.k ** 2 * p.m ** 2 * p.mu) / (2 * p.mu)


def effective_minimum(p: ModelParams) -> float:
    """Lowest energy at which a classically allowed radial window opens."""
    p.require_spectral()
    _, tma, tmb, p2 = _coeffs(p, 0.0)
    if tmb == 0.0 and tma <= 0.0:
        raise DomainError("unbounded radial potential (alpha <= 0 with beta = 0)")
    xs = _xstar(tma, tmb, p2)
    fmin = tma * xs + tmb * xs * xs + (p2 / xs if p2 else 0.0)
    return _energy_from_A1(p, fmin)


def turning_points(p: ModelParams, E0: float) -> ActionProblem:
    """Solve Q(x) = 0 and classify the allowed window at energy ``E0``.

    Raises
    ------
    ClassicallyForbiddenError
        ``E0`` does not exceed the minimum of the effective potential.
    DegenerateTurningPointsError
        The window [b, a] has collapsed to within 1e-12 relative.
    """
    e_min = effective_minimum(p)
    if not E0 > e_min:
        if math.isclose(E0, e_min, rel_tol=1e-12, abs_tol=0.0):
            raise DegenerateTurningPointsError(
                f"E0={E0!r} sits at the potential minimum {e_min!r}")
        raise ClassicallyForbiddenError(E0, e_min)
    A1, tma, tmb, p2 = _coeffs(p, E0)
    c, b, a = _window(A1, tma, tmb, p2)
    if a - b <= 1e-12 * abs(a):
        raise DegenerateTurningPointsError(
            f"turning points coincide: b={b!r}, a={a!r}")
    zeta = EllipticModulus.from_roots(a, b, c) if math.isfinite(c) else EllipticModulus(0.0)
    cubic = (-tmb, -tma, A1, -p2)
    return ActionProblem(p, float(E0), cubic, (c, b, a), zeta)


def action_integral(ap: ActionProblem, method: str = "auto") -> float:
    """Radial action S between the turning points of ``ap``.

    Parameters
    ----------
    ap : ActionProblem
    method : {"auto", "elliptic", "trapezoid"}
        ``elliptic`` evaluates the closed combination of K, E and Pi;
        ``trapezoid`` uses the cancellation-free periodic quadrature;
        ``auto`` takes the elliptic value unless its terms cancel by more
        than four digits (small beta, or energies just above the minimum).
    """
    c, b, a = ap.roots
    if not a > b:
        return 0.0
    tmb, tma, A1, p2 = -ap.cubic[0], -ap.cubic[1], ap.cubic[2], -ap.cubic[3]
    if tmb == 0.0:
        # quadratic Q: closed form
        return 0.5 * math.pi * (A1 / (2.0 * math.sqrt(tma)) - math.sqrt(p2))
    if method == "trapezoid":
        return float(_action_trapezoid(tma, tmb, p2, b, a))
    if method not in ("auto", "elliptic"):
        raise ValueError(f"unknown method {method!r}")
    S, big = _action_elliptic(A1, tma, tmb, p2, c, b, a)
    if method == "auto" and big > _CANCEL_LIMIT * abs(S):
        return float(_action_trapezoid(tma, tmb, p2, b, a))
    return float(S)


def action(p: ModelParams, E: float, method: str = "auto") -> float:
    """S(E), taken as 0 at and below the bottom of the effective potential."""
    try:
        ap = turning_points(p, E)
    except (ClassicallyForbiddenError, DegenerateTurningPointsError):
        return 0.0
    return action_integral(ap, method)


def _bracket(p: ModelParams, target: float, e_min: float, ceiling: float):
    step = max(abs(e_min), p.hbar * abs(p.k) / math.sqrt(p.mu), 1e-300)
    lo, hi = e_min, e_min + step
    while action(p, hi) < target:
        lo = hi
        step *= 2.0
        hi = e_min + step
        if hi > ceiling:
            raise BracketError(target, ceiling)
    return lo, hi


def quantize(p: ModelParams, n_range: Iterable[int], maslov: float = 0.0,
             e_ceiling: float | None = None) -> SpectrumTable:
    """Solve ``S(E_n) = (n + maslov) pi hbar`` for each n.

    Parameters
    ----------
    p : ModelParams
    n_range : iterable of int
        Level numbers; each must satisfy ``n + maslov > 0``.
    maslov : float
        Constant added to n.  0 gives the integer rule (n >= 1).
    e_ceiling : float, optional
        Largest energy tried while bracketing; defaults to 1e300.
    """
    p.require_spectral()
    ceiling = 1e300 if e_ceiling is None else float(e_ceiling)
    e_min = effective_minimum(p)
    table = SpectrumTable(lam=p.lam, k=p.k)
    for n in sorted(int(v) for v in n_range):
        if n + maslov <= 0:
            raise DomainError(f"need n + maslov > 0, got n={n}, maslov={maslov}")
        target = (n + maslov) * math.pi * p.hbar
        lo, hi = _bracket(p, target, e_min, ceiling)
        E = _solve(p, target, lo, hi)
        res = abs(action(p, E) - target) / target
        table.rows.append(SpectrumRow(n, p.l, p.p_z, E, "wkb", res))
    return table


def _solve(p, target, lo, hi):
    return brentq(lambda e: action(p, e) - target, lo, hi,
                  xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def quantize_sweep(p: ModelParams, n_values: Sequence[int], maslov: float = 0.0,
                   per_decade: int = 25, polish: bool = True) -> SpectrumTable:
    """Levels from a tabulated action, for long sweeps.

    S is tabulated on a geometric grid of ``E - E_min`` with ``per_decade``
    points per decade, inverted by monotone cubic (PCHIP) interpolation,
    and optionally polished with Brent's method inside the grid cell.
    """
    p.require_spectral()
    e_min = effective_minimum(p)
    ns = sorted(int(v) for v in n_values)
    targets = [(n + maslov) * math.pi * p.hbar for n in ns]
    _, top = _bracket(p, max(targets), e_min, 1e300)
    d_top = top - e_min
    d_lo = d_top * 1e-6
    _, first = _bracket(p, min(targets), e_min, 1e300)
    d_lo = min(d_lo, 0.5 * (first - e_min))
    npts = max(int(math.ceil(per_decade * math.log10(d_top / d_lo))) + 1, 4)
    d = np.geomspace(d_lo, d_top, npts)
    S = np.array([action(p, e_min + v) for v in d])
    inv = PchipInterpolator(S, d)
    table = SpectrumTable(lam=p.lam, k=p.k)
    for n, t in zip(ns, targets):
        dE = float(inv(t))
        E = e_min + dE
        if polish:
            j = int(np.searchsorted(S, t))
            j = min(max(j, 1), len(d) - 1)
            E = _solve(p, t, e_min + d[j - 1], e_min + d[j])
        res = abs(action(p, E) - t) / t
        table.rows.append(SpectrumRow(n, p.l, p.p_z, E, "wkb", res))
    return table


def weak_coupling_spectrum(p: ModelParams, n_x_plus_n_y: int) -> float:
    """Exact lambda -> 0 level ``k^2 m^2/2 + (N + 1) hbar |k| / sqrt(mu) + p_z^2 / 2 mu``."""
    N = int(n_x_plus_n_y)
    if N < 0:
        raise DomainError("n_x + n_y must be non-negative")
    return (p.k ** 2 * p.m ** 2 / 2 + (N + 1) * p.hbar * abs(p.k) / math.sqrt(p.mu)
            + p.p_z ** 2 / (2 * p.mu))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    r2: float


def fit_power_law(xs, ys) -> PowerLawFit:
    """Least-squares fit of ``log y = exponent * log x + log prefactor``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("xs and ys must be 1-d arrays of equal length")
    if x.size < 3:
        raise DomainError("need at least 3 points for a power-law fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("power-law fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    fitted = slope * lx + icpt
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(math.exp(icpt)), r2)


@dataclass(frozen=True)
class ZJMap:
    g: float
    energy_shift: float
    mu_plus: float
    mu_minus: float

    def calE(self, E: float) -> float:
        """Shifted energy E - energy_shift."""
        return E - self.energy_shift


def map_to_zj(p: ModelParams) -> ZJMap:
    """Mass and coupling that map the radial problem to the standard form.

    The mass solves ``16 M^2 - 4 k^2 hbar^2 M - hbar^2 (lambda^2 k^2 m^2
    - 4 lambda k p_z) = 0``; the larger root is used, and the coupling is
    ``g = -beta / (2 alpha(M)^2)`` with alpha, beta evaluated at mass M.
    """
    a, b, c = 16.0, -4.0 * p.k ** 2 * p.hbar ** 2, -p.hbar ** 2 * (
        p.lam ** 2 * p.k ** 2 * p.m ** 2 - 4.0 * p.lam * p.k * p.p_z)
    disc = b * b - 4 * a * c
    if disc < 0:
        raise DomainError(f"mass quadratic has negative discriminant {disc!r}")
    sq = math.sqrt(disc)
    mu_p = (-b + sq) / (2 * a)
    mu_m = (-b - sq) / (2 * a)
    if mu_p <= 0:
        raise DomainError("no positive mass root")
    pc = potential_coeffs(p.replace(mu=mu_p))
    if pc.alpha <= 0:
        raise DomainError(f"alpha(mu_plus) = {pc.alpha!r} must be positive")
    g = -pc.beta / (2 * pc.alpha ** 2)
    shift = (p.p_z ** 2 / (2 * mu_p) + p.hbar * p.l * p.lam * p.k * p.m / (2 * mu_p)
             + p.k ** 2 * p.m ** 2 / 2)
    return ZJMap(g, shift, mu_p, mu_m)
