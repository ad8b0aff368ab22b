"""Classical dynamics in Darboux and L-S variables.

Darboux state ``(x, y, z, px, py, pz)`` evolves under the quartic
oscillator Hamiltonian

    H = |p|^2 / 2mu + lambda k m L_z / 2mu + alpha r^2 + beta r^4 + k^2 m^2 / 2,

where alpha carries the phase-space p_z (so ``ModelParams.p_z`` plays no
role here; it is conserved and set by the initial state),

and the L-S state ``(L1, L2, L3, S1, S2, S3)`` under the Euler equations

    dL_a/dt = eps_abc K_b S_c,   dS_a/dt = lambda eps_abc S_b L_c,
    K = (0, 0, -k).

Both are integrated by an embedded Dormand-Prince 5(4) pair with
proportional-integral step control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .core import ModelParams, potential_coeffs
from .errors import DomainError, StiffnessError

__all__ = [
    "DarbouxState",
    "LSState",
    "Trajectory",
    "darboux_rhs",
    "ls_rhs",
    "hamiltonian",
    "ls_hamiltonian",
    "casimir",
    "darboux_to_ls",
    "integrate_darboux",
    "integrate_ls",
    "characteristic_time",
    "static_state",
    "static_energy",
    "rotation_number",
]


@dataclass(frozen=True)
class DarbouxState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    px: float = 0.0
    py: float = 0.0
    pz: float = 0.0
    t: float = 0.0

    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.px, self.py, self.pz], dtype=float)

    @classmethod
    def from_array(cls, y, t=0.0) -> "DarbouxState":
        return cls(*(float(v) for v in y[:6]), t=float(t))

    @property
    def Lz(self) -> float:
        return self.x * self.py - self.y * self.px


@dataclass(frozen=True)
class LSState:
    L: tuple = (0.0, 0.0, 0.0)
    S: tuple = (0.0, 0.0, 0.0)
    t: float = 0.0

    def array(self) -> np.ndarray:
        return np.array(list(self.L) + list(self.S), dtype=float)

    @classmethod
    def from_array(cls, y, t=0.0) -> "LSState":
        return cls(tuple(float(v) for v in y[:3]), tuple(float(v) for v in y[3:6]), float(t))


def _alpha0(p: ModelParams) -> float:
    # alpha without its p_z piece; the phase-space p_z supplies that term
    return potential_coeffs(p.replace(p_z=0.0)).alpha


def _darboux_pars(p: ModelParams) -> np.ndarray:
    pc = potential_coeffs(p)
    return np.array([p.lam * p.k * p.m, p.lam * p.k, p.mu, _alpha0(p), pc.beta])


def _ls_pars(p: ModelParams) -> np.ndarray:
    return np.array([p.lam, p.k])


@njit
def _darboux_f(t, y, par, out):
    lkm = par[0]
    lk = par[1]
    mu = par[2]
    alpha0 = par[3]
    beta = par[4]
    x = y[0]
    yy = y[1]
    px = y[3]
    py = y[4]
    pz = y[5]
    r2 = x * x + yy * yy
    out[0] = px / mu - 0.5 * lkm * yy / mu
    out[1] = py / mu + 0.5 * lkm * x / mu
    out[2] = pz / mu - 0.5 * lk * r2 / mu
    alpha = alpha0 - 0.5 * lk * pz / mu
    g = 2.0 * alpha + 4.0 * beta * r2
    out[3] = -0.5 * lkm * py / mu - g * x
    out[4] = 0.5 * lkm * px / mu - g * yy
    out[5] = 0.0


@njit
def _ls_f(t, y, par, out):
    lam = par[0]
    k = par[1]
    L1 = y[0]
    L2 = y[1]
    L3 = y[2]
    S1 = y[3]
    S2 = y[4]
    S3 = y[5]
    # K = (0, 0, -k): dL = K x S
    out[0] = k * S2
    out[1] = -k * S1
    out[2] = 0.0
    out[3] = lam * (S2 * L3 - S3 * L2)
    out[4] = lam * (S3 * L1 - S1 * L3)
    out[5] = lam * (S1 * L2 - S2 * L1)


def darboux_rhs(s, p: ModelParams) -> np.ndarray:
    """Time derivative (dx, dy, dz, dpx, dpy, dpz) of a Darboux state."""
    y = s.array() if isinstance(s, DarbouxState) else np.asarray(s, dtype=float)
    out = np.empty(6)
    _darboux_f(0.0, y, _darboux_pars(p), out)
    return out


def ls_rhs(s, p: ModelParams) -> np.ndarray:
    """Time derivative (dL, dS) of an L-S state."""
    y = s.array() if isinstance(s, LSState) else np.asarray(s, dtype=float)
    out = np.empty(6)
    _ls_f(0.0, y, _ls_pars(p), out)
    return out


def hamiltonian(s, p: ModelParams):
    """Energy of Darboux state(s); accepts a state or an (..., 6) array.

    p_z is taken from the state; ``p.p_z`` is not used.
    """
    y = s.array() if isinstance(s, DarbouxState) else np.asarray(s, dtype=float)
    x, yy, z, px, py, pz = (y[..., i] for i in range(6))
    beta = potential_coeffs(p).beta
    alpha = _alpha0(p) - p.lam * p.k * pz / (2 * p.mu)
    r2 = x * x + yy * yy
    return ((px * px + py * py + pz * pz) / (2 * p.mu)
            + p.lam * p.k * p.m * (x * py - yy * px) / (2 * p.mu)
            + alpha * r2 + beta * r2 * r2 + p.k ** 2 * p.m ** 2 / 2)


def ls_hamiltonian(s, p: ModelParams):
    """H = (S.S + L.L)/2 + k S3 / lambda + k^2 / (2 lambda^2)."""
    y = s.array() if isinstance(s, LSState) else np.asarray(s, dtype=float)
    if p.lam == 0:
        raise DomainError("the L-S form needs lambda != 0")
    L = y[..., :3]
    S = y[..., 3:6]
    return (0.5 * (np.sum(S * S, axis=-1) + np.sum(L * L, axis=-1))
            + p.k * S[..., 2] / p.lam + p.k ** 2 / (2 * p.lam ** 2))


def casimir(s, p: ModelParams):
    """c = |L|^2 / (2 k^2) + S3 / (lambda k)."""
    y = s.array() if isinstance(s, LSState) else np.asarray(s, dtype=float)
    L = y[..., :3]
    return np.sum(L * L, axis=-1) / (2 * p.k ** 2) + y[..., 5] / (p.lam * p.k)


def darboux_to_ls(s, p: ModelParams):
    """Map Darboux variables to L-S variables.

    L = (k y, -k x, -m k),
    S = (px - lambda k m y / 2, py + lambda k m x / 2,
         pz - k / lambda - lambda k r^2 / 2).

    The map identifies momenta with velocities, so it holds for mu = 1.
    Accepts a state or an (..., 6) array and returns the same kind.
    """
    if p.lam == 0:
        raise DomainError("darboux_to_ls needs lambda != 0 (S3 contains k / lambda)")
    if p.mu != 1:
        raise DomainError("darboux_to_ls assumes unit mass mu = 1")
    arr = s.array() if isinstance(s, DarbouxState) else np.asarray(s, dtype=float)
    x, yy, z, px, py, pz = (arr[..., i] for i in range(6))
    k, lam, m = p.k, p.lam, p.m
    out = np.stack([
        k * yy, -k * x, np.full_like(x, -m * k),
        px - 0.5 * lam * k * m * yy,
        py + 0.5 * lam * k * m * x,
        pz - k / lam - 0.5 * lam * k * (x * x + yy * yy),
    ], axis=-1)
    if isinstance(s, DarbouxState):
        return LSState.from_array(out, s.t)
    return out


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 6))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B = _A[6].copy()
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@njit
def _dopri5(f, y0, par, t0, t1, rtol, atol, h0, max_steps, save_every, A, B, C, E):
    n = y0.shape[0]
    cap = 1024
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ts[0] = t0
    ys[0] = y0
    nsave = 1
    k = np.empty((7, n))
    y = y0.copy()
    ytmp = np.empty(n)
    ynew = np.empty(n)
    t = t0
    f(t, y, par, k[0])
    h = h0
    if h <= 0.0:
        # starting step from the derivative scale
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            sc = atol + rtol * abs(y[i])
            d0 += (y[i] / sc) ** 2
            d1 += (k[0, i] / sc) ** 2
        d0 = math.sqrt(d0 / n)
        d1 = math.sqrt(d1 / n)
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h = min(h, t1 - t0)
    err_prev = 1e-4
    steps = 0
    accepted = 0
    status = 0
    while t < t1:
        if steps >= max_steps:
            status = 2
            break
        if h < 1e-14 * max(abs(t), 1.0):
            status = 1
            break
        last = False
        if t + h >= t1:
            h = t1 - t
            last = True
        for s in range(1, 7):
            for i in range(n):
                acc = y[i]
                for j in range(s):
                    acc += h * A[s, j] * k[j, i]
                ytmp[i] = acc
            f(t + C[s] * h, ytmp, par, k[s])
        # 5th-order solution is stage 7's argument (FSAL)
        for i in range(n):
            ynew[i] = ytmp[i]
        err = 0.0
        for i in range(n):
            e = 0.0
            for j in range(7):
                e += E[j] * k[j, i]
            e *= h
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err += (e / sc) ** 2
        err = math.sqrt(err / n)
        steps += 1
        if err <= 1.0:
            t = t1 if last else t + h
            for i in range(n):
                y[i] = ynew[i]
                k[0, i] = k[6, i]
            accepted += 1
            if accepted % save_every == 0 or t >= t1:
                if nsave == cap:
                    cap *= 2
                    ts2 = np.empty(cap)
                    ys2 = np.empty((cap, n))
                    ts2[:nsave] = ts[:nsave]
                    ys2[:nsave] = ys[:nsave]
                    ts = ts2
                    ys = ys2
                ts[nsave] = t
                ys[nsave] = y
                nsave += 1
            # PI controller (Gustafsson)
            fac = 0.9 * err ** -0.14 * err_prev ** 0.08 if err > 0.0 else 5.0
            fac = min(5.0, max(0.2, fac))
            err_prev = max(err, 1e-4)
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return ts[:nsave], ys[:nsave], accepted, status


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    steps: int
    kind: str = "darboux"

    def H(self, p: ModelParams) -> np.ndarray:
        return hamiltonian(self.y, p) if self.kind == "darboux" else ls_hamiltonian(self.y, p)

    @property
    def Lz(self) -> np.ndarray:
        return self.y[:, 0] * self.y[:, 4] - self.y[:, 1] * self.y[:, 3]

    def drift(self, p: ModelParams) -> dict:
        """Largest relative deviation of each conserved quantity."""
        def rel(v):
            v = np.asarray(v, dtype=float)
            scale = max(abs(v[0]), np.max(np.abs(v)), 1e-300)
            return float(np.max(np.abs(v - v[0])) / scale)
        if self.kind == "darboux":
            return {"H": rel(self.H(p)), "pz": rel(self.y[:, 5]), "Lz": _rel_or_abs(self.Lz, self.y, 0)}
        c = casimir(self.y, p)
        L = self.y[:, :3]
        parts = max(float(np.max(np.sum(L * L, axis=1))) / (2 * p.k ** 2),
                    float(np.max(np.abs(self.y[:, 5]))) / abs(p.lam * p.k), 1e-300)
        c_drift = float(np.max(np.abs(c - c[0]))) / max(abs(c[0]), parts)
        return {"H": rel(self.H(p)), "L3": rel(self.y[:, 2]), "casimir": c_drift}

    def to_csv(self, p: ModelParams) -> str:
        """``t,x,y,z,px,py,pz,H,Lz`` rows with 17 significant digits."""
        if self.kind != "darboux":
            raise ValueError("CSV export is defined for Darboux trajectories")
        H = self.H(p)
        Lz = self.Lz
        lines = ["t,x,y,z,px,py,pz,H,Lz"]
        for i in range(len(self.t)):
            vals = [self.t[i], *self.y[i], H[i], Lz[i]]
            lines.append(",".join("%.17g" % v for v in vals))
        return "\n".join(lines) + "\n"


def _rel_or_abs(v, y, _):
    # L_z can vanish identically; measure against the phase-space scale then
    scale = max(abs(v[0]), float(np.max(np.abs(y[:, [0, 1]])) * np.max(np.abs(y[:, [3, 4]]))), 1e-300)
    return float(np.max(np.abs(v - v[0])) / scale)


# Error control runs this much tighter than the requested tolerance so
# that the accumulated drift over long runs stays inside 10 * tol.
_TIGHTEN = 1e-5


def _integrate(f, y0, par, T, tol, save_every, max_steps, kind, t0=0.0, t_eval=None):
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not T >= 0:
        raise DomainError("T must be non-negative")
    itol = max(tol * _TIGHTEN, 1e-15)
    if t_eval is not None:
        te = np.asarray(t_eval, dtype=float)
        if te.ndim != 1 or np.any(np.diff(te) <= 0) or te[0] < t0 or te[-1] > t0 + T:
            raise DomainError("t_eval must increase strictly within [t0, t0 + T]")
        ys = np.empty((te.size, len(y0)))
        cur = np.asarray(y0, dtype=float)
        tc = float(t0)
        steps = 0
        for i, tn in enumerate(te):
            if tn > tc:
                seg = _integrate(f, cur, par, tn - tc, tol, 10 ** 9, max_steps, kind, tc)
                cur = seg.y[-1]
                steps += seg.steps
                tc = tn
            ys[i] = cur
        return Trajectory(te.copy(), ys, steps, kind)
    ts, ys, steps, status = _dopri5(f, np.asarray(y0, dtype=float), par, float(t0), float(t0 + T),
                                    itol, itol, 0.0, int(max_steps), int(save_every),
                                    _A, _B, _C, _E)
    if status == 1:
        raise StiffnessError(f"step size underflow at t={ts[-1]!r}")
    if status == 2:
        raise StiffnessError(f"exceeded {max_steps} steps before t={t0 + T!r}")
    return Trajectory(np.asarray(ts), np.asarray(ys), int(steps), kind)


def integrate_darboux(s0, p: ModelParams, T: float, tol: float = 1e-10,
                      save_every: int = 1, max_steps: int = 50_000_000,
                      t_eval=None) -> Trajectory:
    """Integrate the Darboux equations over [t0, t0 + T].

    Parameters
    ----------
    s0 : DarbouxState or array of 6
    T : float
        Length of the time interval.
    tol : float
        Target for the relative drift of H, p_z and L_z (at most 10 tol).
    save_every : int
        Keep every ``save_every``-th accepted step (the endpoint is always kept).
    t_eval : array, optional
        Report the state exactly at these times instead (the integration
        is restarted at each one).
    """
    y0 = s0.array() if isinstance(s0, DarbouxState) else s0
    t0 = s0.t if isinstance(s0, DarbouxState) else 0.0
    return _integrate(_darboux_f, y0, _darboux_pars(p), T, tol, save_every, max_steps,
                      "darboux", t0, t_eval)


def integrate_ls(s0, p: ModelParams, T: float, tol: float = 1e-10,
                 save_every: int = 1, max_steps: int = 50_000_000,
                 t_eval=None) -> Trajectory:
    """Integrate the L-S Euler equations over [t0, t0 + T]."""
    if p.lam == 0:
        raise DomainError("the L-S form needs lambda != 0")
    y0 = s0.array() if isinstance(s0, LSState) else s0
    t0 = s0.t if isinstance(s0, LSState) else 0.0
    return _integrate(_ls_f, y0, _ls_pars(p), T, tol, save_every, max_steps, "ls", t0, t_eval)


def static_state(z: float = 0.0, t: float = 0.0) -> DarbouxState:
    """Member of the static family: on the axis, at rest, p_z = 0."""
    return DarbouxState(0.0, 0.0, float(z), 0.0, 0.0, 0.0, t)


def static_energy(p: ModelParams) -> float:
    """Energy shared by the whole static family, m^2 k^2 / 2."""
    return 0.5 * p.m ** 2 * p.k ** 2


def characteristic_time(p: ModelParams) -> float:
    """Weak-coupling oscillation period 2 pi sqrt(mu) / |k|."""
    if p.k == 0:
        raise DomainError("no characteristic time for k = 0")
    return 2 * math.pi * math.sqrt(p.mu) / abs(p.k)


def rotation_number(traj: Trajectory) -> float:
    """Mean winding of the (x, y) projection per radial oscillation.

    Reported for inspection only; no value is asserted.
    """
    x, y = traj.y[:, 0], traj.y[:, 1]
    theta = np.unwrap(np.arctan2(y, x))
    r = np.hypot(x, y)
    dr = np.diff(r)
    # count radial maxima
    peaks = np.sum((dr[:-1] > 0) & (dr[1:] <= 0))
    if peaks == 0:
        return math.nan
    return float((theta[-1] - theta[0]) / (2 * math.pi * peaks))
