"""Model parameters, dimensionless reductions and potential coefficients.

All energies, lengths and momenta follow the mechanical dimension
assignment

    [mu] = M,  [k] = M^1/2 T^-1,  [m] = L,  [lambda] = M^1/2 L^-1,

and ``p_theta = l * hbar`` throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

from .errors import DomainError, FreeParticleError

__all__ = [
    "ModelParams",
    "DimensionlessParams",
    "PotentialCoeffs",
    "ScaledEnergy",
    "potential_coeffs",
    "nondimensionalize",
    "dimensionalize",
    "energy_scaling_form",
]

_JSON_KEYS = ("lambda", "k", "m", "mu", "hbar", "pz", "l")


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the oscillator.

    ``lam`` is the coupling (``lambda`` in JSON), ``l`` the signed angular
    quantum number.  Defaults are the unit convention mu = m = hbar = 1.
    """

    lam: float = 1.0
    k: float = 1.0
    m: float = 1.0
    mu: float = 1.0
    hbar: float = 1.0
    p_z: float = 0.0
    l: int = 0

    def __post_init__(self):
        for name in ("lam", "k", "m", "mu", "hbar", "p_z"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if self.mu <= 0:
            raise DomainError(f"mu must be positive, got {self.mu!r}")
        if self.hbar <= 0:
            raise DomainError(f"hbar must be positive, got {self.hbar!r}")
        if self.lam < 0:
            raise DomainError(f"lambda must be non-negative, got {self.lam!r}")
        if int(self.l) != self.l:
            raise DomainError(f"l must be an integer, got {self.l!r}")
        object.__setattr__(self, "l", int(self.l))

    @property
    def p_theta(self) -> float:
        return self.l * self.hbar

    def require_spectral(self) -> "ModelParams":
        """Raise unless the parameters admit a discrete spectrum."""
        if self.k == 0:
            raise FreeParticleError()
        if self.m == 0:
            raise DomainError("m must be nonzero for spectral computations")
        return self

    def replace(self, **changes) -> "ModelParams":
        d = asdict(self)
        d.update(changes)
        return ModelParams(**d)

    # JSON schema: {"lambda","k","m","mu","hbar","pz","l"}
    def to_dict(self) -> dict:
        return {
            "lambda": self.lam, "k": self.k, "m": self.m, "mu": self.mu,
            "hbar": self.hbar, "pz": self.p_z, "l": self.l,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        unknown = set(d) - set(_JSON_KEYS)
        if unknown:
            raise DomainError(f"unknown parameter keys: {sorted(unknown)}")
        kw = {}
        for key, attr in zip(_JSON_KEYS, ("lam", "k", "m", "mu", "hbar", "p_z", "l")):
            if key in d:
                kw[attr] = d[key]
        return cls(**kw)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DimensionlessParams:
    lambda_t: float
    hbar_t: float
    p_z_t: float
    g_t: float
    l: int = 0

    @property
    def alpha_t(self) -> float:
        return self.lambda_t ** 2 / 4 - self.lambda_t * self.p_z_t + 1.0

    @property
    def beta_t(self) -> float:
        return self.lambda_t ** 2 / 4


@dataclass(frozen=True)
class PotentialCoeffs:
    """U(r) = alpha r^2 + beta r^4."""

    alpha: float
    beta: float

    def __call__(self, r):
        r2 = r * r
        return self.alpha * r2 + self.beta * r2 * r2


@dataclass(frozen=True)
class ScaledEnergy:
    E: float
    residual: float  # m^2 k^2 g
    g: float


def potential_coeffs(p: ModelParams) -> PotentialCoeffs:
    lk = p.lam * p.k
    alpha = lk * lk * p.m * p.m / (8 * p.mu) - lk * p.p_z / (2 * p.mu) + p.k * p.k / 2
    beta = lk * lk / (8 * p.mu)
    return PotentialCoeffs(alpha, beta)


def nondimensionalize(p: ModelParams) -> DimensionlessParams:
    if p.k == 0 or p.m == 0:
        raise DomainError("nondimensionalization needs k != 0 and m != 0")
    smu = math.sqrt(p.mu)
    lambda_t = p.lam * p.m / smu
    hbar_t = p.hbar / (p.k * p.m * p.m * smu)
    p_z_t = p.p_z / (p.k * p.m * smu)
    return DimensionlessParams(lambda_t, hbar_t, p_z_t, lambda_t / hbar_t, p.l)


def dimensionalize(dp: DimensionlessParams, k: float, m: float, mu: float) -> ModelParams:
    """Inverse of :func:`nondimensionalize` given the scales k, m, mu."""
    smu = math.sqrt(mu)
    return ModelParams(
        lam=dp.lambda_t * smu / m,
        k=k,
        m=m,
        mu=mu,
        hbar=dp.hbar_t * k * m * m * smu,
        p_z=dp.p_z_t * k * m * smu,
        l=dp.l,
    )


def scaled_energy(p: ModelParams, E: float) -> float:
    """E_t = 2E / (k^2 m^2)."""
    return 2.0 * E / (p.k * p.k * p.m * p.m)


def physical_energy(p: ModelParams, E_t: float) -> float:
    return 0.5 * p.k * p.k * p.m * p.m * E_t


def energy_scaling_form(p: ModelParams, E: float) -> ScaledEnergy:
    """Split off the p_z and L_z pieces of an energy.

    What remains, ``m^2 k^2 g``, depends on the parameters only through
    the dimensionless combinations (lambda_t, hbar_t, m p_z / hbar, l).
    """
    rot = p.lam * p.k * p.m * p.l * p.hbar / p.mu
    residual = E - p.p_z * p.p_z / (2 * p.mu) - rot
    scale = p.m * p.m * p.k * p.k
    return ScaledEnergy(E, residual, residual / scale if scale else math.nan)
