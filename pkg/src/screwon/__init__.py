"""Spectrum, dynamics and algebra of a cylindrically symmetric quartic oscillator.

Submodules
----------
core       parameters, dimensionless reduction, potential coefficients
elliptic   Carlson symmetric integrals and complete elliptic integrals
wkb        turning points, the radial action and WKB quantization
radial     finite-difference and shooting radial eigensolvers, Frobenius series
classical  Darboux and L-S equations of motion with an adaptive integrator
algebra    polynomial-coefficient operator algebra and its checks
ince       singularity classification of rational second-order ODEs
cli        command-line interface

Set ``SCREWON_NO_JIT=1`` before import to run the numba kernels as plain
Python.
"""

__version__ = "0.1.0"

from ._jit import JIT_ENABLED
from .core import (DimensionlessParams, ModelParams, PotentialCoeffs, dimensionalize,
                   energy_scaling_form, nondimensionalize, potential_coeffs)
from .errors import (BracketError, ClassicallyForbiddenError, DegenerateTurningPointsError,
                     DomainError, FreeParticleError, NumericalError, ResolutionError,
                     StiffnessError)

__all__ = [
    "__version__",
    "JIT_ENABLED",
    "ModelParams",
    "DimensionlessParams",
    "PotentialCoeffs",
    "potential_coeffs",
    "nondimensionalize",
    "dimensionalize",
    "energy_scaling_form",
    "DomainError",
    "FreeParticleError",
    "ClassicallyForbiddenError",
    "DegenerateTurningPointsError",
    "NumericalError",
    "BracketError",
    "ResolutionError",
    "StiffnessError",
]
