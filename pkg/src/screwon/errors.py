"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the operation is defined."""


class FreeParticleError(DomainError):
    """k = 0: the radial problem has a continuous (Bessel) spectrum."""

    def __init__(self, msg="free-particle: continuous spectrum (k = 0)"):
        super().__init__(msg)


class ClassicallyForbiddenError(DomainError):
    """No classically allowed radial window exists at the requested energy."""

    def __init__(self, energy, e_min):
        self.energy = energy
        self.e_min = e_min
        super().__init__(
            f"classically forbidden: E={energy!r} is below the effective "
            f"potential minimum E_min={e_min!r}"
        )


class DegenerateTurningPointsError(DomainError):
    """The two turning points bounding the allowed window coincide."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its accuracy contract."""


class BracketError(NumericalError):
    """A root could not be bracketed below the configured ceiling."""

    def __init__(self, target, ceiling):
        self.target = target
        self.ceiling = ceiling
        super().__init__(
            f"root not bracketed: action never reached {target!r} "
            f"below the energy ceiling {ceiling!r}"
        )


class ResolutionError(NumericalError):
    """The radial grid or box is too small for the requested levels."""


class StiffnessError(NumericalError):
    """Adaptive step size underflowed."""
