"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class LightConeError(ArithmeticError):
    """The closed-form dynamical force is unavailable inside the light-cone window."""

    def __init__(self, a, window):
        self.a = a
        self.window = window
        super().__init__(
            f"a = {a!r} lies within {window:g} of the light cone a = 1; "
            "the dynamical force diverges there (shrink the exclusion window to opt in)"
        )


class ConvergenceError(ArithmeticError):
    """A numerical limit (extrapolation, summation) failed to converge."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")


class ValidityError(ValueError):
    """Inputs violate the validity conditions of an oracle."""
