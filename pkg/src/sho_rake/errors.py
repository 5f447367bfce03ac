"""Exception types shared across the package."""


class ShoRakeError(Exception):
    pass


class SingularityError(ShoRakeError):
    """A partial-fraction denominator is (numerically) zero.

    Raised when two average SNRs inside one hypoexponential block coincide.
    Spread the profile with :func:`sho_rake.pdp.apply_distinctness_jitter`.
    """

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class CapacityError(ShoRakeError):
    """Requested enumeration would exceed the term-count guard."""


class QuadratureError(ShoRakeError):
    """Adaptive cubature did not reach tolerance within the depth budget."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class ConfigError(ShoRakeError):
    """Invalid run configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
