"""Exception types shared across the package."""


class VarboundError(Exception):
    """Base class for package-specific failures."""


class OutsideDomainError(VarboundError, ValueError):
    """A point fell outside the cube plus its evaluation margin."""

    def __init__(self, point, message="point outside cube+margin"):
        self.point = point
        super().__init__(f"{message}: {point!r}")


class NonFiniteSampleError(VarboundError, ArithmeticError):
    """An integrand sample came back NaN or infinite."""

    def __init__(self, point, value):
        self.point = point
        self.value = value
        super().__init__(f"non-finite integrand sample {value!r} at {point!r}")


class CapabilityError(VarboundError, ValueError):
    """Requested problem size exceeds what an exact routine can enumerate."""


class OracleMismatchError(VarboundError, ArithmeticError):
    """A quadrature value disagreed with its closed-form cross-check."""

    def __init__(self, computed, expected, context=""):
        self.computed = computed
        self.expected = expected
        super().__init__(f"cross-check failed{': ' + context if context else ''}: "
                         f"computed {computed!r}, expected {expected!r}")
