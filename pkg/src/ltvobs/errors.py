class DimensionError(ValueError):
    pass


class IntegrationError(ArithmeticError):
    """A derivative or state became non-finite during integration."""

    def __init__(self, t, quantity="state"):
        self.t = t
        self.quantity = quantity
        super().__init__(f"non-finite {quantity} at t={t:.6g}")


class DivergenceError(IntegrationError):
    pass


class GridAlignmentError(ValueError):
    pass


class OutOfRangeError(LookupError):
    """Query time not covered by a stored history."""


class ConfigError(ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
