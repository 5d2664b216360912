"""Exception types raised across the package.

Plain argument problems raise ``ValueError``; the classes here mark failures
that callers (notably the CLI) need to tell apart.
"""


class WaveguideError(Exception):
    """Base class for package-specific failures."""


class ConfigurationError(WaveguideError, ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class IntegrationFailure(WaveguideError, RuntimeError):
    """The adaptive integrator could not advance (step-size underflow, NaN)."""

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} at t={time:.6g} us")


class NumericalInstabilityError(WaveguideError, RuntimeError):
    """A recorded density matrix violated trace/Hermiticity/positivity by more than 10x tolerance."""

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} at t={time:.6g} us")


class NumericalFailure(WaveguideError, RuntimeError):
    pass


class OptimizationFailure(WaveguideError, RuntimeError):
    pass


class DegenerateInputError(WaveguideError, ValueError):
    def __init__(self, message: str, indices):
        self.indices = tuple(indices)
        super().__init__(f"{message} (indices {list(self.indices)})")


class UnsupportedError(WaveguideError, ValueError):
    pass
