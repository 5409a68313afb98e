class EngineError(Exception):
    """Base class for numerical failures raised by the engines."""


class ZeroDivisorOrZero(EngineError):
    """Inverse requested for a bicomplex zero divisor or zero."""


class StepTooLarge(EngineError):
    """Richardson estimate between h and h/2 exceeded the tolerance."""


class DegeneratePair(EngineError):
    """Vec(conj(F)G) vanishes (relative to |F||G|) at an evaluation point."""


class QuadratureNotConverged(EngineError):
    """Node doubling reached its cap before the requested tolerance."""


class ZeroDivisorCoefficient(EngineError):
    """A Vekua coefficient b is zero or a zero divisor where the theory needs it not to be."""


class SolutionVanishes(EngineError):
    """The particular solution f0 of -f0'' + nu f0 = 0 has a zero on the domain."""


class ConfigError(Exception):
    """Run configuration could not be parsed or validated."""

    def __init__(self, message: str, key: str = ""):
        super().__init__(message)
        self.key = key
