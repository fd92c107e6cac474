"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ThermoCarlemanError(Exception):
    """Base class for every error raised by this package."""


class ParameterViolation(ThermoCarlemanError, ValueError):
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        msg = f"parameter constraint violated: {name}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DegenerateRoots(ThermoCarlemanError, ValueError):
    pass


class SingularPoint(ThermoCarlemanError, ValueError):
    pass


class EvaluationOverflow(ThermoCarlemanError, OverflowError):
    pass


class QuadratureFailure(ThermoCarlemanError, RuntimeError):
    pass


class DifferentiationFailure(ThermoCarlemanError, RuntimeError):
    pass


class OnLightCone(ThermoCarlemanError, ValueError):
    pass


class StandoffViolation(ThermoCarlemanError, ValueError):
    pass


class InvalidNoiseModel(ThermoCarlemanError, ValueError):
    pass


class SourceInsideDomain(ThermoCarlemanError, ValueError):
    pass


class DegenerateFit(ThermoCarlemanError, ValueError):
    def __init__(self, msg: str, excluded: list[int] | None = None):
        self.excluded = list(excluded or [])
        super().__init__(msg)
