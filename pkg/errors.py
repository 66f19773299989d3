"""Exception hierarchy; `exit_code` is what the CLI returns for each family."""

from typing import Any, Optional


class QAError(Exception):
    exit_code = 3

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        payload = {"type": type(self).__name__, "message": self.message}
        if self.details:
            payload["details"] = self.details
        return payload


class ConfigError(QAError):
    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None, **details: Any):
        super().__init__(message, field=field, **details)
        self.field = field


class RangeError(QAError, IndexError):
    pass


class DomainError(QAError, ValueError):
    pass


class AxiomError(QAError):
    def __init__(self, message: str, axiom: str, **details: Any):
        super().__init__(message, axiom=axiom, **details)
        self.axiom = axiom


class QuadratureError(QAError):
    def __init__(self, message: str, partial_value: float, abs_error: float):
        super().__init__(message, partial_value=partial_value, abs_error=abs_error)
        self.partial_value = partial_value
        self.abs_error = abs_error


class StepError(QAError, ValueError):
    pass


class IncompleteFamilyError(QAError, KeyError):
    def __init__(self, subset, alpha):
        super().__init__(
            f"Family entry missing for J={sorted(subset)}, alpha_J={tuple(alpha)}",
            subset=sorted(subset),
            alpha=list(alpha),
        )
        self.subset = subset
        self.alpha = tuple(alpha)

    def __str__(self) -> str:
        return self.message
