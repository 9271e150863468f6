"""Exceptions raised by the solvers and the experiment harness.

Every error carries a machine-readable ``code`` so the CLI can report it as
JSON on stderr.
"""


class EquilibrateError(Exception):
    code = "ERROR"

    def __init__(self, detail, code=None):
        super().__init__(detail)
        self.detail = detail
        if code is not None:
            self.code = code

    def to_dict(self):
        return {"error": self.code, "detail": self.detail}


class DimensionMismatchError(EquilibrateError, ValueError):
    code = "DIMENSION_MISMATCH"


class DomainError(EquilibrateError, ValueError):
    """A point lies outside the domain an operation is defined on."""

    code = "OUTSIDE_DOMAIN"


class NumericalError(EquilibrateError, ArithmeticError):
    code = "NUMERICAL_FAILURE"

    def __init__(self, detail, iteration=None):
        super().__init__(detail)
        self.iteration = iteration

    def to_dict(self):
        payload = super().to_dict()
        payload["iteration"] = self.iteration
        return payload


class GameValidationError(EquilibrateError, ValueError):
    """A tree game violates one of its structural invariants."""

    def __init__(self, code, detail, node=None):
        super().__init__(detail, code=code)
        self.node = node

    def to_dict(self):
        payload = super().to_dict()
        payload["node"] = self.node
        return payload


class ConfigError(EquilibrateError, ValueError):
    code = "INVALID_CONFIG"
