from typing import Sequence


class CompatError(Exception):
    pass


class InputError(CompatError):
    """Bad arguments: caught before any computation runs."""


class ComputationError(CompatError):
    """Valid arguments that the requested computation cannot handle."""


class NegativeCountError(InputError):
    pass


class NonIntegerCountError(InputError):
    pass


class EmptyTableError(InputError):
    pass


class InvalidPsiError(InputError):
    pass


class InvalidAlphaError(InputError):
    pass


class InvalidPError(InputError):
    pass


class InvalidGridError(InputError):
    pass


class InvalidKError(InputError):
    pass


class InvalidSpecError(InputError):
    pass


class DegeneratePriorError(InputError):
    pass


class UnsupportedFormatError(InputError):
    pass


class NonpositiveSEError(InputError):
    pass


class ExpressionError(InputError):
    def __init__(self, text: str, errors: Sequence[str]):
        self.text = text
        self.errors = list(errors)
        super().__init__(f"could not read {text!r}: {'; '.join(self.errors)}")


class ZeroExpectedCountError(ComputationError):
    pass


class ZeroCellError(ComputationError):
    pass


class BoundaryEstimateError(ComputationError):
    def __init__(self, value: float, message: str = ""):
        self.value = value
        super().__init__(message or f"point estimate lies on the boundary ({value})")


class NonConvergenceError(ComputationError):
    pass


class SeparatedDataError(ComputationError):
    pass


class EmptyCurveError(ComputationError):
    pass


class ReportWriteError(ComputationError):
    pass
