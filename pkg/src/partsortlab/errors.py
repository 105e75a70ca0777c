"""Exception hierarchy shared across the package."""


class PartsortError(Exception):
    """Base class for all errors raised by partsortlab."""


class PreconditionError(PartsortError, ValueError):
    """An index range or rank handed to a sort routine is invalid."""


class ParameterError(PartsortError, ValueError):
    """A distribution or numeric parameter is outside its domain."""


class MeasurementError(PartsortError, RuntimeError):
    """The clock produced an unusable reading."""


class MissingCellError(PartsortError, KeyError):
    """A factorial grid lacks one or more level combinations."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing cells: {self.missing}")

    def __str__(self):
        return f"missing cells: {self.missing}"


class RankError(PartsortError, ValueError):
    """Fewer data points than basis functions."""


class SingularityError(PartsortError, ValueError):
    """Design matrix is rank deficient."""

    def __init__(self, dependent):
        self.dependent = list(dependent)
        super().__init__(f"rank-deficient design; dependent columns: {self.dependent}")


class BalanceError(PartsortError, ValueError):
    """Observations do not form a balanced complete factorial."""

    def __init__(self, deficient, replicates=None):
        self.deficient = list(deficient)
        msg = f"unbalanced design; deficient cells: {self.deficient}"
        if replicates is not None:
            msg += f" (expected {replicates} observations each)"
        super().__init__(msg)


class PlanError(PartsortError, ValueError):
    """Experiment plan file has a syntax or semantic problem."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        super().__init__(message)
