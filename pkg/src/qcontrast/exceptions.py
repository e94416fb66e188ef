"""Exception hierarchy; each class carries the CLI exit status it maps to."""


class QContrastError(Exception):
    exit_code = 1


class DomainError(QContrastError, ValueError):
    """Invalid argument or configuration."""

    exit_code = 2


class DataError(DomainError):
    """Input data unusable (missing columns, too few groups, non-numeric cells)."""

    exit_code = 3


class NumericalError(QContrastError, ArithmeticError):
    exit_code = 4


class SingularDensityError(NumericalError):
    def __init__(self, group, prob, msg=None):
        self.group = group
        self.prob = prob
        super().__init__(msg or f"kernel density is zero at the {prob}-quantile of group {group!r}")


class DegenerateIntervalError(NumericalError):
    def __init__(self, group, prob):
        self.group = group
        self.prob = prob
        super().__init__(
            f"order-statistic interval collapses (l >= u) for group {group!r} at p={prob}"
        )


class SingularContrastError(NumericalError):
    def __init__(self, index, label=None):
        self.index = index
        name = f" ({label})" if label else ""
        super().__init__(f"contrast {index}{name} has non-positive estimated variance")


class ResamplingError(NumericalError):
    """Too many resampling replicates failed."""
