"""Quantile-based multiple contrast tests with permutation and bootstrap calibration."""

from .contrasts import (Direction, HypothesisFamily, build, custom, dunnett, grand_mean,
                        kron_with_effect, tukey)
from .covest import Estimator, KernelConfig, bootstrap_estimate, estimate, interval_estimate, \
    kernel_estimate
from .exceptions import (DataError, DegenerateIntervalError, DomainError, NumericalError,
                         QContrastError, ResamplingError, SingularContrastError,
                         SingularDensityError)
from .inference import (DecisionSet, Method, asymptotic_mctp, bonferroni_asymptotic,
                        bonferroni_permutation, bootstrap_mctp, run_procedure, test_statistics,
                        tost_equivalence)
from .quantiles import GroupedSample, ProbabilityGrid, empirical_quantile, quantile_vector
from .statdist import RngStream

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "DecisionSet",
    "DegenerateIntervalError",
    "Direction",
    "DomainError",
    "Estimator",
    "GroupedSample",
    "HypothesisFamily",
    "KernelConfig",
    "Method",
    "NumericalError",
    "ProbabilityGrid",
    "QContrastError",
    "ResamplingError",
    "RngStream",
    "SingularContrastError",
    "SingularDensityError",
    "asymptotic_mctp",
    "bonferroni_asymptotic",
    "bonferroni_permutation",
    "bootstrap_estimate",
    "bootstrap_mctp",
    "build",
    "custom",
    "dunnett",
    "empirical_quantile",
    "estimate",
    "grand_mean",
    "interval_estimate",
    "kernel_estimate",
    "kron_with_effect",
    "quantile_vector",
    "run_procedure",
    "test_statistics",
    "tost_equivalence",
    "tukey",
]
