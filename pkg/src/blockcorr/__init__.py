"""Independence test for high-dimensional Gaussian sub-vectors based on the
block correlation matrix, with Haar projection-model checks and Monte Carlo
size/power tooling."""

from .blocks import BlockSpec
from .block_statistics import (
    block_correlation,
    center_columns,
    helmert_reduce,
    pillai_trace,
    reduced_matrix,
    schott_statistic,
)
from .errors import (
    BlockCorrError,
    BlockSpecError,
    DegenerateTestError,
    InsufficientObservationsError,
    InvalidCovarianceError,
    ScenarioError,
    SingularBlockError,
    WilksInapplicableError,
)
from .sampling import Population, RngStream, gaussian_sample, haar_orthogonal, scenario_population
from .schott import groupwise_scan, null_params, schott_test, wilks_test

__version__ = "0.1.0"
