"""Exception types raised across the package."""


class BlockCorrError(ValueError):
    """Base class for input and numerical errors."""


class BlockSpecError(BlockCorrError):
    """Invalid block partition or a partition that does not fit the data."""


class InsufficientObservationsError(BlockCorrError):
    pass


class SingularBlockError(BlockCorrError):
    """A diagonal block Gram matrix is numerically singular."""

    def __init__(self, block, ratio):
        self.block = block
        self.ratio = ratio
        super().__init__(
            f"block {block} has a singular Gram matrix "
            f"(smallest/largest eigenvalue ratio {ratio:.3e})"
        )


class InvalidCovarianceError(BlockCorrError):
    pass


class DegenerateTestError(BlockCorrError):
    """The null variance is zero, e.g. a single block."""


class WilksInapplicableError(BlockCorrError):
    """Sample covariance is singular (n - 1 <= p)."""


class ScenarioError(BlockCorrError):
    pass
