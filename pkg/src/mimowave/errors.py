"""Exception types shared across the package."""


class WaveDesignError(Exception):
    """Base class for every error this package raises on purpose."""


class NonHermitianError(WaveDesignError):
    """Matrix expected to be Hermitian is not, beyond tolerance."""


class NoConvergenceError(WaveDesignError):
    """An iterative numerical kernel failed to converge."""


class NotPositiveDefiniteError(WaveDesignError):
    """Matrix expected to be Hermitian positive definite is not."""


class NotPSDError(WaveDesignError):
    """Matrix expected to be positive semidefinite has a genuinely negative eigenvalue."""


class ZeroResponseError(WaveDesignError):
    """Target response matrix is identically zero, so no beam direction exists."""


class NoRootError(WaveDesignError):
    """Secular-equation root finding exhausted its iteration budget."""


class InsufficientTrialsError(WaveDesignError):
    """Too few Monte Carlo trials to resolve the requested tail probability."""


class ThresholdMissingError(WaveDesignError):
    """Detector threshold has not been calibrated yet."""


class ConfigError(WaveDesignError):
    """Experiment configuration is malformed or inconsistent."""
