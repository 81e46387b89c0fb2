"""Exception types raised by the laboratory.

Every failure mode that callers are expected to catch has its own class so
that tests and the command line driver can tell configuration mistakes apart
from genuine numerical refusals.
"""


class MultipolarHardyError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MultipolarHardyError, ValueError):
    """Invalid configuration input (bad poles, weights or parameters)."""


class DuplicatePoles(ConfigError):
    """Two pole locations coincide (or are closer than the resolution guard)."""


class DimensionTooSmall(ConfigError):
    """Ambient dimension below 3; the constant (N + K_mu - 2)^2 / n^2 needs N >= 3."""


class GammaOutOfRange(ConfigError):
    """Weight exponent gamma outside the admissible range gamma < N - 2."""


class BadExponentM(ConfigError):
    """Exponential weight exponent m outside the admissible range m <= 2."""


class NonpositiveBeta(ConfigError):
    """Derived exponent beta = (N + K_mu - 2)/n is not positive."""


class SinglePole(ConfigError):
    """Operation needs at least two poles (pairwise gaps are undefined)."""


class AtPole(MultipolarHardyError):
    """A field was evaluated within the resolution guard of a pole."""


class NonIntegrableSingularity(MultipolarHardyError):
    """Declared pole exponent p >= N: the integral does not exist near a pole."""


class BudgetExceeded(MultipolarHardyError):
    """Requested quadrature exceeds the node/sample budget cap."""


class ZeroVMass(MultipolarHardyError):
    """Hardy ratio undefined: the potential mass of the test function vanishes."""


class EpsilonInadmissible(ConfigError):
    """Cutoff parameter eps violates eps <= min(1, R / (2 max|a_i|))."""


class UnboundedSuspected(MultipolarHardyError):
    """Sampled supremum of the perturbation W keeps growing toward a pole."""


class SingularGram(MultipolarHardyError):
    """Gram matrix numerically singular beyond the conditioning cap."""
