"""Exception hierarchy.

Two families matter to callers: configuration errors (bad arguments or
out-of-range parameters; the computation never started) and numerical errors
(the computation ran and failed to certify its result). The CLI maps them to
exit codes 2 and 3.
"""


class ZerocritError(Exception):
    """Base class for all package errors."""


class ConfigError(ZerocritError):
    """Invalid argument or precondition violation; nothing was computed."""


class NumericalError(ZerocritError):
    """A computation ran but could not produce a certified result."""


# --- numerics ---------------------------------------------------------------

class NonHermitianInput(ConfigError):
    """Matrix fails the Hermitian symmetry check."""


class NoConvergence(NumericalError):
    """Iterative eigensolver exceeded its sweep budget."""


class NotPositiveSemidefinite(ConfigError):
    """An eigenvalue lies below the negative clamp band."""


class SingularA(ConfigError):
    """Schur-complement pivot block is numerically singular."""


class Singular(NumericalError):
    """Linear solve hit a singular matrix."""


# --- covariance -------------------------------------------------------------

class SeparationOutOfRange(ConfigError):
    """Separation r outside [0, 6]."""


class ArgumentOutOfRange(ConfigError):
    """Chart point outside the supported disk."""


class DimensionOutOfRange(ConfigError):
    """Higher-dimensional index m outside [1, 4]."""


# --- correlator -------------------------------------------------------------

class CovarianceInvalid(ConfigError):
    """Covariance bundle fails its structural invariants."""


class QuadratureNoConvergence(NumericalError):
    """Adaptive quadrature could not reach the requested tolerance."""


# --- gafsim -----------------------------------------------------------------

class RadiusOutOfRange(ConfigError):
    """Truncation radius outside the supported range."""


class RootFindingStalled(NumericalError):
    """Simultaneous root iteration exceeded its budget."""


class JacobianSingular(NumericalError):
    """Newton step had a singular Wirtinger Jacobian at a seed."""


class SuspectUndercount(NumericalError):
    """Batch critical-point count deviates > 6 sigma from the expected intensity."""


# --- estimator --------------------------------------------------------------

class BinningInvalid(ConfigError):
    """Bin edges are not ascending / exceed the admissible range."""


class TooFewSamples(ConfigError):
    """Fewer patterns than the estimator's minimum."""


class BinMismatch(ConfigError):
    """Two curves have different bin layouts."""


# --- projective -------------------------------------------------------------

class ChartInconsistency(NumericalError):
    """A point converged in both charts to incompatible coordinates."""


class CountMismatch(NumericalError):
    """Two-chart zero union does not have exactly n elements."""
