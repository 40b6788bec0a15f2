"""Exception and warning types shared across the package."""


class SingHartreeError(Exception):
    """Base class for physics-level failures."""


class QuadratureDivergenceError(SingHartreeError):
    """An integral is divergent for the requested exponent (e.g. L^p of a
    1/|x| singularity with p >= 3)."""


class ResolutionError(SingHartreeError):
    """Momentum cutoff violates the grid resolution contract k_max*h <= 1."""


class CompletenessError(SingHartreeError):
    """Measured round-trip defect of a transform exceeds its tolerance."""


class TransitionRegularityError(SingHartreeError):
    """Requested regularity s is one of the transition values 1/2, 3/2 where
    the perturbed-space structure has no clean two-component description."""


class SmallKSingularityError(SingHartreeError):
    """Negative fractional power requested for a field whose spectral density
    does not vanish at k = 0."""


class OperatorDomainError(SingHartreeError):
    """Field violates the charge link kappa = phi(0)/(alpha + sqrt(lambda)/4pi)
    beyond tolerance, or a Friedrichs operation received a charged field."""


class FormDomainError(SingHartreeError):
    """Energy requested for a field whose gradient integral diverges under
    grid refinement."""


class AdmissibleRangeError(SingHartreeError):
    """Lebesgue exponent outside [2, 3), where the admissible-pair relation
    breaks down."""


class WindowError(SingHartreeError):
    """A time sweep pushed the field outside the grid (boundary mass above
    tolerance during the sampling window)."""


class NonContractionError(SingHartreeError):
    """Fixed-point iteration produced successive-difference ratios >= 1 for
    three consecutive iterates (window too large)."""


class IterationCapError(SingHartreeError):
    """Fixed-point iteration hit its iteration cap before reaching tolerance."""


class ConfigError(SingHartreeError):
    """Malformed or out-of-range run configuration."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key


class TruncationWarning(UserWarning):
    """Convolution arguments carry mass too close to r_max for the truncated
    kernel to be exact."""


class AliasingWarning(UserWarning):
    """Spectral or spatial tail mass above 1%: the grid/band no longer
    faithfully carries the field."""


class OscillatoryQuadratureWarning(UserWarning):
    """Momentum radius too large for the radial grid to resolve (R*h > 1)."""


class DegenerateFitWarning(UserWarning):
    """Boundary-condition fit requested for a field with no detectable
    singular component; the condition is vacuous."""
