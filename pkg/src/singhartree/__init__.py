"""Simulator and verification workbench for the three-dimensional Hartree
equation with a contact interaction at the origin,

    i du/dt = -Delta_alpha u + (w * |u|^2) u,

restricted to the spherically symmetric sector, where the linear part is the
point-interaction extension of the Laplacian with inverse scattering length
alpha.  States are carried as reduced half-line profiles f(r) = r psi(r);
the singular 1/|x| component of a field is its finite reduced value at r = 0.
"""

from .errors import (
    AdmissibleRangeError,
    AliasingWarning,
    CompletenessError,
    ConfigError,
    FormDomainError,
    IterationCapError,
    NonContractionError,
    OperatorDomainError,
    QuadratureDivergenceError,
    ResolutionError,
    SingHartreeError,
    SmallKSingularityError,
    TransitionRegularityError,
    TruncationWarning,
    WindowError,
)
from .radial import (
    ConvolutionKernel,
    DecomposedState,
    PlainRadialField,
    Potential,
    RadialGrid,
    ReducedField,
    decompose,
    domain_link_residual,
    evaluate_green,
    green_profile,
    in_operator_domain,
    lorentz_weak_norm,
    lp_norm,
    lp_norm_plain,
    radial_convolve,
    recompose,
)
from .operator import (
    FRIEDRICHS,
    BethePeierlsFit,
    PointInteraction,
    SpectrumSummary,
    TmsFit,
    apply_operator,
    bethe_peierls_residual,
    quadratic_form,
    spectrum,
    tms_residual,
)
from .transform import (
    EquivalenceBand,
    RobinTransform,
    SpectralField,
    build_transform,
    forward,
    fractional_apply,
    fractional_green_check,
    inverse,
    norm_equivalence_report,
    perturbed_norm,
)
from .propagator import (
    AdmissiblePair,
    DecayReport,
    admissible_pair,
    dispersive_decay_experiment,
    evolve_linear,
    strichartz_norm,
)
from .hartree import (
    ConservedQuantities,
    HypothesisReport,
    conserved,
    hartree_potential,
    hypothesis_check,
    sobolev_wsp_norm,
    trilinear_check,
)
from .solver import (
    SolverConfig,
    Trajectory,
    evolve,
    free_limit_check,
    globalization_check,
    picard_window,
    stability_experiment,
    strang_step,
    suggested_window,
)
from .config import DatumSpec, PotentialSpec, RunConfig, parse_config

__version__ = "0.1.0"
