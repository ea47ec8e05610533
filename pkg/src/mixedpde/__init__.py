"""Numerical toolkit for variational problems on metrics of mixed
Riemannian-Lorentzian signature.

The package covers the projective disc metric and its characteristic
geometry, extremal-surface and nonlinear Hodge operators, a mixed-type
solver on lens domains straddling the type-change circle, a symmetric-
positive formulation of the degenerate linear model with its boundary
admissibility audit, and nested-ball energy growth checks for the
vanishing theorem in dimension n > 4.
"""
from .errors import (
    Cavitation,
    DegenerateDirection,
    DegenerateFit,
    DensityDomain,
    DivergenceUndefined,
    DomainError,
    FoliationGap,
    Infeasible,
    InadmissibleBoundary,
    InvalidChord,
    InvalidTypeChange,
    LegendreSingular,
    LightCone,
    MetricSingular,
    NonConvergence,
    NotClosed,
    OutsideHyperbolicRegion,
    PathDependent,
    SingularMultiplier,
    SolverBreakdown,
    SolverError,
    ToolkitError,
)
from .grids import (
    CARTESIAN,
    POLAR,
    GridField,
    field_from_function,
)
from .geometry import (
    CONTINUITY,
    ELLIPTIC,
    HYPERBOLIC,
    MINIMAL_EUCLIDEAN,
    MINKOWSKI_GRAPH,
    PARABOLIC,
    BoundarySegment,
    CharacteristicPath,
    CharacteristicSlopes,
    FlowMetric,
    FoliationLeaf,
    LensDomain,
    Line2,
    MetricTensor2,
    OperatorCoefficients,
    Point2,
    TypeClass,
    beltrami_metric,
    best_fit_line,
    build_lens_domain,
    characteristic_slopes,
    classify,
    extremal_operator_coefficients,
    flow_metric,
    polar_lines_of_chord,
    trace_characteristic,
)
from .surfaces import (
    EUCLIDEAN,
    EUCLIDEAN_MINIMAL,
    LORENTZ_MAXIMAL,
    MINKOWSKI,
    POLYTROPIC,
    Density,
    DualFormReport,
    HodographField,
    SonicPoint,
    area_functional,
    density,
    dual_form,
    energy,
    euclidean_density,
    extremal_residual,
    hodge_residual,
    legendre_transform,
    make_density,
    minkowski_density,
    polytropic_density,
    sonic_Q,
)
from .hodge_disc import (
    AuxiliaryPair,
    AuxiliaryPotential,
    GapReport,
    LensSolution,
    auxiliary_pair,
    auxiliary_potential,
    characteristic_derivative,
    multiplier_identity_residual,
    overdetermination_gap,
    polar_residual,
    solve_open_problem,
)
from .friedrichs import (
    AdmissibilityReport,
    DiscreteSolution,
    FirstOrderSystem,
    MultiplierChoice,
    PositivityReport,
    TypeChangeFn,
    apply_multiplier,
    boundary_admissibility,
    build_system,
    choose_multiplier,
    linear_type_change,
    manufactured_rhs,
    positivity_matrix,
    solve_strong,
    type_change_fn,
)
from .liouville import (
    APPLIES,
    DOES_NOT_APPLY,
    FieldSampler,
    GrowthFit,
    LiouvilleVerdict,
    QuadratureSpec,
    RadialEnergyProfile,
    ball_energy,
    conformal_profile,
    constant_sampler,
    gaussian_sampler,
    growth_fit,
    liouville_verdict,
    zero_sampler,
)

__version__ = "0.1.0"
