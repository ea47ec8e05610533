"""Exception hierarchy shared across the toolkit.

Domain / precondition violations derive from DomainError; solver-side
failures derive from SolverError.  The CLI maps the two branches to
distinct exit codes.
"""


class ToolkitError(Exception):
    """Base class for all toolkit-specific errors."""


class DomainError(ToolkitError):
    """Input lies outside the mathematical domain of an operation."""


class SolverError(ToolkitError):
    """A discrete solver failed to produce a usable result."""


class MetricSingular(DomainError):
    """Metric evaluated on its singular locus (the unit circle)."""


class InvalidChord(DomainError):
    """Chord abscissa or inner radius outside the admissible range."""


class DegenerateDirection(DomainError):
    """No usable characteristic direction at the requested point."""


class DensityDomain(DomainError):
    """Density argument Q left the density's domain of definition."""


class Cavitation(DensityDomain):
    """Polytropic density beyond the cavitation speed Q = 2/(gamma-1)."""


class LightCone(DensityDomain):
    """Minkowski density evaluated within tolerance of Q = 1."""


class LegendreSingular(DomainError):
    """Hodograph transform has no nonsingular cells to work with."""


class NotClosed(DomainError):
    """Field fails the closedness precondition for potential reconstruction."""


class PathDependent(DomainError):
    """Two reconstruction paths disagree beyond tolerance."""


class DivergenceUndefined(DomainError):
    """Divergence-form operator undefined on or beyond the light cone."""


class OutsideHyperbolicRegion(DomainError):
    """Path point lies at r <= 1 where no characteristic data exists."""


class InvalidTypeChange(DomainError):
    """Type-change coefficient violates its monotonicity/sign contract."""


class SingularMultiplier(DomainError):
    """Multiplier matrix E loses invertibility somewhere on the interval."""


class InadmissibleBoundary(DomainError):
    """Boundary decomposition fails an admissibility check (named in args)."""


class Infeasible(DomainError):
    """Parameter search found an empty feasible set (constraints in args)."""


class NonConvergence(SolverError):
    """Iterative solve stopped without reaching its tolerance."""


class FoliationGap(SolverError):
    """Characteristic marching left uncovered cells beyond tolerance."""


class SolverBreakdown(SolverError):
    """Linear algebra failed (rank deficiency, non-finite factors)."""


class DegenerateFit(DomainError):
    """Growth fit impossible: every sampled energy is zero."""
