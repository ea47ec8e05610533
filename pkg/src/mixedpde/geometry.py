"""Projective-disc geometry: metric, type classification, characteristics.

The extended projective disc carries the metric

    ds^2 = [(1-y^2) dx^2 + 2xy dx dy + (1-x^2) dy^2] / (1-x^2-y^2)^2,

Riemannian inside the unit circle, Lorentzian outside, singular on the
circle itself (the absolute).  Characteristics of the associated
second-order operator are the straight lines tangent to the circle;
the polar lines of a vertical chord bound the lens domains used by the
mixed-type solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection, InvalidChord, MetricSingular

RIEMANNIAN = "riemannian"
LORENTZIAN = "lorentzian"
DEGENERATE = "degenerate"

ELLIPTIC = "elliptic"
HYPERBOLIC = "hyperbolic"
PARABOLIC = "parabolic"

#: absolute tolerance band for parabolic / degenerate classification
DEFAULT_TYPE_TOL = 1e-10


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("point components must be finite")

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class MetricTensor2:
    """Symmetric 2x2 metric at a point with a signature tag."""

    g11: float
    g12: float
    g22: float
    signature: str

    @property
    def det(self) -> float:
        return self.g11 * self.g22 - self.g12**2


def metric_from_components(g11: float, g12: float, g22: float,
                           tol: float = DEFAULT_TYPE_TOL) -> MetricTensor2:
    det = g11 * g22 - g12**2
    if abs(det) <= tol:
        sig = DEGENERATE
    elif det < 0:
        sig = LORENTZIAN
    elif g11 > 0:
        sig = RIEMANNIAN
    else:
        # negative definite cannot arise from the metrics built here
        raise ValueError("metric is negative definite; unsupported signature")
    return MetricTensor2(g11, g12, g22, sig)


@dataclass(frozen=True)
class OperatorCoefficients:
    """Principal-part coefficients (alpha, beta, gamma) of
    alpha u_xx + 2 beta u_xy + gamma u_yy (halved mixed-term convention)."""

    alpha: float
    beta: float
    gamma: float

    @property
    def discriminant(self) -> float:
        return self.alpha * self.gamma - self.beta**2


@dataclass(frozen=True)
class TypeClass:
    kind: str
    discriminant: float
    tolerance: float


@dataclass(frozen=True)
class Line2:
    """Line n1*x + n2*y = d with unit normal (n1, n2)."""

    n1: float
    n2: float
    d: float

    def __post_init__(self):
        if abs(self.n1**2 + self.n2**2 - 1.0) > 1e-12:
            raise ValueError("line normal must be unit length")

    def distance(self, p: Point2) -> float:
        return abs(self.n1 * p.x + self.n2 * p.y - self.d)

    def slope(self):
        """Slope dy/dx, or None for a vertical line."""
        if abs(self.n2) < 1e-15:
            return None
        return -self.n1 / self.n2

    def to_json_dict(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "d": self.d}


def line_through(n1: float, n2: float, d: float) -> Line2:
    s = math.hypot(n1, n2)
    if s == 0:
        raise ValueError("degenerate line")
    return Line2(n1 / s, n2 / s, d / s)


def beltrami_metric(p: Point2, tol: float = 1e-12) -> MetricTensor2:
    """Metric of the extended projective disc at p.

    Raises MetricSingular within `tol` of the unit circle, where the
    conformal denominator vanishes.  det g = (1-x^2-y^2)^(-3), so the
    signature is Riemannian inside the circle and Lorentzian outside.
    """
    denom = 1.0 - p.x**2 - p.y**2
    if abs(denom) <= tol:
        raise MetricSingular(f"metric singular at |x|^2+|y|^2 = 1 (point {p})")
    d2 = denom * denom
    return metric_from_components(
        (1.0 - p.y**2) / d2, p.x * p.y / d2, (1.0 - p.x**2) / d2
    )


def extremal_operator_coefficients(p: Point2) -> OperatorCoefficients:
    """Principal part of the linearized extremal-surface operator at a
    gradient point (p, q): alpha = 1-p^2, beta = -pq, gamma = 1-q^2.

    The discriminant is 1 - p^2 - q^2, so type changes across the unit
    circle exactly as the projective-disc metric does.
    """
    return OperatorCoefficients(1.0 - p.x**2, -p.x * p.y, 1.0 - p.y**2)


def classify(c: OperatorCoefficients, tol: float = DEFAULT_TYPE_TOL) -> TypeClass:
    """Type classification by the sign of the discriminant."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    disc = c.discriminant
    if abs(disc) <= tol:
        kind = PARABOLIC
    elif disc > 0:
        kind = ELLIPTIC
    else:
        kind = HYPERBOLIC
    return TypeClass(kind, disc, tol)


@dataclass(frozen=True)
class CharacteristicSlopes:
    """Real characteristic slopes at a point; vertical tangents flagged
    explicitly instead of using infinite slopes."""

    slopes: tuple[float, ...]
    vertical: bool = False

    def count(self) -> int:
        return len(self.slopes) + (1 if self.vertical else 0)


def characteristic_slopes(p: Point2, a: float = 1.0,
                          tol: float = 1e-12) -> CharacteristicSlopes:
    """Slopes m solving (a^2-x^2) m^2 + 2xy m + (a^2-y^2) = 0.

    These are the directions of the straight lines through p tangent to
    the circle of radius a; there are none strictly inside the circle,
    a double root on it, and two outside.
    """
    if a <= 0:
        raise ValueError("circle radius must be positive")
    x, y = p.x, p.y
    lead = a * a - x * x
    if abs(lead) <= tol:
        # one root escapes to infinity: vertical tangent line x = +-a
        rest = 2 * x * y
        if abs(rest) <= tol:
            return CharacteristicSlopes((), vertical=True)
        return CharacteristicSlopes((-(a * a - y * y) / rest,), vertical=True)
    disc = 4 * a * a * (x * x + y * y - a * a)
    if disc < -tol * max(1.0, 4 * a * a):
        return CharacteristicSlopes(())
    s = math.sqrt(max(disc, 0.0))
    m1 = (-2 * x * y - s) / (2 * lead)
    m2 = (-2 * x * y + s) / (2 * lead)
    if s == 0.0 or abs(m1 - m2) <= tol:
        return CharacteristicSlopes((m1,))
    return CharacteristicSlopes((min(m1, m2), max(m1, m2)))


@dataclass(frozen=True)
class CharacteristicPath:
    """Polyline traced along one characteristic branch."""

    points: np.ndarray          # shape (n, 2)
    step: float
    branch: int                 # +1 or -1

    def arc_length(self) -> float:
        d = np.diff(self.points, axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())


def best_fit_line(points: np.ndarray) -> tuple[Line2, float]:
    """Total-least-squares line through a point cloud.

    Returns the line and the maximum orthogonal deviation of the points.
    """
    pts = np.asarray(points, dtype=float)
    ctr = pts.mean(axis=0)
    u, s, vt = np.linalg.svd(pts - ctr, full_matrices=False)
    normal = vt[-1]              # direction of least variance
    n1, n2 = normal / np.hypot(*normal)
    d = n1 * ctr[0] + n2 * ctr[1]
    if d < 0:
        n1, n2, d = -n1, -n2, -d
    line = Line2(float(n1), float(n2), float(d))
    dev = np.abs(pts @ np.array([n1, n2]) - d).max()
    return line, float(dev)


def _directions_at(x: float, y: float, a: float) -> list[np.ndarray]:
    """Unit tangent candidates at (x, y), clamping tiny negative
    discriminants so tangency points survive rounding."""
    sl = characteristic_slopes(Point2(x, y), a, tol=1e-13)
    dirs = []
    for m in sl.slopes:
        v = np.array([1.0, m]) / math.hypot(1.0, m)
        dirs.append(v)
    if sl.vertical:
        dirs.append(np.array([0.0, 1.0]))
    return dirs


def trace_characteristic(start: Point2, branch: int, step: float,
                         max_len: float, a: float = 1.0,
                         circle_tol: float = 1e-9) -> CharacteristicPath:
    """Trace one characteristic line from an ideal point.

    Classical fourth-order Runge-Kutta on the unit-tangent field of the
    chosen branch, with nearest-direction matching between stages so the
    branch is followed continuously.  Stops at max_len, or once the path
    returns to within circle_tol of the circle after having left it.

    branch +1 follows the larger of the two slopes at the start
    (vertical counts as +infinity), -1 the smaller.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if branch not in (+1, -1):
        raise ValueError("branch must be +1 or -1")
    r0 = start.norm()
    if r0 < a * (1 - 1e-12):
        raise DegenerateDirection(
            f"no real characteristic direction at {start} (inside the circle)")
    dirs = _directions_at(start.x, start.y, a)
    if not dirs:
        raise DegenerateDirection(f"no real characteristic direction at {start}")
    # order candidates by slope value, vertical last
    dirs.sort(key=lambda v: math.inf if v[0] == 0 else v[1] / v[0])
    ref = dirs[-1] if branch > 0 else dirs[0]
    if ref[0] < 0 or (ref[0] == 0 and ref[1] < 0):
        ref = -ref
    # head toward the tangency point so the circle is reachable; for an
    # on-circle start the radial component vanishes and the x >= 0
    # orientation above stands
    if float(ref @ [start.x, start.y]) > 1e-12 * r0:
        ref = -ref

    def direction(q: np.ndarray, prev: np.ndarray) -> np.ndarray:
        cands = _directions_at(q[0], q[1], a)
        if not cands:
            # rounding pushed the point just inside; keep the line direction
            return prev
        best = max(cands, key=lambda v: abs(float(v @ prev)))
        return best if float(best @ prev) >= 0 else -best

    pts = [np.array([start.x, start.y])]
    length = 0.0
    armed = r0 > a + circle_tol
    approaching = False
    r_prev = r0
    cur = ref
    while length < max_len - 1e-15:
        h = min(step, max_len - length)
        q = pts[-1]
        k1 = direction(q, cur)
        k2 = direction(q + 0.5 * h * k1, k1)
        k3 = direction(q + 0.5 * h * k2, k2)
        k4 = direction(q + h * k3, k3)
        move = (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        q_new = q + h * move
        pts.append(q_new)
        length += h
        cur = direction(q_new, cur)
        r = math.hypot(q_new[0], q_new[1])
        if armed and r <= a + circle_tol:
            break
        # tangency passed between samples: radial distance had been
        # shrinking and turned back up
        if armed and approaching and r > r_prev:
            break
        approaching = r < r_prev
        r_prev = r
        if r > a + circle_tol:
            armed = True
    return CharacteristicPath(np.asarray(pts), step, branch)


def polar_lines_of_chord(x0: float) -> tuple[Line2, Line2, Point2]:
    """Tangent lines at the endpoints of the vertical chord x = x0.

    The chord meets the unit circle at (x0, +-sqrt(1-x0^2)); its polar
    lines are the tangents there, x0*x +- sqrt(1-x0^2)*y = 1, and they
    intersect at the pole (1/x0, 0).
    """
    if not 0.0 < x0 < 1.0:
        raise InvalidChord(f"chord abscissa must lie in (0, 1), got {x0}")
    y0 = math.sqrt(1.0 - x0 * x0)
    upper = Line2(x0, y0, 1.0)
    lower = Line2(x0, -y0, 1.0)
    return upper, lower, Point2(1.0 / x0, 0.0)


ELLIPTIC_ARC = "elliptic_arc"
PARABOLIC_ARC = "parabolic_arc"
CHARACTERISTIC_SEGMENT = "characteristic"
RADIAL_SEGMENT = "radial"

#: segment kinds carrying Dirichlet data for the open problem
DATA_SEGMENTS = (ELLIPTIC_ARC, RADIAL_SEGMENT)


@dataclass(frozen=True)
class BoundarySegment:
    kind: str
    start: Point2
    end: Point2
    line: Line2 | None = None   # for straight segments

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "start": [self.start.x, self.start.y],
            "end": [self.end.x, self.end.y],
        }
        if self.line is not None:
            out["line"] = self.line.to_json_dict()
        return out


@dataclass(frozen=True)
class FoliationLeaf:
    """One characteristic pair of the ideal-region foliation."""

    touch_angle: float
    upper: Line2
    lower: Line2
    pole: Point2


@dataclass(frozen=True)
class LensDomain:
    """Lens-shaped mixed-type domain.

    The elliptic part is the annular sector eps <= r < 1, |theta| <=
    theta0 = arccos(x0); the ideal part is the triangle cut off by the
    chord's two polar lines, which meet at the pole (1/x0, 0).  The
    parabolic arc nu (r = 1, |theta| <= theta0) is the interior
    type-change interface, not part of the data boundary.
    """

    x0: float
    eps: float
    theta0: float
    pole: Point2
    segments: tuple[BoundarySegment, ...]
    parabolic_arc: BoundarySegment

    def data_boundary(self) -> tuple[BoundarySegment, ...]:
        """Segments where the open problem prescribes data."""
        return tuple(s for s in self.segments if s.kind in DATA_SEGMENTS)

    def characteristic_boundary(self) -> tuple[BoundarySegment, ...]:
        return tuple(s for s in self.segments
                     if s.kind == CHARACTERISTIC_SEGMENT)

    def foliation_leaves(self, count: int) -> list[FoliationLeaf]:
        """Characteristic pairs foliating the ideal region, ordered by
        decreasing radial distance of their poles."""
        leaves = []
        for i in range(count):
            lam = self.theta0 * (1.0 - i / count)
            upper = Line2(math.cos(lam), math.sin(lam), 1.0)
            lower = Line2(math.cos(lam), -math.sin(lam), 1.0)
            leaves.append(FoliationLeaf(
                lam, upper, lower, Point2(1.0 / math.cos(lam), 0.0)))
        return leaves

    def contains_polar(self, r: float, theta: float, pad: float = 0.0) -> bool:
        """Membership test in (r, theta) coordinates."""
        if abs(theta) > self.theta0 + pad or r < self.eps - pad:
            return False
        if r <= 1.0:
            return True
        # ideal part: between the two polar lines (feet within the arc)
        g = math.acos(min(1.0, 1.0 / r))
        return (abs(theta) + g) <= self.theta0 + pad

    def to_json_dict(self) -> dict:
        return {
            "x0": self.x0,
            "eps": self.eps,
            "theta0": self.theta0,
            "pole": [self.pole.x, self.pole.y],
            "segments": [s.to_json_dict() for s in self.segments],
            "parabolic_arc": self.parabolic_arc.to_json_dict(),
        }


def build_lens_domain(x0: float, eps: float) -> LensDomain:
    """Assemble the lens domain for chord abscissa x0 and inner radius eps.

    Boundary segments are listed counterclockwise: outgoing radial at
    -theta0, the two characteristic (polar-line) segments through the
    pole, the incoming radial at +theta0, and the inner elliptic arc.
    """
    if not 0.0 < x0 < 1.0:
        raise InvalidChord(f"chord abscissa must lie in (0, 1), got {x0}")
    if not 0.0 < eps < x0:
        raise InvalidChord(f"inner radius must lie in (0, x0), got {eps}")
    theta0 = math.acos(x0)
    upper, lower, pole = polar_lines_of_chord(x0)
    y0 = math.sin(theta0)
    p_lo_in = Point2(eps * x0, -eps * y0)      # (eps, -theta0) in polar
    p_lo_touch = Point2(x0, -y0)               # (1, -theta0)
    p_up_touch = Point2(x0, y0)
    p_up_in = Point2(eps * x0, eps * y0)
    radial_lo = line_through(math.sin(-theta0), -math.cos(-theta0), 0.0)
    radial_up = line_through(math.sin(theta0), -math.cos(theta0), 0.0)
    segments = (
        BoundarySegment(RADIAL_SEGMENT, p_lo_in, p_lo_touch, radial_lo),
        BoundarySegment(CHARACTERISTIC_SEGMENT, p_lo_touch, pole, lower),
        BoundarySegment(CHARACTERISTIC_SEGMENT, pole, p_up_touch, upper),
        BoundarySegment(RADIAL_SEGMENT, p_up_touch, p_up_in, radial_up),
        BoundarySegment(ELLIPTIC_ARC, p_up_in, p_lo_in),
    )
    nu = BoundarySegment(PARABOLIC_ARC, p_lo_touch, p_up_touch)
    return LensDomain(x0, eps, theta0, pole, segments, nu)


CONTINUITY = "continuity"
MINIMAL_EUCLIDEAN = "minimal_euclidean"
MINKOWSKI_GRAPH = "minkowski_graph"


@dataclass(frozen=True)
class FlowMetric:
    """Flow-induced metric split into conformal and non-Euclidean parts."""

    kind: str
    conformal_factor: float
    non_euclidean: tuple[float, float, float]
    metric: MetricTensor2


def flow_metric(kind: str, u: float, v: float,
                gamma_ad: float = 1.4) -> FlowMetric:
    """Metric induced by a flow or graph with gradient (u, v).

    Continuity: c^2 (dx^2 + dy^2) - (*dpsi)^2 with sound speed
    c^2 = 1 - ((gamma_ad-1)/2)(u^2+v^2); raises Cavitation at or beyond
    u^2+v^2 = 2/(gamma_ad-1).  MinimalEuclidean: dx^2+dy^2+dpsi^2.
    MinkowskiGraph: dx^2+dy^2-dpsi^2.  The non-Euclidean parts of the
    last two differ exactly by sign (a Hodge-dual pair).
    """
    from .errors import Cavitation

    q2 = u * u + v * v
    if kind == CONTINUITY:
        if gamma_ad <= 1.0:
            raise ValueError("adiabatic exponent must exceed 1")
        q_cav = 2.0 / (gamma_ad - 1.0)
        if q2 >= q_cav:
            raise Cavitation(
                f"speed Q = {q2} at or beyond cavitation {q_cav}")
        c2 = 1.0 - 0.5 * (gamma_ad - 1.0) * q2
        # -(*dpsi)^2 with *dpsi = u dy - v dx
        non_euc = (-v * v, u * v, -u * u)
        g = metric_from_components(c2 - v * v, u * v, c2 - u * u)
        return FlowMetric(kind, c2, non_euc, g)
    if kind == MINIMAL_EUCLIDEAN:
        non_euc = (u * u, u * v, v * v)
        g = metric_from_components(1 + u * u, u * v, 1 + v * v)
        return FlowMetric(kind, 1.0, non_euc, g)
    if kind == MINKOWSKI_GRAPH:
        non_euc = (-u * u, -u * v, -v * v)
        g = metric_from_components(1 - u * u, -u * v, 1 - v * v)
        return FlowMetric(kind, 1.0, non_euc, g)
    raise ValueError(f"unknown flow metric kind {kind!r}")
