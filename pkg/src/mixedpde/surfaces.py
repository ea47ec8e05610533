"""Area functionals, extremal-surface residuals, the Legendre transform,
mass densities, and the nonlinear Hodge operations built on them.

A graph z = f(x, y) is extremal for the area functional of the ambient
geometry when the corresponding quasilinear equation holds; this module
evaluates those residuals discretely, moves problems to the hodograph
plane and back, and handles the density family rho(Q) that turns the
scalar equations into nonlinear Hodge systems d(omega) = 0,
delta(rho(Q) omega) = 0 with Q = |omega|^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import griddata

from .errors import (
    Cavitation,
    DensityDomain,
    DivergenceUndefined,
    LegendreSingular,
    LightCone,
    NotClosed,
    PathDependent,
)
from .geometry import MINKOWSKI_GRAPH
from .grids import (
    CARTESIAN,
    GridField,
    cell_average,
    cell_gradient,
    gradient,
    integrate_gradient,
    midpoint_integral,
    second_derivatives,
)

EUCLIDEAN_MINIMAL = "euclidean_minimal"
LORENTZ_MAXIMAL = "lorentz_maximal"

EXTREMAL_KINDS = (MINKOWSKI_GRAPH, EUCLIDEAN_MINIMAL, LORENTZ_MAXIMAL)


def _cell_mask(mask: np.ndarray | None) -> np.ndarray | None:
    """Node mask -> cell mask (cell excluded if any corner is)."""
    if mask is None:
        return None
    return mask[:-1, :-1] | mask[1:, :-1] | mask[:-1, 1:] | mask[1:, 1:]


def area_functional(f: GridField) -> float:
    """Area of the graph of f over the grid, in the mixed-signature sense.

    Midpoint-rule integral of sqrt|1 - f_x^2 - f_y^2| with the gradient
    taken by compact centered differences at cell centers.  The integrand
    is the area element of a space-like graph where |grad f| < 1 and of
    its time-like continuation where |grad f| > 1.
    """
    vals = f.scalar()
    p, q = cell_gradient(vals, f.spacing[0], f.spacing[1])
    integrand = np.sqrt(np.abs(1.0 - p * p - q * q))
    return midpoint_integral(integrand, f.spacing[0], f.spacing[1],
                             _cell_mask(f.mask))


def extremal_residual(f: GridField, kind: str,
                      tol: float = 1e-10) -> GridField:
    """Pointwise residual of the extremal-surface equation of the given
    ambient geometry, by centered differences at interior nodes.

    kind "minkowski_graph": (1-p^2) f_yy + 2pq f_xy + (1-q^2) f_xx,
    the graph equation in the hyperbolic regime included.
    kind "euclidean_minimal": (1+q^2) f_xx - 2pq f_xy + (1+p^2) f_yy.
    kind "lorentz_maximal": (1-q^2) f_xx + 2pq f_xy + (1-p^2) f_yy,
    valid only on space-like graphs; raises DivergenceUndefined if
    1 - |grad f|^2 <= tol anywhere in the interior.

    The boundary ring, where no centered stencil exists, is NaN and
    masked in the result.
    """
    if kind not in EXTREMAL_KINDS:
        raise ValueError(f"unknown extremal kind {kind!r}")
    vals = f.scalar()
    hx, hy = f.spacing
    p, q = gradient(vals, hx, hy)
    fxx, fxy, fyy = second_derivatives(vals, hx, hy)
    if kind == MINKOWSKI_GRAPH:
        res = (1 - p * p) * fyy + 2 * p * q * fxy + (1 - q * q) * fxx
    elif kind == EUCLIDEAN_MINIMAL:
        res = (1 + q * q) * fxx - 2 * p * q * fxy + (1 + p * p) * fyy
    else:
        gap = 1.0 - p * p - q * q
        if np.any(gap[1:-1, 1:-1] <= tol):
            raise DivergenceUndefined(
                "graph is not uniformly space-like: 1 - |grad f|^2 <= "
                f"{tol} somewhere in the interior")
        res = (1 - q * q) * fxx + 2 * p * q * fxy + (1 - p * p) * fyy
    ring = np.zeros(f.dims, dtype=bool)
    ring[0, :] = ring[-1, :] = ring[:, 0] = ring[:, -1] = True
    if f.mask is not None:
        ring |= f.mask
    return f.with_values(res, mask=ring)


@dataclass(frozen=True)
class HodographField:
    """Scalar samples phi(p, q) on a regular hodograph-plane grid.

    The mask marks nodes where the transform delivered no reliable
    value: outside the image of the gradient map, or supported by fewer
    scattered samples than the interpolation needs.
    """

    phi: GridField


def legendre_transform(f: GridField, dims: tuple[int, int] | None = None,
                       hessian_tol: float = 1e-8,
                       min_support: int = 3) -> HodographField:
    """Move a scalar field to the hodograph plane.

    phi(p, q) = p x + q y - f(x, y) sampled at (p, q) = grad f and
    resampled to a regular grid by piecewise-linear interpolation.  Nodes
    are masked where the gradient map folds (Hessian determinant within
    hessian_tol of zero excludes the sample) or where fewer than
    min_support samples land in the incident cells; the transform is
    its own inverse on the unmasked region of a convex field.

    Raises LegendreSingular when nothing survives, e.g. for affine f.
    """
    vals = f.scalar()
    hx, hy = f.spacing
    x = f.axis0()[:, None]
    y = f.axis1()[None, :]
    p, q = gradient(vals, hx, hy)
    px, py = gradient(p, hx, hy)
    qx, qy = gradient(q, hx, hy)
    hess = px * qy - py * qx
    keep = np.abs(hess) > hessian_tol
    if f.mask is not None:
        keep &= ~f.mask
    if int(keep.sum()) < max(min_support, 3):
        raise LegendreSingular(
            "gradient map is degenerate everywhere (zero Gaussian curvature)")
    ps = p[keep]
    qs = q[keep]
    phis = (p * x + q * y - vals)[keep]
    pmin, pmax = float(ps.min()), float(ps.max())
    qmin, qmax = float(qs.min()), float(qs.max())
    if pmax - pmin < 1e-12 or qmax - qmin < 1e-12:
        raise LegendreSingular("gradient image has no area in the hodograph plane")
    if dims is None:
        dims = f.dims
    np_, nq = dims
    hp = (pmax - pmin) / (np_ - 1)
    hq = (qmax - qmin) / (nq - 1)
    pg = pmin + hp * np.arange(np_)
    qg = qmin + hq * np.arange(nq)
    P, Q = np.meshgrid(pg, qg, indexing="ij")
    resampled = griddata((ps, qs), phis, (P, Q), method="linear")
    # per-cell sample counts; a node needs min_support in its incident cells
    counts, _, _ = np.histogram2d(ps, qs, bins=[pg, qg])
    support = np.zeros((np_, nq))
    support[:-1, :-1] += counts
    support[1:, :-1] += counts
    support[:-1, 1:] += counts
    support[1:, 1:] += counts
    mask = ~np.isfinite(resampled) | (support < min_support)
    if mask.all():
        raise LegendreSingular("no hodograph node has enough support")
    return HodographField(GridField(
        (pmin, qmin), (hp, hq), np.where(mask, np.nan, resampled),
        CARTESIAN, mask))


EUCLIDEAN = "euclidean"
MINKOWSKI = "minkowski"
POLYTROPIC = "polytropic"
CUSTOM = "custom"

#: default half-width of the excluded band around the Minkowski light cone
LIGHT_CONE_TOL = 1e-8


@dataclass(frozen=True)
class Density:
    """Mass density rho(Q) of a nonlinear Hodge system, with its
    derivative and primitive e(Q) = integral of rho from 0 to Q.

    Evaluators accept scalars or arrays; domain violations raise the
    matching error for the whole call.
    """

    kind: str
    rho_fn: Callable[[np.ndarray], np.ndarray]
    rho_prime_fn: Callable[[np.ndarray], np.ndarray]
    e_fn: Callable[[np.ndarray], np.ndarray] | None = None
    q_bound: float | None = None      # open upper bound of the domain
    param: float | None = None        # adiabatic exponent for polytropic
    tol: float = LIGHT_CONE_TOL

    def _check(self, Q: np.ndarray):
        if np.any(Q < 0):
            raise DensityDomain("Q = |omega|^2 cannot be negative")
        if self.kind == MINKOWSKI and np.any(np.abs(1.0 - Q) <= self.tol):
            raise LightCone(
                f"Q within {self.tol} of the light cone Q = 1")
        if self.kind == POLYTROPIC and np.any(Q >= self.q_bound):
            raise Cavitation(
                f"Q >= cavitation speed {self.q_bound}")

    def _eval(self, fn, Q):
        arr = np.asarray(Q, dtype=float)
        self._check(arr)
        out = fn(arr)
        if np.isscalar(Q) or arr.ndim == 0:
            return float(out)
        return out

    def rho(self, Q):
        return self._eval(self.rho_fn, Q)

    def rho_prime(self, Q):
        return self._eval(self.rho_prime_fn, Q)

    def e(self, Q):
        """Primitive of rho.  Closed form where one exists; a custom
        density without one falls back to adaptive quadrature."""
        if self.kind == MINKOWSKI and np.any(np.asarray(Q) > 1.0):
            raise LightCone(
                "energy primitive is undefined beyond the light cone "
                "(rho is not integrable across Q = 1)")
        if self.e_fn is not None:
            return self._eval(self.e_fn, Q)
        from scipy.integrate import quad

        def one(qv):
            return quad(lambda s: float(self.rho_fn(np.asarray(s))), 0.0, qv,
                        epsabs=1e-12, epsrel=1e-12)[0]

        return self._eval(np.vectorize(one), Q)


def euclidean_density() -> Density:
    """rho = 1/sqrt(1+Q): minimal graphs in Euclidean 3-space."""
    return Density(
        EUCLIDEAN,
        lambda Q: 1.0 / np.sqrt(1.0 + Q),
        lambda Q: -0.5 * (1.0 + Q) ** -1.5,
        lambda Q: 2.0 * (np.sqrt(1.0 + Q) - 1.0),
    )


def minkowski_density(tol: float = LIGHT_CONE_TOL) -> Density:
    """rho = 1/sqrt|1-Q|: extremal space-like or time-like graphs in
    Minkowski 3-space.  The band |1-Q| <= tol is excluded."""
    return Density(
        MINKOWSKI,
        lambda Q: 1.0 / np.sqrt(np.abs(1.0 - Q)),
        lambda Q: 0.5 * np.sign(1.0 - Q) * np.abs(1.0 - Q) ** -1.5,
        lambda Q: 2.0 * (1.0 - np.sqrt(1.0 - Q)),
        q_bound=None,
        tol=tol,
    )


def polytropic_density(gamma_ad: float = 1.4) -> Density:
    """Isentropic flow density rho = (1 - ((gamma-1)/2) Q)^(1/(gamma-1)),
    defined up to the cavitation speed Q = 2/(gamma-1)."""
    if gamma_ad <= 1.0:
        raise ValueError("adiabatic exponent must exceed 1")
    b = 0.5 * (gamma_ad - 1.0)
    kappa = 1.0 / (gamma_ad - 1.0)
    return Density(
        POLYTROPIC,
        lambda Q: (1.0 - b * Q) ** kappa,
        lambda Q: -0.5 * (1.0 - b * Q) ** (kappa - 1.0),
        lambda Q: (2.0 / gamma_ad)
        * (1.0 - (1.0 - b * Q) ** (gamma_ad / (gamma_ad - 1.0))),
        q_bound=2.0 / (gamma_ad - 1.0),
        param=gamma_ad,
    )


def custom_density(rho, rho_prime, e=None, q_bound=None) -> Density:
    return Density(CUSTOM, rho, rho_prime, e, q_bound=q_bound)


def make_density(kind: str, gamma_ad: float = 1.4,
                 tol: float = LIGHT_CONE_TOL) -> Density:
    if kind == EUCLIDEAN:
        return euclidean_density()
    if kind == MINKOWSKI:
        return minkowski_density(tol)
    if kind == POLYTROPIC:
        return polytropic_density(gamma_ad)
    raise ValueError(f"unknown density kind {kind!r}")


def density(kind: str, Q: float, gamma_ad: float = 1.4,
            tol: float = LIGHT_CONE_TOL):
    """Evaluate (rho, rho', e) for a named density at one speed Q.

    e is None where no finite primitive exists (Minkowski beyond the
    light cone).
    """
    d = make_density(kind, gamma_ad, tol)
    r = d.rho(Q)
    rp = d.rho_prime(Q)
    if d.kind == MINKOWSKI and Q > 1.0:
        return r, rp, None
    return r, rp, d.e(Q)


@dataclass(frozen=True)
class SonicPoint:
    """Type-change speed of a density: a genuine root of d/dQ (Q rho^2),
    or a singular blow-up of rho itself."""

    Q: float
    transition: str   # "root" or "singular"


def sonic_Q(dens: Density, q_hi: float = 10.0) -> SonicPoint | None:
    """Smallest positive speed where Q rho(Q)^2 stops increasing.

    The associated Hodge system changes from elliptic to hyperbolic type
    there.  Euclidean returns None: ellipticity only degenerates as
    Q grows, the type never flips.  Minkowski returns Q = 1 tagged
    "singular": rho blows up and Q rho^2 is monotone on each side, so
    the change is a singular transition, not a root.  Polytropic returns
    the root 2/(gamma+1).  Custom densities are scanned numerically on
    (0, q_hi) or (0, q_bound).
    """
    if dens.kind == EUCLIDEAN:
        return None
    if dens.kind == MINKOWSKI:
        return SonicPoint(1.0, "singular")
    if dens.kind == POLYTROPIC:
        return SonicPoint(2.0 / (dens.param + 1.0), "root")
    from scipy.optimize import brentq

    hi = dens.q_bound if dens.q_bound is not None else q_hi
    def slope(qv):
        r = float(dens.rho_fn(np.asarray(qv)))
        rp = float(dens.rho_prime_fn(np.asarray(qv)))
        return r * r + 2.0 * qv * r * rp

    grid = np.linspace(hi * 1e-6, hi * (1 - 1e-9), 512)
    svals = [slope(qv) for qv in grid]
    for a, b, sa, sb in zip(grid[:-1], grid[1:], svals[:-1], svals[1:]):
        if sa == 0.0:
            return SonicPoint(float(a), "root")
        if sa * sb < 0:
            return SonicPoint(float(brentq(slope, a, b)), "root")
    return None


def hodge_residual(omega: GridField, dens: Density):
    """Residuals of the nonlinear Hodge system for a 2-component field.

    Returns (closedness, coclosedness) as scalar fields:
    closedness  d(omega) = d/dx omega_2 - d/dy omega_1,
    coclosedness  delta(rho omega) = d/dx (rho omega_1) + d/dy (rho omega_2),
    with Q = omega_1^2 + omega_2^2 evaluated pointwise.
    """
    if omega.components != 2:
        raise ValueError("hodge_residual needs a 2-component field")
    if omega.chart != CARTESIAN:
        raise ValueError("hodge_residual is defined on a Cartesian chart")
    w1 = omega.component(0)
    w2 = omega.component(1)
    hx, hy = omega.spacing
    Q = w1 * w1 + w2 * w2
    rho = dens.rho(Q)
    closed = gradient(w2, hx, hy)[0] - gradient(w1, hx, hy)[1]
    coclosed = gradient(rho * w1, hx, hy)[0] + gradient(rho * w2, hx, hy)[1]
    return (omega.with_values(closed, mask=omega.mask),
            omega.with_values(coclosed, mask=omega.mask))


@dataclass(frozen=True)
class DualFormReport:
    """Residual diagnostics for a dual-form reconstruction."""

    dual_kind: str
    closedness: GridField
    coclosedness: GridField
    max_closedness: float
    max_coclosedness: float
    path_defect: float


def dual_form(omega: GridField, dens: Density,
              closed_tol: float = 1e-8, path_tol: float = 1e-6,
              base: tuple[int, int] = (0, 0)):
    """Reconstruct the conjugate potential sigma with d(sigma) = *(rho omega)
    and report how well grad(sigma) solves the dual Hodge system.

    A solution of the Euclidean system dualizes to one of the Minkowski
    system and vice versa; only that pairing is implemented.  sigma is
    integrated along an axis-aligned L-path from the base node, with the
    transposed path as a consistency check.

    Raises NotClosed when the input residuals exceed closed_tol, and
    PathDependent when the two reconstructions disagree beyond path_tol.
    """
    if dens.kind == EUCLIDEAN:
        dual = minkowski_density(dens.tol)
    elif dens.kind == MINKOWSKI:
        dual = euclidean_density()
    else:
        raise ValueError(
            "duality pairing is implemented for the Euclidean/Minkowski pair")
    d_res, delta_res = hodge_residual(omega, dens)
    m_closed = float(np.abs(d_res.scalar()).max())
    m_co = float(np.abs(delta_res.scalar()).max())
    if max(m_closed, m_co) > closed_tol:
        raise NotClosed(
            f"input residuals (d: {m_closed:.3g}, delta: {m_co:.3g}) "
            f"exceed {closed_tol}")
    w1 = omega.component(0)
    w2 = omega.component(1)
    rho = dens.rho(w1 * w1 + w2 * w2)
    sx = -rho * w2
    sy = rho * w1
    sigma_vals, defect = integrate_gradient(
        sx, sy, omega.spacing[0], omega.spacing[1], base)
    if defect > path_tol:
        raise PathDependent(
            f"L-path reconstructions disagree by {defect:.3g} > {path_tol}")
    sigma = GridField(omega.origin, omega.spacing, sigma_vals, omega.chart,
                      omega.mask)
    grad_sigma = GridField(omega.origin, omega.spacing,
                           np.stack([sx, sy], axis=-1), omega.chart,
                           omega.mask)
    dual_closed, dual_co = hodge_residual(grad_sigma, dual)
    report = DualFormReport(
        dual.kind, dual_closed, dual_co,
        float(np.abs(dual_closed.scalar()).max()),
        float(np.abs(dual_co.scalar()).max()),
        defect,
    )
    return sigma, report


def energy(omega: GridField, dens: Density,
           mask: np.ndarray | None = None) -> float:
    """Total field energy: midpoint-rule integral of e(Q) over unmasked
    cells, with Q averaged to cell centers first."""
    if omega.components != 2:
        raise ValueError("energy needs a 2-component field")
    w1 = cell_average(omega.component(0))
    w2 = cell_average(omega.component(1))
    Q = w1 * w1 + w2 * w2
    node_mask = mask if mask is not None else omega.mask
    return midpoint_integral(np.asarray(dens.e(Q)),
                             omega.spacing[0], omega.spacing[1],
                             _cell_mask(node_mask))
