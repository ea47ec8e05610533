"""Mixed elliptic/hyperbolic solver on lens domains of the projective disc.

In polar coordinates the disc operator reads

    L phi = r^2 (1 - r^2) phi_rr + phi_thth + r (1 - 2 r^2) phi_r,

elliptic for r < 1, hyperbolic for r > 1, degenerating on the unit
circle.  The open boundary-value problem prescribes data only on the
non-characteristic part of the lens boundary; the solution is continued
into the ideal region along the characteristic foliation.  The
auxiliary flux pair and its potential implement the multiplier argument
that makes the continuation unique, and the over-determination gap
measures why data on the characteristic boundary cannot also be
prescribed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    FoliationGap,
    NonConvergence,
    OutsideHyperbolicRegion,
)
from .geometry import CharacteristicPath, LensDomain
from .grids import (
    POLAR,
    GridField,
    bilinear_sample,
    gradient,
    integrate_gradient,
    second_derivatives,
)


def _require_polar(phi: GridField):
    if phi.chart != POLAR:
        raise ValueError("expected a field on a polar chart")
    if phi.origin[0] <= 0:
        raise ValueError("polar chart must keep r > 0")


def _radial_coeffs(r: np.ndarray):
    return r * r * (1.0 - r * r), r * (1.0 - 2.0 * r * r)


def polar_residual(phi: GridField) -> GridField:
    """Pointwise residual of the polar disc operator at interior nodes.

    Centered second-order differences; the boundary ring is NaN and
    masked.
    """
    _require_polar(phi)
    vals = phi.scalar()
    hr, ht = phi.spacing
    r = phi.axis0()[:, None]
    a, b = _radial_coeffs(r)
    frr, _, ftt = second_derivatives(vals, hr, ht)
    fr = gradient(vals, hr, ht)[0]
    res = a * frr + ftt + b * fr
    ring = np.zeros(phi.dims, dtype=bool)
    ring[0, :] = ring[-1, :] = ring[:, 0] = ring[:, -1] = True
    if phi.mask is not None:
        ring |= phi.mask
    return phi.with_values(res, mask=ring)


@dataclass(frozen=True)
class AuxiliaryPair:
    """Flux pair of the multiplier argument.

    angular holds r^2(1-r^2) phi_r^2 - phi_th^2 (the theta-derivative of
    the auxiliary potential), radial holds -2 phi_r phi_th (its
    r-derivative).
    """

    angular: GridField
    radial: GridField


def auxiliary_pair(phi: GridField) -> AuxiliaryPair:
    """Quadratic flux pair of a polar field, on the full grid."""
    _require_polar(phi)
    vals = phi.scalar()
    hr, ht = phi.spacing
    r = phi.axis0()[:, None]
    fr, ft = gradient(vals, hr, ht)
    angular = r * r * (1.0 - r * r) * fr * fr - ft * ft
    radial = -2.0 * fr * ft
    return AuxiliaryPair(phi.with_values(angular, mask=phi.mask),
                         phi.with_values(radial, mask=phi.mask))


def multiplier_identity_residual(phi: GridField) -> float:
    """Max-norm defect of the flux-divergence identity.

    The continuum identity d/dth(radial) - d/dr(angular) = -2 phi_r L phi
    holds for every twice-differentiable field, solution or not; its
    discrete residual decays at second order for smooth samples.
    """
    _require_polar(phi)
    pair = auxiliary_pair(phi)
    hr, ht = phi.spacing
    lhs = (gradient(pair.radial.scalar(), hr, ht)[1]
           - gradient(pair.angular.scalar(), hr, ht)[0])
    fr = gradient(phi.scalar(), hr, ht)[0]
    lphi = polar_residual(phi).scalar()
    combined = lhs + 2.0 * fr * lphi
    return float(np.nanmax(np.abs(combined[1:-1, 1:-1])))


@dataclass(frozen=True)
class AuxiliaryPotential:
    """Path-integrated potential of an AuxiliaryPair.

    defect is the max disagreement between the two axis-aligned
    integration paths; it is small only when the pair comes from a field
    that solves the disc equation (the pair is closed exactly when
    phi_r * L phi = 0).
    """

    field: GridField
    base: tuple[int, int]
    defect: float


def auxiliary_potential(pair: AuxiliaryPair,
                        base: tuple[int, int] = (0, 0)) -> AuxiliaryPotential:
    """Integrate the flux pair to a potential by trapezoidal L-paths."""
    hr, ht = pair.angular.spacing
    vals, defect = integrate_gradient(
        pair.radial.scalar(), pair.angular.scalar(), hr, ht, base)
    return AuxiliaryPotential(pair.angular.with_values(vals), base, defect)


def characteristic_derivative(phi: GridField,
                              path: CharacteristicPath) -> np.ndarray:
    """Derivative of the auxiliary potential along a characteristic.

    Samples -(r sqrt(r^2-1) phi_r + s phi_th)^2 at the path points, with
    s the path's branch sign; nonpositive for every field by the squared
    form.  Gradients are bilinearly interpolated from the polar chart.

    Raises OutsideHyperbolicRegion if any path point has r <= 1.
    """
    _require_polar(phi)
    pts = np.asarray(path.points, dtype=float)
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r <= 1.0):
        raise OutsideHyperbolicRegion(
            "characteristic derivative needs r > 1 along the whole path")
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    hr, ht = phi.spacing
    fr, ft = gradient(phi.scalar(), hr, ht)
    polar_pts = np.column_stack([r, theta])
    fr_s = bilinear_sample(fr, phi.origin, phi.spacing, polar_pts)
    ft_s = bilinear_sample(ft, phi.origin, phi.spacing, polar_pts)
    s = 1.0 if path.branch > 0 else -1.0
    root = r * np.sqrt(r * r - 1.0)
    return -((root * fr_s + s * ft_s) ** 2)


@dataclass(frozen=True)
class LensSolution:
    """Combined mixed-type solution on the lens grid.

    field covers the whole straddled polar grid, masked outside the
    domain; nu_trace holds the continuation data on the type-change
    circle at the grid's theta nodes.  Residuals are max-norm defects of
    the centered discrete operator against the source, per region.
    """

    field: GridField
    nu_trace: np.ndarray
    thetas: np.ndarray
    elliptic_residual: float
    hyperbolic_residual: float
    filled_cells: int


def _hyperbolic_values(u0_thetas, u0_values, thetas, T, source,
                       theta0, foot_tol=1e-9):
    """Characteristic continuation at points (T = arcsec r, theta).

    Transport along the two tangent-line characteristics through each
    point: the mean of the circle trace at the feet theta +- T, plus the
    source integral over the characteristic triangle.  Feet may
    overshoot the arc by rounding only; larger overshoots are reported
    as uncovered (NaN).
    """
    thetas = np.asarray(thetas, dtype=float)
    T = np.asarray(T, dtype=float)
    plus = thetas + T
    minus = thetas - T
    overshoot = np.maximum(np.abs(plus), np.abs(minus)) - theta0
    uncovered = overshoot > foot_tol
    plus = np.clip(plus, -theta0, theta0)
    minus = np.clip(minus, -theta0, theta0)
    vals = 0.5 * (np.interp(plus, u0_thetas, u0_values)
                  + np.interp(minus, u0_thetas, u0_values))
    if source is not None:
        for idx in np.ndindex(vals.shape):
            if uncovered[idx]:
                continue
            vals[idx] -= 0.5 * _duhamel(float(thetas[idx]) if thetas.ndim
                                        else float(thetas),
                                        float(T[idx]), source)
    vals = np.where(uncovered, np.nan, vals)
    return vals, uncovered


def _duhamel(X: float, T: float, source: Callable[[float, float], float],
             n_s: int = 16, n_y: int = 16) -> float:
    """Integral of f(sec s, y) over the characteristic triangle with apex
    (X, T), by composite Simpson in both directions."""
    if T <= 0:
        return 0.0
    ns = max(4, n_s) // 2 * 2
    ny = max(4, n_y) // 2 * 2
    s = np.linspace(0.0, T, ns + 1)
    ws = np.ones(ns + 1)
    ws[1:-1:2] = 4.0
    ws[2:-1:2] = 2.0
    ws *= (T / ns) / 3.0
    total = 0.0
    wy_base = np.ones(ny + 1)
    wy_base[1:-1:2] = 4.0
    wy_base[2:-1:2] = 2.0
    for sv, wv in zip(s, ws):
        half = T - sv
        if half <= 0:
            continue
        y = np.linspace(X - half, X + half, ny + 1)
        rv = 1.0 / math.cos(sv)
        fy = np.array([source(rv, yv) for yv in y])
        total += wv * float((wy_base * fy).sum()) * (2 * half / ny) / 3.0
    return total


def solve_open_problem(dom: LensDomain, data: Callable[[float, float], float],
                       n_r: int, n_theta: int,
                       source: Callable[[float, float], float] | None = None,
                       ) -> LensSolution:
    """Solve the open problem: data on the non-characteristic boundary only.

    data(r, theta) is evaluated on the inner arc r = eps and the two
    radial segments |theta| = theta0, r in [eps, 1]; it must be
    continuous there (a single callable keeps the corners compatible by
    construction).  source(r, theta), if given, is the right-hand side.

    The elliptic sector is solved by a 5-point scheme on a grid whose
    top row sits half a cell below the unit circle (one-sided radial
    closure there), the circle trace is obtained by quadratic
    extrapolation, and the ideal region is filled by transport along the
    characteristic tangent-line foliation, which is exact up to the
    trace interpolation and source quadrature.
    """
    if n_r < 3 or n_theta < 4:
        raise ValueError("need n_r >= 3 and n_theta >= 4")
    theta0 = dom.theta0
    eps = dom.eps
    h_r = (1.0 - eps) / (n_r + 0.5)
    h_t = 2.0 * theta0 / n_theta
    m, n = n_r, n_theta
    r_ell = eps + h_r * np.arange(m + 1)        # top row at 1 - h_r/2
    thetas = -theta0 + h_t * np.arange(n + 1)

    def f_at(r, th):
        return 0.0 if source is None else float(source(r, th))

    # assemble the elliptic block: unknowns (i, j), 1 <= i <= m, 1 <= j <= n-1
    nun = m * (n - 1)

    def idx(i, j):
        return (i - 1) * (n - 1) + (j - 1)

    rows, cols, vals = [], [], []
    b = np.zeros(nun)
    phi = np.zeros((m + 1, n + 1))
    phi[0, :] = [data(eps, th) for th in thetas]
    phi[:, 0] = [data(rv, thetas[0]) for rv in r_ell]
    phi[:, -1] = [data(rv, thetas[-1]) for rv in r_ell]

    def add(row, i, j, coef):
        if coef == 0.0:
            return
        if i == 0 or j == 0 or j == n:
            b[row] -= coef * phi[i, j]
        else:
            rows.append(row)
            cols.append(idx(i, j))
            vals.append(coef)

    inv_ht2 = 1.0 / (h_t * h_t)
    for i in range(1, m + 1):
        rv = r_ell[i]
        a_c, b_c = _radial_coeffs(np.array(rv))
        a_c, b_c = float(a_c), float(b_c)
        for j in range(1, n):
            row = idx(i, j)
            b[row] += f_at(rv, thetas[j])
            add(row, i, j - 1, inv_ht2)
            add(row, i, j + 1, inv_ht2)
            if i < m:
                add(row, i - 1, j, a_c / h_r**2 - b_c / (2 * h_r))
                add(row, i + 1, j, a_c / h_r**2 + b_c / (2 * h_r))
                add(row, i, j, -2 * a_c / h_r**2 - 2 * inv_ht2)
            else:
                # one-sided closure at the top row r = 1 - h/2
                add(row, i, j, a_c / h_r**2 + 3 * b_c / (2 * h_r)
                    - 2 * inv_ht2)
                add(row, i - 1, j, -2 * a_c / h_r**2 - 2 * b_c / h_r)
                add(row, i - 2, j, a_c / h_r**2 + b_c / (2 * h_r))
    A = sp.csr_matrix((vals, (rows, cols)), shape=(nun, nun))
    sol = spla.spsolve(A, b)
    if not np.all(np.isfinite(sol)):
        sol, info = spla.lgmres(A, b, atol=1e-12, maxiter=2000)
        if info != 0 or not np.all(np.isfinite(sol)):
            raise NonConvergence("elliptic sparse solve failed")
    phi[1:, 1:-1] = sol.reshape(m, n - 1)

    # trace on the unit circle by quadratic extrapolation (exact for
    # fields quadratic in r)
    u0 = (15.0 * phi[m, :] - 10.0 * phi[m - 1, :] + 3.0 * phi[m - 2, :]) / 8.0

    # full straddled grid out to the pole radius
    r_pole = 1.0 / dom.x0
    M = int(math.ceil((r_pole - eps) / h_r - 1e-12))
    M = max(M, m + 2)
    r_all = eps + h_r * np.arange(M + 1)
    values = np.full((M + 1, n + 1), np.nan)
    values[: m + 1, :] = phi
    mask = np.zeros((M + 1, n + 1), dtype=bool)
    filled = 0
    for i in range(m + 1, M + 1):
        rv = r_all[i]
        g = math.acos(min(1.0, 1.0 / rv))
        inside = np.abs(thetas) + g <= theta0 + 1e-12
        if not inside.any():
            mask[i, :] = True
            continue
        T = np.full(inside.sum(), g)
        vals_h, uncovered = _hyperbolic_values(
            thetas, u0, thetas[inside], T, source, theta0)
        row = np.full(n + 1, np.nan)
        row[inside] = vals_h
        if uncovered.any():
            # fill stragglers from covered neighbours along the row
            cov = np.where(inside)[0][~uncovered]
            bad = np.where(inside)[0][uncovered]
            if cov.size == 0:
                raise FoliationGap(
                    f"characteristic feet miss the arc for all of row r = {rv}")
            row[bad] = np.interp(thetas[bad], thetas[cov], row[cov])
            filled += int(bad.size)
        values[i, :] = row
        mask[i, :] = ~inside
    if filled > 0.1 * max(1, int((~mask[m + 1:, :]).sum())):
        raise FoliationGap(
            f"{filled} ideal-region nodes needed interpolation fill")

    field = GridField((eps, -theta0), (h_r, h_t), values, POLAR, mask)

    # per-region residual norms of the centered operator
    def centered_residual(block_rows):
        out = 0.0
        for i in block_rows:
            rv = r_all[i]
            a_c, b_c = _radial_coeffs(np.array(rv))
            for j in range(1, n):
                if np.isnan(values[i - 1, j]) or np.isnan(values[i + 1, j]) \
                        or np.isnan(values[i, j - 1]) or np.isnan(values[i, j + 1]) \
                        or np.isnan(values[i, j]):
                    continue
                lap = (float(a_c) * (values[i + 1, j] - 2 * values[i, j]
                                     + values[i - 1, j]) / h_r**2
                       + (values[i, j + 1] - 2 * values[i, j]
                          + values[i, j - 1]) / h_t**2
                       + float(b_c) * (values[i + 1, j] - values[i - 1, j])
                       / (2 * h_r))
                out = max(out, abs(lap - f_at(rv, thetas[j])))
        return out

    res_ell = centered_residual(range(1, m))
    res_hyp = centered_residual(range(m + 2, M))
    return LensSolution(field, u0, thetas, res_ell, res_hyp, filled)


@dataclass(frozen=True)
class GapReport:
    """Over-determination diagnostics for closed-boundary data."""

    gap: float
    upper_gap: float
    lower_gap: float
    n_samples: int
    solution: LensSolution


def overdetermination_gap(dom: LensDomain,
                          data: Callable[[float, float], float],
                          hyperbolic_data: Callable[[float, float], float],
                          n_r: int, n_theta: int,
                          source: Callable[[float, float], float] | None = None,
                          samples_per_segment: int = 65) -> GapReport:
    """Measure how over-determined closed-boundary data is.

    Solves the open problem from the non-characteristic data alone, then
    compares the induced trace along the two characteristic boundary
    segments with the separately prescribed hyperbolic_data(r, theta).
    The max discrepancy is the gap; for data compatible with a genuine
    solution it vanishes under refinement, while a prescribed
    perturbation is reproduced at its own magnitude.
    """
    sol = solve_open_problem(dom, data, n_r, n_theta, source)
    theta0 = dom.theta0

    def segment_gap(sign: float) -> float:
        ts = np.linspace(0.0, theta0, samples_per_segment)
        worst = 0.0
        for t in ts:
            th = sign * t
            T = theta0 - t           # foot distance to the touch angle
            rv = 1.0 / math.cos(T)
            vals, unc = _hyperbolic_values(
                sol.thetas, sol.nu_trace, np.array([th]), np.array([T]),
                source, theta0)
            if unc.any():
                raise FoliationGap("characteristic sample off the arc")
            worst = max(worst, abs(float(vals[0])
                                   - float(hyperbolic_data(rv, th))))
        return worst

    up = segment_gap(+1.0)
    lo = segment_gap(-1.0)
    return GapReport(max(up, lo), up, lo, 2 * samples_per_segment, sol)
