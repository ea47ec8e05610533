"""Structured grid fields and the difference/quadrature kernels used everywhere.

A GridField stores scalar or 2-vector samples on a uniform structured grid.
Axis 0 is x (or r on a polar chart), axis 1 is y (or theta).  All stencils
are second order: centered in the interior, one-sided at the edges.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CARTESIAN = "cartesian"
POLAR = "polar"


@dataclass(frozen=True)
class GridField:
    """Samples of a scalar or 2-vector on a uniform structured grid.

    Parameters
    ----------
    origin : (float, float)
        Coordinates of the (0, 0) node.
    spacing : (float, float)
        Grid spacing along axis 0 and axis 1; both positive.
    values : ndarray
        Shape (nx, ny) for scalars or (nx, ny, 2) for vector fields.
    chart : str
        "cartesian" (x, y) or "polar" (r, theta).
    mask : ndarray or None
        Optional boolean (nx, ny) array; True marks excluded nodes.
    """

    origin: tuple[float, float]
    spacing: tuple[float, float]
    values: np.ndarray
    chart: str = CARTESIAN
    mask: np.ndarray | None = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3 or v.shape[2] not in (1, 2):
            raise ValueError("values must be (nx, ny) or (nx, ny, 2)")
        if v.shape[0] < 3 or v.shape[1] < 3:
            raise ValueError("need at least 3 nodes per axis")
        if not (self.spacing[0] > 0 and self.spacing[1] > 0):
            raise ValueError("spacing must be positive")
        if self.chart not in (CARTESIAN, POLAR):
            raise ValueError(f"unknown chart {self.chart!r}")
        object.__setattr__(self, "values", v)
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=bool)
            if m.shape != v.shape[:2]:
                raise ValueError("mask shape must match grid dims")
            object.__setattr__(self, "mask", m)

    @property
    def dims(self) -> tuple[int, int]:
        return self.values.shape[0], self.values.shape[1]

    @property
    def components(self) -> int:
        return self.values.shape[2]

    def axis0(self) -> np.ndarray:
        """Node coordinates along axis 0 (x, or r on a polar chart)."""
        return self.origin[0] + self.spacing[0] * np.arange(self.dims[0])

    def axis1(self) -> np.ndarray:
        """Node coordinates along axis 1 (y, or theta on a polar chart)."""
        return self.origin[1] + self.spacing[1] * np.arange(self.dims[1])

    def component(self, k: int) -> np.ndarray:
        return self.values[:, :, k]

    def scalar(self) -> np.ndarray:
        if self.components != 1:
            raise ValueError("scalar() requires a 1-component field")
        return self.values[:, :, 0]

    def with_values(self, values: np.ndarray, mask: np.ndarray | None = None) -> "GridField":
        return GridField(self.origin, self.spacing, values, self.chart, mask)


def field_from_function(origin, spacing, dims, fn, chart=CARTESIAN) -> GridField:
    """Sample fn(axis0, axis1) on the grid; fn must broadcast over meshgrids."""
    x = origin[0] + spacing[0] * np.arange(dims[0])
    y = origin[1] + spacing[1] * np.arange(dims[1])
    X, Y = np.meshgrid(x, y, indexing="ij")
    return GridField(tuple(origin), tuple(spacing), np.asarray(fn(X, Y), dtype=float), chart)


def gradient(f: np.ndarray, hx: float, hy: float) -> tuple[np.ndarray, np.ndarray]:
    """Second-order gradient: centered inside, one-sided at the edges."""
    fx = np.gradient(f, hx, axis=0, edge_order=2)
    fy = np.gradient(f, hy, axis=1, edge_order=2)
    return fx, fy


def second_derivatives(f: np.ndarray, hx: float, hy: float):
    """(f_xx, f_xy, f_yy) at interior nodes, NaN on the boundary ring."""
    nx, ny = f.shape
    fxx = np.full_like(f, np.nan)
    fyy = np.full_like(f, np.nan)
    fxy = np.full_like(f, np.nan)
    fxx[1:-1, :] = (f[2:, :] - 2 * f[1:-1, :] + f[:-2, :]) / hx**2
    fyy[:, 1:-1] = (f[:, 2:] - 2 * f[:, 1:-1] + f[:, :-2]) / hy**2
    fxy[1:-1, 1:-1] = (
        f[2:, 2:] - f[2:, :-2] - f[:-2, 2:] + f[:-2, :-2]
    ) / (4 * hx * hy)
    return fxx, fxy, fyy


def cell_average(f: np.ndarray) -> np.ndarray:
    """Average node values to cell centers (4-corner mean)."""
    return 0.25 * (f[:-1, :-1] + f[1:, :-1] + f[:-1, 1:] + f[1:, 1:])


def cell_gradient(f: np.ndarray, hx: float, hy: float):
    """Gradient at cell centers; exact for affine data (compact centered)."""
    fx = 0.5 * ((f[1:, :-1] - f[:-1, :-1]) + (f[1:, 1:] - f[:-1, 1:])) / hx
    fy = 0.5 * ((f[:-1, 1:] - f[:-1, :-1]) + (f[1:, 1:] - f[1:, :-1])) / hy
    return fx, fy


def midpoint_integral(cell_values: np.ndarray, hx: float, hy: float,
                      cell_mask: np.ndarray | None = None) -> float:
    """Midpoint-rule integral from cell-center samples."""
    if cell_mask is not None:
        cell_values = np.where(cell_mask, 0.0, cell_values)
    return float(cell_values.sum() * hx * hy)


def bilinear_sample(values: np.ndarray, origin: tuple[float, float],
                    spacing: tuple[float, float], points: np.ndarray,
                    pad: float = 1e-9) -> np.ndarray:
    """Bilinear interpolation of node values at chart points (N, 2).

    Points may overshoot the grid rectangle by at most pad (then they are
    clamped); anything further out raises ValueError.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    nx, ny = values.shape
    sx = (pts[:, 0] - origin[0]) / spacing[0]
    sy = (pts[:, 1] - origin[1]) / spacing[1]
    lim_x = pad / spacing[0]
    lim_y = pad / spacing[1]
    if (sx < -lim_x).any() or (sx > nx - 1 + lim_x).any() \
            or (sy < -lim_y).any() or (sy > ny - 1 + lim_y).any():
        raise ValueError("sample point outside the grid rectangle")
    sx = np.clip(sx, 0.0, nx - 1)
    sy = np.clip(sy, 0.0, ny - 1)
    i = np.minimum(sx.astype(int), nx - 2)
    j = np.minimum(sy.astype(int), ny - 2)
    tx = sx - i
    ty = sy - j
    return ((1 - tx) * (1 - ty) * values[i, j]
            + tx * (1 - ty) * values[i + 1, j]
            + (1 - tx) * ty * values[i, j + 1]
            + tx * ty * values[i + 1, j + 1])


def integrate_gradient(gx: np.ndarray, gy: np.ndarray, hx: float, hy: float,
                       base: tuple[int, int] = (0, 0)):
    """Reconstruct a potential from gradient samples by trapezoidal L-paths.

    Integrates first along axis 0 then axis 1 from the base node, and again
    in the opposite order; returns (potential, defect) where defect is the
    max disagreement between the two reconstructions.  The first path's
    result is returned (the choice is immaterial when the defect is small).
    """
    i0, j0 = base
    # cumulative trapezoid along each axis, anchored so row/col i0/j0 is 0
    def cumtrap(a, h, axis):
        pads = 0.5 * h * (np.take(a, range(0, a.shape[axis] - 1), axis=axis)
                          + np.take(a, range(1, a.shape[axis]), axis=axis))
        out = np.cumsum(pads, axis=axis)
        zero = np.zeros_like(np.take(out, [0], axis=axis))
        out = np.concatenate([zero, out], axis=axis)
        ref = np.take(out, [i0 if axis == 0 else j0], axis=axis)
        return out - ref

    Ix = cumtrap(gx, hx, 0)      # integral of gx along axis0, zero at i0
    Iy = cumtrap(gy, hy, 1)
    # path A: axis0 first at j0, then axis1
    pa = Ix[:, [j0]] + Iy
    # path B: axis1 first at i0, then axis0
    pb = Iy[[i0], :] + Ix
    defect = float(np.nanmax(np.abs(pa - pb)))
    return pa, defect
