"""Ball energies, conformal energy profiles, and the Liouville verdict.

For a field with pointwise speed Q = |F|^2 in n-space, the energy of a
ball is the integral of the density primitive e(Q).  The scale-weighted
profile r^(4-n) E(B_r) is nondecreasing for r-stationary fields, and
slow enough energy growth in dimensions above four forces the field to
vanish; the verdict logic packages exactly those hypotheses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateFit
from .surfaces import Density

APPLIES = "applies"
DOES_NOT_APPLY = "does_not_apply"


@dataclass(frozen=True)
class FieldSampler:
    """Pointwise speed sampler in n-space.

    evaluate takes an (N, n) array of points and returns the N speeds
    Q >= 0.  stationary is a caller-asserted flag: the monotonicity of
    the conformal profile is a theorem only for r-stationary fields.
    """

    n: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    stationary: bool = False
    label: str = "custom"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")

    def speeds(self, points: np.ndarray) -> np.ndarray:
        q = np.asarray(self.evaluate(points), dtype=float)
        if np.any(q < 0):
            raise ValueError("sampler produced a negative speed Q")
        return q


def zero_sampler(n: int) -> FieldSampler:
    return FieldSampler(n, lambda p: np.zeros(p.shape[0]), True, "zero")


def constant_sampler(n: int, q0: float) -> FieldSampler:
    if q0 < 0:
        raise ValueError("constant speed must be nonnegative")
    return FieldSampler(n, lambda p: np.full(p.shape[0], float(q0)), True,
                        "constant")


def gaussian_sampler(n: int) -> FieldSampler:
    """Q(x) = exp(-|x|^2); smooth, bounded by 1, not declared stationary."""
    return FieldSampler(
        n, lambda p: np.exp(-np.sum(p * p, axis=1)), False, "gaussian")


@dataclass(frozen=True)
class QuadratureSpec:
    """Deterministic tensor-product midpoint rule in radial-spherical
    coordinates: radial nodes per shell, angular nodes per angle axis."""

    radial: int = 32
    angular: int = 16

    def __post_init__(self):
        if self.radial < 2 or self.angular < 4:
            raise ValueError("need at least 2 radial and 4 angular nodes")


def _sphere_nodes(n: int, angular: int):
    """Midpoint directions and weights on the unit (n-1)-sphere.

    Returns (directions (M, n), weights (M,)) with weights summing to
    the sphere area up to midpoint error.
    """
    axes = []
    weights = []
    for i in range(n - 1):
        hi = math.pi if i < n - 2 else 2.0 * math.pi
        h = hi / angular
        nodes = h * (np.arange(angular) + 0.5)
        axes.append(nodes)
        weights.append(np.full(angular, h))
    grids = np.meshgrid(*axes, indexing="ij")
    wgrids = np.meshgrid(*weights, indexing="ij")
    w = np.ones_like(grids[0])
    for i in range(n - 1):
        w = w * wgrids[i]
        power = n - 2 - i
        if power > 0:
            w = w * np.sin(grids[i]) ** power
    dirs = np.empty(grids[0].shape + (n,))
    sin_prod = np.ones_like(grids[0])
    for i in range(n - 1):
        dirs[..., i] = sin_prod * np.cos(grids[i])
        sin_prod = sin_prod * np.sin(grids[i])
    dirs[..., n - 1] = sin_prod
    return dirs.reshape(-1, n), w.reshape(-1)


def _shell_energy(sampler: FieldSampler, dens: Density,
                  r_lo: float, r_hi: float, quad: QuadratureSpec,
                  dirs: np.ndarray, dir_w: np.ndarray) -> float:
    h = (r_hi - r_lo) / quad.radial
    radii = r_lo + h * (np.arange(quad.radial) + 0.5)
    total = 0.0
    for rho in radii:
        pts = rho * dirs
        e_vals = np.asarray(dens.e(sampler.speeds(pts)))
        total += float((e_vals * dir_w).sum()) * rho ** (sampler.n - 1) * h
    return total


def ball_energy(sampler: FieldSampler, dens: Density, r: float,
                quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Energy of the ball of radius r: integral of e(Q) by the
    deterministic midpoint rule in radial-spherical coordinates."""
    if r <= 0:
        raise ValueError("radius must be positive")
    dirs, dir_w = _sphere_nodes(sampler.n, quad.angular)
    return _shell_energy(sampler, dens, 0.0, r, quad, dirs, dir_w)


@dataclass(frozen=True)
class RadialEnergyProfile:
    """Ball energies over nested radii and their conformal weighting.

    energies accumulate shell-by-shell, so the column is nondecreasing
    by construction; conformal holds r^(4-n) E(B_r).  monotone_conformal
    reports whether that column is nondecreasing; it is a pass/fail
    matter only when the sampler declared stationarity.
    """

    radii: np.ndarray
    energies: np.ndarray
    conformal: np.ndarray
    n: int
    q_crit: float | None
    stationary: bool
    monotone_conformal: bool


def conformal_profile(sampler: FieldSampler, dens: Density, radii,
                      quad: QuadratureSpec = QuadratureSpec(),
                      ) -> RadialEnergyProfile:
    """Nested-shell energy profile with conformal weights r^(4-n)."""
    rr = np.asarray(radii, dtype=float)
    if rr.ndim != 1 or rr.size < 1:
        raise ValueError("radii must be a nonempty 1-d sequence")
    if np.any(rr <= 0) or np.any(np.diff(rr) <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    dirs, dir_w = _sphere_nodes(sampler.n, quad.angular)
    energies = np.empty(rr.size)
    acc = 0.0
    prev = 0.0
    for i, rv in enumerate(rr):
        acc += _shell_energy(sampler, dens, prev, rv, quad, dirs, dir_w)
        energies[i] = acc
        prev = rv
    conformal = rr ** (4 - sampler.n) * energies
    mono = bool(np.all(np.diff(conformal) >= -1e-14 * max(1.0,
                                                          conformal.max())))
    q_crit = dens.q_bound
    if q_crit is None and dens.kind == "minkowski":
        q_crit = 1.0
    return RadialEnergyProfile(rr, energies, conformal, sampler.n, q_crit,
                               sampler.stationary, mono)


@dataclass(frozen=True)
class GrowthFit:
    """Power-law fit E ~ C r^k with the max log-space misfit."""

    C: float
    k: float
    residual: float


def growth_fit(profile: RadialEnergyProfile) -> GrowthFit:
    """Least-squares fit of log E against log r.

    Raises DegenerateFit when all energies vanish (the exception carries
    k = -inf: every growth condition then holds trivially) or when fewer
    than three radii have positive energy.
    """
    E = np.asarray(profile.energies, dtype=float)
    r = np.asarray(profile.radii, dtype=float)
    pos = E > 0
    if not pos.any():
        exc = DegenerateFit("all energies are zero; any growth bound holds")
        exc.k = -math.inf
        raise exc
    if pos.sum() < 3:
        raise DegenerateFit("need at least 3 radii with positive energy")
    lr = np.log(r[pos])
    le = np.log(E[pos])
    A = np.column_stack([np.ones(lr.size), lr])
    coef, *_ = np.linalg.lstsq(A, le, rcond=None)
    fit = A @ coef
    return GrowthFit(float(math.exp(coef[0])), float(coef[1]),
                     float(np.abs(le - fit).max()))


@dataclass(frozen=True)
class LiouvilleVerdict:
    """Outcome of the vanishing-field hypothesis check."""

    n: int
    C: float | None
    k: float
    flags: dict = field(default_factory=dict)
    verdict: str = DOES_NOT_APPLY
    reason: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "C": self.C,
            # a degenerate fit carries k = -inf, which JSON cannot hold
            "k": self.k if math.isfinite(self.k) else None,
            "flags": dict(self.flags),
            "verdict": self.verdict,
            "reason": self.reason,
        }


def liouville_verdict(n: int, k: float, *,
                      rho_prime_nonpositive: bool,
                      bounded_by_Qcrit: bool,
                      stationary: bool,
                      C: float | None = None) -> LiouvilleVerdict:
    """Decide whether the vanishing theorem applies.

    Applies iff n > 4, the field is r-stationary, the density is
    nonincreasing, Q stays below the critical speed, and the energy
    growth satisfies 4 + k - n < 0; otherwise the first failed
    hypothesis is named.
    """
    checks = [
        ("dimension n > 4", n > 4),
        ("field is r-stationary", bool(stationary)),
        ("density is nonincreasing (rho' <= 0)", bool(rho_prime_nonpositive)),
        ("Q bounded above by the critical speed", bool(bounded_by_Qcrit)),
        ("energy growth 4 + k - n < 0", 4 + k - n < 0),
    ]
    flags = {name: ok for name, ok in checks}
    for name, ok in checks:
        if not ok:
            return LiouvilleVerdict(n, C, k, flags, DOES_NOT_APPLY, name)
    return LiouvilleVerdict(n, C, k, flags, APPLIES, None)
