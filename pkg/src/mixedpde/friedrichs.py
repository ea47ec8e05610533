"""Symmetric positive first-order systems for a Keldysh-type equation.

The scalar equation (K(eta) u_eta)_eta + u_xixi + k u_xi = f on a
periodic strip becomes the first-order system A1 w_eta + A2 w_xi + B w =
(f, 0) in w = (u_eta, u_xi).  A matrix multiplier E makes the system
symmetric positive when its parameters (a, c) are chosen well, and an
admissible boundary decomposition at eta = R completes the hypotheses
under which a strong solution exists; this module builds those objects,
verifies every hypothesis numerically, and solves the system by
least squares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    InadmissibleBoundary,
    Infeasible,
    InvalidTypeChange,
    SingularMultiplier,
    SolverBreakdown,
)
from .grids import CARTESIAN, GridField

AUDIT_REFINE = 4


@dataclass(frozen=True)
class TypeChangeFn:
    """Type-change coefficient K on [0, R]: strictly increasing through a
    single zero crossing at eta_crit."""

    K: Callable[[float], float]
    K_prime: Callable[[float], float]
    R: float
    eta_crit: float
    nu0: float                     # verified lower bound of K'

    def sample(self, n: int) -> np.ndarray:
        return np.linspace(0.0, self.R, n)


def type_change_fn(K, K_prime, R: float, samples: int = 257) -> TypeChangeFn:
    """Validate a candidate K and locate its zero crossing.

    Requires K' >= nu0 > 0 on a sample grid, K(0) < 0 < K(R).
    """
    if R <= 0:
        raise InvalidTypeChange("interval length R must be positive")
    etas = np.linspace(0.0, R, samples)
    kp = np.array([float(K_prime(e)) for e in etas])
    nu0 = float(kp.min())
    if nu0 <= 0:
        raise InvalidTypeChange(
            f"K' must be positive on [0, R]; min sampled K' = {nu0}")
    k0, kR = float(K(0.0)), float(K(R))
    if not (k0 < 0 < kR):
        raise InvalidTypeChange(
            f"K must change sign on (0, R): K(0) = {k0}, K(R) = {kR}")
    from scipy.optimize import brentq

    eta_crit = float(brentq(lambda e: float(K(e)), 0.0, R, xtol=1e-14))
    return TypeChangeFn(K, K_prime, R, eta_crit, nu0)


def linear_type_change(eta_crit: float = 0.5, R: float = 1.0) -> TypeChangeFn:
    """The linear profile K(eta) = eta - eta_crit."""
    return type_change_fn(lambda e: e - eta_crit, lambda e: 1.0, R)


@dataclass(frozen=True)
class FirstOrderSystem:
    """A1 w_eta + A2 w_xi + B w = (f, 0) with
    A1 = diag(K, -1), A2 = [[0, 1], [1, 0]], B = [[K', k], [0, 0]]."""

    K: TypeChangeFn
    k: float

    def A1(self, eta: float) -> np.ndarray:
        return np.array([[float(self.K.K(eta)), 0.0], [0.0, -1.0]])

    @property
    def A2(self) -> np.ndarray:
        return np.array([[0.0, 1.0], [1.0, 0.0]])

    def B(self, eta: float) -> np.ndarray:
        return np.array([[float(self.K.K_prime(eta)), self.k], [0.0, 0.0]])


def build_system(K: TypeChangeFn, k: float) -> FirstOrderSystem:
    """Assemble the first-order system; k must be nonzero."""
    if k == 0:
        raise ValueError("the lower-order coefficient k must be nonzero")
    # re-validate on a fresh grid so hand-built TypeChangeFn values are
    # caught here too
    type_change_fn(K.K, K.K_prime, K.R)
    return FirstOrderSystem(K, k)


@dataclass(frozen=True)
class MultipliedSystem:
    """System multiplied through by E = [[a, -cK], [c, a]]."""

    base: FirstOrderSystem
    a: float
    c: float
    symmetry_defect: float

    def E(self, eta: float) -> np.ndarray:
        Kv = float(self.base.K.K(eta))
        return np.array([[self.a, -self.c * Kv], [self.c, self.a]])

    def det_E(self, eta):
        Kv = np.asarray([float(self.base.K.K(e)) for e in np.atleast_1d(eta)])
        out = self.a**2 + self.c**2 * Kv
        return float(out[0]) if np.isscalar(eta) else out

    def EA1(self, eta: float) -> np.ndarray:
        return self.E(eta) @ self.base.A1(eta)

    def EA2(self, eta: float) -> np.ndarray:
        return self.E(eta) @ self.base.A2

    def EB(self, eta: float) -> np.ndarray:
        return self.E(eta) @ self.base.B(eta)


@dataclass(frozen=True)
class DetEProfile:
    etas: np.ndarray
    values: np.ndarray
    min_value: float


def apply_multiplier(sys: FirstOrderSystem, a: float, c: float,
                     samples: int = 257):
    """Multiply the system by E and check it stays invertible.

    Returns (MultipliedSystem, DetEProfile); the symmetry of EA1 and EA2
    is verified on the sample grid rather than assumed, and the largest
    asymmetry found is carried on the result.

    Raises SingularMultiplier when min det E <= 0 on the audit grid.
    """
    if a <= 0:
        raise ValueError("multiplier parameter a must be positive")
    etas = np.linspace(0.0, sys.K.R, samples)
    audit = np.linspace(0.0, sys.K.R, AUDIT_REFINE * (samples - 1) + 1)
    ms = MultipliedSystem(sys, a, c, 0.0)
    det_audit = ms.det_E(audit)
    if det_audit.min() <= 0:
        raise SingularMultiplier(
            f"det E reaches {det_audit.min():.6g} on [0, {sys.K.R}]; "
            "the multiplier is not invertible there")
    defect = 0.0
    for e in etas:
        for M in (ms.EA1(e), ms.EA2(e)):
            defect = max(defect, float(np.abs(M - M.T).max()))
    ms = MultipliedSystem(sys, a, c, defect)
    vals = ms.det_E(etas)
    return ms, DetEProfile(etas, vals, float(det_audit.min()))


@dataclass(frozen=True)
class PositivityReport:
    """Definiteness audit of the symmetrized zero-order term."""

    etas: np.ndarray
    eig_min: float
    eig_max: float
    det_formula_defect: float     # |det kappa* - (ak/2)(cK' - ak/2)| max
    positive_definite: bool


def positivity_matrix(sys: FirstOrderSystem, a: float, c: float,
                      samples: int = 257):
    """Symmetrized zero-order matrix of the multiplied system and its
    positivity audit.

    kappa* = [[a K'/2, a k/2], [a k/2, c k]]; its determinant equals
    (ak/2)(c K' - ak/2), which is cross-checked at every sample.
    Returns (kappa: eta -> 2x2 array, PositivityReport).
    """
    k = sys.k

    def kappa(eta: float) -> np.ndarray:
        kp = float(sys.K.K_prime(eta))
        return np.array([[0.5 * a * kp, 0.5 * a * k],
                         [0.5 * a * k, c * k]])

    etas = np.linspace(0.0, sys.K.R, AUDIT_REFINE * (samples - 1) + 1)
    eig_lo = math.inf
    eig_hi = -math.inf
    defect = 0.0
    for e in etas:
        m = kappa(e)
        ev = np.linalg.eigvalsh(m)
        eig_lo = min(eig_lo, float(ev[0]))
        eig_hi = max(eig_hi, float(ev[1]))
        kp = float(sys.K.K_prime(e))
        delta = (0.5 * a * k) * (c * kp - 0.5 * a * k)
        defect = max(defect, abs(float(np.linalg.det(m)) - delta))
    report = PositivityReport(np.linspace(0.0, sys.K.R, samples),
                              eig_lo, eig_hi, defect, eig_lo > 1e-12)
    return kappa, report


def _rank_one_vectors(M: np.ndarray, tol: float):
    """(range vector, null vector) of an (at most rank-1) 2x2 matrix,
    None where the space is trivial / everything."""
    u, s, vt = np.linalg.svd(M)
    scale = max(s[0], 1.0)
    rng = u[:, 0] if s[0] > tol * scale else None
    nul = vt[1] if s[1] <= tol * scale else None
    return rng, nul


@dataclass(frozen=True)
class AdmissibilityReport:
    """Boundary-decomposition audit at eta = R.

    mu_eig_min / mu_eig_max bound the eigenvalues of the symmetrized
    difference matrix mu* over the xi samples; the flags record the
    structural checks.  kappa_eig_range is carried over from a
    PositivityReport when one is supplied, else None and the verdict
    covers the boundary checks alone.
    """

    mu_eig_min: float
    mu_eig_max: float
    mu_eigs_at_first_sample: tuple[float, float]
    boundary_kernel_defect: float
    ranges_intersect_trivially: bool
    null_spaces_span: bool
    kappa_eig_range: tuple[float, float] | None
    delta_samples: np.ndarray | None
    verdict: str


def boundary_admissibility(sigma, tau, a: float, c: float, K_at_R: float,
                           k: float, positivity: PositivityReport | None = None,
                           xi_samples: int = 64,
                           tol: float = 1e-10) -> AdmissibilityReport:
    """Check the admissible-decomposition hypotheses at eta = R.

    sigma and tau are functions of xi (constants are accepted) defining
    the boundary condition sigma w1 + tau w2 = g; their product must
    keep one strict sign, opposite to the sign of k.  beta is the
    boundary matrix [[a, c], [c, -a/K(R)]], split as beta = beta_plus +
    beta_minus with beta_minus annihilating boundary-compatible states;
    admissibility needs mu* = (beta_plus - beta_minus)* >= 0, trivially
    intersecting ranges, and null spaces that span.

    Raises InadmissibleBoundary naming the first failed check.
    """
    if K_at_R <= 0:
        raise InadmissibleBoundary(
            "K(R) must be positive (elliptic side at the outer boundary)")
    sig_fn = sigma if callable(sigma) else (lambda xi, v=sigma: v)
    tau_fn = tau if callable(tau) else (lambda xi, v=tau: v)
    xis = np.linspace(0.0, 2.0 * math.pi, xi_samples, endpoint=False)
    prod = np.array([float(sig_fn(x)) * float(tau_fn(x)) for x in xis])
    if not (np.all(prod > 0) or np.all(prod < 0)):
        raise InadmissibleBoundary(
            "sigma * tau must keep one strict sign along the boundary")
    if np.sign(prod[0]) != -np.sign(k):
        raise InadmissibleBoundary(
            "sign(sigma * tau) must be opposite to sign(k)")
    beta = np.array([[a, c], [c, -a / K_at_R]])
    mu_lo = math.inf
    mu_hi = -math.inf
    mu_first = None
    kernel_defect = 0.0
    ranges_ok = True
    span_ok = True
    for x in xis:
        s = float(sig_fn(x))
        t = float(tau_fn(x))
        den = s * s + t * t
        beta_minus = np.array([
            [s * t * c + s * s * a, t * t * c + s * t * a],
            [-s * t * a / K_at_R + s * s * c,
             -t * t * a / K_at_R + s * t * c],
        ]) / den
        beta_plus = beta - beta_minus
        mu = beta_plus - beta_minus
        mu_star = 0.5 * (mu + mu.T)
        ev = np.linalg.eigvalsh(mu_star)
        if mu_first is None:
            mu_first = (float(ev[0]), float(ev[1]))
        mu_lo = min(mu_lo, float(ev[0]))
        mu_hi = max(mu_hi, float(ev[1]))
        w = np.array([t, -s])          # satisfies sigma w1 + tau w2 = 0
        kernel_defect = max(kernel_defect, float(np.abs(beta_minus @ w).max()))
        rng_p, nul_p = _rank_one_vectors(beta_plus, tol)
        rng_m, nul_m = _rank_one_vectors(beta_minus, tol)
        if rng_p is not None and rng_m is not None:
            if abs(float(np.linalg.det(np.column_stack([rng_p, rng_m])))) <= tol:
                ranges_ok = False
        if nul_p is None or nul_m is None:
            # a full-rank part has no null line to contribute
            span_ok = False
        elif abs(float(np.linalg.det(np.column_stack([nul_p, nul_m])))) <= tol:
            span_ok = False
    checks = [
        ("mu* positive semidefinite", mu_lo >= -1e-12),
        ("boundary kernel annihilated by beta_minus", kernel_defect <= 1e-10),
        ("ranges intersect trivially", ranges_ok),
        ("null spaces span", span_ok),
    ]
    if positivity is not None:
        checks.insert(0, ("kappa* positive definite",
                          positivity.positive_definite))
    for name, ok in checks:
        if not ok:
            raise InadmissibleBoundary(f"failed check: {name}")
    return AdmissibilityReport(
        mu_lo, mu_hi, mu_first, kernel_defect, ranges_ok, span_ok,
        None if positivity is None
        else (positivity.eig_min, positivity.eig_max),
        None, "admissible")


@dataclass(frozen=True)
class MultiplierChoice:
    """A multiplier pair (a, c) with its verified feasibility data."""

    a: float
    c: float
    det_E_min: float
    feasible_interval: tuple[float, float]


def choose_multiplier(K: TypeChangeFn, k: float, sigma, tau,
                      a: float = 1.0) -> MultiplierChoice:
    """Find c making the multiplied system symmetric positive with an
    admissible boundary decomposition.

    a is normalized (the constraints are homogeneous in (a, c) up to the
    ak/2 coupling).  The analytic bounds are c K' > ak/2 (definiteness)
    and c^2 |K(0)| < a^2 (invertibility), intersected with the mu*
    semidefiniteness found by bisection probing.

    Raises Infeasible listing the binding constraints when the interval
    is empty.
    """
    sys = build_system(K, k)
    sgn = 1.0 if k > 0 else -1.0
    lo = abs(a * k) / (2.0 * K.nu0)
    K0 = float(K.K(0.0))
    hi = a / math.sqrt(-K0) if K0 < 0 else math.inf
    if not lo < hi:
        raise Infeasible(
            "empty multiplier interval: need |c| K' > |a k|/2 "
            f"(|c| > {lo:.6g}) and c^2 |K(0)| < a^2 (|c| < {hi:.6g})")
    K_at_R = float(K.K(K.R))

    def feasible(c_abs: float):
        c = sgn * c_abs
        try:
            apply_multiplier(sys, a, c)
            _, pos = positivity_matrix(sys, a, c)
            boundary_admissibility(sigma, tau, a, c, K_at_R, k,
                                   positivity=pos)
            return True, None
        except (SingularMultiplier, InadmissibleBoundary) as exc:
            return False, str(exc)

    span = hi - lo if math.isfinite(hi) else max(1.0, 10 * lo)
    lo_w, hi_w = lo, lo + span
    cand = 0.5 * (lo_w + hi_w)
    ok, why = feasible(cand)
    for _ in range(60):
        if ok:
            break
        # mu* grows with |c|, det E shrinks: move toward whichever bound
        # the failure names
        if why and "det E" in why:
            hi_w = cand
        else:
            lo_w = cand
        cand = 0.5 * (lo_w + hi_w)
        ok, why = feasible(cand)
        if hi_w - lo_w < 1e-12:
            break
    if not ok:
        raise Infeasible(
            f"no feasible c in ({lo:.6g}, {hi:.6g}); last failure: {why}")
    ms, prof = apply_multiplier(sys, a, sgn * cand)
    return MultiplierChoice(a, sgn * cand, prof.min_value,
                            (sgn * lo, sgn * hi))


def manufactured_rhs(eta, u_eta, u_etaeta, u_xixi, u_xi,
                     K: TypeChangeFn, k: float):
    """Right-hand side K' u_eta + K u_etaeta + u_xixi + k u_xi from exact
    derivative samples (arrays broadcast together)."""
    eta = np.asarray(eta, dtype=float)
    Kv = np.vectorize(lambda e: float(K.K(e)))(eta)
    Kp = np.vectorize(lambda e: float(K.K_prime(e)))(eta)
    return Kp * u_eta + Kv * u_etaeta + u_xixi + k * u_xi


@dataclass(frozen=True)
class DiscreteSolution:
    """Least-squares solution w = (w1, w2) on the periodic strip."""

    field: GridField            # components (w1, w2); axis0 = eta, axis1 = xi
    interior_residual: float    # weighted l2 of the multiplied residual rows
    boundary_defect: float      # max |sigma w1 + tau w2 - g| at eta = R


STABILIZATION_WEIGHT = 0.25


def solve_strong(sys: FirstOrderSystem, choice: MultiplierChoice,
                 f: Callable[[float, float], float],
                 grid: tuple[int, int], sigma, tau,
                 g: Callable[[float], float] | None = None,
                 ) -> DiscreteSolution:
    """First-order-system least squares for the multiplied system.

    Residuals of E(A1 w_eta + A2 w_xi + B w - F) are collocated at
    eta-midpoints with xi-periodic centered differences, a boundary
    penalty enforces sigma w1 + tau w2 = g at eta = R, and light
    undivided second-difference stabilization controls the checkerboard
    states the staggering cannot see.  The normal equations are solved
    by sparse direct factorization.

    grid = (m, n): m eta intervals on [0, R], n periodic xi nodes.
    """
    m, n = grid
    if m < 4 or n < 4:
        raise ValueError("need at least 4 intervals in each direction")
    a, c = choice.a, choice.c
    ms, _ = apply_multiplier(sys, a, c)
    _, pos = positivity_matrix(sys, a, c)
    K_at_R = float(sys.K.K(sys.K.R))
    boundary_admissibility(sigma, tau, a, c, K_at_R, sys.k, positivity=pos)
    sig_fn = sigma if callable(sigma) else (lambda xi, v=sigma: v)
    tau_fn = tau if callable(tau) else (lambda xi, v=tau: v)
    g_fn = g if g is not None else (lambda xi: 0.0)

    h_eta = sys.K.R / m
    h_xi = 2.0 * math.pi / n
    etas = h_eta * np.arange(m + 1)
    xis = h_xi * np.arange(n)
    n_unknown = 2 * (m + 1) * n

    def uidx(i, j, comp):
        return 2 * (i * n + j) + comp

    rows, cols, vals = [], [], []
    rhs = []
    row_id = 0
    w_int = math.sqrt(h_eta * h_xi)

    def put(r_, c_, v_):
        if v_ != 0.0:
            rows.append(r_)
            cols.append(c_)
            vals.append(v_)

    for i in range(m):
        e_mid = etas[i] + 0.5 * h_eta
        EA1 = ms.EA1(e_mid)
        EA2 = ms.EA2(e_mid)
        EB = ms.EB(e_mid)
        E = ms.E(e_mid)
        for j in range(n):
            jp = (j + 1) % n
            jm = (j - 1) % n
            Fv = E @ np.array([float(f(e_mid, xis[j])), 0.0])
            for comp in range(2):
                for q in range(2):
                    # eta derivative at the midpoint
                    put(row_id, uidx(i + 1, j, q), w_int * EA1[comp, q] / h_eta)
                    put(row_id, uidx(i, j, q), -w_int * EA1[comp, q] / h_eta)
                    # centered xi derivative averaged over the two rows
                    coef = w_int * EA2[comp, q] / (4.0 * h_xi)
                    put(row_id, uidx(i, jp, q), coef)
                    put(row_id, uidx(i, jm, q), -coef)
                    put(row_id, uidx(i + 1, jp, q), coef)
                    put(row_id, uidx(i + 1, jm, q), -coef)
                    # zero-order term averaged over the two rows
                    put(row_id, uidx(i, j, q), w_int * 0.5 * EB[comp, q])
                    put(row_id, uidx(i + 1, j, q), w_int * 0.5 * EB[comp, q])
                rhs.append(w_int * Fv[comp])
                row_id += 1
    n_interior_rows = row_id

    w_bnd = math.sqrt(h_xi / h_eta)
    for j in range(n):
        s = float(sig_fn(xis[j]))
        t = float(tau_fn(xis[j]))
        put(row_id, uidx(m, j, 0), w_bnd * s)
        put(row_id, uidx(m, j, 1), w_bnd * t)
        rhs.append(w_bnd * float(g_fn(xis[j])))
        row_id += 1

    w_stab = STABILIZATION_WEIGHT * w_int
    for i in range(m + 1):
        for j in range(n):
            jp = (j + 1) % n
            jm = (j - 1) % n
            for q in range(2):
                put(row_id, uidx(i, jp, q), w_stab)
                put(row_id, uidx(i, j, q), -2.0 * w_stab)
                put(row_id, uidx(i, jm, q), w_stab)
                rhs.append(0.0)
                row_id += 1
    for i in range(1, m):
        for j in range(n):
            for q in range(2):
                put(row_id, uidx(i + 1, j, q), w_stab)
                put(row_id, uidx(i, j, q), -2.0 * w_stab)
                put(row_id, uidx(i - 1, j, q), w_stab)
                rhs.append(0.0)
                row_id += 1

    A = sp.csr_matrix((vals, (rows, cols)), shape=(row_id, n_unknown))
    b = np.asarray(rhs)
    normal = (A.T @ A).tocsc()
    try:
        w = spla.spsolve(normal, A.T @ b)
    except Exception as exc:          # factorization-level breakdown
        raise SolverBreakdown(f"normal-equation solve failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise SolverBreakdown("normal equations are rank-deficient")
    res_rows = A @ w - b
    interior = float(np.linalg.norm(res_rows[:n_interior_rows]))
    wgrid = w.reshape(m + 1, n, 2)
    defect = 0.0
    for j in range(n):
        s = float(sig_fn(xis[j]))
        t = float(tau_fn(xis[j]))
        defect = max(defect, abs(s * wgrid[m, j, 0] + t * wgrid[m, j, 1]
                                 - float(g_fn(xis[j]))))
    field = GridField((0.0, 0.0), (h_eta, h_xi), wgrid, CARTESIAN)
    return DiscreteSolution(field, interior, defect)
