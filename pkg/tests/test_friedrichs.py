import math

import numpy as np
import pytest

from mixedpde.errors import (
    InadmissibleBoundary,
    Infeasible,
    InvalidTypeChange,
    SingularMultiplier,
)
from mixedpde.friedrichs import (
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

GOLDEN_EIG_LO = (3.0 - math.sqrt(5.0)) / 4.0
GOLDEN_EIG_HI = (3.0 + math.sqrt(5.0)) / 4.0


@pytest.fixture(scope="module")
def K():
    return linear_type_change(0.5)


@pytest.fixture(scope="module")
def system(K):
    return build_system(K, 1.0)


class TestTypeChange:
    def test_linear_profile(self, K):
        assert K.eta_crit == pytest.approx(0.5, abs=1e-12)
        assert K.nu0 == pytest.approx(1.0)
        assert K.R == 1.0
        assert float(K.K(0.0)) == pytest.approx(-0.5)
        assert float(K.K(1.0)) == pytest.approx(0.5)

    def test_rejects_nonpositive_interval(self):
        with pytest.raises(InvalidTypeChange):
            type_change_fn(lambda e: e - 0.5, lambda e: 1.0, 0.0)

    def test_rejects_flat_coefficient(self):
        with pytest.raises(InvalidTypeChange):
            type_change_fn(lambda e: -0.5, lambda e: 0.0, 1.0)

    def test_rejects_sign_preserving_coefficient(self):
        with pytest.raises(InvalidTypeChange):
            type_change_fn(lambda e: e + 1.0, lambda e: 1.0, 1.0)

    def test_nonlinear_crossing_located(self):
        tc = type_change_fn(lambda e: e**3 - 0.125,
                            lambda e: max(3 * e**2, 1e-3), 1.0)
        assert tc.eta_crit == pytest.approx(0.5, abs=1e-10)


class TestSystemMatrices:
    def test_matrix_entries(self, system):
        A1 = system.A1(0.0)
        assert np.allclose(A1, [[-0.5, 0.0], [0.0, -1.0]])
        assert np.allclose(system.A2, [[0.0, 1.0], [1.0, 0.0]])
        assert np.allclose(system.B(0.3), [[1.0, 1.0], [0.0, 0.0]])

    def test_zero_lower_order_coefficient_rejected(self, K):
        with pytest.raises(ValueError):
            build_system(K, 0.0)


class TestApplyMultiplier:
    def test_preset_profile(self, system):
        ms, prof = apply_multiplier(system, 1.0, 1.0)
        assert prof.min_value == pytest.approx(0.5, abs=1e-14)
        assert ms.symmetry_defect < 1e-14
        # det E = 1 + K(eta) runs linearly from 0.5 to 1.5
        assert prof.values[0] == pytest.approx(0.5)
        assert prof.values[-1] == pytest.approx(1.5)

    def test_multiplied_blocks_are_symmetric(self, system):
        ms, _ = apply_multiplier(system, 1.0, 1.0)
        for eta in (0.0, 0.37, 1.0):
            for M in (ms.EA1(eta), ms.EA2(eta)):
                assert np.abs(M - M.T).max() < 1e-14

    def test_large_c_destroys_invertibility(self, system):
        with pytest.raises(SingularMultiplier, match="det E"):
            apply_multiplier(system, 1.0, 2.0)

    def test_requires_positive_a(self, system):
        with pytest.raises(ValueError):
            apply_multiplier(system, 0.0, 1.0)


class TestPositivityMatrix:
    def test_preset_matrix_and_eigenvalues(self, system):
        kappa, rep = positivity_matrix(system, 1.0, 1.0)
        assert np.allclose(kappa(0.0), [[0.5, 0.5], [0.5, 1.0]])
        assert np.allclose(kappa(0.9), [[0.5, 0.5], [0.5, 1.0]])
        assert rep.eig_min == pytest.approx(GOLDEN_EIG_LO, abs=1e-12)
        assert rep.eig_max == pytest.approx(GOLDEN_EIG_HI, abs=1e-12)
        assert rep.det_formula_defect < 1e-14
        assert rep.positive_definite

    def test_small_c_loses_definiteness(self, system):
        _, rep = positivity_matrix(system, 1.0, 0.1)
        assert not rep.positive_definite
        assert rep.eig_min < 0


class TestBoundaryAdmissibility:
    def test_preset_is_admissible(self, system):
        _, pos = positivity_matrix(system, 1.0, 1.0)
        rep = boundary_admissibility(1.0, -1.0, 1.0, 1.0, 0.5, 1.0,
                                     positivity=pos)
        assert rep.verdict == "admissible"
        assert rep.mu_eigs_at_first_sample[0] == pytest.approx(0.5,
                                                               abs=1e-12)
        assert rep.mu_eigs_at_first_sample[1] == pytest.approx(1.5,
                                                               abs=1e-12)
        assert rep.mu_eig_min == pytest.approx(0.5, abs=1e-12)
        assert rep.boundary_kernel_defect < 1e-12
        assert rep.ranges_intersect_trivially
        assert rep.null_spaces_span
        assert rep.kappa_eig_range == (pos.eig_min, pos.eig_max)

    def test_small_c_fails_positivity_first(self, system):
        _, pos = positivity_matrix(system, 1.0, 0.1)
        with pytest.raises(InadmissibleBoundary,
                           match="kappa\\* positive definite"):
            boundary_admissibility(1.0, -1.0, 1.0, 0.1, 0.5, 1.0,
                                   positivity=pos)

    def test_small_c_fails_on_boundary_alone(self):
        with pytest.raises(InadmissibleBoundary, match="failed check"):
            boundary_admissibility(1.0, -1.0, 1.0, 0.1, 0.5, 1.0)

    def test_sign_rule(self):
        with pytest.raises(InadmissibleBoundary, match="opposite"):
            boundary_admissibility(1.0, 1.0, 1.0, 1.0, 0.5, 1.0)
        with pytest.raises(InadmissibleBoundary, match="strict sign"):
            boundary_admissibility(lambda x: math.cos(x), -1.0,
                                   1.0, 1.0, 0.5, 1.0)

    def test_needs_elliptic_outer_boundary(self):
        with pytest.raises(InadmissibleBoundary, match="K\\(R\\)"):
            boundary_admissibility(1.0, -1.0, 1.0, 1.0, -0.5, 1.0)

    def test_common_rescaling_leaves_decomposition_unchanged(self):
        # beta's split depends on (sigma, tau) only through their ratio,
        # so a shared positive factor must not change the verdict
        scale = lambda x: 1.0 + 0.5 * math.sin(x)       # noqa: E731
        rep = boundary_admissibility(scale,
                                     lambda x: -scale(x), 1.0, 1.0, 0.5, 1.0)
        assert rep.verdict == "admissible"
        assert rep.mu_eig_min == pytest.approx(0.5, abs=1e-12)
        assert rep.kappa_eig_range is None


class TestChooseMultiplier:
    def test_preset_interval_and_choice(self, K):
        choice = choose_multiplier(K, 1.0, 1.0, -1.0)
        lo, hi = choice.feasible_interval
        assert lo == pytest.approx(0.5, abs=1e-14)
        assert hi == pytest.approx(math.sqrt(2.0), abs=1e-14)
        assert lo < choice.c < hi
        assert choice.det_E_min > 0

    def test_negative_k_flips_the_sign(self, K):
        choice = choose_multiplier(K, -1.0, 1.0, 1.0)
        assert choice.c < 0

    def test_large_k_is_infeasible(self, K):
        with pytest.raises(Infeasible, match="empty multiplier interval"):
            choose_multiplier(K, 3.0, 1.0, -1.0)


class TestManufacturedRhs:
    def test_pointwise_formula(self, K):
        val = manufactured_rhs(0.3, 2.0, 1.5, -0.5, 0.25, K, 1.0)
        want = 1.0 * 2.0 + (0.3 - 0.5) * 1.5 + (-0.5) + 1.0 * 0.25
        assert float(val) == pytest.approx(want, abs=1e-14)

    def test_broadcasts_over_arrays(self, K):
        etas = np.array([0.0, 0.5, 1.0])
        out = manufactured_rhs(etas, 1.0, 0.0, 0.0, 0.0, K, 1.0)
        assert np.allclose(out, [1.0, 1.0, 1.0])


class TestSolveStrong:
    def test_manufactured_solution_recovered(self, K, system):
        choice = choose_multiplier(K, 1.0, 1.0, -1.0)

        def u_parts(eta, xi):
            return (eta * np.sin(xi), np.sin(xi),
                    -0.5 * eta**2 * np.sin(xi), 0.5 * eta**2 * np.cos(xi))

        def f(eta, xi):
            ue, uee, uxx, ux = u_parts(eta, xi)
            return float(manufactured_rhs(eta, ue, uee, uxx, ux, K, 1.0))

        def g(xi):
            return math.sin(xi) - 0.5 * math.cos(xi)

        sol = solve_strong(system, choice, f, (16, 16), 1.0, -1.0, g=g)
        etas = sol.field.axis0()
        xis = sol.field.axis1()
        Eg, Xg = np.meshgrid(etas, xis, indexing="ij")
        exact = np.stack([Eg * np.sin(Xg), 0.5 * Eg**2 * np.cos(Xg)], -1)
        h = 1.0 / 16
        l2 = math.sqrt(h * (2 * math.pi / 16)
                       * float(np.sum((sol.field.values - exact) ** 2)))
        assert l2 < 0.05
        assert sol.boundary_defect < 1e-3
        assert sol.interior_residual < 1.0

    def test_grid_floor(self, K, system):
        choice = choose_multiplier(K, 1.0, 1.0, -1.0)
        with pytest.raises(ValueError):
            solve_strong(system, choice, lambda e, x: 0.0, (2, 16),
                         1.0, -1.0)
