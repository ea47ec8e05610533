import math

import numpy as np
import pytest
from scipy.integrate import quad

from mixedpde.errors import (
    Cavitation,
    DensityDomain,
    DivergenceUndefined,
    LegendreSingular,
    LightCone,
    NotClosed,
)
from mixedpde.grids import POLAR, GridField, field_from_function, gradient
from mixedpde.surfaces import (
    EUCLIDEAN,
    MINKOWSKI,
    POLYTROPIC,
    area_functional,
    custom_density,
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


def unit_square(n, fn):
    h = 1.0 / (n - 1)
    return field_from_function((0.0, 0.0), (h, h), (n, n), fn)


class TestAreaFunctional:
    def test_flat_graph_has_unit_area(self):
        f = unit_square(11, lambda x, y: 0 * x)
        assert area_functional(f) == pytest.approx(1.0, abs=1e-14)

    def test_spacelike_tilt(self):
        # constant gradient (0.5, 0): integrand sqrt(1 - 1/4) exactly
        f = unit_square(11, lambda x, y: 0.5 * x)
        assert area_functional(f) == pytest.approx(math.sqrt(0.75), abs=1e-13)

    def test_timelike_tilt_uses_absolute_value(self):
        f = unit_square(11, lambda x, y: 2.0 * x)
        assert area_functional(f) == pytest.approx(math.sqrt(3.0), abs=1e-13)

    def test_masked_cells_are_excluded(self):
        f = unit_square(11, lambda x, y: 0 * x)
        mask = np.zeros((11, 11), dtype=bool)
        mask[0, 0] = True       # knocks out exactly one corner cell
        g = GridField(f.origin, f.spacing, f.values, f.chart, mask)
        assert area_functional(g) == pytest.approx(1.0 - 0.01, abs=1e-14)


class TestExtremalResidual:
    def quadratic(self, n=21):
        h = 0.8 / (n - 1)
        return field_from_function((-0.4, -0.4), (h, h), (n, n),
                                   lambda x, y: 0.5 * x**2)

    def test_affine_graph_is_extremal_for_all_kinds(self):
        f = unit_square(11, lambda x, y: 1 + 0.3 * x - 0.2 * y)
        for kind in ("minkowski_graph", "euclidean_minimal",
                     "lorentz_maximal"):
            res = extremal_residual(f, kind)
            assert np.nanmax(np.abs(res.scalar())) < 1e-11

    def test_quadratic_oracle_each_kind(self):
        # f = x^2/2 has p = x, q = 0, f_xx = 1: with q = 0 every kind's
        # residual collapses to the f_xx coefficient, which is 1
        f = self.quadratic()
        for kind in ("minkowski_graph", "euclidean_minimal",
                     "lorentz_maximal"):
            vals = extremal_residual(f, kind).scalar()
            inner = vals[1:-1, 1:-1]
            assert np.abs(inner - 1.0).max() < 1e-10

    def test_boundary_ring_is_masked(self):
        res = extremal_residual(self.quadratic(), "minkowski_graph")
        assert res.mask is not None
        assert res.mask[0, :].all() and res.mask[:, -1].all()
        assert not res.mask[1:-1, 1:-1].any()

    def test_scherk_graph_is_discretely_minimal(self):
        def scherk(x, y):
            return np.log(np.cos(y) / np.cos(x))

        def max_res(n):
            h = 0.8 / (n - 1)
            f = field_from_function((-0.4, -0.4), (h, h), (n, n), scherk)
            return np.nanmax(np.abs(
                extremal_residual(f, "euclidean_minimal").scalar()))

        coarse, fine = max_res(33), max_res(65)
        assert coarse < 1e-4
        assert coarse / fine > 3.0       # second-order decay

    def test_maximal_kind_rejects_timelike_graphs(self):
        f = unit_square(11, lambda x, y: 2.0 * x)
        with pytest.raises(DivergenceUndefined):
            extremal_residual(f, "lorentz_maximal")

    def test_graph_kind_accepts_timelike_graphs(self):
        f = unit_square(11, lambda x, y: 2.0 * x)
        res = extremal_residual(f, "minkowski_graph")
        assert np.nanmax(np.abs(res.scalar())) < 1e-11

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            extremal_residual(unit_square(5, lambda x, y: 0 * x), "spherical")


class TestLegendreTransform:
    def test_paraboloid_maps_to_paraboloid(self):
        # f = (x^2+y^2)/2 has grad f = (x, y), so phi(p, q) = (p^2+q^2)/2
        n = 41
        h = 1.0 / (n - 1)
        f = field_from_function((0.2, 0.2), (h, h), (n, n),
                                lambda x, y: 0.5 * (x**2 + y**2))
        hodo = legendre_transform(f)
        phi = hodo.phi
        P = phi.axis0()[:, None]
        Q = phi.axis1()[None, :]
        want = 0.5 * (P**2 + Q**2)
        good = ~phi.mask
        assert good.sum() > 0.5 * phi.mask.size
        assert np.abs(phi.scalar()[good] - want[good]).max() < 1e-12

    def test_affine_field_is_singular(self):
        f = unit_square(15, lambda x, y: 1 + 2 * x - y)
        with pytest.raises(LegendreSingular):
            legendre_transform(f)

    def test_custom_output_dims(self):
        n = 21
        h = 1.0 / (n - 1)
        f = field_from_function((0.2, 0.2), (h, h), (n, n),
                                lambda x, y: 0.5 * (x**2 + y**2))
        hodo = legendre_transform(f, dims=(15, 12))
        assert hodo.phi.dims == (15, 12)


class TestDensities:
    def test_euclidean_closed_forms(self):
        d = euclidean_density()
        assert d.rho(3.0) == pytest.approx(0.5, abs=1e-15)
        assert d.e(3.0) == pytest.approx(2.0, abs=1e-15)
        assert d.rho_prime(0.0) == pytest.approx(-0.5, abs=1e-15)
        assert d.rho(0.0) == pytest.approx(1.0)

    def test_minkowski_closed_forms(self):
        d = minkowski_density()
        assert d.rho(0.75) == pytest.approx(2.0, abs=1e-15)
        assert d.e(0.75) == pytest.approx(1.0, abs=1e-15)
        assert d.rho_prime(0.75) == pytest.approx(4.0, abs=1e-12)
        # timelike side: rho is still defined
        assert d.rho(2.0) == pytest.approx(1.0, abs=1e-15)

    def test_minkowski_light_cone_band(self):
        d = minkowski_density()
        with pytest.raises(LightCone):
            d.rho(1.0)
        with pytest.raises(LightCone):
            d.rho(1.0 + 1e-9)
        with pytest.raises(LightCone):
            d.e(2.0)      # no finite primitive across the cone

    def test_polytropic_forms_and_cavitation(self):
        d = polytropic_density(1.4)
        assert d.q_bound == pytest.approx(5.0)
        assert d.rho(0.0) == pytest.approx(1.0)
        assert d.rho(2.0) == pytest.approx(0.6**2.5, abs=1e-15)
        want_e = (2.0 / 1.4) * (1.0 - 0.8**3.5)
        assert d.e(1.0) == pytest.approx(want_e, abs=1e-15)
        with pytest.raises(Cavitation):
            d.rho(d.q_bound)
        with pytest.raises(Cavitation):
            d.e(5.001)
        with pytest.raises(ValueError):
            polytropic_density(1.0)

    def test_negative_speed_rejected(self):
        with pytest.raises(DensityDomain):
            euclidean_density().rho(-0.1)

    def test_array_evaluation(self):
        d = euclidean_density()
        out = d.rho(np.array([0.0, 3.0]))
        assert np.allclose(out, [1.0, 0.5])

    def test_quadrature_fallback_matches_closed_form(self):
        ref = euclidean_density()
        d = custom_density(ref.rho_fn, ref.rho_prime_fn)
        for Q in (0.5, 1.0, 3.0):
            assert d.e(Q) == pytest.approx(ref.e(Q), abs=1e-10)

    def test_primitive_matches_integral_of_rho(self):
        for d, Q in ((euclidean_density(), 3.0),
                     (minkowski_density(), 0.75),
                     (polytropic_density(1.4), 1.0)):
            val, _ = quad(lambda s: float(d.rho_fn(np.asarray(s))), 0.0, Q,
                          epsabs=1e-13, epsrel=1e-13)
            assert d.e(Q) == pytest.approx(val, abs=1e-10)

    def test_make_density_and_tuple_helper(self):
        assert make_density(EUCLIDEAN).kind == EUCLIDEAN
        with pytest.raises(ValueError):
            make_density("isothermal")
        r, rp, e = density(MINKOWSKI, 2.0)
        assert r == pytest.approx(1.0)
        assert e is None        # beyond the cone no primitive exists
        _, _, e2 = density(EUCLIDEAN, 3.0)
        assert e2 == pytest.approx(2.0)


class TestSonicPoint:
    def test_euclidean_never_changes_type(self):
        assert sonic_Q(euclidean_density()) is None

    def test_minkowski_singular_transition(self):
        pt = sonic_Q(minkowski_density())
        assert pt.Q == pytest.approx(1.0)
        assert pt.transition == "singular"

    def test_polytropic_root(self):
        pt = sonic_Q(polytropic_density(1.4))
        assert pt.Q == pytest.approx(5.0 / 6.0, abs=1e-15)
        assert pt.transition == "root"

    def test_custom_density_scanned_numerically(self):
        ref = polytropic_density(1.4)
        d = custom_density(ref.rho_fn, ref.rho_prime_fn, q_bound=5.0)
        pt = sonic_Q(d)
        assert pt.transition == "root"
        assert pt.Q == pytest.approx(5.0 / 6.0, abs=1e-6)


class TestHodgeResidual:
    def centered_square(self, n, fn):
        h = 1.0 / (n - 1)
        return field_from_function((-0.5, -0.5), (h, h), (n, n), fn)

    def test_radial_field_is_closed(self):
        omega = self.centered_square(
            41, lambda x, y: np.stack([x, y], -1))
        closed, _ = hodge_residual(omega, euclidean_density())
        assert np.abs(closed.scalar()).max() < 1e-12

    def test_coclosedness_oracle_at_origin(self):
        # delta(rho omega) for omega = (x, y): at the origin rho = 1 and
        # the divergence is 2
        omega = self.centered_square(
            41, lambda x, y: np.stack([x, y], -1))
        _, coclosed = hodge_residual(omega, euclidean_density())
        assert coclosed.scalar()[20, 20] == pytest.approx(2.0, abs=1e-3)

    def test_rotational_field_curl(self):
        omega = self.centered_square(
            21, lambda x, y: np.stack([-y, x], -1))
        closed, _ = hodge_residual(omega, euclidean_density())
        assert np.abs(closed.scalar() - 2.0).max() < 1e-12

    def test_requires_two_components_on_cartesian_chart(self):
        scalar = self.centered_square(11, lambda x, y: x)
        with pytest.raises(ValueError):
            hodge_residual(scalar, euclidean_density())
        polar = GridField((1.0, 0.0), (0.1, 0.1), np.zeros((5, 5, 2)), POLAR)
        with pytest.raises(ValueError):
            hodge_residual(polar, euclidean_density())


class TestDualForm:
    def constant_field(self, c, n=33):
        h = 1.0 / (n - 1)
        return field_from_function(
            (0.0, 0.0), (h, h), (n, n),
            lambda x, y: np.stack([np.full_like(x, c), np.zeros_like(x)], -1))

    def test_constant_solution_dualizes_exactly(self):
        c = 1.0
        omega = self.constant_field(c)
        sigma, report = dual_form(omega, euclidean_density())
        rho = 1.0 / math.sqrt(1.0 + c * c)
        Y = sigma.axis1()[None, :]
        want = rho * c * Y + 0 * sigma.axis0()[:, None]
        assert np.abs(sigma.scalar() - want).max() < 1e-12
        assert report.dual_kind == MINKOWSKI
        assert report.max_closedness < 1e-10
        assert report.max_coclosedness < 1e-10
        assert report.path_defect < 1e-13

    def test_dual_gradient_speed(self):
        # |d sigma|^2 = rho^2 c^2 = c^2 / (1 + c^2) for the constant field
        c = 2.0
        omega = self.constant_field(c)
        sigma, _ = dual_form(omega, euclidean_density())
        sx, sy = gradient(sigma.scalar(), *sigma.spacing)
        speed = sx * sx + sy * sy
        assert np.abs(speed - c * c / (1 + c * c)).max() < 1e-10

    def test_minkowski_input_dualizes_to_euclidean(self):
        omega = self.constant_field(0.5)
        _, report = dual_form(omega, minkowski_density())
        assert report.dual_kind == EUCLIDEAN

    def test_rejects_non_closed_input(self):
        n = 17
        h = 1.0 / (n - 1)
        omega = field_from_function(
            (0.0, 0.0), (h, h), (n, n),
            lambda x, y: np.stack([np.zeros_like(x), x**2], -1))
        with pytest.raises(NotClosed):
            dual_form(omega, euclidean_density())

    def test_rejects_unpaired_density(self):
        with pytest.raises(ValueError):
            dual_form(self.constant_field(0.5), polytropic_density(1.4))


class TestEnergy:
    def test_constant_field_energy(self):
        n = 17
        h = 1.0 / (n - 1)
        omega = field_from_function(
            (0.0, 0.0), (h, h), (n, n),
            lambda x, y: np.stack([np.ones_like(x), np.zeros_like(x)], -1))
        want = 2.0 * (math.sqrt(2.0) - 1.0)     # e(1) over unit area
        assert energy(omega, euclidean_density()) == pytest.approx(
            want, abs=1e-13)

    def test_requires_vector_field(self):
        f = unit_square(9, lambda x, y: x)
        with pytest.raises(ValueError):
            energy(f, euclidean_density())
