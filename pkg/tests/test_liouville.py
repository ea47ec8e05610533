import math

import numpy as np
import pytest

from mixedpde.errors import DegenerateFit
from mixedpde.liouville import (
    APPLIES,
    DOES_NOT_APPLY,
    FieldSampler,
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
from mixedpde.surfaces import (
    custom_density,
    euclidean_density,
    minkowski_density,
    polytropic_density,
)

BALL5_VOLUME = 8.0 * math.pi**2 / 15.0


def unit_density():
    """rho = 1, e(Q) = Q: ball energy reduces to Q times ball volume."""
    return custom_density(lambda Q: np.ones_like(Q),
                          lambda Q: np.zeros_like(Q),
                          e=lambda Q: Q)


class TestSamplers:
    def test_presets(self):
        z = zero_sampler(5)
        c = constant_sampler(5, 0.5)
        g = gaussian_sampler(3)
        assert (z.stationary, c.stationary, g.stationary) == (True, True,
                                                              False)
        assert (z.label, c.label, g.label) == ("zero", "constant",
                                               "gaussian")
        pts = np.zeros((4, 5))
        assert np.allclose(c.speeds(pts), 0.5)
        assert np.allclose(g.speeds(np.zeros((2, 3))), 1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            constant_sampler(5, -1.0)
        with pytest.raises(ValueError):
            zero_sampler(1)
        bad = FieldSampler(3, lambda p: -np.ones(p.shape[0]))
        with pytest.raises(ValueError):
            bad.speeds(np.zeros((2, 3)))


class TestQuadrature:
    def test_spec_floor(self):
        with pytest.raises(ValueError):
            QuadratureSpec(radial=1)
        with pytest.raises(ValueError):
            QuadratureSpec(angular=3)

    def test_ball_volume_in_five_dimensions(self):
        E = ball_energy(constant_sampler(5, 1.0), unit_density(), 1.0,
                        QuadratureSpec(radial=32, angular=16))
        assert E == pytest.approx(BALL5_VOLUME, rel=5e-3)

    def test_energy_scales_with_radius_power(self):
        # constant Q: E(B_r) = e(Q) vol(B_1) r^n
        quad = QuadratureSpec(radial=16, angular=8)
        samp = constant_sampler(5, 1.0)
        dens = unit_density()
        e1 = ball_energy(samp, dens, 1.0, quad)
        e2 = ball_energy(samp, dens, 2.0, quad)
        assert e2 / e1 == pytest.approx(2.0**5, rel=1e-10)

    def test_radius_must_be_positive(self):
        with pytest.raises(ValueError):
            ball_energy(zero_sampler(5), euclidean_density(), 0.0)


class TestConformalProfile:
    def test_constant_field_profile(self):
        radii = np.linspace(0.25, 2.0, 8)
        prof = conformal_profile(constant_sampler(5, 1.0), unit_density(),
                                 radii, QuadratureSpec(16, 8))
        assert prof.n == 5
        assert prof.stationary
        # E grows like r^5, conformal weight r^{-1} leaves r^4: strictly up
        assert np.all(np.diff(prof.conformal) > 0)
        assert prof.monotone_conformal
        assert np.all(np.diff(prof.energies) > 0)

    def test_dimension_four_conformal_equals_energy(self):
        radii = np.linspace(0.5, 1.5, 4)
        prof = conformal_profile(constant_sampler(4, 1.0), unit_density(),
                                 radii, QuadratureSpec(8, 8))
        assert np.allclose(prof.conformal, prof.energies)

    def test_critical_speed_by_density(self):
        radii = np.linspace(0.5, 1.0, 3)
        quad = QuadratureSpec(8, 8)
        assert conformal_profile(zero_sampler(5), euclidean_density(),
                                 radii, quad).q_crit is None
        assert conformal_profile(zero_sampler(5), minkowski_density(),
                                 radii, quad).q_crit == pytest.approx(1.0)
        assert conformal_profile(
            zero_sampler(5), polytropic_density(1.4), radii,
            quad).q_crit == pytest.approx(5.0, rel=1e-12)

    def test_radii_validation(self):
        samp = zero_sampler(5)
        dens = euclidean_density()
        with pytest.raises(ValueError):
            conformal_profile(samp, dens, [1.0, 0.5])
        with pytest.raises(ValueError):
            conformal_profile(samp, dens, [-1.0, 1.0])
        with pytest.raises(ValueError):
            conformal_profile(samp, dens, [])


def synthetic_profile(radii, energies, n=5):
    radii = np.asarray(radii, dtype=float)
    energies = np.asarray(energies, dtype=float)
    return RadialEnergyProfile(radii, energies,
                               radii ** (4 - n) * energies, n, None, True,
                               True)


class TestGrowthFit:
    def test_power_law_recovered_exactly(self):
        r = np.linspace(0.5, 4.0, 12)
        fit = growth_fit(synthetic_profile(r, 7.0 * r**2))
        assert fit.C == pytest.approx(7.0, abs=1e-12)
        assert fit.k == pytest.approx(2.0, abs=1e-12)
        assert fit.residual < 1e-12

    def test_all_zero_energies_degenerate_with_trivial_growth(self):
        r = np.linspace(0.5, 2.0, 5)
        with pytest.raises(DegenerateFit) as info:
            growth_fit(synthetic_profile(r, np.zeros(5)))
        assert info.value.k == -math.inf

    def test_too_few_positive_energies(self):
        r = np.linspace(0.5, 2.0, 5)
        E = np.array([0.0, 0.0, 0.0, 1.0, 2.0])
        with pytest.raises(DegenerateFit) as info:
            growth_fit(synthetic_profile(r, E))
        assert getattr(info.value, "k", None) is None


class TestVerdict:
    def all_good(self, n, k):
        return liouville_verdict(n, k, rho_prime_nonpositive=True,
                                 bounded_by_Qcrit=True, stationary=True,
                                 C=1.0)

    def test_truth_table(self):
        assert self.all_good(5, 0.5).verdict == APPLIES
        v4 = self.all_good(4, 0.5)
        assert v4.verdict == DOES_NOT_APPLY
        assert v4.reason == "dimension n > 4"
        v6 = self.all_good(6, 3.0)
        assert v6.verdict == DOES_NOT_APPLY
        assert v6.reason == "energy growth 4 + k - n < 0"

    def test_each_hypothesis_can_fail(self):
        v = liouville_verdict(5, 0.5, rho_prime_nonpositive=True,
                              bounded_by_Qcrit=True, stationary=False)
        assert v.reason == "field is r-stationary"
        v = liouville_verdict(5, 0.5, rho_prime_nonpositive=False,
                              bounded_by_Qcrit=True, stationary=True)
        assert v.reason == "density is nonincreasing (rho' <= 0)"
        v = liouville_verdict(5, 0.5, rho_prime_nonpositive=True,
                              bounded_by_Qcrit=False, stationary=True)
        assert v.reason == "Q bounded above by the critical speed"

    def test_first_failed_hypothesis_wins(self):
        v = liouville_verdict(4, 0.5, rho_prime_nonpositive=True,
                              bounded_by_Qcrit=True, stationary=False)
        assert v.reason == "dimension n > 4"
        assert v.flags["field is r-stationary"] is False

    def test_flags_and_serialization(self):
        v = self.all_good(5, 0.5)
        assert len(v.flags) == 5
        assert all(v.flags.values())
        doc = v.to_json_dict()
        assert doc["verdict"] == APPLIES
        assert doc["reason"] is None
        assert doc["n"] == 5
        assert doc["C"] == 1.0

    def test_marginal_growth_is_rejected(self):
        # 4 + k - n = 0 fails the strict inequality
        assert self.all_good(5, 1.0).verdict == DOES_NOT_APPLY
