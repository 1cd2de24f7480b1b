import math

import numpy as np
import pytest

from kahler_decoherence.cp1_geometry import KahlerFunction, SpherePoint, distribution_from_density
from kahler_decoherence.errors import InvalidConfig, OutOfDomain
from kahler_decoherence.harmonics import HarmonicField, analyze, evaluate, synthesize
from kahler_decoherence.pauli_channel import (
    DecoherenceRates,
    HamiltonianSpec,
    RatesSchedule,
    bloch_from_density,
    density_from_bloch,
    evolve_bloch_closed_form,
)
from kahler_decoherence.cp1_geometry import hamiltonian_flow
from kahler_decoherence.quadrature import GridField, integrate_grid, quadrature_rule
from kahler_decoherence.spectral_evolution import (
    evolve_anisotropic,
    evolve_axial,
    evolve_constant,
    evolve_isotropic,
    evolve_kahler_closed_form,
    evolve_schedule,
    find_negativity,
    normalization,
    propagate,
)

from conftest import random_bloch, random_cp_rates, random_positive_only_rates, random_state


def random_field(rng, l_max):
    rule = quadrature_rule(l_max + 1, 2 * l_max + 1)
    return analyze(GridField(rng.normal(size=rule.shape), rule), l_max)


def nonnegative_field(rng, l_max):
    """|h|^2 for h of degree l_max // 2, normalised to unit mass: nonnegative and band-limited."""
    half = l_max // 2
    rule = quadrature_rule(l_max + 1, 2 * l_max + 2)
    h = synthesize(random_field(rng, half), rule).values
    hf = analyze(GridField(h**2, rule), l_max)
    return hf * (1.0 / normalization(hf))


class TestClosedForms:
    def test_isotropic_peak(self, rng):
        x = random_bloch(rng, pure=True)
        pt = SpherePoint.from_vector(x)
        hf = distribution_from_density(density_from_bloch(x)).to_harmonic(3)
        for t in (0, 0.5, 1, 2):
            val = evaluate(evolve_isotropic(hf, 0.4, t), pt.theta, pt.phi).real
            assert abs(val - (1 + math.exp(-0.8 * t)) / math.pi) < 1e-10

    def test_isotropic_l2_factor(self, rng):
        hf = random_field(rng, 4)
        out = evolve_isotropic(hf, 0.3, 1.5)
        assert np.allclose(out.block(2), hf.block(2) * math.exp(-6 * 0.3 * 1.5), atol=1e-15)

    def test_t0_identity(self, rng):
        hf = random_field(rng, 5)
        for out in (evolve_isotropic(hf, 1, 0), evolve_axial(hf, 1, 0), evolve_anisotropic(hf, DecoherenceRates(1, 2, 3), 0)):
            assert np.max(np.abs(out.coeffs - hf.coeffs)) < 1e-14

    def test_axial(self, rng):
        hf = random_field(rng, 6)
        g, t = 0.7, 1.3
        ax = evolve_axial(hf, g, t)
        an = evolve_anisotropic(hf, DecoherenceRates(0, 0, g), t)
        assert np.max(np.abs(ax.coeffs - an.coeffs)) < 1e-12
        for l in range(7):
            assert abs(ax.coefficient(l, 0) - hf.coefficient(l, 0)) < 1e-15
        assert abs(ax.coefficient(2, 2) - hf.coefficient(2, 2) * math.exp(-4 * g * t)) < 1e-15

    def test_axial_matches_phase_damping(self, rng):
        rho = random_state(rng)
        g, t = 0.9, 0.8
        out = KahlerFunction.from_harmonic(evolve_axial(distribution_from_density(rho).to_harmonic(1), g, t))
        x = evolve_bloch_closed_form(bloch_from_density(rho), DecoherenceRates(0, 0, g), t).array
        assert np.allclose(out.dipole * math.pi, x, atol=1e-13)

    def test_kahler_closed_form(self, rng):
        kf = KahlerFunction(1 / math.pi, random_bloch(rng) / math.pi)
        assert evolve_kahler_closed_form(kf, DecoherenceRates(1, 2, 3), 0) == kf
        iso = evolve_kahler_closed_form(kf, DecoherenceRates.isotropic(0.5), 2.0)
        assert np.allclose(iso.dipole, kf.dipole * math.exp(-2.0), atol=1e-16)

    def test_isotropic_equals_anisotropic(self, rng):
        hf = random_field(rng, 8)
        a = evolve_anisotropic(hf, DecoherenceRates.isotropic(0.35), 1.1)
        assert np.max(np.abs(a.coeffs - evolve_isotropic(hf, 0.35, 1.1).coeffs)) < 1e-12


class TestAnisotropic:
    def test_kahler_exactness(self, rng):
        for rates in [random_cp_rates(rng), random_positive_only_rates(rng), DecoherenceRates(-0.5, 1, 2)]:
            kf = KahlerFunction(rng.normal(), rng.normal(size=3))
            t = rng.uniform(0, 3)
            spectral = KahlerFunction.from_harmonic(evolve_anisotropic(kf.to_harmonic(4), rates, t))
            ref = evolve_kahler_closed_form(kf, rates, t)
            assert abs(spectral.c0 - ref.c0) < 1e-12 and np.allclose(spectral.dipole, ref.dipole, atol=1e-12)

    def test_cross_representation(self, rng):
        for _ in range(30):
            rho, rates, t = random_state(rng), random_cp_rates(rng), rng.uniform(0, 5)
            x = evolve_bloch_closed_form(bloch_from_density(rho), rates, t)
            lhs = distribution_from_density(density_from_bloch(x.array)).to_harmonic(2)
            rhs = evolve_anisotropic(distribution_from_density(rho).to_harmonic(2), rates, t)
            assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-11

    def test_quadrupole_growth_mode(self):
        rates = DecoherenceRates(1, 1, -0.6)
        hf = HarmonicField.from_dict(2, {(2, 2): 1.0, (2, -2): 1.0})
        out = evolve_anisotropic(hf, rates, 2.0)
        assert abs(out.coefficient(2, 2) - math.exp(0.8)) < 1e-12

    def test_mass_and_reality(self, rng):
        hf = random_field(rng, 10)
        for rates in [random_cp_rates(rng), random_positive_only_rates(rng)]:
            out = evolve_anisotropic(hf, rates, 0.7)
            assert out.coefficient(0, 0) == hf.coefficient(0, 0)
            assert out.reality_defect() < 1e-11 * max(1.0, np.max(np.abs(out.coeffs)))

    def test_semigroup(self, rng):
        hf = random_field(rng, 8)
        rates = DecoherenceRates.from_array(rng.uniform(-0.5, 1.5, size=3))
        t1, t2 = 0.4, 0.9
        a = evolve_anisotropic(hf, rates, t1 + t2)
        b = evolve_anisotropic(evolve_anisotropic(hf, rates, t1), rates, t2)
        assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-11

    def test_propagate_matches_single_calls(self, rng):
        hf = random_field(rng, 5)
        rates = random_cp_rates(rng)
        for t, out in zip([0.1, 0.5], propagate(hf, rates, [0.1, 0.5])):
            assert np.max(np.abs(out.coeffs - evolve_anisotropic(hf, rates, t).coeffs)) < 1e-14

    def test_isotropic_contraction(self, rng):
        hf = random_field(rng, 6)
        rule = quadrature_rule(8, 16)

        def nonuniform_norm(h):
            v = synthesize(h, rule).values - normalization(h) / math.pi
            return integrate_grid(GridField(v * v, rule))

        norms = [nonuniform_norm(evolve_isotropic(hf, 0.2, t)) for t in np.linspace(0, 3, 13)]
        assert all(b < a for a, b in zip(norms, norms[1:]))

    def test_maximum_principle(self, rng):
        rule = quadrature_rule(24, 48)
        for _ in range(5):
            p0 = nonnegative_field(rng, 8)
            assert synthesize(p0, rule).min() >= -1e-12
            rep = evolve_constant(p0, random_cp_rates(rng), np.linspace(0, 5, 11), rule)
            assert rep.min_values.min() >= -1e-9 and not rep.became_negative


class TestSchedule:
    def test_constant_matches_exact(self):
        hf = distribution_from_density(density_from_bloch([0.3, -0.5, 0.6])).to_harmonic(4)
        hf = hf + HarmonicField.from_dict(4, {(2, 1): 0.02 + 0.01j, (2, -1): -0.02 + 0.01j})
        rates = DecoherenceRates(1, 2, 3)
        rep = evolve_schedule(hf, RatesSchedule.constant(rates), [1.0], h=1e-3)
        assert np.max(np.abs(rep.trajectory[-1].coeffs - evolve_anisotropic(hf, rates, 1.0).coeffs)) < 1e-8

    def test_zero_schedule(self, rng):
        hf = random_field(rng, 4)
        rep = evolve_schedule(hf, RatesSchedule.constant(DecoherenceRates(0, 0, 0)), [0, 0.5, 1])
        for out in rep.trajectory:
            assert np.array_equal(out.coeffs, hf.coeffs)

    def test_normalization_conserved(self, rng):
        hf = distribution_from_density(random_state(rng)).to_harmonic(3)
        sched = RatesSchedule.from_pairs([(0, (1, 0, 0.5)), (1, (0.2, 0.4, -0.1)), (2, (0, 1, 1))])
        rep = evolve_schedule(hf, sched, np.linspace(0, 2, 5))
        assert np.max(np.abs(rep.normalizations - 1)) < 1e-10

    def test_time_dependent_dipole(self, rng):
        """Dipole amplitude decays with the integrated pairwise sums."""
        kf = KahlerFunction(1 / math.pi, random_bloch(rng) / math.pi)
        sched = RatesSchedule.from_pairs([(0, (0, 0, 0)), (2, (2, 1, 0.5))])
        rep = evolve_schedule(kf.to_harmonic(2), sched, [2.0])
        integral = np.array([1 + 0.5, 2 + 0.5, 2 + 1]) / 2 * 2  # mean of linear ramp times duration
        out = KahlerFunction.from_harmonic(rep.trajectory[-1])
        assert np.allclose(out.dipole, kf.dipole * np.exp(-integral), atol=1e-10)

    def test_becomes_negative(self):
        search = find_negativity(DecoherenceRates(1, 1, -0.6), np.linspace(0, 10, 51))
        rep = evolve_schedule(search.initial, RatesSchedule.constant(DecoherenceRates(1, 1, -0.6)), np.linspace(0, 10, 51))
        assert rep.min_values[0] >= -1e-9 and rep.became_negative

    def test_hamiltonian_matches_rotation(self, rng):
        kf = KahlerFunction(1 / math.pi, random_bloch(rng) / math.pi)
        H = HamiltonianSpec(0.2, 0.5, -0.3, 0.7)
        rep = evolve_schedule(kf.to_harmonic(2), RatesSchedule.constant(DecoherenceRates(0, 0, 0)), [1.3], H=H)
        out = KahlerFunction.from_harmonic(rep.trajectory[-1])
        assert np.allclose(out.dipole, hamiltonian_flow(kf, H, 1.3).dipole, atol=1e-10)

    def test_high_degree_stable(self, rng):
        hf = random_field(rng, 24)
        rates = DecoherenceRates(1, 2, 3)
        rep = evolve_schedule(hf, RatesSchedule.constant(rates), [0.05], h=1e-2)
        assert np.max(np.abs(rep.trajectory[-1].coeffs - evolve_anisotropic(hf, rates, 0.05).coeffs)) < 1e-8

    def test_errors(self, rng):
        hf = random_field(rng, 2)
        sched = RatesSchedule.constant(DecoherenceRates(1, 1, 1))
        with pytest.raises(InvalidConfig):
            evolve_schedule(hf, sched, [0.5, 0.2])
        with pytest.raises(InvalidConfig):
            evolve_schedule(hf, sched, [1.0], h=0)
        with pytest.raises(OutOfDomain):
            evolve_schedule(hf, RatesSchedule.from_pairs([(0, (1, 1, 1)), (1, (1, 1, 1))]), [2.0])


class TestNegativitySearch:
    def test_positive_only(self):
        s = find_negativity(DecoherenceRates(1, 1, -0.6))
        assert s.found and s.degree == 2 and abs(s.growth_rate - 0.4) < 1e-12
        assert s.min_initial >= -1e-9 and s.dipole_only_min >= -1e-12

    def test_cp_finds_nothing(self):
        s = find_negativity(DecoherenceRates(1, 2, 3), np.linspace(0, 5, 21))
        assert not s.found and s.initial is None
