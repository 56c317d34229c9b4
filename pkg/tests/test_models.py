import numpy as np
import pytest
from pytest import approx

from fcstat import fcs, linalg, models
from fcstat.errors import (AccuracyError, ContractError, DegeneracyError,
                           StructureError, TruncationError)


class TestBuildTwoLead:
    def test_single_site_leads(self):
        lat = models.TwoLeadLattice(1, 1, hopping=1.0, onsite_left=0.2,
                                    onsite_right=-0.4, coupling=0.0)
        h0, h, q = models.build_two_lead(lat)
        assert linalg.max_abs(h0 - np.diag([0.2, -0.4])) == 0
        assert linalg.max_abs(h - h0) == 0
        assert linalg.max_abs(q.matrix - np.diag([0.0, 1.0])) == 0

    def test_coupling_adds_one_bond(self):
        lat = models.TwoLeadLattice(2, 2, coupling=0.5)
        h0, h, _ = models.build_two_lead(lat)
        diff = h - h0
        assert np.count_nonzero(diff) == 2
        assert linalg.max_abs(diff) == approx(0.5)

    def test_spectrum_stays_in_band(self):
        lat = models.TwoLeadLattice(20, 20, hopping=1.0, onsite_left=0.1,
                                    onsite_right=0.4, coupling=1.0)
        _, h, _ = models.build_two_lead(lat)
        w = np.linalg.eigvalsh(h)
        assert w.min() >= -2.0 + 0.1 - 1e-10
        assert w.max() <= 2.0 + 0.4 + 1e-10

    def test_h0_commutes_with_charge(self):
        lat = models.TwoLeadLattice(3, 5, coupling=0.7)
        h0, _, q = models.build_two_lead(lat)
        assert linalg.max_abs(h0 @ q.matrix - q.matrix @ h0) == 0


class TestFermiOccupation:
    def test_two_level(self):
        occ = models.fermi_occupation(np.diag([-1.0, 1.0]).astype(complex), 0.0)
        assert linalg.max_abs(occ.matrix - np.diag([1.0, 0.0])) < 1e-12

    def test_mu_outside_spectrum(self, rng):
        h0 = np.diag([0.3, 1.2, 2.0]).astype(complex)
        assert linalg.max_abs(models.fermi_occupation(h0, -5.0).matrix) == 0
        full = models.fermi_occupation(h0, 5.0).matrix
        assert linalg.max_abs(full - np.eye(3)) < 1e-12

    def test_half_filling_rank(self):
        # even site count per lead, mu = 0: exactly half the levels are filled
        lat = models.TwoLeadLattice(4, 6, hopping=1.0)
        h0, _, _ = models.build_two_lead(lat)
        occ = models.fermi_occupation(h0, 0.0)
        assert int(round(np.trace(occ.matrix).real)) == 5

    def test_degeneracy_gate(self):
        # a 3-site chain has a level exactly at zero
        lat = models.TwoLeadLattice(3, 4, hopping=1.0)
        h0, _, _ = models.build_two_lead(lat)
        with pytest.raises(DegeneracyError):
            models.fermi_occupation(h0, 0.0)

    def test_deterministic(self):
        lat = models.TwoLeadLattice(4, 4, hopping=1.0, onsite_right=0.3)
        h0, _, _ = models.build_two_lead(lat)
        a = models.fermi_occupation(h0, 0.15).matrix
        b = models.fermi_occupation(h0, 0.15).matrix
        assert a.tobytes() == b.tobytes()


class TestThermalOccupation:
    def test_matches_fermi_sea_at_large_beta(self):
        lat = models.TwoLeadLattice(4, 4, hopping=1.0, onsite_right=0.3)
        h0, _, q = models.build_two_lead(lat)
        cold = models.thermal_occupation(h0, 200.0, 0.15, 0.15, q)
        sea = models.fermi_occupation(h0, 0.15)
        assert linalg.max_abs(cold.matrix - sea.matrix) < 1e-6

    def test_flat_band_is_half_filled(self):
        lat = models.TwoLeadLattice(2, 3, hopping=0.0)
        h0, _, q = models.build_two_lead(lat)
        occ = models.thermal_occupation(h0, 1.7, 0.0, 0.0, q)
        assert linalg.max_abs(occ.matrix - 0.5 * np.eye(5)) < 1e-12

    def test_single_mode_fermi_factor(self):
        lat = models.TwoLeadLattice(1, 1, hopping=0.0, onsite_left=0.8,
                                    onsite_right=-0.3)
        h0, _, q = models.build_two_lead(lat)
        occ = models.thermal_occupation(h0, 1.0, 0.0, 0.0, q)
        assert occ.matrix[0, 0].real == approx(1.0 / (1.0 + np.exp(0.8)))
        assert occ.matrix[1, 1].real == approx(1.0 / (1.0 + np.exp(-0.3)))

    def test_particle_hole_relation(self):
        lat = models.TwoLeadLattice(5, 5, hopping=1.0)
        h0, _, q = models.build_two_lead(lat)
        n_plus = models.thermal_occupation(h0, 1.3, 0.4, 0.4, q)
        n_minus = models.thermal_occupation(-h0, 1.3, -0.4, -0.4, q)
        assert linalg.max_abs(n_plus.matrix + n_minus.matrix - np.eye(10)) < 1e-10

    def test_commutes_with_charge_exactly(self):
        lat = models.TwoLeadLattice(4, 4, hopping=1.0, bias=0.4)
        h0, _, q = models.build_two_lead(lat)
        occ = models.thermal_occupation(h0, 1.0, 0.2, -0.2, q)
        assert linalg.max_abs(occ.matrix @ q.matrix - q.matrix @ occ.matrix) == 0

    def test_rejects_coupled_hamiltonian(self):
        lat = models.TwoLeadLattice(4, 4, hopping=1.0, coupling=0.8)
        _, h, q = models.build_two_lead(lat)
        with pytest.raises(StructureError):
            models.thermal_occupation(h, 1.0, 0.0, 0.0, q)


class TestPropagate:
    def test_zero_time(self, rng):
        from helpers import random_hermitian
        h = random_hermitian(rng, 5)
        u = models.propagate(models.PropagatorSpec("static", 0.0), h)
        assert linalg.max_abs(u - np.eye(5)) == 0

    def test_static_diagonal_phases(self):
        h = np.diag([0.5, -1.0, 2.0]).astype(complex)
        u = models.propagate(models.PropagatorSpec("static", 1.7), h)
        assert np.diag(u) == approx(np.exp(-1j * np.diag(h) * 1.7), abs=1e-12)

    def test_constant_drive_matches_static(self, m8_lattice):
        h0, h, _ = models.build_two_lead(m8_lattice)
        bond = np.zeros((8, 8), dtype=complex)
        bond[3, 4] = bond[4, 3] = 1.0
        driven = models.propagate(
            models.PropagatorSpec("driven", 3.0, 64, lambda t: 0.6 * bond), h)
        static = models.propagate(models.PropagatorSpec("static", 3.0), h + 0.6 * bond)
        assert linalg.max_abs(driven - static) < 1e-8

    def test_midpoint_is_second_order(self, m8_lattice):
        h0, h, _ = models.build_two_lead(m8_lattice)
        drive = models.bond_pulse_drive(m8_lattice, 0.25, 1.5, 1.2)
        us = {s: models.propagate(models.PropagatorSpec("driven", 3.0, s, drive), h)
              for s in (1024, 2048, 4096)}
        d1 = linalg.max_abs(us[2048] - us[1024])
        d2 = linalg.max_abs(us[4096] - us[2048])
        assert d1 / d2 >= 3.0

    def test_accuracy_gate_fires_when_coarse(self, m8_lattice):
        h0, h, _ = models.build_two_lead(m8_lattice)
        drive = models.bond_pulse_drive(m8_lattice, 0.7, 1.5, 1.2)
        with pytest.raises(AccuracyError):
            models.propagate(models.PropagatorSpec("driven", 3.0, 8, drive), h)


class TestBuildChiral:
    def test_trivial_scatter_gives_identity(self):
        model = models.ChiralModel(energy_cutoff=np.pi * 16 / 8, grid_points=16,
                                   scatter=lambda t: np.eye(2), support=(-1.0, 1.0))
        sc = models.build_chiral(model)
        assert linalg.max_abs(sc.evolution - np.eye(32)) == 0
        samples = fcs.generating_function(sc, "zero_temperature", 65)
        assert linalg.max_abs(samples.values - 1.0) < 1e-12

    def test_occupation_is_sharp_at_any_cutoff(self, chiral_model):
        for model in (chiral_model, models.deepen_chiral(chiral_model, 2)):
            sc = models.build_chiral(model)
            w = np.linalg.eigvalsh(sc.occupation.matrix)
            assert np.max(np.minimum(np.abs(w), np.abs(w - 1.0))) < 1e-10

    def test_charge_commutes_with_occupation(self, chiral_model):
        sc = models.build_chiral(chiral_model)
        n, q = sc.occupation.matrix, sc.charge.matrix
        assert linalg.max_abs(n @ q - q @ n) < 1e-10

    def test_half_filling(self, chiral_model):
        sc = models.build_chiral(chiral_model)
        assert np.trace(sc.occupation.matrix).real == approx(chiral_model.grid_points)

    def test_support_must_fit_window(self):
        with pytest.raises(TruncationError):
            models.build_chiral(models.ChiralModel(
                energy_cutoff=np.pi * 16 / 8, grid_points=16,
                scatter=models.mixing_scatter(1.0, 0.0, 6.0), support=(-6.0, 6.0)))

    def test_commutator_matches_kernel_quadrature(self):
        # For a diagonal (transmission-phase) scatterer the commutator [N, U]
        # has the explicit energy-space kernel g_hat(E - E') across the sea
        # boundary; its squared HS norm is (1/2pi) Int |u| |g_hat(u)|^2 du per
        # boundary.  The periodic dual grid carries two sea boundaries (the
        # Fermi level and the cutoff wrap), hence the factor 2.
        g, window = 128, 8.0
        amp, center, width = 1.3, 0.1, 1.2
        model = models.ChiralModel(energy_cutoff=np.pi * g / window, grid_points=g,
                                   scatter=models.phase_scatter(amp, center, width),
                                   support=(center - width, center + width))
        sc = models.build_chiral(model)
        n, u = sc.occupation.matrix, sc.evolution
        discrete = linalg.schatten_norm(n @ u - u @ n, 2)

        tt = np.linspace(-window / 2, window / 2, 1 << 14, endpoint=False)
        dt = tt[1] - tt[0]
        total = 0.0
        for sign in (+1.0, -1.0):
            gfun = np.exp(sign * 1j * amp * models.bump(tt, center, width)) - 1.0
            ghat = dt / np.sqrt(2 * np.pi) * np.fft.fft(gfun)
            us = 2 * np.pi * np.fft.fftfreq(tt.size, d=dt)
            total += np.sum(np.abs(us) * np.abs(ghat) ** 2) * (us[1] - us[0]) / (2 * np.pi)
        continuum = np.sqrt(2.0 * total)
        assert discrete == approx(continuum, rel=0.05)


class TestDysonFirstTerm:
    def test_zero_drive(self, rng):
        from helpers import random_hermitian
        h0 = random_hermitian(rng, 4)
        out = models.dyson_first_term(h0, lambda t: np.zeros((4, 4)), 0.0, 1.0, 16)
        assert linalg.max_abs(out) == 0

    def test_commuting_constant_drive(self):
        h0 = np.diag([1.0, 2.0]).astype(complex)
        v = np.diag([0.3, -0.1]).astype(complex)
        out = models.dyson_first_term(h0, lambda t: v, 0.2, 1.4, 64)
        assert linalg.max_abs(out - (-1j * 1.2 * v)) < 1e-12

    def test_quadrature_converges(self, m8_lattice):
        h0, _, _ = models.build_two_lead(m8_lattice)
        drive = models.bond_pulse_drive(m8_lattice, 0.5, 0.7, 0.5)
        coarse = models.dyson_first_term(h0, drive, 0.0, 1.5, 64)
        fine = models.dyson_first_term(h0, drive, 0.0, 1.5, 128)
        assert np.linalg.norm(fine - coarse) < 1e-6

    def test_rejects_tiny_quadrature(self, rng):
        from helpers import random_hermitian
        h0 = random_hermitian(rng, 3)
        with pytest.raises(ContractError):
            models.dyson_first_term(h0, lambda t: np.zeros((3, 3)), 0.0, 1.0, 4)


class TestScenario:
    def test_rejects_noncommuting_occupation(self, rng, m8_lattice):
        from helpers import random_hermitian
        _, h, q = models.build_two_lead(m8_lattice)
        occ = models.fermi_occupation(h, 0.15)  # coupled sea: [Q, N] != 0
        with pytest.raises(ContractError):
            models.Scenario(occupation=occ, charge=q, evolution=np.eye(8))

    def test_parseval_pairing(self, chiral_model):
        import scipy.linalg
        f = scipy.linalg.dft(chiral_model.grid_points, scale="sqrtn")
        assert linalg.max_abs(f.conj().T @ f - np.eye(chiral_model.grid_points)) < 1e-10
