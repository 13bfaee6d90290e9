import dataclasses
import math

import numpy as np
import pytest
import scipy.linalg

from klmsim.hilbert import basis_state, max_abs_diff
from klmsim.model import (
    SchemeOneParams,
    SchemeTwoParams,
    build_h_eff_s1,
    build_h_full_s1,
    build_h_s2,
    collective_spin_ops,
    resonance_residual,
    scheme1_eff_layout,
    scheme1_full_layout,
    scheme2_layout,
    solve_drive_omega,
    stark_shifts,
    two_pi_mhz,
    _embedded,
)
from klmsim.operators import LVL_E, LVL_G, number_op, projector


def toy_params(**overrides):
    base = dict(
        omega_s=5.0,
        omega_d=4.0,
        omega_m=4.5,
        omega_c=3.8,
        Omega=0.05,
        g_s=0.06,
        g_m=0.04,
        N=100,
    )
    base.update(overrides)
    return SchemeOneParams(**base)


class TestCollectiveSpinOps:
    def test_single_spin_raising(self):
        ops = collective_spin_ops(1, 1)
        np.testing.assert_array_equal(ops.S_plus.entries, [[0, 0], [1, 0]])
        np.testing.assert_array_equal(ops.S_minus.entries, [[0, 1], [0, 0]])
        np.testing.assert_array_equal(np.diag(ops.S_z.entries), [-1, 1])

    def test_large_ensemble_bosonic_limit(self):
        # b†|0> = sqrt(N*1*(N-0))/N |1> = exactly |1>
        ops = collective_spin_ops(10_000, 2)
        assert abs(ops.b_dagger.entries[1, 0] - 1.0) < 1e-15
        # next rung already shows the 1/N depletion
        assert abs(ops.b_dagger.entries[2, 1] - math.sqrt(2 * (1 - 1 / 10_000))) < 1e-12

    def test_truncated_commutator_diagonal(self):
        n_spins, cutoff = 50, 3
        ops = collective_spin_ops(n_spins, cutoff)
        comm = ops.b.entries @ ops.b_dagger.entries - ops.b_dagger.entries @ ops.b.entries
        for n in range(cutoff):
            assert abs(comm[n, n] - (1 - 2 * n / n_spins)) < 1e-12

    def test_cutoff_bounds(self):
        with pytest.raises(ValueError):
            collective_spin_ops(3, 4)
        with pytest.raises(ValueError):
            collective_spin_ops(3, 0)


class TestStarkShifts:
    def test_formulas(self):
        p = toy_params()
        s = stark_shifts(p)
        assert s.lambda_sd == p.Omega**2 / (p.omega_s - p.omega_d)
        assert s.lambda_sc == p.g_s**2 / (p.omega_s - p.omega_c)
        assert s.lambda_mc == p.g_m**2 / (p.omega_m - p.omega_c)
        lam_sm = (p.g_m * p.g_s / 2) * (1 / p.delta_m + 1 / p.delta_s)
        assert abs(s.lambda_sm - lam_sm) < 1e-15 * abs(lam_sm)
        assert abs(s.g_eff - math.sqrt(p.N) * lam_sm) < 1e-12 * abs(s.g_eff)

    def test_reference_coupling_point(self):
        # g_s=2pi*75 MHz, g_m=2pi*20 MHz, Delta_s=2pi*750 MHz, Delta_m=2pi*500 MHz,
        # N=1e4 gives g_eff = 2pi*250 MHz
        s = stark_shifts(SchemeOneParams.reference_point())
        assert abs(s.g_eff - two_pi_mhz(250.0)) < 1e-9 * two_pi_mhz(250.0)

    def test_sqrt_n_scaling(self):
        p = toy_params()
        doubled = dataclasses.replace(p, N=2 * p.N)
        ratio = stark_shifts(doubled).g_eff / stark_shifts(p).g_eff
        assert abs(ratio - math.sqrt(2)) < 1e-14

    def test_zero_detuning_rejected(self):
        with pytest.raises(ValueError, match="detuning"):
            stark_shifts(toy_params(omega_d=5.0))


class TestResonanceResidual:
    def test_drive_solver_round_trip(self):
        p = toy_params(Omega=0.0)
        omega = solve_drive_omega(p)
        tuned = dataclasses.replace(p, Omega=omega)
        residual = resonance_residual(tuned)
        scale = p.N * stark_shifts(p).lambda_mc
        assert abs(residual) < 1e-12 * scale

    def test_no_molecule_coupling_limit(self):
        p = toy_params(g_m=0.0)
        s = stark_shifts(p)
        assert resonance_residual(p) == 2 * s.lambda_sd + s.lambda_sc

    def test_reference_residual_with_drive_off(self):
        # lambda_sc = 2pi*7.5 MHz against N*lambda_mc = 2pi*8000 MHz
        residual = resonance_residual(SchemeOneParams.reference_point())
        assert abs(residual - two_pi_mhz(-7992.5)) < 1e-9 * two_pi_mhz(7992.5)

    def test_solver_rejects_negative_square(self):
        # positive Delta_d but N*lam_mc < lam_sc requires Omega^2 < 0
        with pytest.raises(ValueError):
            solve_drive_omega(toy_params(g_m=0.0, g_s=0.06, Omega=0.0))


class TestFullHamiltonian:
    def test_decoupled_limit_diagonal(self):
        p = toy_params(Omega=0.0, g_s=0.0, g_m=0.0)
        layout = scheme1_full_layout(res_cutoff=2, mode_cutoff=2)
        h = build_h_full_s1(p, layout, "lab").matrix_at(0.3)
        assert max_abs_diff(h, np.diag(np.diag(h))) == 0.0
        for idx in range(layout.dim):
            scq, nr, nm = layout.unravel(idx)
            qutrit_energy = {0: 0.0, LVL_G: -p.omega_s / 2, LVL_E: p.omega_s / 2}[scq]
            expected = qutrit_energy + nr * p.omega_c + nm * p.omega_m
            assert abs(h[idx, idx] - expected) < 1e-12

    @pytest.mark.parametrize("t", [0.0, 0.37, 2.9])
    def test_hermitian_at_any_time(self, t):
        layout = scheme1_full_layout(res_cutoff=2, mode_cutoff=2)
        h = build_h_full_s1(toy_params(), layout, "lab").matrix_at(t)
        assert max_abs_diff(h, h.conj().T) < 1e-12

    def test_excitation_conserved_without_drive(self):
        p = toy_params(Omega=0.0)
        layout = scheme1_full_layout(res_cutoff=2, mode_cutoff=2)
        h = build_h_full_s1(p, layout, "lab").matrix_at(1.0)
        n_exc = (
            _embedded(projector("e"), "scq", layout)
            + _embedded(number_op(3), "res", layout)
            + _embedded(number_op(3), "mode", layout)
        )
        assert max_abs_diff(h @ n_exc, n_exc @ h) < 1e-12

    def test_rotating_frame_shifts_to_detunings(self):
        p = toy_params(Omega=0.0, g_s=0.0, g_m=0.0)
        layout = scheme1_full_layout(res_cutoff=2, mode_cutoff=2)
        h = build_h_full_s1(p, layout, "drive-rotating").entries
        e_idx = layout.ravel((LVL_E, 0, 0))
        g_idx = layout.ravel((LVL_G, 0, 0))
        assert abs((h[e_idx, e_idx] - h[g_idx, g_idx]) - p.delta_d) < 1e-12
        one_photon = layout.ravel((0, 1, 0))
        assert abs(h[one_photon, one_photon] - (p.omega_c - p.omega_d)) < 1e-12

    def test_unknown_frame(self):
        with pytest.raises(ValueError):
            build_h_full_s1(toy_params(), scheme1_full_layout(2, 2), "interaction")


class TestEffectiveHamiltonian:
    def test_dressed_splitting(self):
        p = SchemeOneParams.reference_point(Omega=two_pi_mhz(5.0))
        layout = scheme1_eff_layout(mode_cutoff=3)
        h = build_h_eff_s1(p, layout).entries
        g = stark_shifts(p).g_eff
        for n in range(3):
            i = layout.ravel((LVL_E, n))
            j = layout.ravel((LVL_G, n + 1))
            block = h[np.ix_([i, j], [i, j])]
            evals = scipy.linalg.eigh(block, eigvals_only=True)
            # at resonance the block is degenerate up to the exchange coupling
            splitting_coupling_only = 2 * abs(block[0, 1])
            assert abs(splitting_coupling_only - 2 * g * math.sqrt(n + 1)) < 1e-9 * g
            assert evals[1] - evals[0] >= 2 * g * math.sqrt(n + 1) - 1e-9 * g

    def test_dressed_splitting_at_resonance(self):
        p = toy_params(Omega=0.0)
        tuned = dataclasses.replace(p, Omega=solve_drive_omega(p))
        layout = scheme1_eff_layout(mode_cutoff=2)
        h = build_h_eff_s1(tuned, layout).entries
        g = stark_shifts(tuned).g_eff
        for n in range(2):
            i = layout.ravel((LVL_E, n))
            j = layout.ravel((LVL_G, n + 1))
            block = h[np.ix_([i, j], [i, j])]
            evals = scipy.linalg.eigh(block, eigvals_only=True)
            assert abs((evals[1] - evals[0]) - 2 * g * math.sqrt(n + 1)) < 1e-9 * g

    def test_all_couplings_off_gives_zero(self):
        p = toy_params(Omega=0.0, g_s=0.0, g_m=0.0)
        h = build_h_eff_s1(p, scheme1_eff_layout(2)).entries
        assert max_abs_diff(h, np.zeros_like(h)) == 0.0

    def test_spectator_level_untouched(self):
        layout = scheme1_eff_layout(2)
        h = build_h_eff_s1(toy_params(), layout).entries
        for n in range(3):
            idx = layout.ravel((0, n))  # |i, n>
            row = np.abs(h[idx, :]).sum() - abs(h[idx, idx])
            col = np.abs(h[:, idx]).sum() - abs(h[idx, idx])
            assert row == 0.0 and col == 0.0
            # |i> carries no sigma_z or exchange energy, only the mode term
            expected_diag = toy_params().N * stark_shifts(toy_params()).lambda_mc * n
            assert abs(h[idx, idx] - expected_diag) < 1e-12


class TestGateHamiltonian:
    def test_hermitian_without_decay(self):
        p = dataclasses.replace(
            SchemeTwoParams.reference_point(), Gamma_1=0.0, Gamma_2=0.0, kappa=0.0
        )
        h = build_h_s2(p, scheme2_layout(res_cutoff=2))
        assert h.hermitian_hint
        assert max_abs_diff(h.entries, h.entries.conj().T) < 1e-12

    def test_double_i_states_are_eigenvectors(self):
        p = SchemeTwoParams.reference_point()
        layout = scheme2_layout(res_cutoff=3)
        h = build_h_s2(p, layout).entries
        for n in range(4):
            idx = layout.ravel((0, 0, n))
            vec = basis_state(layout, (0, 0, n)).amplitudes
            out = h @ vec
            lam = out[idx]
            assert np.linalg.norm(out - lam * vec) < 1e-9 * max(1.0, abs(lam))
            expected = (p.omega_c - p.omega_d - 1j * p.kappa) * n
            assert abs(lam - expected) < 1e-9 * max(1.0, abs(expected))

    def test_eigenvalues_dissipative(self):
        p = SchemeTwoParams.reference_point()
        h = build_h_s2(p, scheme2_layout(res_cutoff=2))
        evals = scipy.linalg.eigvals(h.entries)
        assert np.all(evals.imag <= 1e-9)

    def test_negative_decay_rejected(self):
        with pytest.raises(ValueError, match="decay"):
            dataclasses.replace(SchemeTwoParams.reference_point(), kappa=-1.0)

    def test_only_rotating_frame(self):
        with pytest.raises(ValueError):
            build_h_s2(SchemeTwoParams.reference_point(), scheme2_layout(2), frame="lab")


class TestValidityFlags:
    def test_scheme_one_warns_below_dispersive_ratio(self):
        with pytest.warns(UserWarning, match="dispersive"):
            toy_params(g_s=0.5)

    def test_scheme_two_flags_reference_point(self):
        flags = SchemeTwoParams.reference_point().validity_flags()
        assert flags["Delta_vs_kappa"]["ok"]
        assert flags["Delta_vs_Gamma"]["ok"]
        assert flags["g_exceeds_Omega"]["ok"]
        assert flags["delta_small"]["ok"]
        # Delta/g = 400/75 sits below the factor-10 reading of "much greater"
        assert not flags["Delta_vs_g"]["ok"]
