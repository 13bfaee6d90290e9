import cmath
import dataclasses
import math

import numpy as np
import pytest

from klmsim.errors import ProtocolError, RegimeViolation
from klmsim.hilbert import (
    DenseOperator,
    SpaceLayout,
    StateVector,
    basis_state,
    embed,
    max_abs_diff,
    overlap_fidelity,
    tensor,
)
from klmsim.model import SchemeOneParams, SchemeTwoParams, two_pi_mhz
from klmsim.operators import LVL_E, LVL_G, LVL_I
from klmsim.protocol import (
    DecoupleStep,
    FeedbackStep,
    InteractStep,
    MeasureStep,
    PulseAngles,
    PulseProgram,
    cphase_ideal,
    cphase_numeric,
    gate_time_for_phase,
    klm_closed_form,
    qutrit_chain_layout,
    scheme1_layout,
    scheme1_measure_feedback,
    scheme1_run,
    scheme2_n_qubit,
    scheme2_two_qubit,
)

P4 = SchemeOneParams.reference_point()


def perturbed_state_oracle(angles: PulseAngles, etas, layout) -> StateVector:
    """Hand substitution of the perturbed rotation angles through the step algebra.

    Independent of the engine: pure trigonometry of the six protocol steps,
    including the leftover-amplitude branches that exist only off the ideal
    angles (step 5 parks leftover |e> amplitude in |i>).
    """
    th0 = angles.theta0 * (1 + etas[0])
    gt1 = (math.pi / 2) * (1 + etas[1])
    th2 = angles.theta2 * (1 + etas[2])
    gt3 = (math.pi / 2) * (1 + etas[3])
    c0, s0 = math.cos(th0), math.sin(th0)
    c1, s1 = math.cos(gt1), math.sin(gt1)
    c2, s2 = math.cos(th2), math.sin(th2)
    c3, s3 = math.cos(gt3), math.sin(gt3)
    ephi = cmath.exp(-1j * angles.phi)
    ephip = cmath.exp(-1j * angles.phi_prime)
    r = 1 / math.sqrt(2)

    amps = np.zeros(layout.dim, complex)
    b00 = -ephi * np.conj(ephip) * s0 * c1 * s2
    b10 = -ephi * s0 * s1 * c2
    b01 = -ephi * s0 * c1 * c2 * s3
    b11 = ephi * ephip * s0 * s1 * s2 * s3
    amps[layout.ravel((LVL_E, 0, 0))] = (c0 - b00) * r
    amps[layout.ravel((LVL_G, 0, 0))] = (c0 + b00) * r
    for (n1, n2), v in [((1, 0), b10), ((0, 1), b01), ((1, 1), b11)]:
        amps[layout.ravel((LVL_E, n1, n2))] = -v * r
        amps[layout.ravel((LVL_G, n1, n2))] = v * r
    amps[layout.ravel((LVL_I, 0, 0))] = 1j * ephi * s0 * c1 * c2 * c3
    amps[layout.ravel((LVL_I, 1, 0))] = -1j * ephi * ephip * s0 * s1 * s2 * c3
    return StateVector(layout, amps)


def ideal_target_state(layout) -> StateVector:
    amps = np.zeros(layout.dim, complex)
    r = 1 / math.sqrt(6)
    for scq, n1, n2, sign in [
        (LVL_G, 0, 0, 1), (LVL_G, 1, 0, -1), (LVL_G, 1, 1, 1),
        (LVL_E, 0, 0, 1), (LVL_E, 1, 0, 1), (LVL_E, 1, 1, -1),
    ]:
        amps[layout.ravel((scq, n1, n2))] = sign * r
    return StateVector(layout, amps)


class TestPulseProgram:
    def test_validation(self):
        with pytest.raises(ValueError, match="ensemble"):
            PulseProgram((InteractStep(3, 1.0),))
        with pytest.raises(ValueError, match="at most once"):
            PulseProgram((MeasureStep("scq", "ge"), MeasureStep("scq", "ge")))
        with pytest.raises(ValueError, match="feedback"):
            PulseProgram((FeedbackStep("x"), MeasureStep("scq", "ge")))
        with pytest.raises(ValueError, match="timing"):
            PulseProgram((DecoupleStep(),), timing_errors=(0, -1.0, 0, 0))

    def test_angle_range(self):
        with pytest.raises(ValueError, match="theta0"):
            PulseAngles(2 * math.pi, 0.3)
        with pytest.raises(ValueError, match="theta2"):
            PulseAngles(0.3, -0.1)


class TestScheme1Run:
    def test_ideal_run_reaches_target_state(self):
        record = scheme1_run(P4)
        target = ideal_target_state(record.final_state.layout)
        assert max_abs_diff(record.final_state.amplitudes, target.amplitudes) < 1e-12
        assert abs(overlap_fidelity(record.final_state, target) - 1) < 1e-12

    def test_no_initial_pulse_keeps_modes_empty(self):
        # theta0 = 0: nothing ever excites, steps 5-6 leave (|g>+|e>)|00>/sqrt2
        record = scheme1_run(P4, PulseAngles(0.0, math.pi / 4))
        final = record.final_state
        r = 1 / math.sqrt(2)
        assert abs(final.amplitude((LVL_G, 0, 0)) - r) < 1e-12
        assert abs(final.amplitude((LVL_E, 0, 0)) - r) < 1e-12
        assert abs(final.norm - 1) < 1e-12

    @pytest.mark.parametrize("engine", ["closed-form", "effective-numeric"])
    def test_matches_hand_substitution_oracle(self, engine):
        rng = np.random.default_rng(17)
        for _ in range(6):
            angles = PulseAngles(
                rng.uniform(0, 2 * math.pi),
                rng.uniform(0, 2 * math.pi),
                rng.uniform(0, 2 * math.pi),
                rng.uniform(0, 2 * math.pi),
            )
            etas = tuple(rng.uniform(-0.3, 0.3, size=4))
            record = scheme1_run(P4, angles, etas, engine)
            oracle = perturbed_state_oracle(angles, etas, record.final_state.layout)
            assert max_abs_diff(record.final_state.amplitudes, oracle.amplitudes) < 1e-9

    def test_single_eta_matches_oracle_exactly(self):
        etas = (0.0, 0.1, 0.0, 0.0)
        record = scheme1_run(P4, None, etas)
        oracle = perturbed_state_oracle(PulseAngles.ideal(), etas, record.final_state.layout)
        assert max_abs_diff(record.final_state.amplitudes, oracle.amplitudes) < 1e-12

    def test_unknown_engine(self):
        with pytest.raises(ValueError, match="engine"):
            scheme1_run(P4, engine="lab-frame")

    def test_record_bookkeeping(self):
        record = scheme1_run(P4)
        assert len(record.states) == len(record.step_names) + 1
        assert record.total_time == pytest.approx(sum(record.durations))
        for state in record.states:
            assert abs(state.norm - 1) < 1e-12
        report = record.to_report()
        assert len(report["steps"]) == len(record.step_names)
        assert report["total_time_s"] == record.total_time

    def test_durations_match_timing_budget(self):
        from klmsim.analysis import timing_budget_s1

        record = scheme1_run(P4)
        budget = timing_budget_s1(P4)
        assert record.total_time == pytest.approx(budget["total"], rel=1e-12)

    def test_excitations_stay_in_single_quantum_sector(self):
        record = scheme1_run(P4, engine="effective-numeric")
        for state in record.states:
            for label in ("mode1", "mode2"):
                assert float(state.populations(label)[2:].sum()) < 1e-10


class TestMeasureFeedback:
    def test_outcome_g_projects_target_bracket(self):
        final = scheme1_run(P4).final_state
        klm, outcome, probs = scheme1_measure_feedback(final, outcome="g")
        layout = klm.layout
        r = 1 / math.sqrt(3)
        assert outcome == "g"
        assert abs(klm.amplitude((0, 0)) - r) < 1e-12
        assert abs(klm.amplitude((1, 0)) + r) < 1e-12
        assert abs(klm.amplitude((1, 1)) - r) < 1e-12

    def test_feedback_makes_outcomes_identical(self):
        final = scheme1_run(P4).final_state
        klm_g, _, _ = scheme1_measure_feedback(final, outcome="g")
        klm_e, _, _ = scheme1_measure_feedback(final, outcome="e")
        assert abs(overlap_fidelity(klm_g, klm_e) - 1) < 1e-10

    def test_born_probabilities_even(self):
        final = scheme1_run(P4).final_state
        _, _, probs = scheme1_measure_feedback(final, outcome="g")
        assert abs(probs["g"] - 0.5) < 1e-12
        assert abs(probs["e"] - 0.5) < 1e-12

    def test_sampling_deterministic_given_seed(self):
        final = scheme1_run(P4).final_state
        outcomes = {scheme1_measure_feedback(final, "sample", seed=s)[1] for s in range(20)}
        assert outcomes == {"g", "e"}  # both branches occur across seeds
        for seed in (0, 1, 7):
            a = scheme1_measure_feedback(final, "sample", seed=seed)[1]
            b = scheme1_measure_feedback(final, "sample", seed=seed)[1]
            assert a == b

    def test_rejects_states_outside_protocol_form(self):
        layout = scheme1_layout(3)
        with pytest.raises(ProtocolError, match="post-step-6"):
            scheme1_measure_feedback(basis_state(layout, (LVL_I, 0, 0)))

    def test_perturbed_run_reports_failure_population(self):
        # timing errors park some amplitude in |i>; it shows up as P(i) and
        # the g/e sampling renormalizes over the measured pair
        final = scheme1_run(P4, None, (0.1, 0.1, 0.1, 0.1)).final_state
        _, outcome, probs = scheme1_measure_feedback(final, "sample", seed=3)
        assert outcome in ("g", "e")
        assert probs["i"] > 1e-4
        assert probs["i"] + probs["g"] + probs["e"] == pytest.approx(1.0, abs=1e-12)

    def test_zero_probability_outcome(self):
        layout = scheme1_layout(3)
        with pytest.raises(ProtocolError, match="zero probability"):
            scheme1_measure_feedback(basis_state(layout, (LVL_G, 0, 0)), outcome="e")


class TestCphaseIdeal:
    def test_zero_phase_is_identity(self):
        layout = qutrit_chain_layout(2)
        u = cphase_ideal(0.0, layout)
        assert max_abs_diff(u.matrix.entries, np.eye(layout.dim)) == 0.0

    def test_target_phase_on_gg(self):
        layout = qutrit_chain_layout(2)
        u = cphase_ideal(-3 * math.pi / 2, layout)
        out = u.apply(basis_state(layout, (LVL_G, LVL_G)))
        assert abs(out.amplitude((LVL_G, LVL_G)) - 1j) < 1e-12
        for levels in [(LVL_I, LVL_I), (LVL_I, LVL_G), (LVL_G, LVL_I), (LVL_E, LVL_G)]:
            out = u.apply(basis_state(layout, levels))
            assert abs(out.amplitude(levels) - 1.0) < 1e-15

    def test_commutes_with_diagonal_phases(self):
        layout = qutrit_chain_layout(2)
        u = cphase_ideal(0.8, layout).matrix
        z = embed(
            DenseOperator(SpaceLayout.of(("scq1", 3)), np.diag(np.exp(1j * np.array([0.1, 0.2, 0.3])))),
            "scq1",
            layout,
        )
        assert max_abs_diff((u @ z).entries, (z @ u).entries) < 1e-15

    def test_additivity(self):
        layout = qutrit_chain_layout(2)
        lhs = (cphase_ideal(1.2, layout).matrix @ cphase_ideal(-0.5, layout).matrix).entries
        assert max_abs_diff(lhs, cphase_ideal(0.7, layout).matrix.entries) < 1e-14

    def test_pair_required_for_larger_layouts(self):
        layout = qutrit_chain_layout(3)
        with pytest.raises(ValueError):
            cphase_ideal(0.3, layout)
        u = cphase_ideal(0.3, layout, ("scq2", "scq3"))
        out = u.apply(basis_state(layout, (LVL_I, LVL_G, LVL_G)))
        assert abs(out.amplitude((LVL_I, LVL_G, LVL_G)) - cmath.exp(0.3j)) < 1e-14


class TestGateTime:
    def test_zero_phase_zero_time(self):
        assert gate_time_for_phase(0.0, SchemeTwoParams.reference_point()) == 0.0

    def test_reference_gate_time(self):
        t = gate_time_for_phase(-3 * math.pi / 2, SchemeTwoParams.reference_point())
        assert abs(t - 0.666e-6) <= 0.01 * 0.666e-6

    def test_algebraic_round_trip(self):
        p = SchemeTwoParams.reference_point()
        t = gate_time_for_phase(-2.2, p)
        phi_back = -t * abs(p.Omega_1) ** 2 / (2 * (p.Delta + p.delta))
        assert abs(phi_back - (-2.2)) < 1e-12

    def test_zero_drive_rejected(self):
        p = dataclasses.replace(SchemeTwoParams.reference_point(), Omega_1=0.0, Omega_2=0.0)
        with pytest.raises(ValueError):
            gate_time_for_phase(-1.0, p)


class TestCphaseNumeric:
    def test_no_drive_no_entangling_phase(self):
        p = dataclasses.replace(SchemeTwoParams.reference_point(), Omega_1=0.0, Omega_2=0.0)
        d = cphase_numeric(p, 0.3e-6, cutoff=3)
        assert abs(d.entangling_phase) < 1e-9
        assert d.leakage < 1e-12
        assert abs(d.branch_phases["ii"]) < 1e-12

    def test_reference_point_diagnostics(self):
        p = SchemeTwoParams.reference_point()
        t = gate_time_for_phase(-3 * math.pi / 2, p)
        d = cphase_numeric(p, t)
        assert math.isfinite(d.entangling_phase)
        assert 0 <= d.leakage <= 0.5
        assert 0.9 < d.survival <= 1.0
        assert d.branch_phases["ii"] == 0.0
        # drives are symmetric, so the single-qutrit branches agree
        assert abs(d.branch_phases["ig"] - d.branch_phases["gi"]) < 1e-9

    def test_regime_violation_detected(self):
        p = dataclasses.replace(
            SchemeTwoParams.reference_point(),
            Omega_1=two_pi_mhz(60.0),
            Omega_2=two_pi_mhz(60.0),
        )
        chi = (p.g_1 / 2) ** 2 / p.Delta
        with pytest.raises(RegimeViolation):
            cphase_numeric(p, math.pi / chi)

    def test_zero_time_is_inert(self):
        d = cphase_numeric(SchemeTwoParams.reference_point(), 0.0)
        assert d.entangling_phase == 0.0
        assert d.leakage == 0.0
        assert d.survival == 1.0


class TestScheme2Ideal:
    def test_two_qubit_reference_amplitudes(self):
        st = scheme2_two_qubit()
        layout = st.layout
        scale = 2 * math.sqrt(2)
        assert abs(st.amplitude((LVL_I, LVL_I)) * scale - 2) < 1e-12
        assert abs(st.amplitude((LVL_I, LVL_G)) * scale) < 1e-12
        assert abs(st.amplitude((LVL_G, LVL_I)) * scale - (1 + 1j)) < 1e-12
        assert abs(st.amplitude((LVL_G, LVL_G)) * scale - (1j - 1)) < 1e-12
        assert abs(st.norm - 1) < 1e-12

    def test_zero_gate_phase_gives_separable_state(self):
        st = scheme2_two_qubit(gate_phase=0.0)
        assert abs(st.amplitude((LVL_G, LVL_G))) < 1e-15
        assert abs(st.amplitude((LVL_I, LVL_G))) < 1e-15
        plus = np.zeros(3, complex)
        plus[LVL_I] = plus[LVL_G] = 1 / math.sqrt(2)
        product = tensor(
            [
                StateVector(SpaceLayout.of(("scq1", 3)), plus),
                basis_state(SpaceLayout.of(("scq2", 3)), (LVL_I,)),
            ]
        )
        assert abs(overlap_fidelity(st, product) - 1) < 1e-12

    def test_base_case_equals_two_qubit(self):
        assert max_abs_diff(scheme2_n_qubit(2).amplitudes, scheme2_two_qubit().amplitudes) == 0.0

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_chain_matches_closed_form(self, n):
        overlap = overlap_fidelity(scheme2_n_qubit(n), klm_closed_form(n).normalized())
        assert overlap >= 1 - 1e-9

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            scheme2_n_qubit(1)
        with pytest.raises(ValueError):
            klm_closed_form(1)


class TestKlmClosedForm:
    def test_two_qubit_coefficients(self):
        st = klm_closed_form(2)
        layout = st.layout
        scale = 2 * math.sqrt(2)
        # alpha_1 = -2 (i-1)^{-1} = 1+i, alpha_2 = -2i (i-1)^{-1} = i-1
        assert abs(st.amplitude((LVL_I, LVL_I)) * scale - 2) < 1e-12
        assert abs(st.amplitude((LVL_G, LVL_I)) * scale - (1 + 1j)) < 1e-12
        assert abs(st.amplitude((LVL_G, LVL_G)) * scale - (1j - 1)) < 1e-12

    def test_three_qubit_coefficients(self):
        st = klm_closed_form(3)
        layout = st.layout
        scale = 2 * math.sqrt(2)
        assert abs(st.amplitude((LVL_I, LVL_I, LVL_I)) * scale - 2) < 1e-12
        assert abs(st.amplitude((LVL_G, LVL_I, LVL_I)) * scale - (1 + 1j)) < 1e-12
        assert abs(st.amplitude((LVL_G, LVL_G, LVL_I)) * scale - (-1)) < 1e-12
        assert abs(st.amplitude((LVL_G, LVL_G, LVL_G)) * scale - (-1j)) < 1e-12

    @pytest.mark.parametrize("n", range(2, 9))
    def test_reference_norms(self, n):
        assert abs(klm_closed_form(n).norm - 1) < 1e-12

    def test_leading_g_ordering(self):
        st = klm_closed_form(3)
        # |g i i> carries weight, |i i g> must not (leading-g convention)
        assert abs(st.amplitude((LVL_G, LVL_I, LVL_I))) > 0.1
        assert abs(st.amplitude((LVL_I, LVL_I, LVL_G))) == 0.0
