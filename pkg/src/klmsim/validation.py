"""Built-in invariant suite: every module-level property, runnable on demand.

Each check is deterministic (fixed RNG seed) and returns a pass/fail with a
one-line numeric detail, so the CLI can print a table and CI can gate on the
exit code.  The pytest suite calls the same functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analysis, evolve, hilbert, model, protocol
from .hilbert import DenseOperator, SpaceLayout, StateVector, basis_state, commutator, overlap_fidelity, tensor
from .operators import LVL_E, LVL_G, LVL_I

__all__ = ["CheckResult", "run_validation_suite", "CHECKS"]

SEED = 20260810


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_state(rng, layout: SpaceLayout) -> StateVector:
    amps = rng.standard_normal(layout.dim) + 1j * rng.standard_normal(layout.dim)
    return StateVector(layout, amps / np.linalg.norm(amps))


def _random_operator(rng, layout: SpaceLayout) -> DenseOperator:
    m = rng.standard_normal((layout.dim,) * 2) + 1j * rng.standard_normal((layout.dim,) * 2)
    return DenseOperator(layout, m)


def _random_unitary(rng, dim: int) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def check_tensor_associative() -> CheckResult:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(10):
        a = _random_operator(rng, SpaceLayout.of(("a", 2)))
        b = _random_operator(rng, SpaceLayout.of(("b", 3)))
        c = _random_operator(rng, SpaceLayout.of(("c", 2)))
        lhs = tensor([tensor([a, b]), c]).entries
        rhs = tensor([a, b, c]).entries
        worst = max(worst, hilbert.max_abs_diff(lhs, rhs))
    return CheckResult("tensor_associative", worst == 0.0, f"max deviation {worst:.2e}")


def check_embed_matches_kron() -> CheckResult:
    rng = np.random.default_rng(SEED + 1)
    layout = SpaceLayout.of(("x", 2), ("y", 3), ("z", 2))
    op = _random_operator(rng, SpaceLayout.of(("y", 3)))
    explicit = np.kron(np.kron(np.eye(2), op.entries), np.eye(2))
    dev = hilbert.max_abs_diff(hilbert.embed(op, "y", layout).entries, explicit)
    return CheckResult("embed_matches_kron", dev == 0.0, f"max deviation {dev:.2e}")


def check_overlap_unitary_invariant() -> CheckResult:
    rng = np.random.default_rng(SEED + 2)
    layout = SpaceLayout.of(("q", 5))
    worst = 0.0
    for _ in range(20):
        psi, phi = _random_state(rng, layout), _random_state(rng, layout)
        u = _random_unitary(rng, 5)
        f0 = overlap_fidelity(psi, phi)
        f1 = overlap_fidelity(
            StateVector(layout, u @ psi.amplitudes), StateVector(layout, u @ phi.amplitudes)
        )
        worst = max(worst, abs(f0 - f1))
    return CheckResult("overlap_unitary_invariant", worst < 1e-10, f"max |dF| {worst:.2e}")


def check_dicke_commutator() -> CheckResult:
    worst = 0.0
    for n_spins in (2, 5, 50):
        ops = model.collective_spin_ops(n_spins, n_spins)
        ident = np.eye(n_spins + 1)
        expected = ident - (2 / n_spins) * ops.n_b.entries
        dev = hilbert.max_abs_diff(commutator(ops.b, ops.b_dagger).entries, expected)
        worst = max(worst, dev)
    return CheckResult("dicke_commutator", worst < 1e-10, f"max deviation {worst:.2e}")


def check_stark_recompute() -> CheckResult:
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(100):
        wc = model.two_pi_mhz(rng.uniform(3000, 9000))
        p = model.SchemeOneParams(
            omega_s=wc + model.two_pi_mhz(rng.uniform(200, 2000)),
            omega_d=wc + model.two_pi_mhz(rng.uniform(-3000, -500)),
            omega_m=wc + model.two_pi_mhz(rng.uniform(200, 2000)),
            omega_c=wc,
            Omega=model.two_pi_mhz(rng.uniform(0, 50)),
            g_s=model.two_pi_mhz(rng.uniform(1, 100)),
            g_m=model.two_pi_mhz(rng.uniform(1, 100)),
            N=int(rng.integers(1, 10**5)),
        )
        s = model.stark_shifts(p)
        ref = {
            "lambda_sd": p.Omega**2 / p.delta_d,
            "lambda_sc": p.g_s**2 / p.delta_s,
            "lambda_mc": p.g_m**2 / p.delta_m,
            "lambda_sm": (p.g_m * p.g_s / 2) * (1 / p.delta_m + 1 / p.delta_s),
        }
        ref["g_eff"] = math.sqrt(p.N) * ref["lambda_sm"]
        for key, val in ref.items():
            got = getattr(s, key if key != "g_eff" else "g_eff")
            rel = abs(got - val) / max(abs(val), 1e-300)
            worst = max(worst, rel)
    return CheckResult("stark_recompute", worst < 1e-12, f"max rel error {worst:.2e}")


def check_g_eff_scaling() -> CheckResult:
    p = model.SchemeOneParams.reference_point()
    import dataclasses

    p2 = dataclasses.replace(p, N=2 * p.N)
    ratio = model.stark_shifts(p2).g_eff / model.stark_shifts(p).g_eff
    dev = abs(ratio - math.sqrt(2))
    return CheckResult("g_eff_sqrt_n_scaling", dev < 1e-14, f"ratio deviation {dev:.2e}")


def check_h_eff_jc_blocks() -> CheckResult:
    p = model.SchemeOneParams.reference_point(Omega=model.two_pi_mhz(10.0))
    layout = model.scheme1_eff_layout(mode_cutoff=3)
    h = model.build_h_eff_s1(p, layout).entries
    g = model.stark_shifts(p).g_eff
    worst = 0.0
    for n in range(3):
        i = layout.ravel((LVL_E, n))
        j = layout.ravel((LVL_G, n + 1))
        worst = max(worst, abs(h[i, j] - g * math.sqrt(n + 1)), abs(h[j, i] - g * math.sqrt(n + 1)))
    return CheckResult("h_eff_jc_blocks", worst < 1e-9 * g, f"max off-diag error {worst:.2e}")


def check_h_s2_excitation_conserved() -> CheckResult:
    import dataclasses

    p = dataclasses.replace(
        model.SchemeTwoParams.reference_point(),
        Omega_1=0.0,
        Omega_2=0.0,
        Gamma_1=0.0,
        Gamma_2=0.0,
        kappa=0.0,
    )
    layout = model.scheme2_layout(res_cutoff=3)
    h = model.build_h_s2(p, layout)
    from .operators import number_op, projector

    n_exc = (
        model._embedded(projector("e"), "scq1", layout)
        + model._embedded(projector("e"), "scq2", layout)
        + model._embedded(number_op(4), "res", layout)
    )
    dev = hilbert.max_abs_diff(h.entries @ n_exc, n_exc @ h.entries) / max(
        1.0, float(np.max(np.abs(h.entries)))
    )
    return CheckResult("h_s2_excitation_conserved", dev < 1e-12, f"commutator norm {dev:.2e}")


def check_jc_composition() -> CheckResult:
    rng = np.random.default_rng(SEED + 4)
    layout = model.scheme1_eff_layout(mode_cutoff=3)
    worst = 0.0
    for _ in range(10):
        g = rng.uniform(0.5, 2.0)
        t, s = rng.uniform(0, 3, size=2)
        lhs = (
            evolve.jc_rotation(g, t, layout).matrix @ evolve.jc_rotation(g, s, layout).matrix
        ).entries
        rhs = evolve.jc_rotation(g, t + s, layout).matrix.entries
        worst = max(worst, hilbert.max_abs_diff(lhs, rhs))
    return CheckResult("jc_composition", worst < 1e-10, f"max deviation {worst:.2e}")


def check_jc_vs_exponential() -> CheckResult:
    p = model.SchemeOneParams.reference_point(Omega=model.two_pi_mhz(5.0))
    g = model.stark_shifts(p).g_eff
    layout = model.scheme1_eff_layout(mode_cutoff=3)
    t = (math.pi / 2) / g
    h_int = model.build_h_eff_s1(p, layout, interaction_picture=True)
    u_exp = evolve.expm_generator(h_int.entries, t, hermitian=True)
    u_jc = evolve.jc_rotation(g, t, layout).matrix.entries
    dev = hilbert.max_abs_diff(u_exp, u_jc)
    return CheckResult("jc_vs_exponential", dev < 1e-9, f"max deviation {dev:.2e}")


def check_pulses_unitary() -> CheckResult:
    rng = np.random.default_rng(SEED + 5)
    layout = model.scheme1_eff_layout(mode_cutoff=2)
    worst = 0.0
    pulses = [evolve.step5_pulse(layout), evolve.step6_hadamard(layout)]
    for _ in range(20):
        pair = tuple(rng.choice(["i", "g", "e"], size=2, replace=False))
        pulses.append(evolve.qutrit_pulse(pair, rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi), layout))
    for prop in pulses:
        u = prop.matrix.entries
        worst = max(worst, hilbert.max_abs_diff(u.conj().T @ u, np.eye(u.shape[0])))
    return CheckResult("pulses_unitary", worst < 1e-12, f"max |U†U - I| {worst:.2e}")


def check_nonhermitian_norm_decreasing() -> CheckResult:
    rng = np.random.default_rng(SEED + 6)
    p = model.SchemeTwoParams.reference_point()
    layout = model.scheme2_layout(res_cutoff=2)
    h = model.build_h_s2(p, layout)
    worst = -math.inf
    for _ in range(100):
        psi = _random_state(rng, layout)
        t = rng.uniform(0, 2e-6)
        out = evolve.propagate_const(h, t, psi)
        worst = max(worst, out.norm - 1.0)
    return CheckResult("nonhermitian_norm_nonincreasing", worst < 1e-10, f"max norm excess {worst:.2e}")


def check_engines_agree() -> CheckResult:
    rng = np.random.default_rng(SEED + 7)
    p = model.SchemeOneParams.reference_point()
    worst = 0.0
    for _ in range(12):
        angles = protocol.PulseAngles(
            rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)
        )
        etas = tuple(rng.uniform(-0.3, 0.3, size=4))
        a = protocol.scheme1_run(p, angles, etas, "closed-form")
        b = protocol.scheme1_run(p, angles, etas, "effective-numeric")
        worst = max(worst, 1 - overlap_fidelity(a.final_state, b.final_state))
    return CheckResult("engines_agree", worst < 1e-8, f"max infidelity {worst:.2e}")


def check_measure_feedback() -> CheckResult:
    rng = np.random.default_rng(SEED + 8)
    p = model.SchemeOneParams.reference_point()
    worst_overlap, worst_born = 0.0, 0.0
    for _ in range(10):
        angles = protocol.PulseAngles(rng.uniform(0.1, 1.4), rng.uniform(0.1, 1.4), rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))
        final = protocol.scheme1_run(p, angles).final_state
        klm_g, _, probs = protocol.scheme1_measure_feedback(final, outcome="g")
        klm_e, _, _ = protocol.scheme1_measure_feedback(final, outcome="e")
        worst_overlap = max(worst_overlap, 1 - overlap_fidelity(klm_g, klm_e))
        worst_born = max(worst_born, abs(probs["g"] - 0.5), abs(probs["e"] - 0.5))
    ok = worst_overlap < 1e-10 and worst_born < 1e-12
    return CheckResult("measure_feedback_deterministic", ok, f"max infidelity {worst_overlap:.2e}, Born dev {worst_born:.2e}")


def check_excitation_bound() -> CheckResult:
    p = model.SchemeOneParams.reference_point()
    record = protocol.scheme1_run(p, engine="effective-numeric")
    worst = 0.0
    for state in record.states:
        for label in ("mode1", "mode2"):
            pops = state.populations(label)
            worst = max(worst, float(pops[2:].sum()))
    return CheckResult("single_excitation_bound", worst < 1e-10, f"max n>=2 population {worst:.2e}")


def check_cphase_additive() -> CheckResult:
    layout = protocol.qutrit_chain_layout(2)
    lhs = (
        protocol.cphase_ideal(0.7, layout).matrix @ protocol.cphase_ideal(-2.2, layout).matrix
    ).entries
    rhs = protocol.cphase_ideal(0.7 - 2.2, layout).matrix.entries
    dev = hilbert.max_abs_diff(lhs, rhs)
    return CheckResult("cphase_additive", dev < 1e-14, f"max deviation {dev:.2e}")


def check_chain_vs_closed_form() -> CheckResult:
    worst = 0.0
    for n in (2, 3, 4, 5):
        f = overlap_fidelity(protocol.scheme2_n_qubit(n), protocol.klm_closed_form(n).normalized())
        worst = max(worst, 1 - f)
    return CheckResult("chain_vs_closed_form", worst < 1e-9, f"max infidelity {worst:.2e}")


def check_recursion_integrity() -> CheckResult:
    worst = 0.0
    for n in (3, 4):
        prev = protocol.scheme2_n_qubit(n - 1)
        layout = protocol.qutrit_chain_layout(n)
        fresh = basis_state(SpaceLayout.of((f"scq{n}", 3)), (LVL_I,))
        mid = protocol._ig_pulse(layout, f"scq{n}", "plus").apply(tensor([prev, fresh]))
        split = np.zeros(3, dtype=complex)
        split[LVL_I] = split[LVL_G] = 1 / math.sqrt(2)
        expected = tensor([prev, StateVector(SpaceLayout.of((f"scq{n}", 3)), split)])
        worst = max(worst, 1 - overlap_fidelity(mid, expected))
    return CheckResult("recursion_integrity", worst < 1e-12, f"max infidelity {worst:.2e}")


def check_closed_vs_simulated() -> CheckResult:
    rng = np.random.default_rng(SEED + 9)
    worst = 0.0
    for _ in range(100):
        etas = tuple(rng.uniform(-0.2, 0.2, size=4))
        f_formula = analysis.fidelity_closed_form(etas)
        f_sim = analysis.fidelity_simulated(etas)
        worst = max(worst, abs(f_formula - f_sim))
    return CheckResult("closed_vs_simulated_fidelity", worst < 1e-9, f"max |dF| {worst:.2e}")


def check_fidelity_bounded() -> CheckResult:
    grid = analysis.sweep(analysis.exchange_error_grid(points=20))
    worst = float(grid.results.max())
    return CheckResult("fidelity_bounded", worst <= 1 + 1e-12, f"max F {worst:.12f}")


def check_timedep_convergence() -> CheckResult:
    layout = SpaceLayout.of(("q", 2))
    omega = 2 * math.pi * 1.3

    def h(t):
        return np.array(
            [[0.4, 0.9 * math.cos(omega * t)], [0.9 * math.cos(omega * t), -0.4]], dtype=complex
        )

    gen = evolve.TimeDependentOperator(layout, h)
    psi0 = basis_state(layout, (0,))
    duration = 2.0
    ref = evolve.propagate_timedep(gen, 0.0, duration, duration / 2**13, psi0)
    errs = []
    for k in (6, 7):
        out = evolve.propagate_timedep(gen, 0.0, duration, duration / 2**k, psi0)
        errs.append(float(np.linalg.norm(out.amplitudes - ref.amplitudes)))
    ratio = errs[0] / errs[1]
    return CheckResult("timedep_second_order", 2.5 < ratio < 6.0, f"dt-halving error ratio {ratio:.2f}")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_tensor_associative,
    check_embed_matches_kron,
    check_overlap_unitary_invariant,
    check_dicke_commutator,
    check_stark_recompute,
    check_g_eff_scaling,
    check_h_eff_jc_blocks,
    check_h_s2_excitation_conserved,
    check_jc_composition,
    check_jc_vs_exponential,
    check_pulses_unitary,
    check_nonhermitian_norm_decreasing,
    check_engines_agree,
    check_measure_feedback,
    check_excitation_bound,
    check_cphase_additive,
    check_chain_vs_closed_form,
    check_recursion_integrity,
    check_closed_vs_simulated,
    check_fidelity_bounded,
    check_timedep_convergence,
)


def run_validation_suite() -> list[CheckResult]:
    return [check() for check in CHECKS]
