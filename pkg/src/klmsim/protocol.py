"""End-to-end orchestration of both KLM-state preparation schemes.

Scheme 1 (qutrit shuttling one excitation between two ensemble modes):

    step 1  pulse (i,e), area theta0:  |i> -> cos(theta0)|i> - i e^{-i phi} sin(theta0)|e>
    step 2  exchange with mode 1, angle g*t1 = pi/2
    step 3  pulse (g,e), area theta2
    step 4  exchange with mode 2, angle g*t3 = pi/2
    step 5  exact |i> -> |e> transfer
    step 6  |g> -> (|g>-|e>)/sqrt2, |e> -> (|e>+|g>)/sqrt2
    then a qutrit measurement; a conditional sigma_z on mode 1 makes both
    outcomes yield the same two-mode KLM state.

Scheme 2 (conditional-phase-gate recursion on a qutrit chain): prepare
(|i>+|g>)/sqrt2 on a fresh qutrit, phase |gg> of the active pair by
e^{i varphi} with varphi = -3pi/2, then recombine with
|i> -> (|i>-|g>)/sqrt2, |g> -> (|i>+|g>)/sqrt2.  Decoupling of earlier
qutrits is modeled as exact (the gate is only ever built on the active
pair).  The iterative protocol is the ground truth; the closed-form coefficient
family is a derived cross-check and any mismatch is reported, never
patched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NumericalFailure, ProtocolError, RegimeViolation
from .evolve import (
    Propagator,
    jc_rotation,
    propagate_const,
    qutrit_pulse,
    step5_pulse,
    step6_hadamard,
)
from .hilbert import DenseOperator, SpaceLayout, StateVector, basis_state, tensor
from .model import SchemeOneParams, SchemeTwoParams, build_h_eff_s1, build_h_s2, scheme2_layout, stark_shifts
from .operators import LVL_E, LVL_G, LVL_I

__all__ = [
    "IDEAL_THETA0",
    "IDEAL_THETA2",
    "PulseAngles",
    "PulseStep",
    "InteractStep",
    "DecoupleStep",
    "MeasureStep",
    "FeedbackStep",
    "PulseProgram",
    "RunRecord",
    "scheme1_layout",
    "scheme1_program",
    "scheme1_run",
    "scheme1_measure_feedback",
    "cphase_ideal",
    "GateDiagnostics",
    "cphase_numeric",
    "gate_time_for_phase",
    "qutrit_chain_layout",
    "scheme2_two_qubit",
    "scheme2_n_qubit",
    "klm_closed_form",
]

#: Pulse areas that set all three state coefficients to 1/sqrt(3).
IDEAL_THETA0 = math.acos(1 / math.sqrt(3))
IDEAL_THETA2 = math.pi / 4


@dataclass(frozen=True)
class PulseAngles:
    """Pulse areas (theta = Omega * t) and phases of protocol steps 1 and 3."""

    theta0: float
    theta2: float
    phi: float = 0.0
    phi_prime: float = 0.0

    def __post_init__(self):
        for name in ("theta0", "theta2"):
            val = getattr(self, name)
            if not 0 <= val < 2 * math.pi:
                raise ValueError(f"{name} = {val} outside [0, 2*pi)")

    @classmethod
    def ideal(cls, phi: float = 0.0, phi_prime: float = 0.0) -> "PulseAngles":
        return cls(IDEAL_THETA0, IDEAL_THETA2, phi, phi_prime)


@dataclass(frozen=True)
class PulseStep:
    pair: tuple[str, str]
    theta: float
    phase: float
    duration: float
    preset: str | None = None  # "step5" / "step6" override the generic rotation


@dataclass(frozen=True)
class InteractStep:
    ensemble: int
    duration: float


@dataclass(frozen=True)
class DecoupleStep:
    pass


@dataclass(frozen=True)
class MeasureStep:
    subsystem: str
    basis: str


@dataclass(frozen=True)
class FeedbackStep:
    description: str


@dataclass(frozen=True)
class PulseProgram:
    """Declarative step sequence with the relative timing errors it was built for."""

    steps: tuple
    timing_errors: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        seen_measure = False
        for step in self.steps:
            if isinstance(step, InteractStep) and step.ensemble not in (1, 2):
                raise ValueError(f"interact step references ensemble {step.ensemble}; only 1 or 2 exist")
            if isinstance(step, MeasureStep):
                if seen_measure:
                    raise ValueError("a program may measure at most once")
                seen_measure = True
            if isinstance(step, FeedbackStep) and not seen_measure:
                raise ValueError("feedback may only follow a measurement")
        for eta in self.timing_errors:
            if eta <= -1:
                raise ValueError("timing error rates must exceed -1 (durations stay positive)")


@dataclass(frozen=True)
class RunRecord:
    """Per-step trace of a protocol run (snapshot after each executed step)."""

    step_names: tuple[str, ...]
    states: tuple[StateVector, ...]
    durations: tuple[float, ...]
    total_time: float
    outcome: str | None = None

    @property
    def final_state(self) -> StateVector:
        return self.states[-1]

    def to_report(self) -> dict:
        steps = []
        for k, name in enumerate(self.step_names):
            amps = self.states[k + 1].amplitudes
            steps.append(
                {
                    "name": name,
                    "duration_s": self.durations[k],
                    "amplitudes": [[float(a.real), float(a.imag)] for a in amps],
                }
            )
        return {
            "steps": steps,
            "total_time_s": self.total_time,
            "outcome": self.outcome,
        }


def scheme1_layout(mode_cutoff: int = 3) -> SpaceLayout:
    """(qutrit, ensemble mode 1, ensemble mode 2); cutoff = highest Fock level."""
    d = mode_cutoff + 1
    return SpaceLayout.of(("scq", 3), ("mode1", d), ("mode2", d))


def scheme1_program(
    angles: PulseAngles,
    etas: Sequence[float] = (0.0, 0.0, 0.0, 0.0),
    g_eff: float = 1.0,
    pulse_rabi: tuple[float, float] | None = None,
    step56_durations: tuple[float, float] = (0.0, 0.0),
) -> PulseProgram:
    """Build the six-step preparation program with perturbed durations.

    Timing error eta_j scales step j's duration (and hence its rotation
    angle) by (1 + eta_j).  Steps 5 and 6 are treated as instantaneous
    unless durations are supplied.
    """
    if g_eff <= 0:
        raise ValueError("g_eff must be positive to schedule the exchange steps")
    if pulse_rabi is None:
        pulse_rabi = (0.1 * g_eff, 0.1 * g_eff)
    if pulse_rabi[0] <= 0 or pulse_rabi[1] <= 0:
        raise ValueError("pulse Rabi rates must be positive")
    e0, e1, e2, e3 = (float(x) for x in etas)
    theta0 = angles.theta0 * (1 + e0)
    theta2 = angles.theta2 * (1 + e2)
    t1 = (math.pi / 2) * (1 + e1) / g_eff
    t3 = (math.pi / 2) * (1 + e3) / g_eff
    steps = (
        DecoupleStep(),
        PulseStep(("i", "e"), theta0, angles.phi, theta0 / pulse_rabi[0]),
        InteractStep(1, t1),
        DecoupleStep(),
        PulseStep(("g", "e"), theta2, angles.phi_prime, theta2 / pulse_rabi[1]),
        InteractStep(2, t3),
        PulseStep(("i", "e"), math.pi / 2, 0.0, step56_durations[0], preset="step5"),
        PulseStep(("g", "e"), math.pi / 4, 0.0, step56_durations[1], preset="step6"),
        MeasureStep("scq", "ge"),
        FeedbackStep("sigma_z on mode 1 when the qutrit is found in |e>"),
    )
    return PulseProgram(steps, (e0, e1, e2, e3))


def _step_action(step, layout: SpaceLayout, engine: str, p: SchemeOneParams, g_eff: float):
    """Propagator for a step, or a generator to exponentiate, or None (decouple)."""
    if isinstance(step, PulseStep):
        if step.preset == "step5":
            return step5_pulse(layout)
        if step.preset == "step6":
            return step6_hadamard(layout)
        return qutrit_pulse(step.pair, step.theta, step.phase, layout)
    if isinstance(step, InteractStep):
        mode_label = f"mode{step.ensemble}"
        if engine == "closed-form":
            return jc_rotation(g_eff, step.duration, layout, mode_label=mode_label)
        # effective-numeric: exponentiate the exchange generator directly
        return build_h_eff_s1(p, layout, mode_label=mode_label, interaction_picture=True)
    return None


def scheme1_run(
    p: SchemeOneParams,
    angles: PulseAngles | None = None,
    etas: Sequence[float] = (0.0, 0.0, 0.0, 0.0),
    engine: str = "closed-form",
    mode_cutoff: int = 3,
    pulse_rabi: tuple[float, float] | None = None,
    step56_durations: tuple[float, float] = (0.0, 0.0),
) -> RunRecord:
    """Run preparation steps 1-6 and return the pre-measurement trace.

    Engines: "closed-form" applies the analytic pulse/exchange rotations;
    "effective-numeric" exponentiates the resonant exchange generator for
    the interaction steps instead.  Both work in the interaction picture of
    the resonant effective model, which is the picture the step algebra is
    written in.
    """
    if engine not in ("closed-form", "effective-numeric"):
        raise ValueError(f"unknown engine {engine!r}")
    if angles is None:
        angles = PulseAngles.ideal(phi=p.phi, phi_prime=p.phi_prime)
    g_eff = stark_shifts(p).g_eff
    program = scheme1_program(angles, etas, g_eff, pulse_rabi, step56_durations)
    layout = scheme1_layout(mode_cutoff)
    state = basis_state(layout, {"scq": LVL_I, "mode1": 0, "mode2": 0})

    names, states, durations = [], [state], []
    for step in program.steps:
        if isinstance(step, (MeasureStep, FeedbackStep)):
            break
        action = _step_action(step, layout, engine, p, g_eff)
        if action is None:  # decouple: exact on/off switch, nothing evolves
            continue
        if isinstance(action, Propagator):
            state = action.apply(state)
        else:
            state = propagate_const(action, step.duration, state)
        names.append(type(step).__name__.removesuffix("Step").lower() + f"[{_step_label(step)}]")
        states.append(state)
        durations.append(float(step.duration))
    total = float(sum(durations))
    return RunRecord(tuple(names), tuple(states), tuple(durations), total)


def _step_label(step) -> str:
    if isinstance(step, PulseStep):
        return step.preset or "-".join(step.pair)
    if isinstance(step, InteractStep):
        return f"mode{step.ensemble}"
    return ""


def scheme1_measure_feedback(
    state: StateVector,
    outcome: str = "sample",
    seed: int | None = None,
) -> tuple[StateVector, str, dict[str, float]]:
    """Measure the qutrit, project, and apply the conditional phase fix.

    ``outcome`` is "g", "e", or "sample" (Born rule with the given seed,
    post-selected on the readout landing in the {g, e} pair; any residual
    |i> population -- present when the run carried timing errors -- is
    reported in the probabilities).  When the qutrit is found in |e>,
    sigma_z on mode 1's {|0>,|1>} pair makes the result identical to the
    |g> outcome, so on an error-free run both branches return the same
    two-mode KLM state.  Returns (mode state, outcome, probabilities).
    """
    layout = state.layout
    scq_pos = layout.position("scq")
    dims = layout.dims
    amps = state.amplitudes.reshape(dims)
    amps = np.moveaxis(amps, scq_pos, 0)

    probs = {
        "i": float(np.sum(np.abs(amps[LVL_I]) ** 2)),
        "g": float(np.sum(np.abs(amps[LVL_G]) ** 2)),
        "e": float(np.sum(np.abs(amps[LVL_E]) ** 2)),
    }
    p_ge = probs["g"] + probs["e"]
    if p_ge < 1e-10:
        raise ProtocolError(
            f"no {{g, e}} support to measure (P(g)+P(e) = {p_ge:.3e}): state is "
            "not a post-step-6 state, projection cannot yield a mode state"
        )
    if outcome == "sample":
        rng = np.random.default_rng(seed)
        outcome = "g" if rng.random() < probs["g"] / p_ge else "e"
    if outcome not in ("g", "e"):
        raise ValueError(f"outcome must be 'g', 'e' or 'sample', got {outcome!r}")
    p_out = probs[outcome]
    if p_out < 1e-15:
        raise ProtocolError(f"outcome {outcome!r} has zero probability")

    level = LVL_G if outcome == "g" else LVL_E
    mode_layout = SpaceLayout(tuple(s for k, s in enumerate(layout.subsystems) if k != scq_pos))
    mode_amps = (amps[level] / math.sqrt(p_out)).reshape(mode_layout.dim)
    klm = StateVector(mode_layout, mode_amps)
    if outcome == "e":
        d1 = mode_layout.dims[0]
        z = np.ones(d1)
        z[1] = -1.0  # sigma_z on the {|0>,|1>} pair of mode 1
        klm = StateVector(mode_layout, (z[:, None] * klm.amplitudes.reshape(mode_layout.dims)).reshape(-1))
    return klm, outcome, probs


def cphase_ideal(phi: float, layout: SpaceLayout, pair: tuple[str, str] | None = None) -> Propagator:
    """Diagonal conditional-phase gate: |gg> -> e^{i phi}|gg> on one qutrit pair.

    |ii>, |ig>, |gi> and every component involving |e> are untouched.  With
    ``pair`` omitted the layout must contain exactly two qutrits.
    """
    if pair is None:
        qutrits = [label for label, dim in layout.subsystems if dim == 3]
        if len(qutrits) != 2:
            raise ValueError("pair must be given unless the layout has exactly two qutrits")
        pair = (qutrits[0], qutrits[1])
    pos = (layout.position(pair[0]), layout.position(pair[1]))
    diag = np.ones(layout.dim, dtype=complex)
    for idx in range(layout.dim):
        digits = layout.unravel(idx)
        if digits[pos[0]] == LVL_G and digits[pos[1]] == LVL_G:
            diag[idx] = np.exp(1j * phi)
    return Propagator(layout, DenseOperator(layout, np.diag(diag)), 0.0)


@dataclass(frozen=True)
class GateDiagnostics:
    """Result of integrating the gate Hamiltonian over the four qubit branches."""

    entangling_phase: float
    leakage: float
    survival: float
    branch_phases: dict
    branch_leakage: dict
    branch_survival: dict
    time: float
    steps: int


def gate_time_for_phase(phi: float, p: SchemeTwoParams) -> float:
    """Invert the tunable-phase relation phi = -t |Omega|^2 / (2 (Delta + delta)).

    Takes Omega = Omega_1 (the analysis assumes equal drives on both
    qutrits).  Exact algebraic inverse: plugging the result back returns phi.
    """
    if p.Omega_1 == 0:
        raise ValueError("gate phase is undefined for zero drive amplitude")
    return -2 * phi * (p.Delta + p.delta) / abs(p.Omega_1) ** 2


def cphase_numeric(p: SchemeTwoParams, t: float, cutoff: int = 4) -> GateDiagnostics:
    """Integrate the two-qutrit gate model over the computational branches.

    Each branch |xy, 0> (x, y in {i, g}) evolves under the non-Hermitian
    gate Hamiltonian; the accumulated phase of its survival amplitude is
    tracked through dense checkpoints (unwrapped, so multiples of 2*pi are
    kept).  Reported:

    - entangling_phase: gauge-invariant combination
      phi_gg + phi_ii - phi_gi - phi_ig;
    - leakage: worst-branch population outside {computational (x) vacuum},
      measured on the normalized state;
    - survival: worst-branch squared norm (no-decay probability).

    A leakage above 0.5 means the parameters are outside the dispersive gate
    regime and raises ``RegimeViolation``.
    """
    if t < 0:
        raise ValueError("gate time must be >= 0")
    layout = scheme2_layout(cutoff)
    h = build_h_s2(p, layout)
    hnorm = float(np.linalg.norm(h.entries, 2))
    steps = int(min(8192, max(64, math.ceil(4 * hnorm * t / math.pi)))) if t > 0 else 1
    dt = t / steps
    u_dt = scipy.linalg.expm(-1j * h.entries * dt)

    comp = {"i": LVL_I, "g": LVL_G}
    phases, leakages, survivals = {}, {}, {}
    comp_indices = [
        layout.ravel((comp[x], comp[y], 0)) for x in ("i", "g") for y in ("i", "g")
    ]
    for x in ("i", "g"):
        for y in ("i", "g"):
            key = x + y
            own = layout.ravel((comp[x], comp[y], 0))
            psi = basis_state(layout, (comp[x], comp[y], 0)).amplitudes.copy()
            angles = [0.0]
            for _ in range(steps):
                psi = u_dt @ psi
                angles.append(float(np.angle(psi[own])))
            if not np.all(np.isfinite(psi)):
                raise NumericalFailure("non-finite amplitudes in gate integration")
            phases[key] = float(np.unwrap(angles)[-1])
            norm_sq = float(np.vdot(psi, psi).real)
            survivals[key] = norm_sq
            in_comp = float(sum(abs(psi[i]) ** 2 for i in comp_indices))
            leakages[key] = 1.0 - in_comp / norm_sq
    entangling = phases["gg"] + phases["ii"] - phases["gi"] - phases["ig"]
    leakage = max(leakages.values())
    survival = min(survivals.values())
    if leakage > 0.5:
        raise RegimeViolation(
            f"branch leakage {leakage:.3f} > 0.5: parameters violate the gate regime"
        )
    return GateDiagnostics(entangling, leakage, survival, phases, leakages, survivals, t, steps)


# ---------------------------------------------------------------------------
# Scheme 2: ideal-gate preparation on a qutrit chain


def qutrit_chain_layout(n: int) -> SpaceLayout:
    return SpaceLayout(tuple((f"scq{k}", 3) for k in range(1, n + 1)))


def _ig_pulse(layout: SpaceLayout, label: str, kind: str) -> Propagator:
    """The split/recombination pulses on the {|i>, |g>} pair.

    kind "plus":  |i> -> (|i>+|g>)/sqrt2  (unitary completion |g> -> (|g>-|i>)/sqrt2)
    kind "minus": |i> -> (|i>-|g>)/sqrt2, |g> -> (|i>+|g>)/sqrt2
    """
    from .hilbert import embed

    r = 1 / math.sqrt(2)
    m = np.eye(3, dtype=complex)
    if kind == "plus":
        m[LVL_I, LVL_I], m[LVL_G, LVL_I] = r, r
        m[LVL_I, LVL_G], m[LVL_G, LVL_G] = -r, r
    elif kind == "minus":
        m[LVL_I, LVL_I], m[LVL_G, LVL_I] = r, -r
        m[LVL_I, LVL_G], m[LVL_G, LVL_G] = r, r
    else:
        raise ValueError(f"unknown pulse kind {kind!r}")
    op = embed(DenseOperator(SpaceLayout.of((label, 3)), m), label, layout)
    return Propagator(layout, op, 0.0)


DEFAULT_GATE_PHASE = -3 * math.pi / 2


def scheme2_two_qubit(gate_phase: float = DEFAULT_GATE_PHASE) -> StateVector:
    """Two-qubit preparation: split both qutrits, phase |gg>, recombine qutrit 2.

    With the default gate phase the output is
    (1/(2*sqrt2)) * [2|ii> + (1+i)|gi> + (i-1)|gg>].
    """
    layout = qutrit_chain_layout(2)
    state = basis_state(layout, (LVL_I, LVL_I))
    state = _ig_pulse(layout, "scq1", "plus").apply(state)
    state = _ig_pulse(layout, "scq2", "plus").apply(state)
    state = cphase_ideal(gate_phase, layout, ("scq1", "scq2")).apply(state)
    state = _ig_pulse(layout, "scq2", "minus").apply(state)
    return state


def scheme2_n_qubit(n: int, gate_phase: float = DEFAULT_GATE_PHASE) -> StateVector:
    """Grow the chain state one qutrit at a time.

    Qutrits 1..n-1 hold the (n-1)-qubit state; the fresh qutrit n starts in
    |i>, is split, phased against qutrit n-1, and recombined.  Earlier
    qutrits are decoupled exactly (the gate acts only on the active pair).
    """
    if n < 2:
        raise ValueError("the chain state is defined for n >= 2")
    if n == 2:
        return scheme2_two_qubit(gate_phase)
    prev = scheme2_n_qubit(n - 1, gate_phase)
    layout = qutrit_chain_layout(n)
    fresh = basis_state(SpaceLayout.of((f"scq{n}", 3)), (LVL_I,))
    state = tensor([prev, fresh])
    state = _ig_pulse(layout, f"scq{n}", "plus").apply(state)
    state = cphase_ideal(gate_phase, layout, (f"scq{n-1}", f"scq{n}")).apply(state)
    state = _ig_pulse(layout, f"scq{n}", "minus").apply(state)
    return state


def klm_closed_form(n: int) -> StateVector:
    """Closed-form coefficient family over |g>^j |i>^(n-j).

    Basis convention: the leading j qutrits carry |g>.  Amplitudes follow the
    reference formulas exactly (even/odd cases differ); the norm is checked
    by the validation suite rather than silently fixed here.
    """
    if n < 2:
        raise ValueError("closed form defined for n >= 2")
    layout = qutrit_chain_layout(n)
    amps = np.zeros(layout.dim, dtype=complex)
    iunit = 1j

    def basis_index(j: int) -> int:
        digits = [LVL_G] * j + [LVL_I] * (n - j)
        return layout.ravel(digits)

    if n % 2 == 0:
        prefactor = 1 / math.sqrt(2) ** (n + 1)
        coeff = {0: complex(2 ** (n / 2))}
        for j in range(1, n):
            coeff[j] = -(2 ** (n / 2 - j + 1)) * (iunit - 1) ** (j - 2)
        coeff[n] = -(2 ** (2 - n / 2)) * iunit * (iunit - 1) ** (n - 3)
    else:
        prefactor = 1 / math.sqrt(2) ** n
        coeff = {0: complex(2 ** ((n - 1) / 2))}
        for j in range(1, n):
            coeff[j] = -(2 ** ((n + 1) / 2 - j)) * (iunit - 1) ** (j - 2)
        coeff[n] = -(2 ** ((3 - n) / 2)) * iunit * (iunit - 1) ** (n - 3)

    for j, c in coeff.items():
        amps[basis_index(j)] = prefactor * c
    return StateVector(layout, amps)
