"""Fidelity under timing errors, sweep grids, and the feasibility calculator.

The closed-form fidelity compares the ideal pre-measurement state (target
coefficients alpha, beta, gamma) against the run with every step-j duration
scaled by (1 + eta_j):

    F = |alpha* alpha' + beta* beta' + gamma* gamma'|^2

    alpha' = cos[theta0 (1+eta0)]
    beta'  = e^{-i phi} sin[theta0 (1+eta0)] sin[gt1 (1+eta1)] cos[theta2 (1+eta2)]
    gamma' = e^{-i (phi+phi')} sin[theta0 (1+eta0)] sin[gt1 (1+eta1)]
             sin[theta2 (1+eta2)] sin[gt3 (1+eta3)]

Note the asymmetric roles: the first exchange error eta1 enters both beta'
and gamma', the second (eta3) only gamma'.  This formula is exact for the
closed-form engine (leftover excited amplitude is parked in |i> by step 5,
orthogonal to the target), which `fidelity_simulated` verifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .hilbert import overlap_fidelity
from .model import (
    SchemeOneParams,
    SchemeTwoParams,
    resonance_residual,
    stark_shifts,
    two_pi_mhz,
)
from .protocol import PulseAngles, gate_time_for_phase, scheme1_run

__all__ = [
    "TimingErrors",
    "fidelity_closed_form",
    "fidelity_simulated",
    "SweepAxis",
    "SweepGridSpec",
    "SweepGrid",
    "sweep",
    "exchange_error_grid",
    "combined_error_grid",
    "timing_budget_s1",
    "feasibility_report",
]

ETA_NAMES = ("eta0", "eta1", "eta2", "eta3")


@dataclass(frozen=True)
class TimingErrors:
    """Relative duration errors eta_j = dt_j / t_j of protocol steps 0..3."""

    eta_0: float = 0.0
    eta_1: float = 0.0
    eta_2: float = 0.0
    eta_3: float = 0.0

    def __post_init__(self):
        for name in ("eta_0", "eta_1", "eta_2", "eta_3"):
            if getattr(self, name) <= -1:
                raise ValueError(f"{name} must exceed -1 so durations stay positive")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.eta_0, self.eta_1, self.eta_2, self.eta_3)

    @classmethod
    def from_any(cls, etas) -> "TimingErrors":
        if isinstance(etas, TimingErrors):
            return etas
        if isinstance(etas, Mapping):
            clean = {k.replace("eta", "eta_").replace("eta__", "eta_"): v for k, v in etas.items()}
            return cls(**clean)
        return cls(*etas)


def fidelity_closed_form(
    etas,
    angles: PulseAngles | None = None,
    g_t1: float = math.pi / 2,
    g_t3: float = math.pi / 2,
) -> float:
    """Evaluate the timing-error fidelity formula directly."""
    e = TimingErrors.from_any(etas)
    a = angles if angles is not None else PulseAngles.ideal()

    alpha = math.cos(a.theta0)
    beta = math.sin(a.theta0) * math.cos(a.theta2)
    gamma = math.sin(a.theta0) * math.sin(a.theta2)

    s0 = math.sin(a.theta0 * (1 + e.eta_0))
    alpha_p = math.cos(a.theta0 * (1 + e.eta_0))
    s1 = math.sin(g_t1 * (1 + e.eta_1))
    beta_p = s0 * s1 * math.cos(a.theta2 * (1 + e.eta_2))
    gamma_p = s0 * s1 * math.sin(a.theta2 * (1 + e.eta_2)) * math.sin(g_t3 * (1 + e.eta_3))

    # the e^{-i phi} factors cancel between target and perturbed coefficients
    return abs(alpha * alpha_p + beta * beta_p + gamma * gamma_p) ** 2


def fidelity_simulated(
    etas,
    angles: PulseAngles | None = None,
    p: SchemeOneParams | None = None,
    engine: str = "closed-form",
    mode_cutoff: int = 3,
) -> float:
    """Overlap of the perturbed protocol run against its eta = 0 reference.

    Equals :func:`fidelity_closed_form` to within floating-point noise for
    the closed-form engine.
    """
    e = TimingErrors.from_any(etas)
    if p is None:
        p = SchemeOneParams.reference_point()
    ideal = scheme1_run(p, angles, (0.0, 0.0, 0.0, 0.0), engine, mode_cutoff)
    perturbed = scheme1_run(p, angles, e.as_tuple(), engine, mode_cutoff)
    return overlap_fidelity(ideal.final_state, perturbed.final_state)


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.name not in ETA_NAMES:
            raise ValueError(f"axis name {self.name!r} must be one of {ETA_NAMES}")
        if self.points < 1:
            raise ValueError("axis needs at least one point")

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepGridSpec:
    axis1: SweepAxis
    axis2: SweepAxis
    fixed: Mapping[str, float] = field(default_factory=dict)
    angles: PulseAngles | None = None

    def __post_init__(self):
        if self.axis1.name == self.axis2.name:
            raise ValueError("the two sweep axes must differ")
        for key in self.fixed:
            if key not in ETA_NAMES:
                raise ValueError(f"fixed key {key!r} must be one of {ETA_NAMES}")
            if key in (self.axis1.name, self.axis2.name):
                raise ValueError(f"fixed key {key!r} collides with a sweep axis")


@dataclass(frozen=True)
class SweepGrid:
    """Fidelity surface, row-major with axis1 as the outer (row) axis."""

    spec: SweepGridSpec
    results: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.results, dtype=float)
        expected = (self.spec.axis1.points, self.spec.axis2.points)
        if arr.shape != expected:
            raise ValueError(f"results shape {arr.shape} != {expected}")
        if arr.size and (arr.min() < -1e-12 or arr.max() > 1 + 1e-12):
            raise ValueError("fidelities must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "results", arr)

    def corners(self) -> dict:
        r = self.results
        return {
            "origin": float(r[0, 0]),
            "axis1_max": float(r[-1, 0]),
            "axis2_max": float(r[0, -1]),
            "both_max": float(r[-1, -1]),
        }

    def to_csv(self) -> str:
        """Full-precision CSV (header; '.' decimal separator; LF endings)."""
        v1 = self.spec.axis1.values()
        v2 = self.spec.axis2.values()
        lines = [f"{self.spec.axis1.name},{self.spec.axis2.name},fidelity"]
        for i, x in enumerate(v1):
            for j, y in enumerate(v2):
                lines.append(f"{float(x)!r},{float(y)!r},{float(self.results[i, j])!r}")
        return "\n".join(lines) + "\n"


def sweep(spec: SweepGridSpec) -> SweepGrid:
    """Fill the grid by direct formula evaluation (points are independent)."""
    v1 = spec.axis1.values()
    v2 = spec.axis2.values()
    base = {name: float(spec.fixed.get(name, 0.0)) for name in ETA_NAMES}
    results = np.empty((spec.axis1.points, spec.axis2.points))
    for i, x in enumerate(v1):
        for j, y in enumerate(v2):
            etas = dict(base)
            etas[spec.axis1.name] = float(x)
            etas[spec.axis2.name] = float(y)
            results[i, j] = fidelity_closed_form(
                TimingErrors(etas["eta0"], etas["eta1"], etas["eta2"], etas["eta3"]),
                spec.angles,
            )
    return SweepGrid(spec, results)


def exchange_error_grid(points: int = 101) -> SweepGridSpec:
    """Exchange-error surface with perfect pulse timing (eta0 = eta2 = 0)."""
    return SweepGridSpec(
        SweepAxis("eta1", 0.0, 0.1, points),
        SweepAxis("eta3", 0.0, 0.1, points),
        fixed={"eta0": 0.0, "eta2": 0.0},
    )


def combined_error_grid(points: int = 101) -> SweepGridSpec:
    """Same surface with 10% pulse-timing errors held fixed (eta0 = eta2 = 0.1)."""
    return SweepGridSpec(
        SweepAxis("eta1", 0.0, 0.1, points),
        SweepAxis("eta3", 0.0, 0.1, points),
        fixed={"eta0": 0.1, "eta2": 0.1},
    )


def timing_budget_s1(
    p: SchemeOneParams,
    pulse_rabi: tuple[float, float] | None = None,
    step56_durations: tuple[float, float] = (0.0, 0.0),
) -> dict:
    """Per-step durations at the ideal pulse areas.

    t0 = arccos(1/sqrt3)/Omega', t1 = t3 = pi/(2 g_eff), t2 = (pi/4)/Omega'';
    steps 5-6 count as instantaneous unless durations are supplied.
    """
    g = stark_shifts(p).g_eff
    if g <= 0:
        raise ValueError("g_eff must be positive")
    if pulse_rabi is None:
        pulse_rabi = (0.1 * g, 0.1 * g)
    if pulse_rabi[0] <= 0 or pulse_rabi[1] <= 0:
        raise ValueError("pulse Rabi rates must be positive")
    t0 = math.acos(1 / math.sqrt(3)) / pulse_rabi[0]
    t1 = math.pi / (2 * g)
    t2 = (math.pi / 4) / pulse_rabi[1]
    t3 = math.pi / (2 * g)
    t5, t6 = step56_durations
    return {
        "t0": t0,
        "t1": t1,
        "t2": t2,
        "t3": t3,
        "step5": float(t5),
        "step6": float(t6),
        "total": t0 + t1 + t2 + t3 + t5 + t6,
    }


def _as_2pi_mhz(value: float) -> float:
    return value / two_pi_mhz(1.0)


def feasibility_report(
    p1: SchemeOneParams | None = None,
    p2: SchemeTwoParams | None = None,
    gamma_scq: float = two_pi_mhz(0.032),
    gamma_molecule: float = 2 * math.pi * 700.0,
    pulse_duration: float = 4e-9,
    gate_phase: float = -3 * math.pi / 2,
    n_qubit_examples: Sequence[int] = (2, 3, 5),
) -> dict:
    """Assemble the working-point report for both schemes.

    Reference rounded values appear side by side with the recomputed
    full-precision ones.  The two-qubit total assumes the two initial
    single-qutrit pulses share one 4 ns slot and the recombination pulse
    takes another, i.e. total = gate time + 2 x pulse_duration per stage.
    """
    p1 = p1 if p1 is not None else SchemeOneParams.reference_point()
    p2 = p2 if p2 is not None else SchemeTwoParams.reference_point()

    s = stark_shifts(p1)
    budget = timing_budget_s1(p1)
    gate_time = gate_time_for_phase(gate_phase, p2)
    stage_time = gate_time + 2 * pulse_duration
    scheme1 = {
        "inputs_two_pi_MHz": {
            "g_s": _as_2pi_mhz(p1.g_s),
            "g_m": _as_2pi_mhz(p1.g_m),
            "Delta_s": _as_2pi_mhz(p1.delta_s),
            "Delta_m": _as_2pi_mhz(p1.delta_m),
            "Omega": _as_2pi_mhz(p1.Omega),
        },
        "N": p1.N,
        "stark_shifts_two_pi_MHz": {
            "lambda_sd": _as_2pi_mhz(s.lambda_sd),
            "lambda_sc": _as_2pi_mhz(s.lambda_sc),
            "lambda_mc": _as_2pi_mhz(s.lambda_mc),
            "lambda_sm": _as_2pi_mhz(s.lambda_sm),
        },
        "g_eff_rad_s": s.g_eff,
        "g_eff_two_pi_MHz": _as_2pi_mhz(s.g_eff),
        "g_eff_reference_two_pi_MHz": 250.0,
        "resonance_residual_two_pi_MHz": _as_2pi_mhz(resonance_residual(p1)),
        "decoherence": {
            "gamma_scq_two_pi_MHz": _as_2pi_mhz(gamma_scq),
            "gamma_scq_over_g_eff": gamma_scq / s.g_eff,
            "gamma_molecule_two_pi_MHz": _as_2pi_mhz(gamma_molecule),
            "gamma_molecule_over_g_eff": gamma_molecule / s.g_eff,
        },
        "dispersive_flags": p1.validity_flags(),
        "timing_budget_ns": {k: v * 1e9 for k, v in budget.items()},
        "total_bound_reference_ns": 29.0,
        "within_reference_bound": budget["total"] * 1e9 < 29.0,
    }

    g_min = min(abs(p2.g_1), abs(p2.g_2))
    scheme2 = {
        "inputs_two_pi_MHz": {
            "Delta": _as_2pi_mhz(p2.Delta),
            "delta": _as_2pi_mhz(p2.delta),
            "Omega_1": _as_2pi_mhz(p2.Omega_1),
            "Omega_2": _as_2pi_mhz(p2.Omega_2),
            "g_1": _as_2pi_mhz(p2.g_1),
            "g_2": _as_2pi_mhz(p2.g_2),
            "kappa": _as_2pi_mhz(p2.kappa),
            "Gamma_1": _as_2pi_mhz(p2.Gamma_1),
            "Gamma_2": _as_2pi_mhz(p2.Gamma_2),
        },
        "validity_flags": p2.validity_flags(),
        "decay_ratios": {
            "kappa_over_g": p2.kappa / g_min,
            "Gamma_over_g": max(p2.Gamma_1, p2.Gamma_2) / g_min,
        },
        "gate_phase_rad": gate_phase,
        "gate_time_us": gate_time * 1e6,
        "gate_time_reference_us": 0.666,
        "pulse_duration_assumed_ns": pulse_duration * 1e9,
        "two_qubit_total_us": stage_time * 1e6,
        "two_qubit_total_reference_us": 0.674,
        "n_qubit_total_us": {
            "per_stage_us": stage_time * 1e6,
            "reference_formula": "0.674 * (N - 1)",
            "examples": {
                str(n): {
                    "computed_us": stage_time * 1e6 * (n - 1),
                    "reference_us": 0.674 * (n - 1),
                }
                for n in n_qubit_examples
            },
        },
    }
    return {"scheme1": scheme1, "scheme2": scheme2}
