"""Time evolution: exact propagators, fixed-step integration, and the
closed-form rotations the state-preparation protocol is written in.

Two propagation paths exist on purpose.  ``propagate_const`` handles any
constant generator (eigendecomposition when Hermitian, scaling-and-squaring
otherwise); ``propagate_timedep`` is the midpoint-rule oracle for
time-parameterized generators.  The closed-form unitaries (``jc_rotation``
and the microwave-pulse rotations) implement the exchange oscillations

    |e, n>   -> cos(g sqrt(n+1) t)|e, n>   - i sin(g sqrt(n+1) t)|g, n+1>
    |g, n+1> -> cos(g sqrt(n+1) t)|g, n+1> - i sin(g sqrt(n+1) t)|e, n>

with the common dynamical phase dropped, which is the convention the
protocol algebra assumes.  The full (phase-carrying) evolution is available
through ``propagate_const`` for oracle comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import NumericalFailure
from .hilbert import DenseOperator, SpaceLayout, StateVector, is_hermitian
from .operators import LVL_E, LVL_G, level_index, two_level_rotation

__all__ = [
    "Propagator",
    "TimeDependentOperator",
    "expm_generator",
    "propagate_const",
    "propagate_timedep",
    "default_timestep",
    "jc_rotation",
    "qutrit_pulse",
    "step5_pulse",
    "step6_hadamard",
]

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class Propagator:
    """A fixed evolution operator with its physical duration."""

    layout: SpaceLayout
    matrix: DenseOperator
    duration: float

    def __post_init__(self):
        if self.matrix.layout != self.layout:
            raise ValueError("propagator matrix layout differs from declared layout")

    def apply(self, state: StateVector) -> StateVector:
        return self.matrix.apply(state)

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        u = self.matrix.entries
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) < tol


@dataclass(frozen=True)
class TimeDependentOperator:
    """Time-parameterized generator ``t -> H(t)`` over a fixed layout."""

    layout: SpaceLayout
    func: Callable[[float], np.ndarray]

    def matrix_at(self, t: float) -> np.ndarray:
        return np.asarray(self.func(t), dtype=complex)

    def __call__(self, t: float) -> DenseOperator:
        return DenseOperator(self.layout, self.matrix_at(t))


def expm_generator(h: np.ndarray, t: float, hermitian: bool | None = None) -> np.ndarray:
    """exp(-i H t) for a constant generator H.

    Hermitian generators go through an eigendecomposition; general ones
    through scipy's scaling-and-squaring exponential.
    """
    if hermitian is None:
        hermitian = is_hermitian(h)
    if hermitian:
        evals, vecs = scipy.linalg.eigh(h)
        return (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T
    return scipy.linalg.expm(-1j * h * t)


def propagate_const(h: DenseOperator, t: float, psi: StateVector) -> StateVector:
    """Evolve ``psi`` under the constant generator ``h`` for time ``t``.

    For a non-Hermitian generator the result is *not* renormalized: its
    squared norm is the survival probability, and normalization is an
    explicit, separate call.
    """
    if h.layout != psi.layout:
        raise ValueError("generator and state layouts differ")
    if t < 0:
        raise ValueError("propagation time must be >= 0")
    u = expm_generator(h.entries, t, hermitian=h.hermitian_hint or None)
    out = u @ psi.amplitudes
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("non-finite amplitudes after constant propagation")
    return StateVector(psi.layout, out)


def default_timestep(omega_max: float, duration: float) -> float:
    """Midpoint-rule step: resolve the fastest angular scale, bounded count."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    dt = duration / 1e3
    if omega_max > 0:
        dt = min(dt, 2 * math.pi / omega_max / 50)
    return dt


def propagate_timedep(
    h_of_t: TimeDependentOperator,
    t0: float,
    t1: float,
    dt: float,
    psi: StateVector,
) -> StateVector:
    """Second-order midpoint stepping: psi <- exp(-i H(t + dt/2) dt) psi.

    The final step is truncated to land exactly on ``t1``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if h_of_t.layout != psi.layout:
        raise ValueError("generator and state layouts differ")
    amps = psi.amplitudes.copy()
    t = t0
    while t < t1 - 1e-15 * max(1.0, abs(t1)):
        step = min(dt, t1 - t)
        h_mid = h_of_t.matrix_at(t + step / 2)
        amps = expm_generator(h_mid, step) @ amps
        t += step
    if not np.all(np.isfinite(amps)):
        raise NumericalFailure("non-finite amplitudes during time-dependent propagation")
    return StateVector(psi.layout, amps)


def jc_rotation(
    g_eff: float,
    t: float,
    layout: SpaceLayout,
    scq_label: str = "scq",
    mode_label: str = "mode",
) -> Propagator:
    """Resonant exchange rotation between the qutrit and one mode.

    Block-diagonal over the pairs {|e, n>, |g, n+1>} with mixing angle
    ``g_eff * sqrt(n+1) * t``; |i, n> and |g, 0> are untouched.  The common
    phase factor is dropped.
    """
    scq_pos = layout.position(scq_label)
    mode_pos = layout.position(mode_label)
    mode_dim = layout.dims[mode_pos]
    u = np.eye(layout.dim, dtype=complex)
    for idx in range(layout.dim):
        digits = list(layout.unravel(idx))
        if digits[scq_pos] != LVL_E or digits[mode_pos] + 1 >= mode_dim:
            continue
        n = digits[mode_pos]
        partner = digits.copy()
        partner[scq_pos] = LVL_G
        partner[mode_pos] = n + 1
        jdx = layout.ravel(partner)
        angle = g_eff * math.sqrt(n + 1) * t
        c, s = math.cos(angle), math.sin(angle)
        u[idx, idx] = c
        u[jdx, jdx] = c
        u[jdx, idx] = -1j * s
        u[idx, jdx] = -1j * s
    return Propagator(layout, DenseOperator(layout, u), abs(t))


def _qutrit_unitary(layout: SpaceLayout, scq_label: str, m3: np.ndarray) -> DenseOperator:
    from .hilbert import embed

    op = DenseOperator(SpaceLayout.of((scq_label, 3)), m3)
    return embed(op, scq_label, layout)


def qutrit_pulse(
    pair: tuple,
    theta: float,
    phase: float,
    layout: SpaceLayout,
    scq_label: str = "scq",
) -> Propagator:
    """Classical-microwave rotation on one qutrit level pair.

    ``pair`` names two distinct levels out of {"i", "g", "e"}; acting as

        |u> -> cos(theta)|u> - i e^{-i phase} sin(theta)|v>
        |v> -> cos(theta)|v> - i e^{+i phase} sin(theta)|u>

    and as the identity on the third level and all other subsystems.  The
    pulse area theta = Omega * t_pulse is supplied by the caller.
    """
    u_lvl, v_lvl = (level_index(x) for x in pair)
    if u_lvl == v_lvl:
        raise ValueError("pulse levels must be distinct")
    m3 = two_level_rotation(3, u_lvl, v_lvl, theta, phase)
    return Propagator(layout, _qutrit_unitary(layout, scq_label, m3), 0.0)


def step5_pulse(layout: SpaceLayout, scq_label: str = "scq") -> Propagator:
    """Exact |i> -> |e| transfer with no stray -i on the stated branch.

    The unitary completion sends |e> -> -|i>, so any leftover excited
    amplitude exits the {|g>, |e>} manifold instead of interfering with it.
    """
    m3 = np.eye(3, dtype=complex)
    m3[LVL_E, 0] = 1.0  # |i> -> |e>
    m3[0, 0] = 0.0
    m3[0, LVL_E] = -1.0  # |e> -> -|i>
    m3[LVL_E, LVL_E] = 0.0
    return Propagator(layout, _qutrit_unitary(layout, scq_label, m3), 0.0)


def step6_hadamard(layout: SpaceLayout, scq_label: str = "scq") -> Propagator:
    """|g> -> (|g> - |e>)/sqrt2, |e> -> (|e> + |g>)/sqrt2 on the qutrit."""
    r = 1 / math.sqrt(2)
    m3 = np.eye(3, dtype=complex)
    m3[LVL_G, LVL_G] = r
    m3[LVL_E, LVL_G] = -r
    m3[LVL_G, LVL_E] = r
    m3[LVL_E, LVL_E] = r
    return Propagator(layout, _qutrit_unitary(layout, scq_label, m3), 0.0)
