"""Physical parameters, derived couplings, and Hamiltonian construction.

Scheme 1 couples a charge qutrit to a polar-molecule collective mode through
a transmission-line resonator.  In the dispersive regime the resonator is
only virtually populated and the dynamics reduces to a resonant exchange
model with Stark-shifted levels:

    H_eff = (2*lam_sd + lam_sc)/2 * sigma_z
            + g_eff (sigma_+ b + sigma_- b†) + N*lam_mc b†b

    lam_sd = Omega^2/Delta_d      lam_sc = g_s^2/Delta_s
    lam_mc = g_m^2/Delta_m        lam_sm = (g_m g_s/2)(1/Delta_m + 1/Delta_s)
    g_eff  = sqrt(N) * lam_sm

with the resonance condition 2*lam_sd + lam_sc = N*lam_mc.

Scheme 2 puts two such qutrits in one resonator with a shared classical
drive; decay enters as the non-Hermitian terms -i*Gamma_j/2 |e><e|_j and
-i*kappa a†a, and the 1/2 factors sit on the drive and coupling sums.

All frequencies are angular (rad/s).  The config layer converts the
"2pi x MHz" convenience unit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .evolve import TimeDependentOperator
from .hilbert import DenseOperator, SpaceLayout, is_hermitian
from .operators import (
    annihilation,
    creation,
    number_op,
    projector,
    sigma_minus,
    sigma_plus,
    sigma_z,
)

__all__ = [
    "two_pi_mhz",
    "SchemeOneParams",
    "SchemeTwoParams",
    "StarkShifts",
    "stark_shifts",
    "resonance_residual",
    "solve_drive_omega",
    "CollectiveOps",
    "collective_spin_ops",
    "scheme1_full_layout",
    "scheme1_eff_layout",
    "scheme2_layout",
    "build_h_full_s1",
    "build_h_eff_s1",
    "build_h_s2",
]

#: Ratio below which a dispersive-validity flag turns into a warning.
DISPERSIVE_RATIO = 10.0


def two_pi_mhz(value: float) -> float:
    """Convert a frequency quoted as ``2*pi x MHz`` to rad/s."""
    return 2 * math.pi * 1e6 * value


def _warn_ratio(name: str, big: float, small: float):
    if small > 0 and abs(big) < DISPERSIVE_RATIO * small:
        warnings.warn(
            f"dispersive validity marginal: |{name}| = {abs(big):.4g} < "
            f"{DISPERSIVE_RATIO:g} x {small:.4g}",
            stacklevel=3,
        )


@dataclass(frozen=True)
class SchemeOneParams:
    """Inputs of the driven qutrit / resonator / ensemble model.

    omega_s, omega_m, omega_c, omega_d : qutrit, molecule, resonator and
    drive angular frequencies; Omega the drive Rabi rate; g_s, g_m the
    qutrit- and molecule-resonator couplings; N the molecules per ensemble;
    phi, phi_prime the pulse phases of protocol steps 1 and 3.
    """

    omega_s: float
    omega_d: float
    omega_m: float
    omega_c: float
    Omega: float
    g_s: float
    g_m: float
    N: int
    phi: float = 0.0
    phi_prime: float = 0.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be a positive integer")
        _warn_ratio("Delta_s", self.delta_s, abs(self.g_s))
        _warn_ratio("Delta_m", self.delta_m, abs(self.g_m))
        _warn_ratio("Delta_d", self.delta_d, abs(self.Omega))

    @property
    def delta_s(self) -> float:
        return self.omega_s - self.omega_c

    @property
    def delta_m(self) -> float:
        return self.omega_m - self.omega_c

    @property
    def delta_d(self) -> float:
        return self.omega_s - self.omega_d

    def validity_flags(self) -> dict:
        def flag(big, small):
            return {
                "ratio": abs(big) / small if small > 0 else math.inf,
                "ok": small == 0 or abs(big) >= DISPERSIVE_RATIO * small,
            }

        return {
            "delta_s_vs_g_s": flag(self.delta_s, abs(self.g_s)),
            "delta_m_vs_g_m": flag(self.delta_m, abs(self.g_m)),
            "delta_d_vs_Omega": flag(self.delta_d, abs(self.Omega)),
        }

    @classmethod
    def reference_point(cls, Omega: float = 0.0, omega_c: float | None = None) -> "SchemeOneParams":
        """Reference working point: g_s = 2pi x 75 MHz,
        g_m = 2pi x 20 MHz, Delta_s = 2pi x 750 MHz, Delta_m = 2pi x 500 MHz,
        N = 1e4.  The drive defaults to off (its working point is left open);
        the drive frequency sits at the resonator so Delta_d = Delta_s != 0.
        """
        wc = two_pi_mhz(6000.0) if omega_c is None else omega_c
        return cls(
            omega_s=wc + two_pi_mhz(750.0),
            omega_d=wc,
            omega_m=wc + two_pi_mhz(500.0),
            omega_c=wc,
            Omega=Omega,
            g_s=two_pi_mhz(75.0),
            g_m=two_pi_mhz(20.0),
            N=10_000,
        )


@dataclass(frozen=True)
class SchemeTwoParams:
    """Inputs of the two-qutrit conditional-phase-gate model (decay included)."""

    omega_e: float
    omega_g: float
    omega_c: float
    omega_d: float
    Omega_1: float
    Omega_2: float
    g_1: float
    g_2: float
    Gamma_1: float
    Gamma_2: float
    kappa: float

    def __post_init__(self):
        if self.Gamma_1 < 0 or self.Gamma_2 < 0 or self.kappa < 0:
            raise ValueError("decay rates must be non-negative")
        for j, (g, om) in enumerate([(self.g_1, self.Omega_1), (self.g_2, self.Omega_2)], 1):
            _warn_ratio("Delta", self.Delta, abs(g))
            _warn_ratio("Delta", self.Delta, abs(om))
            _warn_ratio("Delta", self.Delta, self.kappa)
            _warn_ratio("Delta", self.Delta, getattr(self, f"Gamma_{j}"))

    @property
    def Delta(self) -> float:
        """Resonator detuning from the qutrit transition: omega_c - (omega_e - omega_g)."""
        return self.omega_c - (self.omega_e - self.omega_g)

    @property
    def delta(self) -> float:
        """Drive detuning from the resonator: omega_d - omega_c."""
        return self.omega_d - self.omega_c

    def validity_flags(self) -> dict:
        def ratio_flag(num, den):
            r = abs(num) / den if den > 0 else math.inf
            return {"ratio": r, "ok": r >= DISPERSIVE_RATIO}

        g = min(abs(self.g_1), abs(self.g_2))
        om = max(abs(self.Omega_1), abs(self.Omega_2))
        gam = max(self.Gamma_1, self.Gamma_2)
        return {
            "Delta_vs_Gamma": ratio_flag(self.Delta, gam),
            "Delta_vs_kappa": ratio_flag(self.Delta, self.kappa),
            "Delta_vs_Omega": ratio_flag(self.Delta, om),
            "Delta_vs_g": ratio_flag(self.Delta, g),
            "delta_small": {
                "ratio": abs(self.delta) / abs(self.Delta) if self.Delta else math.inf,
                "ok": abs(self.delta) <= abs(self.Delta) / DISPERSIVE_RATIO,
            },
            "g_exceeds_Omega": {"ratio": g / om if om else math.inf, "ok": g > om},
            "g2_vs_Gamma_kappa": ratio_flag(g**2, gam * self.kappa if gam * self.kappa else 0.0),
        }

    @classmethod
    def reference_point(cls, omega_eg: float | None = None) -> "SchemeTwoParams":
        """Reference gate working point: (Delta, g, Omega, kappa, Gamma) =
        2pi x (400, 75, 30, 0.008, 0.0064) MHz with delta = 0."""
        weg = two_pi_mhz(5000.0) if omega_eg is None else omega_eg
        wc = weg + two_pi_mhz(400.0)
        return cls(
            omega_e=weg,
            omega_g=0.0,
            omega_c=wc,
            omega_d=wc,
            Omega_1=two_pi_mhz(30.0),
            Omega_2=two_pi_mhz(30.0),
            g_1=two_pi_mhz(75.0),
            g_2=two_pi_mhz(75.0),
            Gamma_1=two_pi_mhz(0.0064),
            Gamma_2=two_pi_mhz(0.0064),
            kappa=two_pi_mhz(0.008),
        )


@dataclass(frozen=True)
class StarkShifts:
    """Derived level shifts and the ensemble-enhanced exchange coupling."""

    lambda_sd: float
    lambda_sc: float
    lambda_mc: float
    lambda_sm: float
    g_eff: float


def _require_detunings(p: SchemeOneParams):
    if p.delta_d == 0 or p.delta_s == 0 or p.delta_m == 0:
        raise ValueError("all detunings (Delta_d, Delta_s, Delta_m) must be nonzero")


def stark_shifts(p: SchemeOneParams) -> StarkShifts:
    """Compute every shift from its defining formula (exact arithmetic)."""
    _require_detunings(p)
    lam_sd = p.Omega**2 / p.delta_d
    lam_sc = p.g_s**2 / p.delta_s
    lam_mc = p.g_m**2 / p.delta_m
    lam_sm = (p.g_m * p.g_s / 2) * (1 / p.delta_m + 1 / p.delta_s)
    return StarkShifts(lam_sd, lam_sc, lam_mc, lam_sm, math.sqrt(p.N) * lam_sm)


def resonance_residual(p: SchemeOneParams) -> float:
    """``2*lam_sd + lam_sc - N*lam_mc``; zero means the exchange is resonant."""
    s = stark_shifts(p)
    return 2 * s.lambda_sd + s.lambda_sc - p.N * s.lambda_mc


def solve_drive_omega(p: SchemeOneParams) -> float:
    """Drive Rabi rate making the resonance condition exact at p's detunings.

    Inverts 2*Omega^2/Delta_d + lam_sc = N*lam_mc; raises when the required
    Omega^2 would be negative.
    """
    s = stark_shifts(p)
    omega_sq = p.delta_d * (p.N * s.lambda_mc - s.lambda_sc) / 2
    if omega_sq < 0:
        raise ValueError("no real drive amplitude satisfies the resonance condition here")
    return math.sqrt(omega_sq)


class CollectiveOps(NamedTuple):
    S_plus: DenseOperator
    S_minus: DenseOperator
    S_z: DenseOperator
    n_b: DenseOperator
    b: DenseOperator
    b_dagger: DenseOperator


def collective_spin_ops(N: int, excitation_cutoff: int, label: str = "dicke") -> CollectiveOps:
    """Exact collective-spin operators on the symmetric (Dicke) subspace.

    The subspace is spanned by |n> for n = 0..excitation_cutoff excitations,
    with S+|n> = sqrt((n+1)(N-n)) |n+1> and b = S-/sqrt(N).  With cutoff = N
    the ladder closes and [b, b†] = 1 - (2/N) n_b holds exactly; a lower
    cutoff truncates the top rung.
    """
    if not 1 <= excitation_cutoff <= N:
        raise ValueError("need 1 <= excitation_cutoff <= N")
    dim = excitation_cutoff + 1
    layout = SpaceLayout.of((label, dim))
    sp = np.zeros((dim, dim), dtype=complex)
    for n in range(dim - 1):
        sp[n + 1, n] = math.sqrt((n + 1) * (N - n))
    sm = sp.conj().T
    sz = np.diag([2 * n - N for n in range(dim)]).astype(complex)
    nb = np.diag(np.arange(dim, dtype=float)).astype(complex)
    root_n = math.sqrt(N)
    return CollectiveOps(
        S_plus=DenseOperator(layout, sp),
        S_minus=DenseOperator(layout, sm),
        S_z=DenseOperator(layout, sz, hermitian_hint=True),
        n_b=DenseOperator(layout, nb, hermitian_hint=True),
        b=DenseOperator(layout, sm / root_n),
        b_dagger=DenseOperator(layout, sp / root_n),
    )


def scheme1_full_layout(res_cutoff: int = 4, mode_cutoff: int = 3) -> SpaceLayout:
    """Lab-frame layout (scq, res, mode); cutoffs are the highest Fock level kept."""
    return SpaceLayout.of(("scq", 3), ("res", res_cutoff + 1), ("mode", mode_cutoff + 1))


def scheme1_eff_layout(mode_cutoff: int = 3) -> SpaceLayout:
    return SpaceLayout.of(("scq", 3), ("mode", mode_cutoff + 1))


def scheme2_layout(res_cutoff: int = 4) -> SpaceLayout:
    return SpaceLayout.of(("scq1", 3), ("scq2", 3), ("res", res_cutoff + 1))


def _embedded(m: np.ndarray, label: str, layout: SpaceLayout) -> np.ndarray:
    from .hilbert import embed

    return embed(DenseOperator(SpaceLayout.of((label, m.shape[0])), m), label, layout).entries


def build_h_full_s1(p: SchemeOneParams, layout: SpaceLayout, frame: str = "lab"):
    """Full driven Hamiltonian of the qutrit + resonator + bosonized ensemble.

    Lab frame returns a time-parameterized Hermitian generator whose drive
    term carries e^{+-i omega_d t}; the drive-rotating frame removes the time
    dependence by shifting every excitation-carrying subsystem by omega_d.
    The ensemble mode is the low-excitation bosonic limit of the collective
    spin, entering with the sqrt(N)-enhanced coupling.
    """
    for needed in ("scq", "res", "mode"):
        layout.position(needed)  # raises on a missing subsystem
    res_dim = layout.dim_of("res")
    mode_dim = layout.dim_of("mode")

    sz = _embedded(sigma_z(), "scq", layout)
    sp = _embedded(sigma_plus(), "scq", layout)
    sm = _embedded(sigma_minus(), "scq", layout)
    pe = _embedded(projector("e"), "scq", layout)
    a = _embedded(annihilation(res_dim), "res", layout)
    ad = _embedded(creation(res_dim), "res", layout)
    na = _embedded(number_op(res_dim), "res", layout)
    b = _embedded(annihilation(mode_dim), "mode", layout)
    bd = _embedded(creation(mode_dim), "mode", layout)
    nb = _embedded(number_op(mode_dim), "mode", layout)

    coupling = p.g_s * (sp @ a + sm @ ad) + math.sqrt(p.N) * p.g_m * (bd @ a + b @ ad)
    static = (p.omega_s / 2) * sz + p.omega_m * nb + p.omega_c * na + coupling

    if frame == "lab":
        def h_of_t(t: float) -> np.ndarray:
            drive = p.Omega * (sm * np.exp(1j * p.omega_d * t) + sp * np.exp(-1j * p.omega_d * t))
            return static + drive

        return TimeDependentOperator(layout, h_of_t)
    if frame == "drive-rotating":
        n_exc = pe + na + nb
        h = static + p.Omega * (sp + sm) - p.omega_d * n_exc
        return DenseOperator(layout, h, hermitian_hint=True)
    raise ValueError(f"unknown frame {frame!r}; expected 'lab' or 'drive-rotating'")


def build_h_eff_s1(
    p: SchemeOneParams,
    layout: SpaceLayout,
    mode_label: str = "mode",
    interaction_picture: bool = False,
) -> DenseOperator:
    """Dispersive-limit exchange Hamiltonian on (qutrit, ensemble mode).

    With ``interaction_picture=True`` the Stark-shift/detuning terms are
    rotated away and only the exchange coupling g_eff (sigma_+ b + h.c.)
    remains -- exactly the picture the closed-form protocol rotations live
    in when the resonance condition holds.
    """
    s = stark_shifts(p)
    mode_dim = layout.dim_of(mode_label)
    sp = _embedded(sigma_plus(), "scq", layout)
    sm = _embedded(sigma_minus(), "scq", layout)
    b = _embedded(annihilation(mode_dim), mode_label, layout)
    bd = _embedded(creation(mode_dim), mode_label, layout)
    h = s.g_eff * (sp @ b + sm @ bd)
    if not interaction_picture:
        sz = _embedded(sigma_z(), "scq", layout)
        nb = _embedded(number_op(mode_dim), mode_label, layout)
        h = h + 0.5 * (2 * s.lambda_sd + s.lambda_sc) * sz + p.N * s.lambda_mc * nb
    return DenseOperator(layout, h, hermitian_hint=True)


def build_h_s2(p: SchemeTwoParams, layout: SpaceLayout, frame: str = "drive-rotating") -> DenseOperator:
    """Two-qutrit gate Hamiltonian in the drive-rotating frame (non-Hermitian).

    Decay enters as -i Gamma_j/2 on |e><e|_j and -i kappa on a†a; the 1/2
    factors sit on the drive and coupling sums.  |i> levels
    have no matrix elements at all.
    """
    if frame != "drive-rotating":
        raise ValueError("build_h_s2 is defined in the drive-rotating frame only")
    res_dim = layout.dim_of("res")
    a = _embedded(annihilation(res_dim), "res", layout)
    ad = _embedded(creation(res_dim), "res", layout)
    na = _embedded(number_op(res_dim), "res", layout)

    h = (p.omega_c - p.omega_d - 1j * p.kappa) * na
    for label, om, g, gamma in [
        ("scq1", p.Omega_1, p.g_1, p.Gamma_1),
        ("scq2", p.Omega_2, p.g_2, p.Gamma_2),
    ]:
        pe = _embedded(projector("e"), label, layout)
        pg = _embedded(projector("g"), label, layout)
        sp = _embedded(sigma_plus(), label, layout)
        sm = _embedded(sigma_minus(), label, layout)
        h = h + (p.omega_e - p.omega_d - 1j * gamma / 2) * pe + p.omega_g * pg
        h = h + 0.5 * (om * sp + np.conj(om) * sm)
        h = h + 0.5 * (g * (sp @ a) + np.conj(g) * (sm @ ad))
    return DenseOperator(layout, h, hermitian_hint=bool(is_hermitian(h)))
