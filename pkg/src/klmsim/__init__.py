"""klmsim: desk-scale simulator for KLM-state preparation with superconducting qutrits.

Core modules:

- ``hilbert``    composite-space bookkeeping and dense linear algebra
- ``model``      physical parameters, Stark shifts, Hamiltonian builders
- ``evolve``     propagators and closed-form pulse/exchange rotations
- ``protocol``   both preparation schemes end to end
- ``analysis``   timing-error fidelity, sweeps, feasibility report
- ``validation`` the built-in invariant suite
- ``service``    FastAPI wrapper; ``cli`` is a thin client of it
"""

__version__ = "0.1.0"

from .analysis import (
    SweepAxis,
    SweepGrid,
    SweepGridSpec,
    TimingErrors,
    feasibility_report,
    fidelity_closed_form,
    fidelity_simulated,
    sweep,
    timing_budget_s1,
)
from .hilbert import (
    DenseOperator,
    SpaceLayout,
    StateVector,
    basis_state,
    commutator,
    embed,
    overlap_fidelity,
    tensor,
)
from .model import (
    SchemeOneParams,
    SchemeTwoParams,
    StarkShifts,
    build_h_eff_s1,
    build_h_full_s1,
    build_h_s2,
    collective_spin_ops,
    resonance_residual,
    solve_drive_omega,
    stark_shifts,
    two_pi_mhz,
)
from .protocol import (
    PulseAngles,
    RunRecord,
    cphase_ideal,
    cphase_numeric,
    gate_time_for_phase,
    klm_closed_form,
    scheme1_measure_feedback,
    scheme1_run,
    scheme2_n_qubit,
    scheme2_two_qubit,
)

__all__ = [
    "__version__",
    "SpaceLayout",
    "StateVector",
    "DenseOperator",
    "basis_state",
    "tensor",
    "embed",
    "overlap_fidelity",
    "commutator",
    "SchemeOneParams",
    "SchemeTwoParams",
    "StarkShifts",
    "stark_shifts",
    "resonance_residual",
    "solve_drive_omega",
    "collective_spin_ops",
    "build_h_full_s1",
    "build_h_eff_s1",
    "build_h_s2",
    "two_pi_mhz",
    "PulseAngles",
    "RunRecord",
    "scheme1_run",
    "scheme1_measure_feedback",
    "cphase_ideal",
    "cphase_numeric",
    "gate_time_for_phase",
    "scheme2_two_qubit",
    "scheme2_n_qubit",
    "klm_closed_form",
    "TimingErrors",
    "fidelity_closed_form",
    "fidelity_simulated",
    "SweepAxis",
    "SweepGridSpec",
    "SweepGrid",
    "sweep",
    "timing_budget_s1",
    "feasibility_report",
]
