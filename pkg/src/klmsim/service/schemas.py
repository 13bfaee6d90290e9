"""Request/response models of the simulation service.

Requests carry the same JSON shapes the config files use (so ``params`` may
be the string preset ``"reference"`` or a field map accepting the
``_x2pi_MHz`` unit suffix); semantic validation happens in the config layer.
Responses are fully resolved: every frequency in rad/s, amplitudes as
[re, im] pairs, and the resolved config plus its hash embedded for
provenance.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

ParamsInput = Union[str, dict]


class Scheme1Request(BaseModel):
    model_config = ConfigDict(extra="forbid")

    params: ParamsInput = "reference"
    angles: Optional[Union[str, dict]] = None
    etas: Optional[Union[dict, list]] = None
    engine: Literal["closed-form", "effective-numeric"] = "closed-form"
    outcome: Literal["g", "e", "sample"] = "sample"
    seed: Optional[int] = Field(None, ge=0)
    mode_cutoff: int = Field(3, ge=2, le=8)


class StepReport(BaseModel):
    name: str
    duration_s: float
    amplitudes: list[list[float]]


class Scheme1Response(BaseModel):
    resolved_params: dict
    angles: dict
    etas: dict
    engine: str
    seed: Optional[int]
    config_sha256: str
    steps: list[StepReport]
    total_time_s: float
    outcome: str
    outcome_probabilities: dict
    klm_basis: list[str]
    klm_amplitudes: list[list[float]]
    fidelity_vs_ideal: float


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: Optional[Union[str, dict]] = None
    angles: Optional[Union[str, dict]] = None


class AxisReport(BaseModel):
    name: str
    min: float
    max: float
    points: int


class SweepResponse(BaseModel):
    axis1: AxisReport
    axis2: AxisReport
    fixed: dict
    angles: dict
    values: list[list[float]]
    corners: dict
    config_sha256: str


class Scheme2Request(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(2, ge=2, le=8)
    mode: Literal["ideal-gate", "numeric-gate"] = "ideal-gate"
    gate_phase: Optional[float] = None
    gate_phase_over_pi: Optional[float] = None
    params: ParamsInput = "reference"
    gate_time_s: Optional[float] = Field(None, ge=0)
    res_cutoff: int = Field(4, ge=2, le=8)


class GateReport(BaseModel):
    entangling_phase_rad: float
    target_phase_rad: float
    gate_time_s: float
    leakage: float
    survival: float
    branch_phases: dict
    branch_leakage: dict
    branch_survival: dict
    integration_steps: int
    warnings: list[str]


class Scheme2Response(BaseModel):
    n: int
    mode: str
    gate_phase_rad: float
    basis_labels: list[str]
    amplitudes: list[list[float]]
    closed_form_overlap: float
    closed_form_norm: float
    discrepancy: Optional[dict]
    gate: Optional[GateReport]
    config_sha256: str
    resolved_params: Optional[dict]


class ValidationCheck(BaseModel):
    name: str
    passed: bool
    detail: str


class ValidationResponse(BaseModel):
    checks: list[ValidationCheck]
    all_passed: bool


class FeasibilityRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    params1: ParamsInput = "reference"
    params2: ParamsInput = "reference"
    pulse_duration_ns: float = Field(4.0, ge=0)


class FeasibilityResponse(BaseModel):
    report: dict
    config_sha256: str


class ErrorBody(BaseModel):
    kind: Literal["config", "numeric", "regime", "protocol"]
    message: str
    key: Optional[str] = None
