"""FastAPI service wrapping the simulation package.

Endpoints mirror the CLI subcommands:

    POST /v1/scheme1   run the six-step preparation + measurement
    POST /v1/scheme2   chain preparation (ideal gate) and gate diagnostics
    POST /v1/sweep     timing-error fidelity surface
    POST /v1/validate  run the built-in invariant suite
    POST /v1/report    feasibility working-point report
    GET  /v1/health

Domain errors map onto HTTP statuses the thin CLI translates into its exit
codes: config 422, regime violation 409, numerical/protocol failure 500.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..analysis import feasibility_report, sweep
from ..config import (
    config_sha256,
    parse_angles,
    parse_etas,
    parse_grid_spec,
    parse_scheme_one_params,
    parse_scheme_two_params,
    resolved_scheme_one,
    resolved_scheme_two,
)
from ..errors import ConfigError, NumericalFailure, ProtocolError, RegimeViolation
from ..hilbert import overlap_fidelity
from ..protocol import (
    DEFAULT_GATE_PHASE,
    PulseAngles,
    cphase_numeric,
    gate_time_for_phase,
    klm_closed_form,
    scheme1_measure_feedback,
    scheme1_run,
    scheme2_n_qubit,
)
from ..validation import run_validation_suite
from . import schemas

LEVEL_LETTERS = "ige"


def _amp_pairs(amps) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in amps]


def _angles_dict(angles) -> dict:
    return {
        "theta0": angles.theta0,
        "theta2": angles.theta2,
        "phi": angles.phi,
        "phi_prime": angles.phi_prime,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="klmsim", version=__version__)

    @app.exception_handler(ConfigError)
    async def _config_error(_: Request, exc: ConfigError):
        body = schemas.ErrorBody(kind="config", message=str(exc), key=exc.key)
        return JSONResponse(status_code=422, content={"error": body.model_dump()})

    @app.exception_handler(RegimeViolation)
    async def _regime_error(_: Request, exc: RegimeViolation):
        body = schemas.ErrorBody(kind="regime", message=str(exc))
        return JSONResponse(status_code=409, content={"error": body.model_dump()})

    @app.exception_handler(NumericalFailure)
    async def _numeric_error(_: Request, exc: NumericalFailure):
        body = schemas.ErrorBody(kind="numeric", message=str(exc))
        return JSONResponse(status_code=500, content={"error": body.model_dump()})

    @app.exception_handler(ProtocolError)
    async def _protocol_error(_: Request, exc: ProtocolError):
        body = schemas.ErrorBody(kind="protocol", message=str(exc))
        return JSONResponse(status_code=500, content={"error": body.model_dump()})

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/scheme1", response_model=schemas.Scheme1Response)
    def run_scheme1(req: schemas.Scheme1Request) -> schemas.Scheme1Response:
        p = parse_scheme_one_params(req.params)
        angles = parse_angles(req.angles)
        etas = parse_etas(req.etas)
        try:
            record = scheme1_run(p, angles, etas.as_tuple(), req.engine, req.mode_cutoff)
            ideal = scheme1_run(p, angles, (0.0, 0.0, 0.0, 0.0), req.engine, req.mode_cutoff)
            klm, outcome, probs = scheme1_measure_feedback(
                record.final_state, req.outcome, req.seed
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        resolved = resolved_scheme_one(p)
        used_angles = angles if angles is not None else PulseAngles.ideal(p.phi, p.phi_prime)
        payload = {
            "params": resolved,
            "angles": _angles_dict(used_angles),
            "etas": dict(zip(("eta0", "eta1", "eta2", "eta3"), etas.as_tuple())),
            "engine": req.engine,
            "outcome": req.outcome,
            "seed": req.seed,
            "mode_cutoff": req.mode_cutoff,
        }
        report = record.to_report()
        d1, d2 = klm.layout.dims
        return schemas.Scheme1Response(
            resolved_params=resolved,
            angles=payload["angles"],
            etas=payload["etas"],
            engine=req.engine,
            seed=req.seed,
            config_sha256=config_sha256(payload),
            steps=[schemas.StepReport(**s) for s in report["steps"]],
            total_time_s=report["total_time_s"],
            outcome=outcome,
            outcome_probabilities=probs,
            klm_basis=[f"{n1},{n2}" for n1 in range(d1) for n2 in range(d2)],
            klm_amplitudes=_amp_pairs(klm.amplitudes),
            fidelity_vs_ideal=overlap_fidelity(ideal.final_state, record.final_state),
        )

    @app.post("/v1/sweep", response_model=schemas.SweepResponse)
    def run_sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
        angles = parse_angles(req.angles)
        spec = parse_grid_spec(req.grid, angles)
        grid = sweep(spec)
        used_angles = _angles_dict(angles if angles is not None else PulseAngles.ideal())
        payload = {
            "axis1": [spec.axis1.name, spec.axis1.start, spec.axis1.stop, spec.axis1.points],
            "axis2": [spec.axis2.name, spec.axis2.start, spec.axis2.stop, spec.axis2.points],
            "fixed": dict(spec.fixed),
            "angles": used_angles,
        }
        return schemas.SweepResponse(
            axis1=schemas.AxisReport(
                name=spec.axis1.name, min=spec.axis1.start, max=spec.axis1.stop, points=spec.axis1.points
            ),
            axis2=schemas.AxisReport(
                name=spec.axis2.name, min=spec.axis2.start, max=spec.axis2.stop, points=spec.axis2.points
            ),
            fixed=dict(spec.fixed),
            angles=used_angles,
            values=[[float(v) for v in row] for row in grid.results],
            corners=grid.corners(),
            config_sha256=config_sha256(payload),
        )

    @app.post("/v1/scheme2", response_model=schemas.Scheme2Response)
    def run_scheme2(req: schemas.Scheme2Request) -> schemas.Scheme2Response:
        if req.gate_phase is not None and req.gate_phase_over_pi is not None:
            raise ConfigError("give gate_phase or gate_phase_over_pi, not both", key="gate_phase")
        gate_phase = DEFAULT_GATE_PHASE
        if req.gate_phase is not None:
            gate_phase = req.gate_phase
        elif req.gate_phase_over_pi is not None:
            gate_phase = req.gate_phase_over_pi * math.pi

        state = scheme2_n_qubit(req.n, gate_phase)
        closed = klm_closed_form(req.n)
        overlap = overlap_fidelity(state, closed.normalized())
        discrepancy = None
        if overlap < 1 - 1e-9:
            discrepancy = {
                "overlap": overlap,
                "protocol_amplitudes": _amp_pairs(state.amplitudes),
                "closed_form_amplitudes": _amp_pairs(closed.amplitudes),
                "note": "iterative protocol output is the reference",
            }

        gate = None
        resolved = None
        if req.mode == "numeric-gate":
            p2 = parse_scheme_two_params(req.params)
            resolved = resolved_scheme_two(p2)
            gate_time = req.gate_time_s
            if gate_time is None:
                try:
                    gate_time = gate_time_for_phase(gate_phase, p2)
                except ValueError as exc:
                    raise ConfigError(str(exc), key="gate_time_s") from exc
            diag = cphase_numeric(p2, gate_time, req.res_cutoff)
            warnings = []
            if abs(diag.entangling_phase - gate_phase) > 0.1 * abs(gate_phase):
                warnings.append(
                    "entangling phase deviates from the target by more than 10%: the bare "
                    "two-qutrit model does not reproduce the selective conditional phase on "
                    "its own (single-branch drive shifts cancel in the invariant combination)"
                )
            if diag.leakage >= 0.1:
                warnings.append(f"leakage {diag.leakage:.3f} >= 0.1")
            if diag.survival <= 0.95:
                warnings.append(f"survival {diag.survival:.3f} <= 0.95")
            gate = schemas.GateReport(
                entangling_phase_rad=diag.entangling_phase,
                target_phase_rad=gate_phase,
                gate_time_s=gate_time,
                leakage=diag.leakage,
                survival=diag.survival,
                branch_phases=diag.branch_phases,
                branch_leakage=diag.branch_leakage,
                branch_survival=diag.branch_survival,
                integration_steps=diag.steps,
                warnings=warnings,
            )

        payload = {
            "n": req.n,
            "mode": req.mode,
            "gate_phase": gate_phase,
            "params": resolved,
            "gate_time_s": req.gate_time_s,
            "res_cutoff": req.res_cutoff,
        }
        labels = []
        for idx in range(state.layout.dim):
            digits = state.layout.unravel(idx)
            labels.append("".join(LEVEL_LETTERS[d] for d in digits))
        return schemas.Scheme2Response(
            n=req.n,
            mode=req.mode,
            gate_phase_rad=gate_phase,
            basis_labels=labels,
            amplitudes=_amp_pairs(state.amplitudes),
            closed_form_overlap=overlap,
            closed_form_norm=closed.norm,
            discrepancy=discrepancy,
            gate=gate,
            config_sha256=config_sha256(payload),
            resolved_params=resolved,
        )

    @app.post("/v1/validate", response_model=schemas.ValidationResponse)
    def run_validate() -> schemas.ValidationResponse:
        results = run_validation_suite()
        return schemas.ValidationResponse(
            checks=[
                schemas.ValidationCheck(name=r.name, passed=r.passed, detail=r.detail)
                for r in results
            ],
            all_passed=all(r.passed for r in results),
        )

    @app.post("/v1/report", response_model=schemas.FeasibilityResponse)
    def run_report(req: schemas.FeasibilityRequest) -> schemas.FeasibilityResponse:
        p1 = parse_scheme_one_params(req.params1)
        p2 = parse_scheme_two_params(req.params2)
        report = feasibility_report(p1, p2, pulse_duration=req.pulse_duration_ns * 1e-9)
        payload = {
            "params1": resolved_scheme_one(p1),
            "params2": resolved_scheme_two(p2),
            "pulse_duration_ns": req.pulse_duration_ns,
        }
        return schemas.FeasibilityResponse(report=report, config_sha256=config_sha256(payload))

    return app
