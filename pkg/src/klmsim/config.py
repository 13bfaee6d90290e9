"""Run-configuration parsing: JSON configs -> resolved physical parameters.

Frequencies may be given directly in rad/s under their field name, or in
the "2pi x MHz" convenience unit by appending ``_x2pi_MHz`` to the field
name (value is multiplied by 2*pi*1e6).  Parsing is strict: unknown or
missing keys produce a :class:`ConfigError` naming the offending key, and
nothing runs on a partially valid config.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Mapping

from .analysis import SweepAxis, SweepGridSpec, TimingErrors
from .errors import ConfigError
from .model import SchemeOneParams, SchemeTwoParams, two_pi_mhz
from .protocol import DEFAULT_GATE_PHASE, PulseAngles

__all__ = [
    "load_config_file",
    "parse_scheme_one_params",
    "parse_scheme_two_params",
    "parse_angles",
    "parse_etas",
    "parse_grid_spec",
    "canonical_json",
    "config_sha256",
    "resolved_scheme_one",
    "resolved_scheme_two",
]

UNIT_SUFFIX = "_x2pi_MHz"

SCHEME_ONE_FREQS = ("omega_s", "omega_d", "omega_m", "omega_c", "Omega", "g_s", "g_m")
SCHEME_TWO_FREQS = (
    "omega_e",
    "omega_g",
    "omega_c",
    "omega_d",
    "Omega_1",
    "Omega_2",
    "g_1",
    "g_2",
    "Gamma_1",
    "Gamma_2",
    "kappa",
)


def load_config_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return raw


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {key!r} must be a number, got {value!r}", key=key)
    return float(value)


def _take_frequency(obj: Mapping[str, Any], field: str, seen: set[str]) -> float:
    plain = field in obj
    suffixed = field + UNIT_SUFFIX in obj
    if plain and suffixed:
        raise ConfigError(
            f"config gives {field!r} both directly and as {field + UNIT_SUFFIX!r}", key=field
        )
    if plain:
        seen.add(field)
        return _number(obj[field], field)
    if suffixed:
        seen.add(field + UNIT_SUFFIX)
        return two_pi_mhz(_number(obj[field + UNIT_SUFFIX], field + UNIT_SUFFIX))
    raise ConfigError(f"missing required parameter {field!r}", key=field)


def _reject_unknown(obj: Mapping[str, Any], seen: set[str], context: str):
    unknown = sorted(set(obj) - seen)
    if unknown:
        raise ConfigError(f"unknown {context} key {unknown[0]!r}", key=unknown[0])


def parse_scheme_one_params(obj: Any) -> SchemeOneParams:
    if obj == "reference":
        return SchemeOneParams.reference_point()
    if not isinstance(obj, Mapping):
        raise ConfigError("params must be an object or the string 'reference'", key="params")
    seen: set[str] = set()
    freqs = {f: _take_frequency(obj, f, seen) for f in SCHEME_ONE_FREQS}
    if "N" not in obj:
        raise ConfigError("missing required parameter 'N'", key="N")
    seen.add("N")
    n = obj["N"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigError("config key 'N' must be an integer", key="N")
    phases = {}
    for name in ("phi", "phi_prime"):
        if name in obj:
            seen.add(name)
            phases[name] = _number(obj[name], name)
    _reject_unknown(obj, seen, "scheme-one parameter")
    try:
        return SchemeOneParams(**freqs, N=n, **phases)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_scheme_two_params(obj: Any) -> SchemeTwoParams:
    if obj == "reference":
        return SchemeTwoParams.reference_point()
    if not isinstance(obj, Mapping):
        raise ConfigError("params must be an object or the string 'reference'", key="params")
    seen: set[str] = set()
    freqs = {f: _take_frequency(obj, f, seen) for f in SCHEME_TWO_FREQS}
    _reject_unknown(obj, seen, "scheme-two parameter")
    try:
        return SchemeTwoParams(**freqs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_angles(obj: Any) -> PulseAngles | None:
    if obj is None or obj == "ideal":
        return None
    if not isinstance(obj, Mapping):
        raise ConfigError("angles must be an object or the string 'ideal'", key="angles")
    seen = set()
    values = {}
    for name in ("theta0", "theta2", "phi", "phi_prime"):
        if name in obj:
            seen.add(name)
            values[name] = _number(obj[name], name)
    _reject_unknown(obj, seen, "angles")
    for required in ("theta0", "theta2"):
        if required not in values:
            raise ConfigError(f"angles require {required!r}", key=required)
    try:
        return PulseAngles(**values)
    except ValueError as exc:
        raise ConfigError(str(exc), key="angles") from exc


def parse_etas(obj: Any) -> TimingErrors:
    if obj is None:
        return TimingErrors()
    try:
        if isinstance(obj, Mapping):
            seen = set()
            values = {}
            for k, name in enumerate(("eta0", "eta1", "eta2", "eta3")):
                if name in obj:
                    seen.add(name)
                    values[f"eta_{k}"] = _number(obj[name], name)
            _reject_unknown(obj, seen, "etas")
            return TimingErrors(**values)
        if isinstance(obj, (list, tuple)) and len(obj) == 4:
            return TimingErrors(*(_number(v, "etas") for v in obj))
    except ValueError as exc:
        raise ConfigError(str(exc), key="etas") from exc
    raise ConfigError("etas must be a 4-list or an object with eta0..eta3", key="etas")


def _parse_axis(obj: Any, key: str) -> SweepAxis:
    if not isinstance(obj, Mapping):
        raise ConfigError(f"{key} must be an object with name/min/max/points", key=key)
    seen = set()
    for field in ("name", "min", "max", "points"):
        if field not in obj:
            raise ConfigError(f"{key} is missing {field!r}", key=field)
        seen.add(field)
    _reject_unknown(obj, seen, key)
    points = obj["points"]
    if isinstance(points, bool) or not isinstance(points, int) or points < 1:
        raise ConfigError(f"{key}.points must be a positive integer", key="points")
    try:
        return SweepAxis(str(obj["name"]), _number(obj["min"], "min"), _number(obj["max"], "max"), points)
    except ValueError as exc:
        raise ConfigError(str(exc), key=key) from exc


def parse_grid_spec(obj: Any, angles: PulseAngles | None = None) -> SweepGridSpec:
    from .analysis import exchange_error_grid, combined_error_grid

    if obj is None or obj == "exchange-errors":
        return exchange_error_grid()
    if obj == "combined-errors":
        return combined_error_grid()
    if not isinstance(obj, Mapping):
        raise ConfigError("grid must be an object or one of 'exchange-errors', 'combined-errors'", key="grid")
    seen = {"axis1", "axis2"}
    for key in ("axis1", "axis2"):
        if key not in obj:
            raise ConfigError(f"grid is missing {key!r}", key=key)
    axis1 = _parse_axis(obj["axis1"], "axis1")
    axis2 = _parse_axis(obj["axis2"], "axis2")
    fixed = {}
    if "fixed" in obj:
        seen.add("fixed")
        if not isinstance(obj["fixed"], Mapping):
            raise ConfigError("grid.fixed must be an object", key="fixed")
        fixed = {str(k): _number(v, k) for k, v in obj["fixed"].items()}
    _reject_unknown(obj, seen, "grid")
    try:
        return SweepGridSpec(axis1, axis2, fixed, angles)
    except ValueError as exc:
        raise ConfigError(str(exc), key="grid") from exc


def parse_gate_phase(raw: Mapping[str, Any]) -> float:
    if "gate_phase" in raw and "gate_phase_over_pi" in raw:
        raise ConfigError("give gate_phase or gate_phase_over_pi, not both", key="gate_phase")
    if "gate_phase" in raw:
        return _number(raw["gate_phase"], "gate_phase")
    if "gate_phase_over_pi" in raw:
        return _number(raw["gate_phase_over_pi"], "gate_phase_over_pi") * math.pi
    return DEFAULT_GATE_PHASE


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_sha256(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()


def resolved_scheme_one(p: SchemeOneParams) -> dict:
    """Fully resolved parameters in rad/s, embedded in reports for provenance."""
    return {
        "omega_s": p.omega_s,
        "omega_d": p.omega_d,
        "omega_m": p.omega_m,
        "omega_c": p.omega_c,
        "Omega": p.Omega,
        "g_s": p.g_s,
        "g_m": p.g_m,
        "N": p.N,
        "phi": p.phi,
        "phi_prime": p.phi_prime,
    }


def resolved_scheme_two(p: SchemeTwoParams) -> dict:
    return {
        "omega_e": p.omega_e,
        "omega_g": p.omega_g,
        "omega_c": p.omega_c,
        "omega_d": p.omega_d,
        "Omega_1": p.Omega_1,
        "Omega_2": p.Omega_2,
        "g_1": p.g_1,
        "g_2": p.g_2,
        "Gamma_1": p.Gamma_1,
        "Gamma_2": p.Gamma_2,
        "kappa": p.kappa,
    }
