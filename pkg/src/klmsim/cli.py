"""Command-line front end: a thin client of the simulation service.

By default each subcommand talks to an in-process instance of the service
(no network, nothing to start); ``--server URL`` points it at a remote one
instead.  Outputs are deterministic functions of (config bytes, seed):
reports are canonical JSON (sorted keys), CSV uses full-precision repr
floats with LF line endings.

Exit codes (frozen for CI): 0 success, 1 validation-suite failure,
2 config error, 3 numerical failure, 4 regime violation.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from .errors import ConfigError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_REGIME = 4

SCHEME1_KEYS = {"scheme", "params", "angles", "etas", "engine", "outcome", "seed", "mode_cutoff"}
SWEEP_KEYS = {"scheme", "grid", "angles"}
SCHEME2_KEYS = {
    "scheme",
    "n",
    "mode",
    "engine",
    "gate_phase",
    "gate_phase_over_pi",
    "params",
    "gate_time_s",
    "gate_time_us",
    "res_cutoff",
}
REPORT_KEYS = {"params1", "params2", "pulse_duration_ns"}


def _load_config(args, allowed: set[str], expected_scheme: str | None) -> dict:
    from .config import load_config_file

    raw = load_config_file(args.config) if args.config else {}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"config key {key!r} does not apply to this subcommand", key=key)
    scheme = raw.get("scheme")
    if expected_scheme and scheme is not None and scheme != expected_scheme:
        raise ConfigError(f"config is for scheme {scheme!r}, not {expected_scheme!r}", key="scheme")
    return raw


def _post(args, path: str, payload: dict) -> httpx.Response:
    if getattr(args, "server", None):
        with httpx.Client(base_url=args.server, timeout=600.0) as client:
            return client.post(path, json=payload)

    async def _go() -> httpx.Response:
        from .service import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://klmsim.internal", timeout=600.0
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(_go())


def _handle_error(resp: httpx.Response) -> int:
    try:
        body = resp.json()
    except ValueError:
        body = {}
    err = body.get("error")
    if err:
        key = f" (key: {err['key']})" if err.get("key") else ""
        print(f"error [{err['kind']}]: {err['message']}{key}", file=sys.stderr)
        return {
            "config": EXIT_CONFIG,
            "regime": EXIT_REGIME,
            "numeric": EXIT_NUMERIC,
            "protocol": EXIT_NUMERIC,
        }[err["kind"]]
    if resp.status_code == 422:
        # pydantic envelope validation: name the offending location
        details = body.get("detail", [])
        names = ", ".join("".join(str(x) for x in d.get("loc", [])[1:]) or "?" for d in details)
        print(f"error [config]: invalid request field(s): {names}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"error: service returned HTTP {resp.status_code}: {resp.text[:500]}", file=sys.stderr)
    return EXIT_NUMERIC


def _dump_json(payload: dict, out: str | None):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _render_sweep_csv(report: dict) -> str:
    import numpy as np

    ax1, ax2 = report["axis1"], report["axis2"]

    def axis_values(ax):
        if ax["points"] == 1:
            return [ax["min"]]
        return list(np.linspace(ax["min"], ax["max"], ax["points"]))

    lines = [f"{ax1['name']},{ax2['name']},fidelity"]
    for x, row in zip(axis_values(ax1), report["values"]):
        for y, f in zip(axis_values(ax2), row):
            lines.append(f"{float(x)!r},{float(y)!r},{float(f)!r}")
    return "\n".join(lines) + "\n"


def cmd_scheme1(args) -> int:
    raw = _load_config(args, SCHEME1_KEYS, "one")
    payload = {k: raw[k] for k in raw if k != "scheme"}
    if args.engine:
        if args.engine not in ("closed-form", "effective-numeric"):
            raise ConfigError(f"engine {args.engine!r} does not apply to scheme1", key="engine")
        payload["engine"] = args.engine
    if args.seed is not None:
        payload["seed"] = args.seed
    resp = _post(args, "/v1/scheme1", payload)
    if resp.status_code != 200:
        return _handle_error(resp)
    report = resp.json()
    _dump_json(report, args.out)
    if args.csv:
        lines = ["step,index,re,im"]
        for step in report["steps"]:
            for idx, (re, im) in enumerate(step["amplitudes"]):
                lines.append(f"{step['name']},{idx},{float(re)!r},{float(im)!r}")
        Path(args.csv).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    raw = _load_config(args, SWEEP_KEYS, "one")
    payload = {k: raw[k] for k in raw if k != "scheme"}
    resp = _post(args, "/v1/sweep", payload)
    if resp.status_code != 200:
        return _handle_error(resp)
    report = resp.json()
    csv_text = _render_sweep_csv(report)
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text)
        sidecar = out.with_suffix(".json") if out.suffix != ".json" else out.with_suffix(".meta.json")
        _dump_json(
            {
                "config_sha256": report["config_sha256"],
                "corners": report["corners"],
                "axis1": report["axis1"],
                "axis2": report["axis2"],
                "fixed": report["fixed"],
                "csv_path": out.name,
            },
            str(sidecar),
        )
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def cmd_scheme2(args) -> int:
    raw = _load_config(args, SCHEME2_KEYS, "two")
    payload = {k: raw[k] for k in raw if k != "scheme"}
    if "gate_time_us" in payload:
        payload["gate_time_s"] = float(payload.pop("gate_time_us")) * 1e-6
    if args.engine:
        if args.engine not in ("ideal-gate", "numeric-gate"):
            raise ConfigError(f"engine {args.engine!r} does not apply to scheme2", key="engine")
        payload["mode"] = args.engine
    if args.n is not None:
        payload["n"] = args.n
    if payload.get("n", 2) < 2:
        raise ConfigError("n must be at least 2", key="n")
    resp = _post(args, "/v1/scheme2", payload)
    if resp.status_code != 200:
        return _handle_error(resp)
    _dump_json(resp.json(), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    resp = _post(args, "/v1/validate", {})
    if resp.status_code != 200:
        return _handle_error(resp)
    report = resp.json()
    width = max(len(c["name"]) for c in report["checks"])
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{check['name']:<{width}}  {status}  {check['detail']}")
    if args.out:
        _dump_json(report, args.out)
    return EXIT_OK if report["all_passed"] else EXIT_VALIDATION


def cmd_report(args) -> int:
    raw = _load_config(args, REPORT_KEYS, None)
    resp = _post(args, "/v1/report", raw)
    if resp.status_code != 200:
        return _handle_error(resp)
    _dump_json(resp.json(), args.out)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klmsim",
        description="KLM-state preparation simulator (thin client of the klmsim service)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, engine=False):
        sp.add_argument("--config", help="JSON run config")
        sp.add_argument("--seed", type=int, help="measurement sampling seed (overrides config)")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--server", help="remote service URL (default: in-process)")
        if engine:
            sp.add_argument(
                "--engine",
                choices=["closed-form", "effective-numeric", "ideal-gate", "numeric-gate"],
            )

    sp = sub.add_parser("scheme1", help="run the six-step preparation + measurement")
    common(sp, engine=True)
    sp.add_argument("--csv", help="also write per-step amplitudes as CSV")
    sp.set_defaults(func=cmd_scheme1)

    sp = sub.add_parser("sweep", help="timing-error fidelity surface (CSV + JSON sidecar)")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("scheme2", help="chain preparation / gate diagnostics")
    common(sp, engine=True)
    sp.add_argument("--n", type=int, help="number of qubits (>= 2)")
    sp.set_defaults(func=cmd_scheme2)

    sp = sub.add_parser("validate", help="run the built-in invariant suite")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("report", help="feasibility working-point report")
    common(sp)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("serve", help="run the service with uvicorn")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        key = f" (key: {exc.key})" if exc.key else ""
        print(f"error [config]: {exc}{key}", file=sys.stderr)
        return EXIT_CONFIG
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
