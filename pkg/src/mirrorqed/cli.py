"""Command-line interface.

Every subcommand runs the same job layer the HTTP service exposes; --server
swaps the in-process call for a POST to a running instance, and the output
files are identical either way. Exit codes: 0 success, 2 configuration
problem, 3 numerical failure, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx
from pydantic import ValidationError

from . import __version__
from .config import RunConfig, load_config
from .errors import LinearityViolation, MirrorqedError
from .results_io import (
    write_spectrum_csv,
    write_spectrum_json,
    write_sweep_csv,
    write_sweep_json,
)
from .service import (
    CalibratePayload,
    OracleCheckPayload,
    SpectrumPayload,
    SweepPayload,
    payload_to_spectrum,
    payload_to_sweep,
    run_calibrate,
    run_oracle_check,
    run_spectrum,
    run_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4


class _CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _load(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        cfg = RunConfig()
    else:
        try:
            cfg = load_config(args.config)
        except FileNotFoundError:
            raise _CliError(EXIT_CONFIG, f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise _CliError(EXIT_CONFIG, f"config is not valid JSON: {exc}")
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(p) for p in first["loc"])
            raise _CliError(EXIT_CONFIG, f"config field '{field}': {first['msg']}")
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out is not None:
        overrides["path"] = str(args.out)
    if args.format is not None:
        overrides["format"] = args.format
    if overrides:
        cfg = cfg.model_copy(
            update={"output": cfg.output.model_copy(update=overrides)}
        )
    return cfg


def _remote(server: str, endpoint: str, cfg: RunConfig) -> dict:
    url = server.rstrip("/") + endpoint
    resp = httpx.post(url, json=cfg.model_dump(), timeout=600.0)
    if resp.status_code == 422:
        detail = resp.json().get("detail", "")
        if isinstance(detail, str) and detail.startswith("LinearityViolation"):
            raise _CliError(EXIT_ORACLE, detail)
        if isinstance(detail, str) and ":" in detail:
            raise _CliError(EXIT_NUMERICAL, detail)
        raise _CliError(EXIT_CONFIG, json.dumps(detail))
    resp.raise_for_status()
    return resp.json()


def _job_error(exc: Exception) -> _CliError:
    if isinstance(exc, LinearityViolation):
        return _CliError(EXIT_ORACLE, f"{type(exc).__name__}: {exc}")
    if isinstance(exc, MirrorqedError):
        return _CliError(EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}")
    return _CliError(EXIT_CONFIG, str(exc))


def _run_job(args: argparse.Namespace, cfg: RunConfig, endpoint: str, job, model):
    if args.server:
        return model.model_validate(_remote(args.server, endpoint, cfg))
    try:
        return job(cfg)
    except (MirrorqedError, ValueError) as exc:
        raise _job_error(exc)


def cmd_spectrum(args: argparse.Namespace) -> int:
    cfg = _load(args)
    payload: SpectrumPayload = _run_job(
        args, cfg, "/spectrum", run_spectrum, SpectrumPayload
    )
    print(f"min|r| = {payload.min_abs_r:.6f}")
    print(f"max|r| = {payload.max_abs_r:.6f}")
    if payload.gain_bands:
        bands = ", ".join(f"[{lo:.6f}, {hi:.6f}]" for lo, hi in payload.gain_bands)
        print(f"gain bands (|r| > 1), GHz: {bands}")
    else:
        print("gain bands (|r| > 1), GHz: none")
    if cfg.output.path is not None:
        spec = payload_to_spectrum(payload)
        if cfg.output.format == "csv":
            write_spectrum_csv(spec, cfg.output.path)
        else:
            write_spectrum_json(spec, cfg.output.path)
        print(f"wrote {cfg.output.path}")
    return EXIT_OK


def cmd_sweep2d(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if cfg.output.path is None:
        raise _CliError(
            EXIT_CONFIG, "config field 'output.path': sweep2d needs an output file"
        )
    payload: SweepPayload = _run_job(args, cfg, "/sweep2d", run_sweep, SweepPayload)
    result, overlays = payload_to_sweep(payload)
    if cfg.output.format == "csv":
        write_sweep_csv(result, cfg.output.path, overlays=overlays)
    else:
        write_sweep_json(result, cfg.output.path, overlays=overlays)
    print(
        f"{result.grid.y_values.size} x {result.grid.probe_freqs.size} map, "
        f"{len(result.errors)} failed points"
    )
    print(f"wrote {cfg.output.path}")
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    payload: CalibratePayload = _run_job(
        args, cfg, "/calibrate", run_calibrate, CalibratePayload
    )
    print(f"omega_star = {payload.omega_star:.6f} MHz")
    print(f"k = {payload.k_factor:.9e} MHz/sqrt(W)")
    print(f"max gain = {payload.max_gain:.6f} at {payload.target_dbm:.1f} dBm")
    if cfg.output.path is not None:
        Path(cfg.output.path).write_text(
            json.dumps(payload.model_dump(), indent=2) + "\n"
        )
        print(f"wrote {cfg.output.path}")
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    cfg = _load(args)
    payload: OracleCheckPayload = _run_job(
        args, cfg, "/oracle-check", run_oracle_check, OracleCheckPayload
    )
    for p in payload.points:
        print(
            f"rabi={p.rabi:7.2f} MHz  delta={p.delta_mhz:8.2f} MHz  "
            f"|diff|={p.diff:.3e}"
        )
    print(f"max |diff| = {payload.max_diff:.3e} (tolerance {payload.tolerance:.1e})")
    if cfg.output.path is not None:
        Path(cfg.output.path).write_text(
            json.dumps(payload.model_dump(), indent=2) + "\n"
        )
        print(f"wrote {cfg.output.path}")
    if not payload.passed:
        raise _CliError(
            EXIT_ORACLE,
            f"oracle mismatch: max |diff| {payload.max_diff:.3e} exceeds "
            f"{payload.tolerance:.1e}",
        )
    print("oracle check passed")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("mirrorqed.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorqed",
        description="Reflection spectra of a driven transmon on a waveguide",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, default=None, help="JSON run config")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument(
            "--server", default=None, help="base URL of a running service"
        )

    for name, func in (
        ("spectrum", cmd_spectrum),
        ("sweep2d", cmd_sweep2d),
        ("calibrate", cmd_calibrate),
        ("oracle-check", cmd_oracle_check),
    ):
        p = sub.add_parser(name)
        add_common(p)
        p.set_defaults(func=func)

    p_serve = sub.add_parser("serve")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except httpx.HTTPError as exc:
        print(f"error: server request failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entrypoint() -> None:
    sys.exit(main(argv=None))
