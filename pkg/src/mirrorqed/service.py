"""Job layer and HTTP service.

Each job takes a validated RunConfig and returns a pydantic payload, so the
CLI running in-process and a remote client hitting the HTTP API see byte-equal
results. The FastAPI app is a thin shell over the same job functions; domain
errors surface as 422 responses with the exception text as detail.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .config import RunConfig
from .errors import MirrorqedError
from .model import DeviceParams
from .oracle import OracleConfig, two_tone_reflection
from .response import ReflectionSpectrum, gain_bands, phase_averaged_reflection, spectrum
from .sweep import (
    Overlays,
    SweepGrid,
    SweepResult,
    _row_setting,
    calibrate_k,
    overlays_for,
    run_grid,
)


class DevicePayload(BaseModel):
    e_j_max: float
    e_c: float
    n_levels: int
    gamma1: float
    gamma_phi: float
    flux_ratio: float

    @classmethod
    def from_params(cls, params: DeviceParams) -> "DevicePayload":
        return cls(
            e_j_max=params.e_j_max,
            e_c=params.e_c,
            n_levels=params.n_levels,
            gamma1=params.gamma1,
            gamma_phi=params.gamma_phi,
            flux_ratio=params.flux_ratio,
        )

    def to_params(self) -> DeviceParams:
        return DeviceParams(
            e_j_max=self.e_j_max,
            e_c=self.e_c,
            n_levels=self.n_levels,
            gamma1=self.gamma1,
            gamma_phi=self.gamma_phi,
            flux_ratio=self.flux_ratio,
        )


class SpectrumPayload(BaseModel):
    omega_pump: float
    rabi: float
    m_phases: int
    device: DevicePayload
    probe_freqs: list[float]
    r_real: list[float]
    r_imag: list[float]
    min_abs_r: float
    max_abs_r: float
    gain_bands: list[tuple[float, float]]


class OverlayPayload(BaseModel):
    omega_pump: float
    triplet: tuple[float, float, float]
    inner_boundaries: tuple[float, float]
    autler_townes: tuple[float, float]


class SweepPayload(BaseModel):
    y_kind: str
    omega_pump: float
    rabi: float
    k_factor: float
    m_phases: int
    device: DevicePayload
    probe_freqs: list[float]
    y_values: list[float]
    r_real: list[list[float | None]]
    r_imag: list[list[float | None]]
    errors: list[str]
    code_version: str
    workers: int
    timestamp: str
    overlays: list[OverlayPayload] | None = None


class CalibratePayload(BaseModel):
    omega_star: float
    k_factor: float
    max_gain: float
    target_dbm: float


class OracleCheckPoint(BaseModel):
    rabi: float
    delta_mhz: float
    r_resolvent_real: float
    r_resolvent_imag: float
    r_oracle_real: float
    r_oracle_imag: float
    diff: float


class OracleCheckPayload(BaseModel):
    points: list[OracleCheckPoint]
    max_diff: float
    tolerance: float
    passed: bool


def run_spectrum(cfg: RunConfig) -> SpectrumPayload:
    pump = cfg.require_pump()
    params = cfg.device.to_params()
    omega_pump = pump.resolved_omega_pump(params)
    rabi = pump.resolved_rabi()
    spec = spectrum(
        params, omega_pump, rabi, cfg.probe.grid(params), m_phases=pump.m_phases
    )
    abs_r = np.abs(spec.r_values)
    return SpectrumPayload(
        omega_pump=omega_pump,
        rabi=rabi,
        m_phases=pump.m_phases,
        device=DevicePayload.from_params(params),
        probe_freqs=[float(f) for f in spec.probe_freqs],
        r_real=[float(v) for v in spec.r_values.real],
        r_imag=[float(v) for v in spec.r_values.imag],
        min_abs_r=float(abs_r.min()),
        max_abs_r=float(abs_r.max()),
        gain_bands=gain_bands(spec),
    )


def payload_to_spectrum(payload: SpectrumPayload) -> ReflectionSpectrum:
    r_values = np.asarray(payload.r_real) + 1j * np.asarray(payload.r_imag)
    return ReflectionSpectrum(
        probe_freqs=np.asarray(payload.probe_freqs),
        r_values=r_values,
        omega_pump=payload.omega_pump,
        rabi=payload.rabi,
        m_phases=payload.m_phases,
        device=payload.device.to_params(),
    )


def _sweep_grid(cfg: RunConfig) -> tuple[SweepGrid, DeviceParams]:
    pump = cfg.require_pump()
    params = cfg.device.to_params()
    omega_pump = pump.resolved_omega_pump(params)
    y_kind = cfg.sweep.y_kind
    k_factor = pump.k_factor or 0.0
    rabi = 0.0
    if y_kind == "pump_power_dbm":
        if k_factor <= 0:
            raise ValueError("sweep over pump_power_dbm needs pump.k_factor")
    elif y_kind in ("pump_freq", "flux_ratio"):
        rabi = pump.resolved_rabi()
    grid = SweepGrid(
        probe_freqs=cfg.probe.grid(params),
        y_kind=y_kind,
        y_values=cfg.sweep.values(),
        omega_pump=omega_pump,
        rabi=rabi,
        k_factor=k_factor,
        m_phases=pump.m_phases,
    )
    return grid, params


def sweep_overlays(result: SweepResult, params: DeviceParams) -> list[Overlays] | None:
    """Per-row feature overlays, or None when any row has no pump drive."""
    rows = []
    for y in result.grid.y_values:
        try:
            row_params, wp, om = _row_setting(result.grid, params, float(y))
            rows.append(overlays_for(row_params, wp, om))
        except (MirrorqedError, ValueError):
            return None
    return rows


def run_sweep(cfg: RunConfig) -> SweepPayload:
    grid, params = _sweep_grid(cfg)
    result = run_grid(grid, params=params, workers=cfg.output.resolved_workers())
    overlays = sweep_overlays(result, params)
    return SweepPayload(
        y_kind=grid.y_kind,
        omega_pump=grid.omega_pump,
        rabi=grid.rabi,
        k_factor=grid.k_factor,
        m_phases=grid.m_phases,
        device=DevicePayload.from_params(params),
        probe_freqs=[float(f) for f in grid.probe_freqs],
        y_values=[float(y) for y in grid.y_values],
        r_real=[
            [None if np.isnan(v) else float(v) for v in row]
            for row in result.r_map.real
        ],
        r_imag=[
            [None if np.isnan(v) else float(v) for v in row]
            for row in result.r_map.imag
        ],
        errors=list(result.errors),
        code_version=result.metadata["code_version"],
        workers=result.metadata["workers"],
        timestamp=result.metadata["timestamp"],
        overlays=None
        if overlays is None
        else [
            OverlayPayload(
                omega_pump=ov.omega_pump,
                triplet=ov.triplet,
                inner_boundaries=ov.inner_boundaries,
                autler_townes=ov.autler_townes,
            )
            for ov in overlays
        ],
    )


def payload_to_sweep(payload: SweepPayload) -> tuple[SweepResult, list[Overlays] | None]:
    grid = SweepGrid(
        probe_freqs=np.asarray(payload.probe_freqs),
        y_kind=payload.y_kind,
        y_values=np.asarray(payload.y_values),
        omega_pump=payload.omega_pump,
        rabi=payload.rabi,
        k_factor=payload.k_factor,
        m_phases=payload.m_phases,
    )
    r_map = np.asarray(
        [
            [
                complex(
                    np.nan if re_p is None else re_p,
                    np.nan if im_p is None else im_p,
                )
                for re_p, im_p in zip(row_re, row_im)
            ]
            for row_re, row_im in zip(payload.r_real, payload.r_imag)
        ],
        dtype=complex,
    )
    result = SweepResult(
        grid=grid,
        r_map=r_map,
        errors=tuple(payload.errors),
        metadata={
            "code_version": payload.code_version,
            "y_kind": payload.y_kind,
            "omega_pump": payload.omega_pump,
            "workers": payload.workers,
            "timestamp": payload.timestamp,
            "device": payload.device.to_params(),
        },
    )
    overlays = None
    if payload.overlays is not None:
        overlays = [
            Overlays(
                omega_pump=ov.omega_pump,
                triplet=ov.triplet,
                inner_boundaries=ov.inner_boundaries,
                autler_townes=ov.autler_townes,
            )
            for ov in payload.overlays
        ]
    return result, overlays


def run_calibrate(cfg: RunConfig) -> CalibratePayload:
    params = cfg.device.to_params()
    cal = calibrate_k(
        params=params,
        target_dbm=cfg.calibrate.target_dbm,
        rabi_min=cfg.calibrate.rabi_min,
        rabi_max=cfg.calibrate.rabi_max,
        coarse_step=cfg.calibrate.coarse_step,
    )
    return CalibratePayload(
        omega_star=cal.omega_star,
        k_factor=cal.k_factor,
        max_gain=cal.max_gain,
        target_dbm=cal.target_dbm,
    )


def _check_deltas(rabi: float, count: int) -> np.ndarray:
    fractions = np.linspace(-1.5, 1.5, count)
    # Zero probe-pump detuning has its own DC code path; keep the box off the
    # exact resonance so every point exercises the demodulation route.
    fractions[np.abs(fractions) < 1e-12] = 0.25
    return fractions * rabi


def run_oracle_check(cfg: RunConfig) -> OracleCheckPayload:
    pump = cfg.require_pump()
    params = cfg.device.to_params()
    omega_pump = pump.resolved_omega_pump(params)
    ocfg = OracleConfig(
        probe_rabi=cfg.oracle.probe_rabi,
        settle_time=cfg.oracle.settle_time,
        sample_window=cfg.oracle.sample_window,
        samples_per_period=cfg.oracle.samples_per_period,
        linearity_check=cfg.oracle.linearity_check,
    )
    rabis = cfg.oracle.rabis
    n_total = cfg.oracle.n_points
    counts = [
        n_total // len(rabis) + (1 if i < n_total % len(rabis) else 0)
        for i in range(len(rabis))
    ]
    points = []
    for rabi, count in zip(rabis, counts):
        for delta in _check_deltas(rabi, count):
            omega_p = omega_pump + delta / 1000.0
            r_res = phase_averaged_reflection(
                params, omega_pump, rabi, omega_p, m_phases=pump.m_phases
            )
            r_orc = two_tone_reflection(params, omega_pump, rabi, omega_p, cfg=ocfg)
            points.append(
                OracleCheckPoint(
                    rabi=rabi,
                    delta_mhz=float(delta),
                    r_resolvent_real=r_res.real,
                    r_resolvent_imag=r_res.imag,
                    r_oracle_real=r_orc.real,
                    r_oracle_imag=r_orc.imag,
                    diff=abs(r_res - r_orc),
                )
            )
    max_diff = max(p.diff for p in points)
    return OracleCheckPayload(
        points=points,
        max_diff=max_diff,
        tolerance=cfg.oracle.tolerance,
        passed=max_diff < cfg.oracle.tolerance,
    )


app = FastAPI(title="mirrorqed", version=__version__)


def _run_or_422(job, cfg: RunConfig):
    try:
        return job(cfg)
    except (MirrorqedError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}")


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/defaults")
def defaults() -> RunConfig:
    return RunConfig()


@app.post("/spectrum")
def spectrum_endpoint(cfg: RunConfig) -> SpectrumPayload:
    return _run_or_422(run_spectrum, cfg)


@app.post("/sweep2d")
def sweep_endpoint(cfg: RunConfig) -> SweepPayload:
    return _run_or_422(run_sweep, cfg)


@app.post("/calibrate")
def calibrate_endpoint(cfg: RunConfig) -> CalibratePayload:
    return _run_or_422(run_calibrate, cfg)


@app.post("/oracle-check")
def oracle_check_endpoint(cfg: RunConfig) -> OracleCheckPayload:
    return _run_or_422(run_oracle_check, cfg)
