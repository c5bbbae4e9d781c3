"""Run configuration: validated blocks for device, pump, probe, and jobs.

Configs load from JSON. Unknown keys are rejected so a typo fails loudly
instead of silently running defaults. The pump block accepts either an
explicit Rabi rate or a generator power plus conversion constant, never both;
whichever is given resolves to cyclic MHz before the physics sees it.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .model import DeviceParams, transition_frequency
from .sweep import Y_KINDS, dbm_to_rabi

DEFAULT_PROBE_SPAN_MHZ = 250.0
DEFAULT_PROBE_POINTS = 201
DEFAULT_PUMP_POINTS = 101


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DeviceConfig(_Block):
    e_j_max: float = 7.97
    e_c: float = 0.39
    n_levels: int = Field(default=5, ge=2)
    gamma1: float = Field(default=45.0, gt=0)
    gamma_phi: float = Field(default=2.7, ge=0)
    flux_ratio: float = 0.0

    def to_params(self) -> DeviceParams:
        return DeviceParams(
            e_j_max=self.e_j_max,
            e_c=self.e_c,
            n_levels=self.n_levels,
            gamma1=self.gamma1,
            gamma_phi=self.gamma_phi,
            flux_ratio=self.flux_ratio,
        )


class PumpConfig(_Block):
    omega_pump: float | None = None
    rabi: float | None = None
    power_dbm: float | None = None
    k_factor: float | None = None
    phase: float = 0.0
    m_phases: int = Field(default=4, ge=3)

    @model_validator(mode="after")
    def _exclusive_drive(self) -> "PumpConfig":
        has_rabi = self.rabi is not None
        has_power = self.power_dbm is not None or self.k_factor is not None
        if has_rabi and has_power:
            raise ValueError(
                "pump.rabi and pump.power_dbm/pump.k_factor are mutually exclusive"
            )
        if not has_rabi:
            if self.power_dbm is None or self.k_factor is None:
                raise ValueError(
                    "pump needs either rabi or both power_dbm and k_factor"
                )
        return self

    def resolved_rabi(self) -> float:
        if self.rabi is not None:
            return self.rabi
        return dbm_to_rabi(self.power_dbm, self.k_factor)

    def resolved_omega_pump(self, params: DeviceParams) -> float:
        if self.omega_pump is not None:
            return self.omega_pump
        return transition_frequency(params)


class ProbeConfig(_Block):
    f_min: float | None = None
    f_max: float | None = None
    n_points: int = Field(default=DEFAULT_PROBE_POINTS, ge=2)

    def grid(self, params: DeviceParams) -> np.ndarray:
        center = transition_frequency(params)
        span = DEFAULT_PROBE_SPAN_MHZ / 1000.0
        f_min = self.f_min if self.f_min is not None else center - span
        f_max = self.f_max if self.f_max is not None else center + span
        if f_max <= f_min:
            raise ValueError("probe.f_max must exceed probe.f_min")
        return np.linspace(f_min, f_max, self.n_points)


class SweepConfig(_Block):
    y_kind: str = "pump_power_dbm"
    y_min: float = -130.0
    y_max: float = -105.0
    n_y: int = Field(default=DEFAULT_PUMP_POINTS, ge=1)

    @model_validator(mode="after")
    def _known_kind(self) -> "SweepConfig":
        if self.y_kind not in Y_KINDS:
            raise ValueError(f"sweep.y_kind must be one of {Y_KINDS}")
        if self.y_max < self.y_min:
            raise ValueError("sweep.y_max must not be below sweep.y_min")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.n_y)


class OracleConfigBlock(_Block):
    probe_rabi: float = Field(default=0.4, gt=0)
    settle_time: float = Field(default=30.0, ge=10)
    sample_window: int = Field(default=1, ge=1)
    samples_per_period: int = Field(default=64, ge=16)
    linearity_check: bool = True
    rabis: tuple[float, ...] = (50.0, 100.0, 200.0)
    n_points: int = Field(default=20, ge=1)
    tolerance: float = Field(default=1e-3, gt=0)


class CalibrateConfig(_Block):
    target_dbm: float = -114.0
    rabi_min: float = Field(default=10.0, gt=0)
    rabi_max: float = 400.0
    coarse_step: float = Field(default=5.0, gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> "CalibrateConfig":
        if self.rabi_max <= self.rabi_min:
            raise ValueError("calibrate.rabi_max must exceed calibrate.rabi_min")
        return self


class OutputConfig(_Block):
    path: str | None = None
    format: str = "csv"
    workers: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _known_format(self) -> "OutputConfig":
        if self.format not in ("csv", "json"):
            raise ValueError("output.format must be 'csv' or 'json'")
        return self

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        return os.cpu_count() or 1


class RunConfig(_Block):
    device: DeviceConfig = DeviceConfig()
    pump: PumpConfig | None = None
    probe: ProbeConfig = ProbeConfig()
    sweep: SweepConfig = SweepConfig()
    oracle: OracleConfigBlock = OracleConfigBlock()
    calibrate: CalibrateConfig = CalibrateConfig()
    output: OutputConfig = OutputConfig()

    def require_pump(self) -> PumpConfig:
        if self.pump is None:
            raise ValueError("this command needs a pump block in the config")
        return self.pump


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    return RunConfig.model_validate(json.loads(text))
