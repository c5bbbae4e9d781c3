"""Two-dimensional reflection maps, feature overlays, and pump calibration.

A sweep varies one pump-side quantity per row (power, Rabi rate, pump
frequency, or flux bias) against a shared probe-frequency axis. Rows are
independent, so they can be farmed out to a thread pool; results are assembled
by index, which keeps the output bitwise identical for any worker count.
Failed points are recorded as NaN with a sorted error log instead of aborting
the whole map.
"""

from __future__ import annotations

import datetime as _dt
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .errors import MirrorqedError
from .model import (
    DeviceParams,
    default_device,
    ej_of_flux,
    omega10,
    transition_frequency,
)
from .response import spectrum

Y_KINDS = ("pump_power_dbm", "pump_rabi", "pump_freq", "flux_ratio")

CAL_TARGET_DBM = -114.0
_DBM_REF_WATT = 1e-3


def dbm_to_rabi(p_dbm: float, k: float) -> float:
    """Pump Rabi rate (cyclic MHz) for a generator power in dBm.

    The line attenuation is folded into the single proportionality constant k,
    so Omega = k * sqrt(P) with P in watts.
    """
    power_watt = _DBM_REF_WATT * 10.0 ** (p_dbm / 10.0)
    return k * np.sqrt(power_watt)


@dataclass(frozen=True)
class Overlays:
    """Analytic feature positions for one (pump, Rabi) working point.

    All frequencies are cyclic GHz. The sideband is a function of the probe
    frequency rather than a fixed line, hence the method.
    """

    omega_pump: float
    triplet: tuple[float, float, float]
    inner_boundaries: tuple[float, float]
    autler_townes: tuple[float, float]

    def sideband(self, omega_p: float) -> float:
        return 2.0 * self.omega_pump - omega_p


def overlays_for(params: DeviceParams, omega_pump: float, rabi: float) -> Overlays:
    if rabi <= 0:
        raise ValueError("overlays need a positive pump Rabi rate")
    rabi_ghz = rabi / 1000.0
    # Inner edge of the gain band: the point where the dressed response
    # crosses |r| = 1 between the central peak and each sideband.
    half_width = np.sqrt(2.0 * params.gamma1 * params.gamma**3) / rabi / 1000.0
    ej = ej_of_flux(params.e_j_max, params.flux_ratio)
    w10 = omega10(ej, params.e_c)
    w21 = w10 + params.alpha
    return Overlays(
        omega_pump=omega_pump,
        triplet=(omega_pump - rabi_ghz, omega_pump, omega_pump + rabi_ghz),
        inner_boundaries=(omega_pump - half_width, omega_pump + half_width),
        autler_townes=(w21 - rabi_ghz / 2.0, w21 + rabi_ghz / 2.0),
    )


@dataclass(frozen=True)
class SweepGrid:
    """Specification of a 2D sweep: probe axis (x) against one pump axis (y)."""

    probe_freqs: np.ndarray
    y_kind: str
    y_values: np.ndarray
    omega_pump: float
    rabi: float = 0.0
    k_factor: float = 0.0
    m_phases: int = 4

    def __post_init__(self) -> None:
        if self.y_kind not in Y_KINDS:
            raise ValueError(f"y_kind must be one of {Y_KINDS}, got {self.y_kind!r}")
        if self.y_kind == "pump_power_dbm" and self.k_factor <= 0:
            raise ValueError("pump_power_dbm sweeps need a positive k_factor")
        object.__setattr__(self, "probe_freqs", np.asarray(self.probe_freqs, dtype=float))
        object.__setattr__(self, "y_values", np.asarray(self.y_values, dtype=float))
        if self.probe_freqs.size == 0 or self.y_values.size == 0:
            raise ValueError("sweep axes must be non-empty")


@dataclass(frozen=True)
class SweepResult:
    grid: SweepGrid
    r_map: np.ndarray
    errors: tuple[str, ...]
    metadata: dict = field(default_factory=dict)


def _row_setting(
    grid: SweepGrid, params: DeviceParams, y: float
) -> tuple[DeviceParams, float, float]:
    """Device, pump frequency, and Rabi rate for one row of the sweep."""
    if grid.y_kind == "pump_power_dbm":
        return params, grid.omega_pump, dbm_to_rabi(y, grid.k_factor)
    if grid.y_kind == "pump_rabi":
        return params, grid.omega_pump, y
    if grid.y_kind == "pump_freq":
        return params, y, grid.rabi
    return replace(params, flux_ratio=y), grid.omega_pump, grid.rabi


def run_grid(
    grid: SweepGrid,
    params: DeviceParams | None = None,
    engine=None,
    workers: int = 1,
) -> SweepResult:
    """Evaluate the sweep row by row, recovering from per-point failures.

    engine(params, omega_pump, rabi, probe_grid, m_phases) -> complex ndarray;
    the default is the resolvent spectrum.
    """
    if params is None:
        params = default_device()
    if engine is None:
        def engine(p, wp, om, grid_x, m_phases):
            return spectrum(p, wp, om, grid_x, m_phases=m_phases).r_values

    def one_row(iy: int) -> tuple[np.ndarray, list[str]]:
        y = float(grid.y_values[iy])
        row_errors: list[str] = []
        try:
            row_params, wp, om = _row_setting(grid, params, y)
            return (
                np.asarray(
                    engine(row_params, wp, om, grid.probe_freqs, grid.m_phases),
                    dtype=complex,
                ),
                row_errors,
            )
        except MirrorqedError:
            pass
        # Whole-row evaluation failed; retry point by point so one bad
        # parameter combination does not hole out the entire row.
        row = np.full(grid.probe_freqs.size, np.nan + 1j * np.nan, dtype=complex)
        for ix, x in enumerate(grid.probe_freqs):
            try:
                row_params, wp, om = _row_setting(grid, params, y)
                row[ix] = np.asarray(
                    engine(row_params, wp, om, np.asarray([x]), grid.m_phases),
                    dtype=complex,
                )[0]
            except MirrorqedError as exc:
                row_errors.append(
                    f"y[{iy}]={y:.9g} x[{ix}]={x:.9g}: {type(exc).__name__}: {exc}"
                )
        return row, row_errors

    n_y = grid.y_values.size
    r_map = np.empty((n_y, grid.probe_freqs.size), dtype=complex)
    errors: list[str] = []
    if workers <= 1:
        results = [one_row(iy) for iy in range(n_y)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_row, range(n_y)))
    for iy, (row, row_errors) in enumerate(results):
        r_map[iy] = row
        errors.extend(row_errors)
    metadata = {
        "code_version": __version__,
        "y_kind": grid.y_kind,
        "omega_pump": grid.omega_pump,
        "workers": workers,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "device": params,
    }
    return SweepResult(
        grid=grid, r_map=r_map, errors=tuple(sorted(errors)), metadata=metadata
    )


@dataclass(frozen=True)
class CalibrationResult:
    omega_star: float
    k_factor: float
    max_gain: float
    target_dbm: float


def _peak_gain(
    params: DeviceParams, omega_pump: float, rabi: float, m_phases: int
) -> tuple[float, float]:
    """(max |r|, probe offset MHz) over the gain region around the triplet."""
    span = rabi + 120.0
    offsets = np.arange(-span, span + 1e-9, 2.5)
    probe = omega_pump + offsets / 1000.0
    r = spectrum(params, omega_pump, rabi, probe, m_phases=m_phases).r_values
    i0 = int(np.argmax(np.abs(r)))
    lo = omega_pump + (offsets[max(0, i0 - 2)]) / 1000.0
    hi = omega_pump + (offsets[min(offsets.size - 1, i0 + 2)]) / 1000.0
    res = minimize_scalar(
        lambda w: -abs(
            spectrum(params, omega_pump, rabi, np.asarray([w]), m_phases=m_phases)
            .r_values[0]
        ),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-7},
    )
    return -float(res.fun), (float(res.x) - omega_pump) * 1000.0


def calibrate_k(
    params: DeviceParams | None = None,
    target_dbm: float = CAL_TARGET_DBM,
    rabi_min: float = 10.0,
    rabi_max: float = 400.0,
    coarse_step: float = 5.0,
    m_phases: int = 4,
) -> CalibrationResult:
    """Fix the power-to-Rabi constant from the gain maximum.

    The Rabi rate that maximizes the resonant-pump gain is identified by a
    coarse scan plus bounded refinement, then assigned to the target generator
    power; k converts every other power accordingly.
    """
    if params is None:
        params = default_device()
    # Pump on resonance: only detunings relative to the pump matter here.
    omega_pump = transition_frequency(params)
    rabis = np.arange(rabi_min, rabi_max + 1e-9, coarse_step)
    gains = np.array(
        [_peak_gain(params, omega_pump, float(om), m_phases)[0] for om in rabis]
    )
    i0 = int(np.argmax(gains))
    lo = rabis[max(0, i0 - 1)]
    hi = rabis[min(rabis.size - 1, i0 + 1)]
    res = minimize_scalar(
        lambda om: -_peak_gain(params, omega_pump, float(om), m_phases)[0],
        bounds=(float(lo), float(hi)),
        method="bounded",
        options={"xatol": 1e-4},
    )
    omega_star = float(res.x)
    max_gain = -float(res.fun)
    power_watt = _DBM_REF_WATT * 10.0 ** (target_dbm / 10.0)
    k_factor = omega_star / np.sqrt(power_watt)
    return CalibrationResult(
        omega_star=omega_star,
        k_factor=float(k_factor),
        max_gain=max_gain,
        target_dbm=target_dbm,
    )
