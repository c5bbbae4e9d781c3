"""Readers and writers for spectra and sweep maps (CSV and JSON).

Floats are serialized with repr, which is the shortest string that parses back
to the identical double, so a write/read cycle is lossless. The timestamp is
the only non-deterministic output and always occupies its own line (CSV) or
key (JSON); everything else is byte-reproducible for identical inputs. NaN
markers survive both formats: literally in CSV, as null in JSON.
"""

from __future__ import annotations

import datetime as _dt
import json
from pathlib import Path

import numpy as np

from .model import DeviceParams
from .response import ReflectionSpectrum
from .sweep import Overlays, SweepGrid, SweepResult

SPECTRUM_CSV_TAG = "mirrorqed spectrum v1"
SWEEP_CSV_TAG = "mirrorqed sweep v1"


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_complex(z: complex) -> str:
    return f"{_fmt(z.real)},{_fmt(z.imag)}"


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _device_fields(d: DeviceParams) -> dict:
    return {
        "e_j_max": d.e_j_max,
        "e_c": d.e_c,
        "n_levels": d.n_levels,
        "gamma1": d.gamma1,
        "gamma_phi": d.gamma_phi,
        "flux_ratio": d.flux_ratio,
    }


def _device_line(d: DeviceParams) -> str:
    return " ".join(f"{k}={_fmt(v) if k != 'n_levels' else v}" for k, v in _device_fields(d).items())


def _parse_device(text: str) -> DeviceParams:
    fields = {}
    for item in text.split():
        key, _, value = item.partition("=")
        fields[key] = int(value) if key == "n_levels" else float(value)
    return DeviceParams(**fields)


def _nan_to_none(x: float) -> float | None:
    return None if np.isnan(x) else float(x)


def _none_to_nan(x) -> float:
    return np.nan if x is None else float(x)


def write_spectrum_csv(spec: ReflectionSpectrum, path: str | Path) -> None:
    lines = [
        f"# {SPECTRUM_CSV_TAG}",
        f"# timestamp: {_timestamp()}",
        f"# omega_pump_ghz: {_fmt(spec.omega_pump)}",
        f"# rabi_mhz: {_fmt(spec.rabi)}",
        f"# m_phases: {spec.m_phases}",
        f"# device: {_device_line(spec.device)}",
        "# x_axis: probe_freq_ghz",
        "# columns: probe_freq_ghz,r_real,r_imag",
    ]
    for f, r in zip(spec.probe_freqs, spec.r_values):
        lines.append(f"{_fmt(f)},{_fmt_complex(r)}")
    Path(path).write_text("\n".join(lines) + "\n")


def _header_fields(lines: list[str]) -> dict:
    # "error" lines carry the log entries; the "errors" header is only the
    # count, so the two must not share a key.
    fields: dict = {"error_lines": []}
    for line in lines:
        body = line[1:].strip()
        key, _, value = body.partition(":")
        key = key.strip()
        value = value.strip()
        if key == "error":
            fields["error_lines"].append(value)
        elif key:
            fields[key] = value
    return fields


def read_spectrum_csv(path: str | Path) -> ReflectionSpectrum:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != f"# {SPECTRUM_CSV_TAG}":
        raise ValueError(f"{path} is not a {SPECTRUM_CSV_TAG} file")
    header = _header_fields([ln for ln in lines if ln.startswith("#")])
    freqs = []
    values = []
    for line in lines:
        if line.startswith("#") or not line.strip():
            continue
        f, re_part, im_part = line.split(",")
        freqs.append(float(f))
        values.append(complex(float(re_part), float(im_part)))
    return ReflectionSpectrum(
        probe_freqs=np.asarray(freqs),
        r_values=np.asarray(values, dtype=complex),
        omega_pump=float(header["omega_pump_ghz"]),
        rabi=float(header["rabi_mhz"]),
        m_phases=int(header["m_phases"]),
        device=_parse_device(header["device"]),
    )


def write_spectrum_json(spec: ReflectionSpectrum, path: str | Path) -> None:
    payload = {
        "format": SPECTRUM_CSV_TAG.replace("csv", "json"),
        "timestamp": _timestamp(),
        "omega_pump_ghz": spec.omega_pump,
        "rabi_mhz": spec.rabi,
        "m_phases": spec.m_phases,
        "device": _device_fields(spec.device),
        "probe_freqs_ghz": [float(f) for f in spec.probe_freqs],
        "r_real": [_nan_to_none(r) for r in spec.r_values.real],
        "r_imag": [_nan_to_none(r) for r in spec.r_values.imag],
    }
    Path(path).write_text(json.dumps(payload, indent=2, allow_nan=False) + "\n")


def read_spectrum_json(path: str | Path) -> ReflectionSpectrum:
    payload = json.loads(Path(path).read_text())
    r_values = np.asarray(
        [
            complex(_none_to_nan(re_p), _none_to_nan(im_p))
            for re_p, im_p in zip(payload["r_real"], payload["r_imag"])
        ],
        dtype=complex,
    )
    return ReflectionSpectrum(
        probe_freqs=np.asarray(payload["probe_freqs_ghz"], dtype=float),
        r_values=r_values,
        omega_pump=float(payload["omega_pump_ghz"]),
        rabi=float(payload["rabi_mhz"]),
        m_phases=int(payload["m_phases"]),
        device=DeviceParams(**payload["device"]),
    )


def write_sweep_csv(
    result: SweepResult, path: str | Path, overlays: list[Overlays] | None = None
) -> None:
    grid = result.grid
    timestamp = result.metadata.get("timestamp", _timestamp())
    lines = [
        f"# {SWEEP_CSV_TAG}",
        f"# timestamp: {timestamp}",
        f"# code_version: {result.metadata.get('code_version', '')}",
        f"# y_kind: {grid.y_kind}",
        f"# omega_pump_ghz: {_fmt(grid.omega_pump)}",
        f"# rabi_mhz: {_fmt(grid.rabi)}",
        f"# k_factor: {_fmt(grid.k_factor)}",
        f"# m_phases: {grid.m_phases}",
        f"# workers: {result.metadata.get('workers', 1)}",
        "# device: "
        + (_device_line(result.metadata["device"]) if "device" in result.metadata else ""),
        f"# x_axis: probe_freq_ghz {grid.probe_freqs.size} values",
        f"# y_axis: {grid.y_kind} {grid.y_values.size} values",
        f"# errors: {len(result.errors)}",
    ]
    for err in result.errors:
        lines.append(f"# error: {err}")
    lines.append("# columns: y_value,probe_freq_ghz,r_real,r_imag")
    for iy, y in enumerate(grid.y_values):
        for ix, x in enumerate(grid.probe_freqs):
            lines.append(f"{_fmt(y)},{_fmt(x)},{_fmt_complex(result.r_map[iy, ix])}")
    if overlays is not None:
        lines.append("# section overlays")
        lines.append(
            "# overlay_columns: y_value,triplet_lower,triplet_center,triplet_upper,"
            "inner_lower,inner_upper,at_lower,at_upper"
        )
        for y, ov in zip(grid.y_values, overlays):
            row = (
                [y]
                + list(ov.triplet)
                + list(ov.inner_boundaries)
                + list(ov.autler_townes)
            )
            lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_sweep_csv(path: str | Path) -> SweepResult:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != f"# {SWEEP_CSV_TAG}":
        raise ValueError(f"{path} is not a {SWEEP_CSV_TAG} file")
    in_overlays = False
    header_lines = []
    matrix_rows = []
    overlay_rows = []
    for line in lines:
        if line == "# section overlays":
            in_overlays = True
            continue
        if line.startswith("#"):
            header_lines.append(line)
            continue
        if not line.strip():
            continue
        target = overlay_rows if in_overlays else matrix_rows
        target.append([float(v) for v in line.split(",")])
    header = _header_fields(header_lines)

    n_x = int(header["x_axis"].split()[1])
    n_y = int(header["y_axis"].split()[1])
    if len(matrix_rows) != n_x * n_y:
        raise ValueError(
            f"{path}: expected {n_x * n_y} data rows, found {len(matrix_rows)}"
        )
    probe_freqs = [row[1] for row in matrix_rows[:n_x]]
    y_values = [matrix_rows[iy * n_x][0] for iy in range(n_y)]
    r_map = np.empty((n_y, n_x), dtype=complex)
    for i, row in enumerate(matrix_rows):
        r_map[i // n_x, i % n_x] = complex(row[2], row[3])

    grid = SweepGrid(
        probe_freqs=np.asarray(probe_freqs),
        y_kind=header["y_kind"],
        y_values=np.asarray(y_values),
        omega_pump=float(header["omega_pump_ghz"]),
        rabi=float(header["rabi_mhz"]),
        k_factor=float(header["k_factor"]),
        m_phases=int(header["m_phases"]),
    )
    metadata = {
        "code_version": header.get("code_version", ""),
        "y_kind": header["y_kind"],
        "omega_pump": float(header["omega_pump_ghz"]),
        "workers": int(header.get("workers", 1)),
        "timestamp": header.get("timestamp", ""),
    }
    if header.get("device"):
        metadata["device"] = _parse_device(header["device"])
    if overlay_rows:
        metadata["overlays"] = [
            Overlays(
                omega_pump=float(header["omega_pump_ghz"]),
                triplet=(row[1], row[2], row[3]),
                inner_boundaries=(row[4], row[5]),
                autler_townes=(row[6], row[7]),
            )
            for row in overlay_rows
        ]
    return SweepResult(
        grid=grid,
        r_map=r_map,
        errors=tuple(header["error_lines"]),
        metadata=metadata,
    )


def write_sweep_json(
    result: SweepResult, path: str | Path, overlays: list[Overlays] | None = None
) -> None:
    grid = result.grid
    payload = {
        "format": SWEEP_CSV_TAG.replace("csv", "json"),
        "timestamp": result.metadata.get("timestamp", _timestamp()),
        "code_version": result.metadata.get("code_version", ""),
        "y_kind": grid.y_kind,
        "omega_pump_ghz": grid.omega_pump,
        "rabi_mhz": grid.rabi,
        "k_factor": grid.k_factor,
        "m_phases": grid.m_phases,
        "workers": result.metadata.get("workers", 1),
        "probe_freqs_ghz": [float(f) for f in grid.probe_freqs],
        "y_values": [float(y) for y in grid.y_values],
        "r_real": [[_nan_to_none(v) for v in row] for row in result.r_map.real],
        "r_imag": [[_nan_to_none(v) for v in row] for row in result.r_map.imag],
        "errors": list(result.errors),
    }
    if "device" in result.metadata:
        payload["device"] = _device_fields(result.metadata["device"])
    if overlays is not None:
        payload["overlays"] = [
            {
                "triplet": list(ov.triplet),
                "inner_boundaries": list(ov.inner_boundaries),
                "autler_townes": list(ov.autler_townes),
            }
            for ov in overlays
        ]
    Path(path).write_text(json.dumps(payload, indent=2, allow_nan=False) + "\n")


def read_sweep_json(path: str | Path) -> SweepResult:
    payload = json.loads(Path(path).read_text())
    r_map = np.asarray(
        [
            [
                complex(_none_to_nan(re_p), _none_to_nan(im_p))
                for re_p, im_p in zip(row_re, row_im)
            ]
            for row_re, row_im in zip(payload["r_real"], payload["r_imag"])
        ],
        dtype=complex,
    )
    grid = SweepGrid(
        probe_freqs=np.asarray(payload["probe_freqs_ghz"], dtype=float),
        y_kind=payload["y_kind"],
        y_values=np.asarray(payload["y_values"], dtype=float),
        omega_pump=float(payload["omega_pump_ghz"]),
        rabi=float(payload["rabi_mhz"]),
        k_factor=float(payload["k_factor"]),
        m_phases=int(payload["m_phases"]),
    )
    metadata = {
        "code_version": payload.get("code_version", ""),
        "y_kind": payload["y_kind"],
        "omega_pump": float(payload["omega_pump_ghz"]),
        "workers": int(payload.get("workers", 1)),
        "timestamp": payload.get("timestamp", ""),
    }
    if "device" in payload:
        metadata["device"] = DeviceParams(**payload["device"])
    if "overlays" in payload:
        metadata["overlays"] = [
            Overlays(
                omega_pump=float(payload["omega_pump_ghz"]),
                triplet=tuple(ov["triplet"]),
                inner_boundaries=tuple(ov["inner_boundaries"]),
                autler_townes=tuple(ov["autler_townes"]),
            )
            for ov in payload["overlays"]
        ]
    return SweepResult(
        grid=grid,
        r_map=r_map,
        errors=tuple(payload["errors"]),
        metadata=metadata,
    )
