from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from mirrorqed.model import DeviceParams, transition_frequency
from mirrorqed.response import ReflectionSpectrum, spectrum
from mirrorqed.results_io import (
    read_spectrum_csv,
    read_spectrum_json,
    read_sweep_csv,
    read_sweep_json,
    write_spectrum_csv,
    write_spectrum_json,
    write_sweep_csv,
    write_sweep_json,
)
from mirrorqed.sweep import SweepGrid, overlays_for, run_grid


@pytest.fixture(scope="module")
def small_spectrum(params2: DeviceParams) -> ReflectionSpectrum:
    wp = transition_frequency(params2)
    return spectrum(params2, wp, 100.0, wp + np.linspace(-0.15, 0.15, 16))


@pytest.fixture(scope="module")
def holey_sweep(params5: DeviceParams):
    # One good flux row and one beyond the transmon regime, so the result
    # carries both NaN cells and a non-empty error log.
    wp = transition_frequency(params5)
    grid = SweepGrid(
        probe_freqs=wp + np.linspace(0.02, 0.1, 4),
        y_kind="flux_ratio",
        y_values=np.array([0.0, 0.47]),
        omega_pump=wp,
        rabi=100.0,
    )
    result = run_grid(grid, params=params5)
    overlays = [overlays_for(params5, wp, 100.0)] * 2
    return result, overlays


def _spectra_equal(a: ReflectionSpectrum, b: ReflectionSpectrum) -> None:
    assert np.array_equal(a.probe_freqs, b.probe_freqs)
    assert np.array_equal(a.r_values, b.r_values, equal_nan=True)
    assert (a.omega_pump, a.rabi, a.m_phases) == (b.omega_pump, b.rabi, b.m_phases)
    assert a.device == b.device


class TestSpectrumRoundTrip:
    def test_csv_is_lossless(self, small_spectrum, tmp_path: Path) -> None:
        path = tmp_path / "spec.csv"
        write_spectrum_csv(small_spectrum, path)
        _spectra_equal(read_spectrum_csv(path), small_spectrum)

    def test_json_is_lossless(self, small_spectrum, tmp_path: Path) -> None:
        path = tmp_path / "spec.json"
        write_spectrum_json(small_spectrum, path)
        _spectra_equal(read_spectrum_json(path), small_spectrum)

    def test_nan_survives_both_formats(
        self, small_spectrum, tmp_path: Path
    ) -> None:
        values = small_spectrum.r_values.copy()
        values[3] = complex(np.nan, np.nan)
        spec = ReflectionSpectrum(
            probe_freqs=small_spectrum.probe_freqs,
            r_values=values,
            omega_pump=small_spectrum.omega_pump,
            rabi=small_spectrum.rabi,
            m_phases=small_spectrum.m_phases,
            device=small_spectrum.device,
        )
        for writer, reader, name in (
            (write_spectrum_csv, read_spectrum_csv, "s.csv"),
            (write_spectrum_json, read_spectrum_json, "s.json"),
        ):
            path = tmp_path / name
            writer(spec, path)
            back = reader(path)
            assert np.isnan(back.r_values[3].real)
            assert np.array_equal(back.r_values, values, equal_nan=True)

    def test_rejects_foreign_file(self, tmp_path: Path) -> None:
        path = tmp_path / "junk.csv"
        path.write_text("# some other format\n1,2,3\n")
        with pytest.raises(ValueError):
            read_spectrum_csv(path)

    def test_write_is_reproducible_after_timestamp(
        self, small_spectrum, tmp_path: Path
    ) -> None:
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_spectrum_csv(small_spectrum, a)
        write_spectrum_csv(small_spectrum, b)
        strip = lambda p: [
            ln for ln in p.read_text().splitlines() if not ln.startswith("# timestamp")
        ]
        assert strip(a) == strip(b)


class TestSweepRoundTrip:
    def test_csv_keeps_map_errors_and_overlays(
        self, holey_sweep, tmp_path: Path
    ) -> None:
        result, overlays = holey_sweep
        path = tmp_path / "sweep.csv"
        write_sweep_csv(result, path, overlays=overlays)
        back = read_sweep_csv(path)
        assert np.array_equal(back.r_map, result.r_map, equal_nan=True)
        assert np.array_equal(back.grid.probe_freqs, result.grid.probe_freqs)
        assert np.array_equal(back.grid.y_values, result.grid.y_values)
        assert back.grid.y_kind == result.grid.y_kind
        assert back.errors == result.errors
        assert back.metadata["device"] == result.metadata["device"]
        assert back.metadata["overlays"] == overlays

    def test_json_keeps_map_errors_and_overlays(
        self, holey_sweep, tmp_path: Path
    ) -> None:
        result, overlays = holey_sweep
        path = tmp_path / "sweep.json"
        write_sweep_json(result, path, overlays=overlays)
        back = read_sweep_json(path)
        assert np.array_equal(back.r_map, result.r_map, equal_nan=True)
        assert back.errors == result.errors
        assert back.metadata["overlays"] == overlays
        assert back.metadata["workers"] == result.metadata["workers"]

    def test_write_is_byte_reproducible(self, holey_sweep, tmp_path: Path) -> None:
        # The sweep writer reuses the timestamp captured in the result
        # metadata, so the full file is stable, not just the data block.
        result, overlays = holey_sweep
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep_csv(result, a, overlays=overlays)
        write_sweep_csv(result, b, overlays=overlays)
        assert a.read_bytes() == b.read_bytes()

    def test_truncated_file_fails_row_count(self, holey_sweep, tmp_path: Path) -> None:
        result, _ = holey_sweep
        path = tmp_path / "sweep.csv"
        write_sweep_csv(result, path)
        lines = path.read_text().splitlines()
        data_idx = max(i for i, ln in enumerate(lines) if not ln.startswith("#"))
        del lines[data_idx]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="data rows"):
            read_sweep_csv(path)

    def test_rejects_spectrum_file(self, small_spectrum, tmp_path: Path) -> None:
        path = tmp_path / "spec.csv"
        write_spectrum_csv(small_spectrum, path)
        with pytest.raises(ValueError):
            read_sweep_csv(path)
