from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from mirrorqed.config import RunConfig
from mirrorqed.model import transition_frequency
from mirrorqed.response import spectrum
from mirrorqed.service import (
    _check_deltas,
    app,
    payload_to_spectrum,
    payload_to_sweep,
    run_oracle_check,
    run_spectrum,
    run_sweep,
)
from mirrorqed.sweep import overlays_for


def _two_level_cfg(**overrides) -> RunConfig:
    # Even point counts keep the probe grid off the exact pump frequency,
    # where the resolvent route would warn about the singular limit.
    base = {
        "device": {"n_levels": 2},
        "pump": {"rabi": 100.0},
        "probe": {"n_points": 14},
    }
    base.update(overrides)
    return RunConfig.model_validate(base)


class TestSpectrumJob:
    def test_matches_direct_library_call(self, params2) -> None:
        cfg = _two_level_cfg()
        payload = run_spectrum(cfg)
        wp = transition_frequency(params2)
        direct = spectrum(params2, wp, 100.0, cfg.probe.grid(params2))
        assert payload.probe_freqs == [float(f) for f in direct.probe_freqs]
        assert payload.r_real == [float(v) for v in direct.r_values.real]
        assert payload.r_imag == [float(v) for v in direct.r_values.imag]
        assert payload.max_abs_r == float(np.abs(direct.r_values).max())

    def test_payload_converts_back_to_spectrum(self, params2) -> None:
        cfg = _two_level_cfg()
        payload = run_spectrum(cfg)
        spec = payload_to_spectrum(payload)
        wp = transition_frequency(params2)
        direct = spectrum(params2, wp, 100.0, cfg.probe.grid(params2))
        assert np.array_equal(spec.r_values, direct.r_values)
        assert spec.device == params2


class TestSweepJob:
    def test_payload_round_trips_with_overlays(self, params2) -> None:
        cfg = _two_level_cfg(
            sweep={"y_kind": "pump_rabi", "y_min": 60.0, "y_max": 120.0, "n_y": 2},
            probe={"n_points": 4},
            output={"workers": 2},
        )
        payload = run_sweep(cfg)
        result, overlays = payload_to_sweep(payload)
        assert result.r_map.shape == (2, 4)
        assert np.all(np.isfinite(result.r_map.real))
        assert result.metadata["workers"] == 2
        wp = transition_frequency(params2)
        assert overlays is not None
        assert overlays[0] == overlays_for(params2, wp, 60.0)
        assert overlays[1] == overlays_for(params2, wp, 120.0)

    def test_power_sweep_without_k_is_rejected(self) -> None:
        cfg = _two_level_cfg(sweep={"y_kind": "pump_power_dbm"})
        with pytest.raises(ValueError, match="k_factor"):
            run_sweep(cfg)


class TestOracleCheckJob:
    def test_points_split_across_rabis(self) -> None:
        cfg = _two_level_cfg()
        cfg = cfg.model_copy(
            update={
                "oracle": cfg.oracle.model_copy(
                    update={"rabis": (60.0, 80.0), "n_points": 4}
                )
            }
        )
        payload = run_oracle_check(cfg)
        assert [p.rabi for p in payload.points] == [60.0, 60.0, 80.0, 80.0]
        assert payload.max_diff == max(p.diff for p in payload.points)
        assert payload.passed == (payload.max_diff < payload.tolerance)
        assert payload.passed

    def test_delta_boxes_avoid_exact_resonance(self) -> None:
        deltas = _check_deltas(100.0, 5)
        assert 0.0 not in deltas
        assert 25.0 in deltas
        assert deltas[0] == -150.0 and deltas[-1] == 150.0

    def test_uneven_split_front_loads_the_remainder(self) -> None:
        cfg = _two_level_cfg()
        cfg = cfg.model_copy(
            update={
                "oracle": cfg.oracle.model_copy(
                    update={"rabis": (50.0, 70.0, 90.0), "n_points": 5}
                )
            }
        )
        payload = run_oracle_check(cfg)
        assert [p.rabi for p in payload.points] == [50.0, 50.0, 70.0, 70.0, 90.0]


class TestHttpApi:
    client = TestClient(app)

    def test_health_reports_version(self) -> None:
        resp = self.client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["version"]

    def test_defaults_are_a_valid_config(self) -> None:
        resp = self.client.get("/defaults")
        assert resp.status_code == 200
        assert RunConfig.model_validate(resp.json()) == RunConfig()

    def test_spectrum_endpoint_matches_in_process_job(self) -> None:
        cfg = _two_level_cfg()
        resp = self.client.post("/spectrum", json=cfg.model_dump())
        assert resp.status_code == 200
        body = resp.json()
        payload = run_spectrum(cfg)
        assert body["r_real"] == payload.r_real
        assert body["r_imag"] == payload.r_imag
        assert body["gain_bands"] == [list(b) for b in payload.gain_bands]

    def test_invalid_pump_combination_is_422(self) -> None:
        cfg = {"pump": {"rabi": 100.0, "power_dbm": -120.0, "k_factor": 1e9}}
        resp = self.client.post("/spectrum", json=cfg)
        assert resp.status_code == 422

    def test_missing_pump_is_422_with_named_error(self) -> None:
        resp = self.client.post("/spectrum", json={"device": {"n_levels": 2}})
        assert resp.status_code == 422
        assert "ValueError" in resp.json()["detail"]

    def test_domain_error_is_422_with_named_error(self) -> None:
        cfg = {
            "device": {"flux_ratio": 0.47},
            "pump": {"rabi": 100.0, "omega_pump": 4.0},
            "probe": {"f_min": 3.9, "f_max": 4.1, "n_points": 3},
        }
        resp = self.client.post("/spectrum", json=cfg)
        assert resp.status_code == 422
        assert "TransmonRegimeError" in resp.json()["detail"]
