from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirrorqed.errors import ConvergenceFailure, DegenerateSteadyState, DimensionMismatch
from mirrorqed.lindblad import (
    build_liouvillian,
    dissipator,
    hamiltonian,
    propagate,
    spost,
    spre,
    steady_state,
    unvec,
    vec,
)
from mirrorqed.model import (
    MHZ_TO_ANG,
    DeviceParams,
    build_pump_frame_model,
    lowering_operator,
    transition_frequency,
)


def _random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2.0


def _random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def _random_model(rng: np.random.Generator, params: DeviceParams):
    omega_pump = transition_frequency(params) + rng.uniform(-0.3, 0.3)
    rabi = rng.uniform(0.0, 400.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return build_pump_frame_model(params, omega_pump, rabi, phase=phase)


def _explicit_rhs(model, params: DeviceParams, rho: np.ndarray) -> np.ndarray:
    """Master-equation right-hand side assembled term by term, no superoperators."""
    h = hamiltonian(model)
    out = -1j * (h @ rho - rho @ h)
    n = model.n_levels
    g1 = MHZ_TO_ANG * params.gamma1
    for m in range(1, n):
        # Independent decay channel per step: bare projector, rate m*Gamma1.
        op = np.zeros((n, n), dtype=complex)
        op[m - 1, m] = 1.0
        rate = m * g1
        out += rate * (
            op @ rho @ op.conj().T
            - 0.5 * (op.conj().T @ op @ rho + rho @ op.conj().T @ op)
        )
    n_op = np.diag(np.arange(n, dtype=float)).astype(complex)
    gphi2 = 2.0 * MHZ_TO_ANG * params.gamma_phi
    out += gphi2 * (
        n_op @ rho @ n_op - 0.5 * (n_op @ n_op @ rho + rho @ n_op @ n_op)
    )
    return out


class TestVectorization:
    def test_round_trip(self, rng: np.random.Generator) -> None:
        rho = _random_hermitian(rng, 5)
        assert np.array_equal(unvec(vec(rho)), rho)

    def test_column_stacking_order(self) -> None:
        rho = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
        assert np.array_equal(vec(rho), np.array([1.0, 3.0, 2.0, 4.0], dtype=complex))

    def test_unvec_rejects_non_square_length(self) -> None:
        with pytest.raises(DimensionMismatch):
            unvec(np.zeros(5, dtype=complex))

    def test_spre_spost_multiply_correctly(self, rng: np.random.Generator) -> None:
        a = _random_hermitian(rng, 4)
        b = _random_hermitian(rng, 4)
        rho = _random_hermitian(rng, 4)
        assert np.allclose(unvec(spre(a) @ vec(rho)), a @ rho, atol=1e-12)
        assert np.allclose(unvec(spost(b) @ vec(rho)), rho @ b, atol=1e-12)


class TestHamiltonian:
    def test_hermitian(self, params5: DeviceParams, rng: np.random.Generator) -> None:
        model = _random_model(rng, params5)
        h = hamiltonian(model)
        assert np.allclose(h, h.conj().T, atol=1e-14)

    def test_diagonal_carries_detunings(self, params5: DeviceParams) -> None:
        model = build_pump_frame_model(params5, 4.50, 150.0)
        h = hamiltonian(model)
        assert np.allclose(np.diag(h).real, model.detunings, atol=1e-12)

    def test_drive_block_amplitude(self, params2: DeviceParams) -> None:
        model = build_pump_frame_model(params2, 4.59, 100.0, phase=0.0)
        h = hamiltonian(model)
        # -i(Omega/2)(sp - sm) at zero phase: off-diagonal magnitude Omega/2.
        assert abs(h[1, 0]) == pytest.approx(MHZ_TO_ANG * 50.0, rel=1e-12)


class TestDissipator:
    def test_decay_action_on_excited_state(self) -> None:
        sm = lowering_operator(2)
        d = dissipator(sm, 2.0)
        rho = np.diag([0.0, 1.0]).astype(complex)
        out = unvec(d @ vec(rho))
        assert out[0, 0] == pytest.approx(2.0)
        assert out[1, 1] == pytest.approx(-2.0)

    def test_rejects_negative_rate(self) -> None:
        with pytest.raises(ValueError):
            dissipator(lowering_operator(2), -1.0)

    def test_trace_free(self, rng: np.random.Generator) -> None:
        d = dissipator(_random_hermitian(rng, 3), 1.7)
        rho = _random_density(rng, 3)
        assert abs(np.trace(unvec(d @ vec(rho)))) < 1e-12


class TestLiouvillian:
    def test_matches_explicit_rhs_on_random_pairs(
        self, params5: DeviceParams, rng: np.random.Generator
    ) -> None:
        for _ in range(100):
            model = _random_model(rng, params5)
            l_op = build_liouvillian(model, params5)
            rho = _random_hermitian(rng, params5.n_levels)
            lhs = unvec(l_op @ vec(rho))
            rhs = _explicit_rhs(model, params5, rho)
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_trace_preserving_on_random_states(
        self, params5: DeviceParams, rng: np.random.Generator
    ) -> None:
        model = _random_model(rng, params5)
        l_op = build_liouvillian(model, params5)
        for _ in range(20):
            rho = _random_hermitian(rng, params5.n_levels)
            assert abs(np.trace(unvec(l_op @ vec(rho)))) < 1e-10

    def test_contractive_spectrum(
        self, params5: DeviceParams, rng: np.random.Generator
    ) -> None:
        for _ in range(5):
            model = _random_model(rng, params5)
            l_op = build_liouvillian(model, params5)
            eigs = np.linalg.eigvals(l_op)
            assert eigs.real.max() <= 1e-9

    def test_has_null_eigenvalue(self, params5: DeviceParams) -> None:
        model = build_pump_frame_model(params5, 4.59, 200.0)
        l_op = build_liouvillian(model, params5)
        eigs = np.linalg.eigvals(l_op)
        assert np.min(np.abs(eigs)) <= 1e-9


class TestSteadyState:
    def test_density_matrix_invariants(
        self, params5: DeviceParams, rng: np.random.Generator
    ) -> None:
        for _ in range(5):
            model = _random_model(rng, params5)
            rho = steady_state(build_liouvillian(model, params5))
            assert np.allclose(rho, rho.conj().T, atol=1e-10)
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
            assert np.linalg.eigvalsh(rho).min() >= -1e-8

    def test_resonant_two_level_matches_bloch_formula(
        self, params2: DeviceParams
    ) -> None:
        w10 = transition_frequency(params2)
        g1 = params2.gamma1
        gamma = params2.gamma
        for rabi in (30.0, 100.0, 300.0):
            model = build_pump_frame_model(params2, w10, rabi)
            rho = steady_state(build_liouvillian(model, params2))
            expected = rabi**2 / (2.0 * (g1 * gamma + rabi**2))
            assert rho[1, 1].real == pytest.approx(expected, abs=1e-10)

    def test_strong_drive_saturates_at_half(self, params2: DeviceParams) -> None:
        w10 = transition_frequency(params2)
        model = build_pump_frame_model(params2, w10, 2000.0)
        rho = steady_state(build_liouvillian(model, params2))
        assert abs(rho[1, 1].real - 0.5) < 0.01

    def test_no_drive_settles_to_ground(self, params5: DeviceParams) -> None:
        model = build_pump_frame_model(params5, 4.59, 0.0)
        rho = steady_state(build_liouvillian(model, params5))
        assert rho[0, 0].real == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_generator_is_diagnosed(self) -> None:
        # Pure dephasing conserves every population separately, so the
        # stationary state is not unique.
        n_op = np.diag(np.arange(3, dtype=float)).astype(complex)
        l_op = dissipator(n_op, 1.0)
        with pytest.raises(DegenerateSteadyState):
            steady_state(l_op)


class TestPropagate:
    def test_relaxation_reaches_one_over_e(self, params2: DeviceParams) -> None:
        model = build_pump_frame_model(params2, transition_frequency(params2), 0.0)
        l_op = build_liouvillian(model, params2)
        rho0 = np.diag([0.0, 1.0]).astype(complex)
        t = 1.0 / (MHZ_TO_ANG * params2.gamma1)
        rho = propagate(l_op, rho0, t)
        assert rho[1, 1].real == pytest.approx(np.exp(-1.0), abs=1e-6)

    def test_zero_time_is_identity(self, params5: DeviceParams, rng) -> None:
        model = _random_model(rng, params5)
        l_op = build_liouvillian(model, params5)
        rho0 = _random_density(rng, params5.n_levels)
        assert np.array_equal(propagate(l_op, rho0, 0.0), rho0)

    def test_steady_state_is_fixed_point(self, params5: DeviceParams) -> None:
        model = build_pump_frame_model(params5, 4.59, 200.0)
        l_op = build_liouvillian(model, params5)
        rho_ss = steady_state(l_op)
        t = 5.0 / (MHZ_TO_ANG * params5.gamma1)
        drift = np.linalg.norm(vec(propagate(l_op, rho_ss, t)) - vec(rho_ss))
        assert drift < 1e-7

    @given(t_frac=st.floats(min_value=0.0, max_value=1.0), seed=st.integers(0, 2**31))
    @settings(max_examples=25, deadline=None)
    def test_trace_preserved_along_evolution(self, t_frac: float, seed: int) -> None:
        params = DeviceParams(
            e_j_max=7.97, e_c=0.39, n_levels=4, gamma1=45.0, gamma_phi=2.7
        )
        rng = np.random.default_rng(seed)
        model = _random_model(rng, params)
        l_op = build_liouvillian(model, params)
        rho0 = _random_density(rng, 4)
        t = t_frac * 10.0 / (MHZ_TO_ANG * params.gamma1)
        rho = propagate(l_op, rho0, t)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-8)

    def test_rejects_mismatched_state(self, params5: DeviceParams) -> None:
        model = build_pump_frame_model(params5, 4.59, 100.0)
        l_op = build_liouvillian(model, params5)
        with pytest.raises(DimensionMismatch):
            propagate(l_op, np.eye(3, dtype=complex) / 3.0, 1.0)

    def test_negative_time_rejected(self, params2: DeviceParams) -> None:
        model = build_pump_frame_model(params2, 4.59, 0.0)
        l_op = build_liouvillian(model, params2)
        with pytest.raises(ValueError):
            propagate(l_op, np.diag([1.0, 0.0]).astype(complex), -1.0)
