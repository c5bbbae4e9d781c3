"""Dense superoperator algebra for the driven transmon master equation.

The generator is

    d rho/dt = -i[H, rho] + sum_{m=1}^{N-1} m Gamma1 D[|m-1><m|] rho
               + dephasing D[N_op] rho,

with H = sum_m Delta_m |m><m| - i (Omega/2)(Sigma_+ e^{i phi} - Sigma_- e^{-i phi})
in the pump rotating frame. Relaxation is a set of individual level-to-level
collapse channels with rates m*Gamma1, not a single collective Sigma_- channel.

Vectorization is column-stacking: vec(rho) stacks the columns of rho, so
A rho B <-> (B^T kron A) vec(rho). All rates and energies here are angular
(rad/ns); times are ns.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .errors import ConvergenceFailure, DegenerateSteadyState, DimensionMismatch
from .model import MHZ_TO_ANG, DeviceParams, PumpFrameModel

STEADY_RESIDUAL_TOL = 1e-10
DEGENERACY_TOL = 1e-9


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.flatten(order="F")


def unvec(x: np.ndarray) -> np.ndarray:
    n = math.isqrt(x.size)
    if n * n != x.size:
        raise DimensionMismatch(f"vector of length {x.size} is not a square matrix")
    return x.reshape(n, n, order="F")


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of left multiplication, rho -> a rho."""
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of right multiplication, rho -> rho b."""
    return np.kron(b.T, np.eye(b.shape[0]))


def hamiltonian(model: PumpFrameModel) -> np.ndarray:
    """Pump-frame Hamiltonian, angular units; Hermitian by construction."""
    om = MHZ_TO_ANG * model.omega_pump_rabi
    phase = np.exp(1j * model.pump_phase)
    h = np.diag(model.detunings).astype(complex)
    h += -1j * (om / 2.0) * (model.sigma_plus * phase - model.sigma_minus / phase)
    return h


def dissipator(op: np.ndarray, rate: float) -> np.ndarray:
    """Superoperator of rate * D[op], D[X]rho = X rho X' - {X'X, rho}/2."""
    if rate < 0:
        raise ValueError("dissipator rate must be non-negative")
    xdx = op.conj().T @ op
    return rate * (np.kron(op.conj(), op) - 0.5 * (spre(xdx) + spost(xdx)))


def liouvillian_of_hamiltonian(h: np.ndarray) -> np.ndarray:
    return -1j * (spre(h) - spost(h))


def build_liouvillian(model: PumpFrameModel, params: DeviceParams) -> np.ndarray:
    """Full generator for the driven, damped multilevel transmon."""
    n = model.n_levels
    if n != params.n_levels:
        raise DimensionMismatch(
            f"model has {n} levels but params specify {params.n_levels}"
        )
    l_total = liouvillian_of_hamiltonian(hamiltonian(model))
    g1 = MHZ_TO_ANG * params.gamma1
    for m in range(1, n):
        op = np.zeros((n, n), dtype=complex)
        op[m - 1, m] = 1.0
        l_total += dissipator(op, m * g1)
    # Rate 2*Gamma_phi on the number operator: the (m, n) coherence then
    # dephases at Gamma_phi*(m-n)^2, so the 0-1 linewidth is
    # Gamma1/2 + Gamma_phi = gamma, the quoted total decoherence rate.
    n_op = np.diag(np.arange(n, dtype=float)).astype(complex)
    l_total += dissipator(n_op, 2.0 * MHZ_TO_ANG * params.gamma_phi)
    return l_total


def _trace_row(dim_sq: int) -> np.ndarray:
    n = math.isqrt(dim_sq)
    row = np.zeros(dim_sq, dtype=complex)
    row[np.arange(n) * (n + 1)] = 1.0
    return row


def steady_state(l_op: np.ndarray) -> np.ndarray:
    """Unique stationary density matrix of the generator.

    Solves the bordered system (one row of L replaced by the trace constraint)
    by LU with partial pivoting, then verifies the residual against the full L.
    A singular-value diagnosis runs only if that fails.
    """
    dim_sq = l_op.shape[0]
    bordered = l_op.copy()
    bordered[0, :] = _trace_row(dim_sq)
    rhs = np.zeros(dim_sq, dtype=complex)
    rhs[0] = 1.0
    try:
        x = np.linalg.solve(bordered, rhs)
    except np.linalg.LinAlgError:
        _diagnose_degeneracy(l_op)
        raise
    scale = np.linalg.norm(l_op) * np.linalg.norm(x)
    residual = np.linalg.norm(l_op @ x)
    if not np.isfinite(residual) or residual > STEADY_RESIDUAL_TOL * max(scale, 1.0):
        _diagnose_degeneracy(l_op)
        raise ConvergenceFailure(
            f"steady-state residual {residual:.2e} exceeds tolerance"
        )
    rho = unvec(x)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    lowest = np.linalg.eigvalsh(rho).min()
    if lowest < -1e-8:
        raise ConvergenceFailure(
            f"steady state has negative eigenvalue {lowest:.2e}"
        )
    return rho


def _diagnose_degeneracy(l_op: np.ndarray) -> None:
    svals = np.linalg.svd(l_op, compute_uv=False)
    if svals[-2] < DEGENERACY_TOL * svals[0]:
        raise DegenerateSteadyState(
            "generator has a degenerate null space "
            f"(second singular value {svals[-2]:.2e} vs largest {svals[0]:.2e})"
        )


def propagate(l_op: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    """exp(L t) applied to rho0; t in ns, t >= 0."""
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    if rho0.shape[0] ** 2 != l_op.shape[0]:
        raise DimensionMismatch(
            f"state dim {rho0.shape[0]} incompatible with generator dim {l_op.shape[0]}"
        )
    if t == 0.0:
        return rho0.copy()
    x = expm(l_op * t) @ vec(rho0)
    rho = unvec(x)
    rho = 0.5 * (rho + rho.conj().T)
    drift = abs(np.trace(rho).real - 1.0)
    if drift > 1e-8:
        raise ConvergenceFailure(f"trace drifted by {drift:.2e} during propagation")
    return rho / np.trace(rho).real
