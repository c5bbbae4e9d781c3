"""Transmon device model and its rotating-frame description.

A flux-tunable transmon sits at the shorted end of a semi-infinite waveguide.
Its levels form a weakly anharmonic (Duffing) ladder,

    omega_m = m * omega10 + alpha * m * (m - 1) / 2,      alpha = -E_C,

and a strong pump at omega_pump turns the lab-frame Hamiltonian into a static
one with level detunings Delta_m = omega_m - m * omega_pump.

Unit convention: every user-facing frequency or rate is cyclic (GHz for
frequencies, MHz for rates, as a datasheet would quote them). Everything that
enters dynamics is angular, in rad/ns, and the conversion happens exactly once,
in this module. Times elsewhere in the package are therefore in ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TransmonRegimeError

TWO_PI = 2.0 * math.pi

# cyclic GHz -> rad/ns and cyclic MHz -> rad/ns
GHZ_TO_ANG = TWO_PI
MHZ_TO_ANG = TWO_PI * 1e-3

MIN_EJ_EC_RATIO = 10.0
MAX_LEVELS = 12


@dataclass(frozen=True)
class DeviceParams:
    """Static device description, all values cyclic (GHz / MHz)."""

    e_j_max: float
    e_c: float
    n_levels: int
    gamma1: float
    gamma_phi: float
    flux_ratio: float = 0.0

    def __post_init__(self) -> None:
        if self.e_j_max <= 0 or self.e_c <= 0:
            raise ValueError("e_j_max and e_c must be positive")
        if self.gamma1 <= 0:
            raise ValueError("gamma1 must be positive")
        if self.gamma_phi < 0:
            raise ValueError("gamma_phi must be non-negative")
        if not 2 <= self.n_levels <= MAX_LEVELS:
            raise ValueError(f"n_levels must be in [2, {MAX_LEVELS}]")
        if self.e_j_max / self.e_c < MIN_EJ_EC_RATIO:
            raise TransmonRegimeError(
                f"E_J/E_C = {self.e_j_max / self.e_c:.2f} < {MIN_EJ_EC_RATIO}; "
                "the asymptotic transmon formula does not apply"
            )

    @property
    def gamma(self) -> float:
        """Total decoherence rate gamma = Gamma1/2 + Gamma_phi, cyclic MHz."""
        return self.gamma1 / 2.0 + self.gamma_phi

    @property
    def alpha(self) -> float:
        """Anharmonicity omega21 - omega10 = -E_C, cyclic GHz."""
        return -self.e_c


def default_device() -> DeviceParams:
    """The demonstration device: E_J/h = 7.97 GHz, E_C/h = 0.39 GHz, N = 5,
    Gamma1/2pi = 45 MHz, Gamma_phi/2pi = 2.7 MHz, at the flux sweet spot."""
    return DeviceParams(
        e_j_max=7.97, e_c=0.39, n_levels=5, gamma1=45.0, gamma_phi=2.7, flux_ratio=0.0
    )


def ej_of_flux(e_j_max: float, flux_ratio: float) -> float:
    """Flux-tuned Josephson energy E_J(Phi) = E_J |cos(pi Phi/Phi0)|, cyclic GHz."""
    return e_j_max * abs(math.cos(math.pi * flux_ratio))


def omega10(e_j: float, e_c: float) -> float:
    """Ground-to-first transition sqrt(8 E_J E_C) - E_C, cyclic GHz."""
    if e_j / e_c < MIN_EJ_EC_RATIO:
        raise TransmonRegimeError(
            f"E_J/E_C = {e_j / e_c:.2f} < {MIN_EJ_EC_RATIO} (e.g. flux too close "
            "to half a quantum); the asymptotic formula is unreliable"
        )
    return math.sqrt(8.0 * e_j * e_c) - e_c


def ladder(omega10_ghz: float, alpha: float, n_levels: int, omega_pump: float) -> np.ndarray:
    """Rotating-frame detunings Delta_m, angular rad/ns, m = 0..N-1.

    Delta_m = 2pi * (m*(omega10 - omega_pump) + alpha*m*(m-1)/2), so Delta_0 = 0
    and a resonant pump makes Delta_1 = 0 as well.
    """
    if n_levels < 2:
        raise ValueError("need at least two levels")
    m = np.arange(n_levels, dtype=float)
    return GHZ_TO_ANG * (m * (omega10_ghz - omega_pump) + alpha * m * (m - 1) / 2.0)


def lowering_operator(n_levels: int) -> np.ndarray:
    """Sigma_minus = sum_m sqrt(m) |m-1><m|."""
    sm = np.zeros((n_levels, n_levels), dtype=complex)
    for m in range(1, n_levels):
        sm[m - 1, m] = math.sqrt(m)
    return sm


@dataclass(frozen=True, eq=False)
class PumpFrameModel:
    """Everything needed to build the generator in the pump rotating frame.

    detunings are angular (rad/ns); omega_pump is cyclic GHz and
    omega_pump_rabi cyclic MHz, kept for bookkeeping and unit conversion.
    """

    detunings: np.ndarray
    sigma_minus: np.ndarray
    sigma_plus: np.ndarray
    sigma_p: np.ndarray
    omega_pump: float
    omega_pump_rabi: float
    pump_phase: float

    @property
    def n_levels(self) -> int:
        return len(self.detunings)


def build_pump_frame_model(
    params: DeviceParams,
    omega_pump: float,
    rabi: float,
    phase: float = 0.0,
    alpha: float | None = None,
) -> PumpFrameModel:
    """Assemble the rotating-frame model for the given pump.

    omega_pump cyclic GHz, rabi cyclic MHz. alpha defaults to -E_C.
    """
    if rabi < 0:
        raise ValueError("rabi must be non-negative")
    e_j = ej_of_flux(params.e_j_max, params.flux_ratio)
    w10 = omega10(e_j, params.e_c)
    if alpha is None:
        alpha = params.alpha
    dets = ladder(w10, alpha, params.n_levels, omega_pump)
    sm = lowering_operator(params.n_levels)
    sp = sm.conj().T
    sigma_p = -1j * (sp - sm)
    return PumpFrameModel(
        detunings=dets,
        sigma_minus=sm,
        sigma_plus=sp,
        sigma_p=sigma_p,
        omega_pump=omega_pump,
        omega_pump_rabi=rabi,
        pump_phase=phase,
    )


def transition_frequency(params: DeviceParams) -> float:
    """omega10 at the device's flux point, cyclic GHz."""
    return omega10(ej_of_flux(params.e_j_max, params.flux_ratio), params.e_c)
