"""
Óptica gaussiana: pulsos de un fotón, estados de dos fotones, canal de
retardo/Doppler e integrales de solapamiento.
"""

import logging
import math
from typing import Union

import numpy as np

from qlidar.infra.quadrature import QuadratureGrid
from qlidar.schemas import (
    GaussianPulse,
    MetrologyError,
    TargetKinematics,
    TwoPhotonState,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

BANDWIDTH_RTOL = 1e-12


# ========== Canal de retardo y Doppler ==========


def doppler_factor(beta: float) -> float:
    """(1-β)/(1+β)."""
    if not -1.0 < beta < 1.0:
        raise MetrologyError(
            component="optics",
            code="INVALID_PARAMETER",
            message=f"|beta| debe ser < 1, recibido {beta}",
        )
    return (1.0 - beta) / (1.0 + beta)


def doppler_transform(pulse: GaussianPulse, target: TargetKinematics) -> GaussianPulse:
    """
    Pulso devuelto por un blanco en x con velocidad β.

    Args:
        pulse: Pulso saliente (t̄₀, ω̄₀, σ₀)
        target: Cinemática del blanco

    Returns:
        GaussianPulse con σ = kσ₀, ω̄ = kω̄₀, t̄ = t̄₀ + 2x/(c(1-β)), k = (1-β)/(1+β)

    Raises:
        MetrologyError: Si |β| >= 1
    """
    k = doppler_factor(target.beta)
    return GaussianPulse(
        central_time=pulse.central_time
        + 2.0 * target.range_x / (target.light_speed * (1.0 - target.beta)),
        central_frequency=k * pulse.central_frequency,
        bandwidth=k * pulse.bandwidth,
    )


def doppler_transform_state(
    state: TwoPhotonState, target: TargetKinematics
) -> TwoPhotonState:
    """Aplica el canal al fotón señal; el idler se conserva."""
    return TwoPhotonState(
        signal=doppler_transform(state.signal, target),
        idler=state.idler,
        kappa=state.kappa,
    )


def emission_time(
    received: ArrayLike, pulse: GaussianPulse, target: TargetKinematics
) -> ArrayLike:
    """Inversa de τ(t): instante de emisión del fotón recibido en τ."""
    k = doppler_factor(target.beta)
    return (
        pulse.central_time
        + k * (np.asarray(received) - pulse.central_time)
        - 2.0 * target.range_x / (target.light_speed * (1.0 + target.beta))
    )


def returned_amplitude(
    outgoing: GaussianPulse, target: TargetKinematics, received: np.ndarray
) -> np.ndarray:
    """
    Amplitud devuelta ψ(τ) ∝ ψ₀(t(τ)), renormalizada numéricamente.

    La constante de normalización se obtiene por cuadratura sobre la malla
    del pulso Doppler, no de forma simbólica.
    """
    returned = doppler_transform(outgoing, target)
    grid = QuadratureGrid.for_pulse(returned.central_time, returned.bandwidth)

    def raw(tau: np.ndarray) -> np.ndarray:
        return time_amplitude(outgoing, emission_time(tau, outgoing, target))

    norm_sq = float(np.real(grid.integrate(lambda tau: np.abs(raw(tau)) ** 2)))
    return raw(np.asarray(received)) / math.sqrt(norm_sq)


# ========== Amplitudes ==========


def time_amplitude(pulse: GaussianPulse, t: ArrayLike) -> np.ndarray:
    """ψ(t) = (2σ²/π)^{1/4} exp[-(t-t̄)²σ² - iω̄(t-t̄)]."""
    s = np.asarray(t, dtype=float) - pulse.central_time
    sigma = pulse.bandwidth
    prefactor = (2.0 * sigma**2 / math.pi) ** 0.25
    return prefactor * np.exp(-(s**2) * sigma**2 - 1j * pulse.central_frequency * s)


def frequency_amplitude(pulse: GaussianPulse, omega: ArrayLike) -> np.ndarray:
    """
    ψ̃(ω) = (2πσ²)^{-1/4} exp[-(ω-ω̄)²/(4σ²) + iωt̄].

    ψ(t) = (2π)^{-1/2} ∫ ψ̃(ω) e^{-iωt} dω reproduce time_amplitude.
    """
    omega = np.asarray(omega, dtype=float)
    w = omega - pulse.central_frequency
    sigma = pulse.bandwidth
    prefactor = (2.0 * math.pi * sigma**2) ** -0.25
    return prefactor * np.exp(
        -(w**2) / (4.0 * sigma**2) + 1j * omega * pulse.central_time
    )


def time_amplitude_gradient(
    pulse: GaussianPulse, t: ArrayLike
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Derivadas analíticas (∂_t̄ψ, ∂_ω̄ψ, ∂_σψ).

    Returns:
        Tupla de arrays evaluados en t
    """
    s = np.asarray(t, dtype=float) - pulse.central_time
    sigma = pulse.bandwidth
    psi = time_amplitude(pulse, t)
    d_time = (2.0 * s * sigma**2 + 1j * pulse.central_frequency) * psi
    d_frequency = -1j * s * psi
    d_bandwidth = (0.5 / sigma - 2.0 * s**2 * sigma) * psi
    return d_time, d_frequency, d_bandwidth


def _two_photon_norm(state: TwoPhotonState) -> float:
    return (1.0 - state.kappa**2) ** 0.25 * math.sqrt(
        2.0 * state.signal.bandwidth * state.idler.bandwidth / math.pi
    )


def two_photon_amplitude(
    state: TwoPhotonState, t: ArrayLike, t_idler: ArrayLike
) -> np.ndarray:
    """Ψ(t, t_i) del par señal-idler con correlación κ."""
    s = np.asarray(t, dtype=float) - state.signal.central_time
    u = np.asarray(t_idler, dtype=float) - state.idler.central_time
    sigma = state.signal.bandwidth
    sigma_i = state.idler.bandwidth
    exponent = (
        -(s**2) * sigma**2
        - u**2 * sigma_i**2
        + 2.0 * state.kappa * s * u * sigma * sigma_i
        - 1j * state.signal.central_frequency * s
        - 1j * state.idler.central_frequency * u
    )
    return _two_photon_norm(state) * np.exp(exponent)


def two_photon_amplitude_gradient(
    state: TwoPhotonState, t: ArrayLike, t_idler: ArrayLike
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Derivadas (∂_t̄Ψ, ∂_ω̄Ψ, ∂_σΨ) respecto a los parámetros de la señal."""
    s = np.asarray(t, dtype=float) - state.signal.central_time
    u = np.asarray(t_idler, dtype=float) - state.idler.central_time
    sigma = state.signal.bandwidth
    sigma_i = state.idler.bandwidth
    kappa = state.kappa
    psi = two_photon_amplitude(state, t, t_idler)
    d_time = (
        1j * state.signal.central_frequency
        + 2.0 * s * sigma**2
        - 2.0 * kappa * u * sigma * sigma_i
    ) * psi
    d_frequency = -1j * s * psi
    d_bandwidth = (
        0.5 / sigma - 2.0 * s**2 * sigma + 2.0 * kappa * s * u * sigma_i
    ) * psi
    return d_time, d_frequency, d_bandwidth


# ========== Solapamientos ==========


def _check_bandwidths(first: float, second: float) -> None:
    if abs(first - second) > BANDWIDTH_RTOL * max(abs(first), abs(second)):
        raise MetrologyError(
            component="optics",
            code="INVALID_PARAMETER",
            message=f"Anchos de banda distintos: {first} != {second}",
            details={"first": first, "second": second},
        )


def pulse_overlap(a: GaussianPulse, b: GaussianPulse) -> complex:
    """
    δ = ⟨ψ_a|ψ_b⟩ para pulsos de igual σ.

    Returns:
        exp(-Δt²σ²/2 - Δω²/(8σ²) - iΔtΣω)

    Raises:
        MetrologyError: Si los anchos de banda difieren
    """
    _check_bandwidths(a.bandwidth, b.bandwidth)
    sigma = a.bandwidth
    dt = a.central_time - b.central_time
    dw = a.central_frequency - b.central_frequency
    mean_w = 0.5 * (a.central_frequency + b.central_frequency)
    return complex(
        np.exp(-0.5 * dt**2 * sigma**2 - dw**2 / (8.0 * sigma**2) - 1j * dt * mean_w)
    )


def two_photon_overlap(a: TwoPhotonState, b: TwoPhotonState) -> complex:
    """
    δ′ = ⟨Ψ_a|Ψ_b⟩ para estados que sólo difieren en t̄, ω̄ de la señal.

    Raises:
        MetrologyError: Si κ, σ o el idler no coinciden
    """
    if a.idler != b.idler or a.kappa != b.kappa:
        raise MetrologyError(
            component="optics",
            code="INVALID_PARAMETER",
            message="Los estados deben compartir idler y kappa",
        )
    _check_bandwidths(a.signal.bandwidth, b.signal.bandwidth)
    sigma = a.signal.bandwidth
    dt = a.signal.central_time - b.signal.central_time
    dw = a.signal.central_frequency - b.signal.central_frequency
    mean_w = 0.5 * (a.signal.central_frequency + b.signal.central_frequency)
    return complex(
        np.exp(
            -0.5 * dt**2 * sigma**2
            - dw**2 / (8.0 * (1.0 - a.kappa**2) * sigma**2)
            - 1j * dt * mean_w
        )
    )


def quadrature_overlap(a: GaussianPulse, b: GaussianPulse) -> complex:
    """⟨ψ_a|ψ_b⟩ por cuadratura Gauss-Hermite (referencia independiente)."""
    grid = QuadratureGrid.for_pulse(
        0.5 * (a.central_time + b.central_time), a.bandwidth
    )
    first = grid.embed(lambda t: time_amplitude(a, t))
    second = grid.embed(lambda t: time_amplitude(b, t))
    return grid.inner(first, second)


def quadrature_two_photon_overlap(a: TwoPhotonState, b: TwoPhotonState) -> complex:
    """⟨Ψ_a|Ψ_b⟩ por cuadratura 2-D sobre la malla rotada."""
    grid = QuadratureGrid.for_two_photon(
        0.5 * (a.signal.central_time + b.signal.central_time),
        a.idler.central_time,
        a.signal.bandwidth,
        a.idler.bandwidth,
        a.kappa,
    )
    first = grid.embed(lambda t, ti: two_photon_amplitude(a, t, ti))
    second = grid.embed(lambda t, ti: two_photon_amplitude(b, t, ti))
    return grid.inner(first, second)
