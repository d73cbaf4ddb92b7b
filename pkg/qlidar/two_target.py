"""
Dos blancos incoherentes: QFI en forma cerrada para las separaciones
(Δt, Δω), trazas de conmutadores y el estado mixto en base finita.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from qlidar import engine
from qlidar.infra.quadrature import QuadratureGrid
from qlidar.optics import (
    pulse_overlap,
    time_amplitude,
    time_amplitude_gradient,
    two_photon_amplitude,
    two_photon_amplitude_gradient,
    two_photon_overlap,
)
from qlidar.schemas import (
    DensityOperator,
    MetrologyError,
    QfiReport,
    RelativeKinematics,
    TwoTargetQfiInputs,
    TwoTargetScene,
    build,
)

logger = logging.getLogger(__name__)

DELTA_NAMES = ("delta_t", "delta_omega")
RELATIVE_NAMES = ("delta_x", "delta_beta")


class MixedState(BaseModel):
    """ρ en base ortonormal finita, con sus autovalores y el solapamiento δ."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    density: DensityOperator
    eigenvalues: np.ndarray
    overlap: complex


class RelativeSeparation(BaseModel):
    """(Δt, Δω) exactos y en la aproximación no relativista."""

    model_config = ConfigDict(frozen=True)

    delta_time: float
    delta_frequency: float
    approx_delta_time: float
    approx_delta_frequency: float


def inputs_from_scene(scene: TwoTargetScene) -> TwoTargetQfiInputs:
    """Entradas de la QFI a partir de una escena."""
    return TwoTargetQfiInputs(
        sigma=scene.bandwidth,
        kappa=scene.kappa,
        delta_time=scene.delta_time,
        delta_frequency=scene.delta_frequency,
    )


def _require_separated(inputs: TwoTargetQfiInputs) -> None:
    if inputs.is_degenerate:
        raise MetrologyError(
            component="two_target",
            code="DEGENERATE_POINT",
            message=(
                "Δt = Δω = 0: el límite depende de la dirección; perturbe el "
                "punto o evalúe el límite a lo largo de un eje"
            ),
            details={"sigma": inputs.sigma, "kappa": inputs.kappa},
        )


# ========== Formas cerradas ==========


def qfi_two(inputs: TwoTargetQfiInputs) -> np.ndarray:
    """
    QFI 2×2 sobre (Δt, Δω).

    H_ΔtΔt = σ² - Δω²/g, H_ΔωΔω = 1/(4(1-κ²)σ²) - Δt²/g, H_ΔtΔω = ΔtΔω/g,
    con g = 4(e^ε - 1). Se usa 1/g, que tiende a 0 sin desbordar para ε grande.

    Raises:
        MetrologyError: DEGENERATE_POINT en Δt = Δω = 0
    """
    _require_separated(inputs)
    sigma, kappa = inputs.sigma, inputs.kappa
    dt, dw = inputs.delta_time, inputs.delta_frequency
    inv_gap = inputs.inverse_gap_factor
    h_tt = sigma**2 - dw**2 * inv_gap
    h_ww = 1.0 / (4.0 * (1.0 - kappa**2) * sigma**2) - dt**2 * inv_gap
    h_tw = dt * dw * inv_gap
    return np.array([[h_tt, h_tw], [h_tw, h_ww]])


def commutator_trace_two(inputs: TwoTargetQfiInputs) -> complex:
    """
    Tr(ρ[L_Δt, L_Δω]) = i(ε/(e^ε - 1) - 1) ≈ -iε/2 para ε pequeño.

    Raises:
        MetrologyError: DEGENERATE_POINT en Δt = Δω = 0
    """
    _require_separated(inputs)
    eps = inputs.epsilon
    if math.isinf(eps):
        return -1j
    # ε/(e^ε - 1) = εe^-ε/(1 - e^-ε), estable para ε grande
    return 1j * (eps * math.exp(-eps) / -math.expm1(-eps) - 1.0)


def two_target_report(inputs: TwoTargetQfiInputs) -> QfiReport:
    """Informe QFI en forma cerrada (matriz, trazas y saturabilidad)."""
    qfi = qfi_two(inputs)
    trace = commutator_trace_two(inputs)
    traces = np.array([[0j, trace], [-trace, 0j]])
    return QfiReport(
        parameter_names=DELTA_NAMES,
        qfi_matrix=qfi,
        commutator_traces=traces,
        saturable=engine.saturability(qfi, traces),
    )


def relative_kinematics_qfi(
    inputs: TwoTargetQfiInputs, kinematics: RelativeKinematics
) -> np.ndarray:
    """
    QFI sobre (Δx, Δβ) con Jacobiano diag(2/c, -2ω̄₀).

    Válido en el régimen no relativista (Δt ≈ 2Δx/c, Δω ≈ -2Δβω̄₀).
    """
    jac = np.diag([2.0 / kinematics.light_speed, -2.0 * kinematics.omega0])
    report = engine.reparameterize(two_target_report(inputs), jac, RELATIVE_NAMES)
    return report.qfi_matrix


def relative_from_targets(
    x_first: float,
    beta_first: float,
    x_second: float,
    beta_second: float,
    omega0: float,
    light_speed: float = 1.0,
) -> RelativeSeparation:
    """
    Separaciones de dos blancos: exactas por el canal Doppler y aproximadas.
    """
    for beta in (beta_first, beta_second):
        if not -1.0 < beta < 1.0:
            raise MetrologyError(
                component="two_target",
                code="INVALID_PARAMETER",
                message=f"|beta| debe ser < 1, recibido {beta}",
            )
    kin = build(
        RelativeKinematics,
        "two_target",
        delta_x=x_first - x_second,
        delta_beta=beta_first - beta_second,
        omega0=omega0,
        light_speed=light_speed,
    )

    def arrival(x: float, beta: float) -> float:
        return 2.0 * x / (light_speed * (1.0 - beta))

    def frequency(beta: float) -> float:
        return omega0 * (1.0 - beta) / (1.0 + beta)

    return RelativeSeparation(
        delta_time=arrival(x_first, beta_first) - arrival(x_second, beta_second),
        delta_frequency=frequency(beta_first) - frequency(beta_second),
        approx_delta_time=2.0 * kin.delta_x / light_speed,
        approx_delta_frequency=-2.0 * kin.delta_beta * omega0,
    )


# ========== Estado mixto ==========


def mixed_state(scene: TwoTargetScene) -> MixedState:
    """
    ρ = ½|ψ₁⟩⟨ψ₁| + ½|ψ₂⟩⟨ψ₂| en la base ortonormal generada por los
    retornos y sus derivadas (dimensión 4 separable, 6 entrelazada).

    Returns:
        MixedState con autovalores (1 ± |δ|)/2 y ceros
    """
    first, second = scene.pulses()
    if scene.kappa == 0.0:
        grid = QuadratureGrid.for_pulse(scene.centroid_time, scene.bandwidth)
        overlap = pulse_overlap(first, second)
        psis = [time_amplitude(p, *grid.nodes) for p in (first, second)]
        gradients = [time_amplitude_gradient(p, *grid.nodes) for p in (first, second)]
        directions = [g[0] for g in gradients]
    else:
        states = scene.states()
        grid = QuadratureGrid.for_two_photon(
            scene.centroid_time, 0.0, scene.bandwidth, scene.bandwidth, scene.kappa
        )
        overlap = two_photon_overlap(*states)
        psis = [two_photon_amplitude(s, *grid.nodes) for s in states]
        gradients = [two_photon_amplitude_gradient(s, *grid.nodes) for s in states]
        directions = [g[0] for g in gradients] + [g[1] for g in gradients]

    vectors = [v * grid.root_weights for v in psis + directions]
    basis = engine.orthonormal_basis(vectors)
    matrix = np.zeros((basis.shape[1], basis.shape[1]), dtype=complex)
    for vector in vectors[:2]:
        coeffs = basis.conj().T @ vector
        coeffs /= np.linalg.norm(coeffs)
        matrix += 0.5 * np.outer(coeffs, coeffs.conj())

    rho = engine.density(matrix, [f"e{j + 1}" for j in range(basis.shape[1])])
    eigenvalues, _ = rho.eigen()
    logger.debug(
        "Estado mixto construido",
        extra={"dim": rho.dim, "overlap_abs": abs(overlap)},
    )
    return MixedState(density=rho, eigenvalues=eigenvalues, overlap=overlap)
