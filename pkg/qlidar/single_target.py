"""
Un blanco: SLDs y matrices QFI en forma cerrada para (t̄, ω̄, σ) y (x, β),
con fotón separable o par entrelazado.
"""

import logging
import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from qlidar import engine
from qlidar.infra.quadrature import QuadratureGrid
from qlidar.optics import (
    time_amplitude,
    time_amplitude_gradient,
    two_photon_amplitude,
    two_photon_amplitude_gradient,
)
from qlidar.schemas import (
    GaussianPulse,
    HermitianOperator,
    MetrologyError,
    QfiReport,
    SingleTargetProblem,
    TwoPhotonState,
    build,
)

logger = logging.getLogger(__name__)

LAMBDA_NAMES = ("t_bar", "omega_bar", "sigma")
MU_NAMES = ("x", "beta")

SldConvention = Literal["closed-form", "jacobian"]


class CommutatorReport(BaseModel):
    """Trazas Tr(ρ[L_i, L_j]) en forma cerrada."""

    model_config = ConfigDict(frozen=True)

    t_bar_omega_bar: complex
    t_bar_sigma: complex
    omega_bar_sigma: complex
    x_beta: complex


def _problem(sigma: float, kappa: float = 0.0) -> SingleTargetProblem:
    return build(SingleTargetProblem, "single_target", sigma=sigma, kappa=kappa)


# ========== Matrices QFI en λ = (t̄, ω̄, σ) ==========


def qfi_lambda_separable(sigma: float) -> np.ndarray:
    """
    QFI de un pulso gaussiano separable.

    Returns:
        diag(4σ², 1/σ², 2/σ²)

    Raises:
        MetrologyError: Si σ <= 0
    """
    _problem(sigma)
    return np.diag([4.0 * sigma**2, 1.0 / sigma**2, 2.0 / sigma**2])


def qfi_lambda_entangled(sigma: float, kappa: float) -> np.ndarray:
    """
    QFI del par entrelazado.

    Returns:
        diag(4σ², 1/((1-κ²)σ²), (2-κ²)/((1-κ²)σ²))

    Raises:
        MetrologyError: Si σ <= 0 o κ fuera de [0, κ_max]
    """
    _problem(sigma, kappa)
    squeeze = 1.0 - kappa**2
    return np.diag(
        [
            4.0 * sigma**2,
            1.0 / (squeeze * sigma**2),
            (2.0 - kappa**2) / (squeeze * sigma**2),
        ]
    )


def qfi_lambda(sigma: float, kappa: float = 0.0) -> np.ndarray:
    """Despacha a la forma separable (κ = 0) o entrelazada."""
    if kappa == 0.0:
        return qfi_lambda_separable(sigma)
    return qfi_lambda_entangled(sigma, kappa)


def sld_lambda(sigma: float, kappa: float = 0.0) -> tuple[HermitianOperator, ...]:
    """
    SLDs (L_t̄, L_ω̄, L_σ) en la base de forma cerrada.

    Returns:
        Matrices 3×3 para κ = 0 y 4×4 para κ > 0
    """
    _problem(sigma, kappa)
    if kappa == 0.0:
        l_time = (2.0 * sigma) * np.array(
            [[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex
        )
        l_freq = (1.0 / sigma) * np.array(
            [[0, 1j, 0], [-1j, 0, 0], [0, 0, 0]], dtype=complex
        )
        l_bw = (math.sqrt(2.0) / sigma) * np.array(
            [[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex
        )
    else:
        a = math.sqrt(1.0 - kappa)
        b = math.sqrt(1.0 + kappa)
        l_time = np.zeros((4, 4), dtype=complex)
        l_time[0, 1] = l_time[1, 0] = a
        l_time[0, 2] = l_time[2, 0] = b
        l_time *= sigma * math.sqrt(2.0)

        l_freq = np.zeros((4, 4), dtype=complex)
        l_freq[0, 1], l_freq[1, 0] = 1j / a, -1j / a
        l_freq[0, 2], l_freq[2, 0] = 1j / b, -1j / b
        l_freq /= sigma * math.sqrt(2.0)

        l_bw = np.zeros((4, 4), dtype=complex)
        l_bw[0, 3] = l_bw[3, 0] = (
            math.sqrt((2.0 - kappa**2) / (1.0 - kappa**2)) / sigma
        )
    return tuple(engine.hermitian(m) for m in (l_time, l_freq, l_bw))


def lambda_report(sigma: float, kappa: float = 0.0) -> QfiReport:
    """
    QFI calculada por el motor a partir de las SLDs de forma cerrada con
    ρ = |e₁⟩⟨e₁|.
    """
    slds = sld_lambda(sigma, kappa)
    dim = slds[0].dim
    rho = engine.pure_density(np.eye(dim)[0])
    return engine.qfi_from_slds(rho, slds, LAMBDA_NAMES)


# ========== Bases de forma cerrada sobre la malla ==========


def closed_form_basis(
    sigma: float,
    kappa: float = 0.0,
    t_bar: float = 0.0,
    omega_bar: float = 0.0,
    idler_bandwidth: Optional[float] = None,
) -> tuple[QuadratureGrid, np.ndarray]:
    """
    Base ortonormal de forma cerrada evaluada sobre la malla de cuadratura.

    Args:
        sigma: Ancho de banda de la señal
        kappa: Entrelazamiento (0 para el caso separable)
        t_bar: Tiempo central
        omega_bar: Frecuencia central
        idler_bandwidth: σ_i (por defecto igual a σ)

    Returns:
        (malla, matriz M×d con las columnas e_j)
    """
    _problem(sigma, kappa)
    pulse = GaussianPulse(
        central_time=t_bar, central_frequency=omega_bar, bandwidth=sigma
    )
    if kappa == 0.0:
        grid = QuadratureGrid.for_pulse(t_bar, sigma)
        (t,) = grid.nodes
        s = t - t_bar
        psi = time_amplitude(pulse, t)
        columns = [
            psi,
            2.0 * sigma * s * psi,
            (1.0 - 4.0 * s**2 * sigma**2) / math.sqrt(2.0) * psi,
        ]
        return grid, np.stack([c * grid.root_weights for c in columns], axis=1)

    sigma_i = idler_bandwidth or sigma
    state = TwoPhotonState(
        signal=pulse, idler=GaussianPulse(bandwidth=sigma_i), kappa=kappa
    )
    grid = QuadratureGrid.for_two_photon(t_bar, 0.0, sigma, sigma_i, kappa)
    t, ti = grid.nodes
    s = t - t_bar
    big_s, big_u = sigma * s, sigma_i * ti
    psi = two_photon_amplitude(state, t, ti)
    columns = [
        psi,
        math.sqrt(2.0 * (1.0 - kappa)) * (big_s + big_u) * psi,
        math.sqrt(2.0 * (1.0 + kappa)) * (big_s - big_u) * psi,
        2.0
        * sigma
        * math.sqrt((1.0 - kappa**2) / (2.0 - kappa**2))
        * (0.5 / sigma - 2.0 * s**2 * sigma + 2.0 * kappa * s * ti * sigma_i)
        * psi,
    ]
    return grid, np.stack([c * grid.root_weights for c in columns], axis=1)


def engine_slds(
    sigma: float, kappa: float = 0.0, t_bar: float = 0.0, omega_bar: float = 0.0
) -> QfiReport:
    """
    SLDs calculadas por el motor: ∂ψ analítico proyectado en la
    base de forma cerrada y fórmula espectral.
    """
    grid, basis = closed_form_basis(sigma, kappa, t_bar, omega_bar)
    pulse = GaussianPulse(
        central_time=t_bar, central_frequency=omega_bar, bandwidth=sigma
    )
    if kappa == 0.0:
        psi = time_amplitude(pulse, *grid.nodes)
        gradients = time_amplitude_gradient(pulse, *grid.nodes)
    else:
        state = TwoPhotonState(
            signal=pulse, idler=GaussianPulse(bandwidth=sigma), kappa=kappa
        )
        psi = two_photon_amplitude(state, *grid.nodes)
        gradients = two_photon_amplitude_gradient(state, *grid.nodes)

    coeffs = basis.conj().T @ (psi * grid.root_weights)
    rho = engine.pure_density(coeffs)
    drhos = []
    for gradient in gradients:
        d = basis.conj().T @ (gradient * grid.root_weights)
        drho = np.outer(d, coeffs.conj()) + np.outer(coeffs, d.conj())
        drhos.append(engine.hermitian(0.5 * (drho + drho.conj().T)))
    return engine.qfi_matrix(rho, drhos, LAMBDA_NAMES)


# ========== Reparametrización a (x, β) ==========


def jacobian_position_velocity(
    problem: SingleTargetProblem, exact: bool = False
) -> np.ndarray:
    """
    Jacobiano ∂λ/∂μ con filas (x, β) y columnas (t̄, ω̄, σ).

    Args:
        problem: Problema de un blanco (σ es el ancho de banda devuelto)
        exact: Usa las derivadas exactas del factor Doppler en ω̄ y σ

    Returns:
        Matriz 2×3
    """
    kin = problem.kinematics
    beta, c, x = kin.beta, kin.light_speed, kin.range_x
    d_time_dx = 2.0 / (c * (1.0 - beta))
    d_time_dbeta = 2.0 * x / (c * (1.0 - beta) ** 2)
    if exact:
        d_freq_dbeta = -2.0 * problem.omega0 / (1.0 + beta) ** 2
        d_bw_dbeta = -2.0 * problem.sigma / ((1.0 - beta) * (1.0 + beta))
    else:
        d_freq_dbeta = -2.0 * problem.omega0 / (1.0 - beta) ** 2
        d_bw_dbeta = -2.0 * problem.sigma / (1.0 - beta) ** 2
    return np.array(
        [
            [d_time_dx, 0.0, 0.0],
            [d_time_dbeta, d_freq_dbeta, d_bw_dbeta],
        ]
    )


def position_velocity_report(
    problem: SingleTargetProblem, exact: bool = False
) -> QfiReport:
    """Informe QFI en (x, β) por reparametrización del informe en λ."""
    report = lambda_report(problem.sigma, problem.kappa)
    return engine.reparameterize(
        report, jacobian_position_velocity(problem, exact), MU_NAMES
    )


def qfi_position_velocity(problem: SingleTargetProblem) -> np.ndarray:
    """
    H(x, β) = Jac · J(λ) · Jacᵀ.

    Returns:
        Matriz 2×2 sobre (x, β)
    """
    jac = jacobian_position_velocity(problem)
    qfi = jac @ qfi_lambda(problem.sigma, problem.kappa) @ jac.T
    return 0.5 * (qfi + qfi.T)


def explicit_position_velocity_qfi(problem: SingleTargetProblem) -> np.ndarray:
    """H(x, β) separable en forma cerrada, término a término."""
    kin = problem.kinematics
    sigma, beta, c, x = problem.sigma, kin.beta, kin.light_speed, kin.range_x
    prefactor = 4.0 / (1.0 - beta) ** 2
    h_xx = 4.0 * sigma**2 / c**2
    h_xb = 4.0 * x * sigma**2 / (c**2 * (1.0 - beta))
    h_bb = (4.0 * x**2 * sigma**4 + c**2 * (2.0 * sigma**2 + problem.omega0**2)) / (
        c**2 * sigma**2 * (1.0 - beta) ** 2
    )
    return prefactor * np.array([[h_xx, h_xb], [h_xb, h_bb]])


def slds_position_velocity(
    problem: SingleTargetProblem, convention: SldConvention = "jacobian"
) -> tuple[HermitianOperator, HermitianOperator]:
    """
    (L_x, L_β) en la base de forma cerrada.

    Por defecto ("jacobian") L_β = Σ_k (∂λ_k/∂β) L_k y Tr(ρ[L_x, L_β]) =
    +16iω̄₀/(c(1-β)³), el mismo signo que commutator_report y las columnas
    im_tr_x_beta. Con "closed-form" los términos en ω̄ y σ de L_β cambian de
    signo, como en la forma impresa: misma H(x, β) y traza con signo opuesto.
    """
    if convention not in ("closed-form", "jacobian"):
        raise MetrologyError(
            component="single_target",
            code="INVALID_PARAMETER",
            message=f"Convenio desconocido: {convention}",
        )
    l_time, l_freq, l_bw = (
        op.matrix for op in sld_lambda(problem.sigma, problem.kappa)
    )
    jac = jacobian_position_velocity(problem)
    l_x = jac[0, 0] * l_time
    sign = -1.0 if convention == "closed-form" else 1.0
    l_beta = jac[1, 0] * l_time + sign * (jac[1, 1] * l_freq + jac[1, 2] * l_bw)
    return engine.hermitian(l_x), engine.hermitian(l_beta)


# ========== Conmutadores y Arthurs-Kelly ==========


def commutator_report(problem: SingleTargetProblem) -> CommutatorReport:
    """
    Trazas de conmutadores en forma cerrada.

    Returns:
        (t̄, ω̄) = -4i para todo κ; pares con σ nulos;
        (x, β) = 16iω̄₀/(c(1-β)³)
    """
    kin = problem.kinematics
    return CommutatorReport(
        t_bar_omega_bar=-4j,
        t_bar_sigma=0j,
        omega_bar_sigma=0j,
        x_beta=16j * problem.omega0 / (kin.light_speed * (1.0 - kin.beta) ** 3),
    )


def arthurs_kelly_product(sigma: float, kappa: float = 0.0) -> float:
    """
    J(t̄)·J(ω̄) = 4/(1-κ²); equivale a δt²δω² = (1-κ²)/4 en la cota QCR.
    """
    _problem(sigma, kappa)
    return 4.0 / (1.0 - kappa**2)
