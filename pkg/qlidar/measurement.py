"""
Simulación de medidas: puerta Hadamard en frecuencia para Δt, su información
de Fisher clásica, disparos Monte-Carlo con estimación de máxima verosimilitud
y la medida conjunta ω₊ / t₋ para (t̄, ω̄).
"""

from collections.abc import Sequence
import logging
import math
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.optimize import minimize_scalar
from scipy.special import ndtri, roots_hermite
from scipy.stats import chi2

from qlidar.config import settings
from qlidar.infra.rng import (
    STREAM_HADAMARD,
    STREAM_JOINT,
    STREAM_OUTCOMES,
    block_generator,
    iter_blocks,
)
from qlidar.schemas import (
    HadamardShotConfig,
    JointMeasureConfig,
    MetrologyError,
    ShotRecord,
)

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-300
GAP_FLOOR = 1e-12
_UNIT = 2.0**-53


class ShotBatch(BaseModel):
    """Disparos en forma columnar: |ν₁-ν₂| y resultado (1 o 2)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nu_gap: np.ndarray
    outcome: np.ndarray

    def __len__(self) -> int:
        return int(self.nu_gap.shape[0])

    def records(self) -> list[ShotRecord]:
        """Lista de ShotRecord validados."""
        return [
            ShotRecord(nu_gap=float(g), outcome=int(o))
            for g, o in zip(self.nu_gap, self.outcome)
        ]

    @classmethod
    def from_records(cls, records: Sequence[ShotRecord]) -> "ShotBatch":
        return cls(
            nu_gap=np.array([r.nu_gap for r in records], dtype=float),
            outcome=np.array([r.outcome for r in records], dtype=np.int8),
        )


class MleEstimate(BaseModel):
    """Estimación de |Δt| con diagnósticos."""

    model_config = ConfigDict(frozen=True)

    delta_t: float
    log_likelihood: float
    fisher_information: float
    std_error: float
    shots: int
    moment_start: float


class HadamardTrials(BaseModel):
    """Ensayos repetidos de muestreo + MLE."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    estimates: np.ndarray
    mean: float
    variance: float
    cramer_rao: float

    @property
    def efficiency(self) -> float:
        """Varianza / cota de Cramér-Rao."""
        return self.variance / self.cramer_rao


class JointSamples(BaseModel):
    """Muestras (ω₊, t₋) de la medida conjunta."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    omega_plus: np.ndarray
    t_minus: np.ndarray


class JointEstimate(BaseModel):
    """Estimadores t̂ = t₋ + t̄_i, ω̂ = 2ω₊ - ω̄_i y sus errores."""

    model_config = ConfigDict(frozen=True)

    t_hat: float
    omega_hat: float
    variance_time: float
    variance_frequency: float
    mse_time: float
    mse_frequency: float

    @property
    def uncertainty_product(self) -> float:
        """δt·δω empírico."""
        return math.sqrt(self.mse_time * self.mse_frequency)


# ========== Probabilidades y CFI ==========


def hadamard_probs(
    nu_first: Union[float, np.ndarray],
    nu_second: Union[float, np.ndarray],
    t_first: Union[float, np.ndarray],
    t_second: Union[float, np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    """
    p₁ = ¼(2 + cos((ν₂-ν₁)t₁) + cos((ν₂-ν₁)t₂)), p₂ = 1 - p₁.
    """
    gap = np.asarray(nu_second) - np.asarray(nu_first)
    p1 = 0.25 * (2.0 + np.cos(gap * t_first) + np.cos(gap * t_second))
    p1 = np.clip(p1, 0.0, 1.0)
    return p1, 1.0 - p1


def classical_fisher(probs: Sequence[float], dprobs: Sequence[float]) -> float:
    """
    CFI = Σ_y (∂p_y)² / p_y sobre resultados con p_y > 0.
    """
    p = np.asarray(probs, dtype=float)
    dp = np.asarray(dprobs, dtype=float)
    support = p > 0.0
    return float(np.sum(dp[support] ** 2 / p[support]))


def postselected_cfi(
    nu_first: float,
    nu_second: float,
    delta_t: float,
    calibrated: bool = True,
    centroid_time: float = 0.0,
) -> float:
    """
    CFI de la medida Hadamard para Δt con el par (ν₁, ν₂) postseleccionado.

    Args:
        nu_first: ν₁
        nu_second: ν₂
        delta_t: Separación temporal Δt
        calibrated: Fase del centroide calibrada (cos((ν₂-ν₁)T) = 1)
        centroid_time: T, usado sólo sin calibración

    Returns:
        (ν₁-ν₂)²/4 calibrada; (∂p₁)²/(p₁p₂) en otro caso (0 si p₁p₂ = 0)
    """
    gap = nu_second - nu_first
    if calibrated:
        return gap**2 / 4.0

    p1, p2 = hadamard_probs(
        nu_first,
        nu_second,
        centroid_time + delta_t / 2.0,
        centroid_time - delta_t / 2.0,
    )
    p1, p2 = float(p1), float(p2)
    if p1 * p2 == 0.0:
        return 0.0
    dp1 = -0.25 * gap * math.cos(gap * centroid_time) * math.sin(gap * delta_t / 2.0)
    return classical_fisher([p1, p2], [dp1, -dp1])


def averaged_cfi(sigma: float, order: Optional[int] = None) -> float:
    """
    Promedio de (ν₁-ν₂)²/4 con la semidiferencia distribuida como p_Ω en la
    semirrecta; cuadratura Gauss-Hermite de la extensión par.

    Returns:
        σ² (salvo error de cuadratura)

    Raises:
        MetrologyError: Si σ <= 0
    """
    if sigma <= 0.0:
        raise MetrologyError(
            component="measurement",
            code="INVALID_PARAMETER",
            message=f"sigma debe ser > 0, recibido {sigma}",
        )
    x, w = roots_hermite(order or settings.quadrature_order)
    half_gap = math.sqrt(2.0) * sigma * x
    return float(np.sum(w * half_gap**2) / math.sqrt(math.pi))


# ========== Muestreo Hadamard ==========


def _uniform(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniformes en (0, 1) abierto."""
    return (rng.integers(0, 2**53, size=count, dtype=np.int64) + 0.5) * _UNIT


def sample_hadamard(config: HadamardShotConfig, trial: int = 0) -> ShotBatch:
    """
    Disparos de la medida Hadamard.

    |ν₁-ν₂| = 2σ|Z| por inversión de la CDF normal y resultado Bernoulli con
    p₁ de hadamard_probs en t₁ = T + Δt/2, t₂ = T - Δt/2 (T = 0 calibrado).

    Args:
        config: Configuración validada
        trial: Índice de ensayo (flujo aleatorio independiente)

    Returns:
        ShotBatch determinista dada la semilla
    """
    scene = config.scene
    centroid = 0.0 if config.phase_calibration else scene.centroid_time
    t_first = centroid + scene.delta_time / 2.0
    t_second = centroid - scene.delta_time / 2.0

    gaps = np.empty(config.shots, dtype=float)
    outcomes = np.empty(config.shots, dtype=np.int8)
    for block, start, count in iter_blocks(config.shots):
        rng = block_generator(config.seed, STREAM_HADAMARD, block, trial)
        gap = 2.0 * scene.bandwidth * np.abs(ndtri(_uniform(rng, count)))
        p1, _ = hadamard_probs(0.0, gap, t_first, t_second)
        gaps[start : start + count] = gap
        outcomes[start : start + count] = np.where(_uniform(rng, count) < p1, 1, 2)
    return ShotBatch(nu_gap=gaps, outcome=outcomes)


def sample_outcomes(
    nu_gap: float, delta_t: float, shots: int, seed: int, centroid_time: float = 0.0
) -> np.ndarray:
    """Resultados (1 o 2) para un |ν₁-ν₂| fijo."""
    p1, _ = hadamard_probs(
        0.0, nu_gap, centroid_time + delta_t / 2.0, centroid_time - delta_t / 2.0
    )
    outcomes = np.empty(shots, dtype=np.int8)
    for block, start, count in iter_blocks(shots):
        rng = block_generator(seed, STREAM_OUTCOMES, block)
        outcomes[start : start + count] = np.where(_uniform(rng, count) < p1, 1, 2)
    return outcomes


def outcome_chi_square(outcomes: np.ndarray, p_first: float) -> float:
    """
    p-valor del test chi-cuadrado (1 grado de libertad) de las frecuencias
    observadas frente a (p₁, 1 - p₁).

    Raises:
        MetrologyError: Si p₁ ∉ (0, 1) (resultado determinista)
    """
    if not 0.0 < p_first < 1.0:
        raise MetrologyError(
            component="measurement",
            code="INVALID_PARAMETER",
            message=f"p₁ debe estar en (0, 1), recibido {p_first}",
        )
    shots = int(outcomes.shape[0])
    observed = np.array([np.sum(outcomes == 1), np.sum(outcomes == 2)], dtype=float)
    expected = shots * np.array([p_first, 1.0 - p_first])
    statistic = float(np.sum((observed - expected) ** 2 / expected))
    return float(chi2.sf(statistic, df=1))


# ========== Máxima verosimilitud ==========


def _log_likelihood(
    delta_t: float, gaps: np.ndarray, second: np.ndarray, centroid_time: float
) -> float:
    if centroid_time == 0.0:
        phase = gaps * delta_t / 4.0
        p1 = np.cos(phase) ** 2
    else:
        p1 = 0.5 * (1.0 + np.cos(gaps * centroid_time) * np.cos(gaps * delta_t / 2.0))
    probs = np.where(second, 1.0 - p1, p1)
    return float(np.sum(np.log(np.maximum(probs, PROB_FLOOR))))


def mle_delta_t(
    records: Union[ShotBatch, Sequence[ShotRecord]],
    sigma: float,
    centroid_time: float = 0.0,
) -> MleEstimate:
    """
    Estimador de máxima verosimilitud de |Δt|.

    Rejilla de settings.mle_grid_points puntos sobre [0, d_max] partiendo del
    estimador de momentos, rejilla fina alrededor del máximo y refinamiento
    acotado (scipy minimize_scalar).

    Args:
        records: Disparos (ShotBatch o lista de ShotRecord)
        sigma: Ancho de banda σ
        centroid_time: T del modelo sin calibrar (0 si calibrado)

    Returns:
        MleEstimate con |Δt| (el signo no es identificable)

    Raises:
        MetrologyError: NON_IDENTIFIABLE si no hay disparos o todos los
            |ν₁-ν₂| son ≈ 0
    """
    batch = (
        records if isinstance(records, ShotBatch) else ShotBatch.from_records(records)
    )
    shots = len(batch)
    if shots == 0 or float(np.max(batch.nu_gap)) <= GAP_FLOOR:
        raise MetrologyError(
            component="measurement",
            code="NON_IDENTIFIABLE",
            message="Verosimilitud plana: todos los |ν₁-ν₂| son ≈ 0",
            details={"shots": shots},
        )

    gaps = batch.nu_gap
    second = batch.outcome == 2

    # Momentos: E[p₂] = ½(1 - exp(-σ²d²/2))
    p2_hat = float(np.mean(second))
    ratio = max(1.0 - 2.0 * p2_hat, 1e-6)
    moment = math.sqrt(max(-2.0 * math.log(ratio), 0.0)) / sigma
    upper = min(max(3.0 * moment, 6.0 / (sigma * math.sqrt(shots))), 12.0 / sigma)

    def objective(d: float) -> float:
        return -_log_likelihood(d, gaps, second, centroid_time)

    points = settings.mle_grid_points
    lo, hi = 0.0, upper
    best_d, best_value = 0.0, math.inf
    for _ in range(2):
        grid = np.linspace(lo, hi, points)
        values = np.array([objective(d) for d in grid])
        i = int(np.argmin(values))
        best_d, best_value = float(grid[i]), float(values[i])
        lo, hi = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, points - 1)])

    if hi > lo:
        refined = minimize_scalar(
            objective, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
        )
        if refined.success and float(refined.fun) < best_value:
            best_d, best_value = float(refined.x), float(refined.fun)

    information = float(np.sum(gaps**2) / 4.0)
    logger.debug(
        "MLE Hadamard",
        extra={"shots": shots, "estimate": best_d, "moment_start": moment},
    )
    return MleEstimate(
        delta_t=best_d,
        log_likelihood=-best_value,
        fisher_information=information,
        std_error=1.0 / math.sqrt(information) if information > 0 else math.inf,
        shots=shots,
        moment_start=moment,
    )


def _hadamard_trial(args: tuple[HadamardShotConfig, int]) -> float:
    config, trial = args
    batch = sample_hadamard(config, trial)
    centroid = 0.0 if config.phase_calibration else config.scene.centroid_time
    return mle_delta_t(batch, config.scene.bandwidth, centroid).delta_t


def run_hadamard_trials(
    config: HadamardShotConfig, trials: int, workers: int = 1
) -> HadamardTrials:
    """
    Ensayos repetidos muestreo → MLE, cada uno con su flujo aleatorio.

    Args:
        config: Configuración de disparos
        trials: Número de ensayos (>= 2)
        workers: Procesos paralelos; no altera el resultado

    Returns:
        HadamardTrials con estimaciones ordenadas por ensayo y 1/(Nσ²)
    """
    from qlidar.orchestrator import ordered_map

    if trials < 2:
        raise MetrologyError(
            component="measurement",
            code="INVALID_PARAMETER",
            message=f"trials debe ser >= 2, recibido {trials}",
        )
    estimates = np.array(
        ordered_map(_hadamard_trial, [(config, t) for t in range(trials)], workers)
    )
    return HadamardTrials(
        estimates=estimates,
        mean=float(np.mean(estimates)),
        variance=float(np.var(estimates, ddof=1)),
        cramer_rao=1.0 / (config.shots * config.scene.bandwidth**2),
    )


# ========== Medida conjunta ω₊ / t₋ ==========


def joint_measurement_errors(sigma: float, kappa: float) -> tuple[float, float]:
    """
    Errores cuadráticos medios por disparo de la medida conjunta.

    Returns:
        (δt², δω²) = (1/(2(1+κ)σ²), 2(1-κ)σ²)
    """
    return 1.0 / (2.0 * (1.0 + kappa) * sigma**2), 2.0 * (1.0 - kappa) * sigma**2


def sample_joint_time_frequency(config: JointMeasureConfig) -> JointSamples:
    """
    Muestras de P(ω₊, t₋), factorizada en dos gaussianas.

    t₋ ~ N(t̄ - t̄_i, 1/(2(1+κ)σ²)), ω₊ ~ N((ω̄ + ω̄_i)/2, (1-κ)σ²/2).

    Raises:
        MetrologyError: Si σ_i != σ
    """
    state = config.state
    sigma = state.signal.bandwidth
    if not math.isclose(state.idler.bandwidth, sigma, rel_tol=1e-12):
        raise MetrologyError(
            component="measurement",
            code="INVALID_PARAMETER",
            message="La medida conjunta requiere σ_i = σ",
            details={"sigma": sigma, "idler_bandwidth": state.idler.bandwidth},
        )

    time_var, freq_var = joint_measurement_errors(sigma, state.kappa)
    time_mean = state.signal.central_time - state.idler.central_time
    plus_mean = 0.5 * (state.signal.central_frequency + state.idler.central_frequency)

    omega_plus = np.empty(config.shots, dtype=float)
    t_minus = np.empty(config.shots, dtype=float)
    for block, start, count in iter_blocks(config.shots):
        rng = block_generator(config.seed, STREAM_JOINT, block)
        t_minus[start : start + count] = time_mean + math.sqrt(time_var) * ndtri(
            _uniform(rng, count)
        )
        omega_plus[start : start + count] = plus_mean + 0.5 * math.sqrt(
            freq_var
        ) * ndtri(_uniform(rng, count))
    return JointSamples(omega_plus=omega_plus, t_minus=t_minus)


def estimate_joint(samples: JointSamples, config: JointMeasureConfig) -> JointEstimate:
    """Estimadores por disparo y sus errores frente a los valores verdaderos."""
    state = config.state
    t_hat = samples.t_minus + state.idler.central_time
    omega_hat = 2.0 * samples.omega_plus - state.idler.central_frequency
    return JointEstimate(
        t_hat=float(np.mean(t_hat)),
        omega_hat=float(np.mean(omega_hat)),
        variance_time=float(np.var(t_hat, ddof=1)),
        variance_frequency=float(np.var(omega_hat, ddof=1)),
        mse_time=float(np.mean((t_hat - state.signal.central_time) ** 2)),
        mse_frequency=float(np.mean((omega_hat - state.signal.central_frequency) ** 2)),
    )
