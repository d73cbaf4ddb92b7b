"""
Router: selección del evaluador por modo y marcado de puntos degenerados.
Cada evaluador es puro y recibe un punto de parámetros resuelto.
"""

from collections.abc import Callable, Mapping
import logging
import math
import time
from typing import Any, Optional

from qlidar import measurement, single_target, two_target
from qlidar.schemas import (
    GaussianPulse,
    HadamardShotConfig,
    JointMeasureConfig,
    MetrologyError,
    ResultTable,
    SingleTargetProblem,
    TargetKinematics,
    TwoPhotonState,
    TwoTargetScene,
    build,
)

logger = logging.getLogger(__name__)

Point = dict[str, float]
Evaluator = Callable[[Point, Mapping[str, Any]], dict[str, float]]

# Errores que marcan la fila en lugar de abortar el barrido
DEGENERATE_CODES = frozenset({"DEGENERATE_POINT", "NON_IDENTIFIABLE"})

DERIVED_AXES = ("dt_sq_sigma_sq", "domega_sq_over_sigma_sq")

INPUT_COLUMNS: dict[str, tuple[str, ...]] = {
    "single-target": ("sigma", "kappa", "omega0", "c", "x", "beta"),
    "two-target": ("sigma", "kappa", "dt", "domega"),
    "simulate-hadamard": ("sigma", "dt", "shots", "trials"),
    "simulate-joint": (
        "sigma",
        "kappa",
        "centroid_time",
        "centroid_frequency",
        "shots",
    ),
}

OUTPUT_COLUMNS: dict[str, tuple[str, ...]] = {
    "single-target": (
        "J_t_bar",
        "J_omega_bar",
        "J_sigma",
        "J_t_bar_times_J_omega_bar",
        "H_x_x",
        "H_x_beta",
        "H_beta_beta",
        "im_tr_t_bar_omega_bar",
        "im_tr_x_beta",
        "saturable_t_bar_omega_bar",
        "saturable_x_beta",
    ),
    "two-target": (
        "epsilon",
        "H_dt_dt",
        "H_dt_domega",
        "H_domega_domega",
        "im_tr_dt_domega",
        "saturable_dt_domega",
    ),
    "simulate-hadamard": (
        "averaged_cfi",
        "cramer_rao",
        "estimate_mean",
        "estimate_variance",
        "efficiency",
    ),
    "simulate-joint": (
        "t_hat",
        "omega_hat",
        "variance_time",
        "variance_frequency",
        "mse_time",
        "mse_frequency",
        "expected_time_error",
        "expected_frequency_error",
        "uncertainty_product",
    ),
}


def resolve_point(point: Point) -> Point:
    """
    Convierte los ejes derivados Δt²σ² y Δω²/σ² en Δt, Δω.

    Args:
        point: Parámetros del punto (pueden incluir ejes derivados)

    Returns:
        Copia con dt/domega resueltos
    """
    resolved = dict(point)
    sigma = resolved["sigma"]
    if "dt_sq_sigma_sq" in resolved:
        resolved["dt"] = math.sqrt(resolved["dt_sq_sigma_sq"]) / sigma
    if "domega_sq_over_sigma_sq" in resolved:
        resolved["domega"] = math.sqrt(resolved["domega_sq_over_sigma_sq"]) * sigma
    return resolved


# ========== Evaluadores ==========


def evaluate_single_target(
    point: Point, options: Mapping[str, Any]
) -> dict[str, float]:
    """QFI en λ y en (x, β), trazas de conmutadores y saturabilidad."""
    problem = build(
        SingleTargetProblem,
        "router",
        sigma=point["sigma"],
        omega0=point["omega0"],
        kappa=point["kappa"],
        kinematics=build(
            TargetKinematics,
            "router",
            range_x=point["x"],
            beta=point["beta"],
            light_speed=point["c"],
        ),
    )
    lam = single_target.lambda_report(problem.sigma, problem.kappa)
    mu = single_target.position_velocity_report(
        problem, exact=bool(options.get("exact_doppler", False))
    )
    return {
        "J_t_bar": lam.entry("t_bar", "t_bar"),
        "J_omega_bar": lam.entry("omega_bar", "omega_bar"),
        "J_sigma": lam.entry("sigma", "sigma"),
        "J_t_bar_times_J_omega_bar": single_target.arthurs_kelly_product(
            problem.sigma, problem.kappa
        ),
        "H_x_x": mu.entry("x", "x"),
        "H_x_beta": mu.entry("x", "beta"),
        "H_beta_beta": mu.entry("beta", "beta"),
        "im_tr_t_bar_omega_bar": lam.trace("t_bar", "omega_bar").imag,
        "im_tr_x_beta": mu.trace("x", "beta").imag,
        "saturable_t_bar_omega_bar": float(lam.saturable[0, 1]),
        "saturable_x_beta": float(mu.saturable[0, 1]),
    }


def evaluate_two_target(point: Point, options: Mapping[str, Any]) -> dict[str, float]:
    """QFI en forma cerrada sobre (Δt, Δω)."""
    inputs = two_target.inputs_from_scene(
        build(
            TwoTargetScene,
            "router",
            delta_time=point["dt"],
            delta_frequency=point["domega"],
            bandwidth=point["sigma"],
            kappa=point["kappa"],
        )
    )
    report = two_target.two_target_report(inputs)
    return {
        "epsilon": inputs.epsilon,
        "H_dt_dt": report.entry("delta_t", "delta_t"),
        "H_dt_domega": report.entry("delta_t", "delta_omega"),
        "H_domega_domega": report.entry("delta_omega", "delta_omega"),
        "im_tr_dt_domega": report.trace("delta_t", "delta_omega").imag,
        "saturable_dt_domega": float(report.saturable[0, 1]),
    }


def hadamard_config(point: Point, options: Mapping[str, Any]) -> HadamardShotConfig:
    """Configuración de disparos Hadamard para un punto."""
    scene = build(
        TwoTargetScene,
        "router",
        centroid_time=point.get("centroid_time", 0.0),
        delta_time=point["dt"],
        delta_frequency=point.get("domega", 0.0),
        bandwidth=point["sigma"],
    )
    return build(
        HadamardShotConfig,
        "router",
        scene=scene,
        shots=int(options.get("shots", 1000)),
        seed=int(options.get("seed", 0)),
        phase_calibration=bool(options.get("phase_calibration", True)),
    )


def evaluate_hadamard(point: Point, options: Mapping[str, Any]) -> dict[str, float]:
    """
    Muestreo + MLE. Con un solo ensayo la varianza es la asintótica
    1/I_observada; con varios, la varianza muestral entre ensayos.
    """
    config = hadamard_config(point, options)
    sigma = config.scene.bandwidth
    trials = int(options.get("trials", 1))
    cramer_rao = 1.0 / (config.shots * sigma**2)
    if trials >= 2:
        result = measurement.run_hadamard_trials(
            config, trials, int(options.get("trial_workers", 1))
        )
        mean, variance = result.mean, result.variance
    else:
        centroid = 0.0 if config.phase_calibration else config.scene.centroid_time
        estimate = measurement.mle_delta_t(
            measurement.sample_hadamard(config), sigma, centroid
        )
        mean, variance = estimate.delta_t, estimate.std_error**2
    return {
        "averaged_cfi": measurement.averaged_cfi(sigma),
        "cramer_rao": cramer_rao,
        "estimate_mean": mean,
        "estimate_variance": variance,
        "efficiency": variance / cramer_rao,
    }


def joint_config(point: Point, options: Mapping[str, Any]) -> JointMeasureConfig:
    """Configuración de la medida conjunta para un punto (σ_i = σ)."""
    sigma = point["sigma"]
    state = build(
        TwoPhotonState,
        "router",
        signal=build(
            GaussianPulse,
            "router",
            central_time=point.get("centroid_time", 0.0),
            central_frequency=point.get("centroid_frequency", 0.0),
            bandwidth=sigma,
        ),
        idler=build(GaussianPulse, "router", bandwidth=sigma),
        kappa=point["kappa"],
    )
    return build(
        JointMeasureConfig,
        "router",
        state=state,
        shots=int(options.get("shots", 1000)),
        seed=int(options.get("seed", 0)),
    )


def evaluate_joint(point: Point, options: Mapping[str, Any]) -> dict[str, float]:
    """Medida conjunta ω₊/t₋: errores empíricos y teóricos."""
    config = joint_config(point, options)
    estimate = measurement.estimate_joint(
        measurement.sample_joint_time_frequency(config), config
    )
    time_error, frequency_error = measurement.joint_measurement_errors(
        config.state.signal.bandwidth, config.state.kappa
    )
    return {
        "t_hat": estimate.t_hat,
        "omega_hat": estimate.omega_hat,
        "variance_time": estimate.variance_time,
        "variance_frequency": estimate.variance_frequency,
        "mse_time": estimate.mse_time,
        "mse_frequency": estimate.mse_frequency,
        "expected_time_error": time_error,
        "expected_frequency_error": frequency_error,
        "uncertainty_product": estimate.uncertainty_product,
    }


class Router:
    """
    Router que despacha cada punto al evaluador de su modo.

    Responsabilidades:
    - Resolver ejes derivados antes de evaluar
    - Ordenar columnas de entrada y salida de forma estable
    - Convertir puntos degenerados en filas marcadas
    """

    def __init__(self, evaluators: Optional[Mapping[str, Evaluator]] = None):
        """
        Args:
            evaluators: Modo → evaluador (por defecto los de la herramienta)
        """
        self.evaluators = dict(
            evaluators
            or {
                "single-target": evaluate_single_target,
                "two-target": evaluate_two_target,
                "simulate-hadamard": evaluate_hadamard,
                "simulate-joint": evaluate_joint,
            }
        )

    def _evaluator(self, mode: str) -> Evaluator:
        if mode not in self.evaluators:
            raise MetrologyError(
                component="router",
                code="INVALID_PARAMETER",
                message=f"Modo sin evaluador: {mode}",
            )
        return self.evaluators[mode]

    def columns(self, mode: str, axis_keys: tuple[str, ...] = ()) -> tuple[str, ...]:
        """Columnas de la tabla: ejes derivados, entradas, salidas y marcador."""
        self._evaluator(mode)
        derived = tuple(k for k in DERIVED_AXES if k in axis_keys)
        return derived + INPUT_COLUMNS[mode] + OUTPUT_COLUMNS[mode] + ("degenerate",)

    def evaluate(
        self,
        mode: str,
        point: Point,
        options: Mapping[str, Any],
        axis_keys: tuple[str, ...] = (),
    ) -> tuple[tuple[float, ...], str, float]:
        """
        Evalúa un punto.

        Args:
            mode: Modo de ejecución
            point: Parámetros del punto
            options: Opciones no barribles (shots, trials, seed, ...)
            axis_keys: Claves barridas (para incluir ejes derivados)

        Returns:
            (fila, estado "ok" o "degenerate", latencia en segundos)

        Raises:
            MetrologyError: Cualquier error no degenerado
        """
        evaluator = self._evaluator(mode)
        started = time.perf_counter()
        resolved = resolve_point(point)
        values: dict[str, Any] = {
            **resolved,
            "shots": options.get("shots", 0),
            "trials": options.get("trials", 1),
        }
        status = "ok"
        try:
            values.update(evaluator(resolved, options))
        except MetrologyError as e:
            if e.code not in DEGENERATE_CODES:
                raise
            logger.warning(
                "Punto degenerado",
                extra={"mode": mode, "point": resolved, "error_code": e.code},
            )
            values.update({name: 0.0 for name in OUTPUT_COLUMNS[mode]})
            status = "degenerate"
        values["degenerate"] = 1.0 if status == "degenerate" else 0.0

        row = tuple(float(values[name]) for name in self.columns(mode, axis_keys))
        return row, status, time.perf_counter() - started


def hadamard_records_table(
    point: Point, options: Mapping[str, Any], metadata: Mapping[str, Any]
) -> ResultTable:
    """Disparos individuales: shot_index, nu_gap, outcome."""
    batch = measurement.sample_hadamard(hadamard_config(resolve_point(point), options))
    rows = [
        (float(i), float(g), float(o))
        for i, (g, o) in enumerate(zip(batch.nu_gap, batch.outcome))
    ]
    return build(
        ResultTable,
        "router",
        columns=("shot_index", "nu_gap", "outcome"),
        rows=rows,
        metadata=dict(metadata),
    )
