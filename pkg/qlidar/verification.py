"""
Comando verify: compara cada forma cerrada con el oráculo independiente,
comprueba las trazas de conmutadores, la igualdad CFI = QFI y la cota de
Cramér-Rao por Monte-Carlo a N reducido.
"""

from collections.abc import Callable
import itertools
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from qlidar import measurement, metrics, single_target, two_target
from qlidar.engine import oracle_qfi
from qlidar.families import (
    SingleEntangledFamily,
    SingleSeparableFamily,
    TwoTargetEntangledFamily,
    TwoTargetSeparableFamily,
)
from qlidar.families.base import StateFamily
from qlidar.schemas import (
    GaussianPulse,
    HadamardShotConfig,
    MetrologyError,
    TwoPhotonState,
    TwoTargetQfiInputs,
    TwoTargetScene,
)

logger = logging.getLogger(__name__)

SIGMAS = (0.5, 1.0, 2.0)
SINGLE_KAPPAS = (0.3, 0.6, 0.9)
TWO_TARGET_KAPPAS = (0.0, 0.3, 0.6)
SEPARATIONS = (0.05, 0.2, 0.5)

COMMUTATOR_TOL = 1e-9
ZERO_TRACE_TOL = 1e-10
QUADRATURE_TOL = 1e-8
MONTE_CARLO_TOL = 0.2
SMALL_EPSILON_TOL = 0.1
# Estado puro de un pulso: el oráculo debe alcanzar 1e-6 relativo
PURE_STATE_TOL = 1e-6
# (Δt, Δω) con ε <= 0.1 para todo κ de TWO_TARGET_KAPPAS
SMALL_SEPARATIONS = (
    (1e-3, 0.0),
    (0.0, 2e-3),
    (0.01, 0.02),
    (0.05, 0.4),
    (0.2, 0.3),
    (0.3, 0.1),
)


class CheckResult(BaseModel):
    """Resultado de un chequeo: error máximo frente a su tolerancia."""

    model_config = ConfigDict(frozen=True)

    name: str
    points: int
    max_error: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_error) and self.max_error <= self.tolerance


class VerifyReport(BaseModel):
    """Tabla de chequeos de verify."""

    model_config = ConfigDict(frozen=True)

    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """max|actual - expected| / max|expected| (absoluto si expected = 0)."""
    scale = float(np.max(np.abs(expected)))
    diff = float(np.max(np.abs(np.asarray(actual) - np.asarray(expected))))
    return diff / scale if scale > 0.0 else diff


def _oracle_error(
    family: StateFamily, point: list[float], expected: np.ndarray
) -> float:
    try:
        report = oracle_qfi(family, point)
    except MetrologyError as e:
        metrics.record_oracle_failure(family.name, e.code)
        logger.warning(
            "Fallo del oráculo",
            extra={"family": family.name, "point": point, "error_code": e.code},
        )
        return math.inf
    return relative_error(report.qfi_matrix, expected)


def _two_target_family(scene: TwoTargetScene) -> StateFamily:
    if scene.kappa == 0.0:
        return TwoTargetSeparableFamily(scene)
    return TwoTargetEntangledFamily(scene)


# ========== Chequeos ==========


def check_single_separable(tolerance: float) -> CheckResult:
    """Oráculo vs diag(4σ², 1/σ², 2/σ²), con tolerancia de estado puro."""
    errors = [
        _oracle_error(
            SingleSeparableFamily(GaussianPulse(bandwidth=sigma)),
            [0.0, 0.0, sigma],
            single_target.qfi_lambda_separable(sigma),
        )
        for sigma in SIGMAS
    ]
    return CheckResult(
        name="oracle-single-separable",
        points=len(errors),
        max_error=max(errors),
        tolerance=min(tolerance, PURE_STATE_TOL),
    )


def check_single_entangled(tolerance: float) -> CheckResult:
    """Oráculo vs la QFI entrelazada en la rejilla σ × κ."""
    errors = []
    for sigma, kappa in itertools.product(SIGMAS, SINGLE_KAPPAS):
        state = TwoPhotonState(
            signal=GaussianPulse(bandwidth=sigma),
            idler=GaussianPulse(bandwidth=sigma),
            kappa=kappa,
        )
        errors.append(
            _oracle_error(
                SingleEntangledFamily(state),
                [0.0, 0.0, sigma],
                single_target.qfi_lambda_entangled(sigma, kappa),
            )
        )
    return CheckResult(
        name="oracle-single-entangled",
        points=len(errors),
        max_error=max(errors),
        tolerance=tolerance,
    )


def check_two_target(tolerance: float) -> CheckResult:
    """Oráculo del estado mixto vs qfi_two en la rejilla de 81 puntos."""
    errors = []
    grid = itertools.product(SIGMAS, TWO_TARGET_KAPPAS, SEPARATIONS, SEPARATIONS)
    for sigma, kappa, dt, dw in grid:
        scene = TwoTargetScene(
            delta_time=dt, delta_frequency=dw, bandwidth=sigma, kappa=kappa
        )
        family = _two_target_family(scene)
        expected = two_target.qfi_two(
            TwoTargetQfiInputs(
                sigma=sigma, kappa=kappa, delta_time=dt, delta_frequency=dw
            )
        )
        errors.append(_oracle_error(family, [dt, dw], expected))
    return CheckResult(
        name="oracle-two-target",
        points=len(errors),
        max_error=max(errors),
        tolerance=tolerance,
    )


def check_single_commutators() -> CheckResult:
    """Tr(ρ[L_t̄, L_ω̄]) = -4i desde las SLDs cerradas y desde el motor."""
    errors = [
        abs(report.trace("t_bar", "omega_bar") - (-4j))
        for kappa in (0.0,) + SINGLE_KAPPAS
        for report in (
            single_target.lambda_report(1.0, kappa),
            single_target.engine_slds(1.0, kappa),
        )
    ]
    return CheckResult(
        name="commutator-single-target",
        points=len(errors),
        max_error=max(errors),
        tolerance=COMMUTATOR_TOL,
    )


def check_single_zero_commutators() -> CheckResult:
    """Pares (t̄, σ) y (ω̄, σ): trazas nulas."""
    errors = [
        abs(report.trace(first, "sigma"))
        for kappa in (0.0,) + SINGLE_KAPPAS
        for report in (
            single_target.lambda_report(1.0, kappa),
            single_target.engine_slds(1.0, kappa),
        )
        for first in ("t_bar", "omega_bar")
    ]
    return CheckResult(
        name="commutator-sigma-pairs",
        points=len(errors),
        max_error=max(errors),
        tolerance=ZERO_TRACE_TOL,
    )


def check_small_epsilon() -> CheckResult:
    """
    Im Tr(ρ[L_Δt, L_Δω]) = -ε/2 + ε²/12 + O(ε⁴); se acota el resto por ε².

    Recorre κ y separaciones en tiempo y frecuencia con ε <= 0.1.
    """
    errors = []
    for kappa, (dt, dw) in itertools.product(TWO_TARGET_KAPPAS, SMALL_SEPARATIONS):
        inputs = TwoTargetQfiInputs(kappa=kappa, delta_time=dt, delta_frequency=dw)
        eps = inputs.epsilon
        trace = two_target.commutator_trace_two(inputs)
        errors.append(abs(trace.imag + eps / 2.0) / eps**2)
    return CheckResult(
        name="commutator-small-epsilon",
        points=len(errors),
        max_error=max(errors),
        tolerance=SMALL_EPSILON_TOL,
    )


def check_two_target_commutators(tolerance: float) -> CheckResult:
    """Traza del oráculo vs forma cerrada i(ε/(e^ε - 1) - 1)."""
    errors = []
    for kappa, dt, dw in ((0.0, 0.5, 0.5), (0.3, 0.2, 0.5)):
        scene = TwoTargetScene(delta_time=dt, delta_frequency=dw, kappa=kappa)
        family = _two_target_family(scene)
        expected = two_target.commutator_trace_two(
            TwoTargetQfiInputs(kappa=kappa, delta_time=dt, delta_frequency=dw)
        )
        try:
            oracle = oracle_qfi(family, [dt, dw]).trace("delta_t", "delta_omega")
        except MetrologyError as e:
            metrics.record_oracle_failure(family.name, e.code)
            errors.append(math.inf)
            continue
        errors.append(abs(oracle - expected) / max(1.0, abs(expected)))
    return CheckResult(
        name="commutator-two-target",
        points=len(errors),
        max_error=max(errors),
        tolerance=tolerance,
    )


def check_cfi_equals_qfi() -> CheckResult:
    """averaged_cfi(σ) = H_ΔtΔt(Δω = 0); CFI calibrada constante en Δt."""
    errors = []
    for sigma in SIGMAS:
        qfi = two_target.qfi_two(TwoTargetQfiInputs(sigma=sigma, delta_time=0.5))
        errors.append(abs(measurement.averaged_cfi(sigma) - qfi[0, 0]) / qfi[0, 0])
    reference = measurement.postselected_cfi(0.0, 2.0, 0.1)
    for dt in (1.0, 3.0):
        errors.append(abs(measurement.postselected_cfi(0.0, 2.0, dt) - reference))
    return CheckResult(
        name="cfi-equals-qfi",
        points=len(errors),
        max_error=max(errors),
        tolerance=QUADRATURE_TOL,
    )


def check_monte_carlo(
    shots: int = 10_000, trials: int = 200, seed: int = 0, workers: int = 1
) -> CheckResult:
    """Varianza del MLE sobre ensayos vs 1/(Nσ²) con tolerancia del 20 %."""
    config = HadamardShotConfig(
        scene=TwoTargetScene(delta_time=0.5, bandwidth=1.0), shots=shots, seed=seed
    )
    try:
        result = measurement.run_hadamard_trials(config, trials, workers)
    except MetrologyError as e:
        return CheckResult(
            name="monte-carlo-crb",
            points=trials,
            max_error=math.inf,
            tolerance=MONTE_CARLO_TOL,
            detail=e.code,
        )
    metrics.record_shots("hadamard", shots * trials)
    return CheckResult(
        name="monte-carlo-crb",
        points=trials,
        max_error=abs(result.efficiency - 1.0),
        tolerance=MONTE_CARLO_TOL,
        detail=f"var·Nσ² = {result.efficiency:.4f}",
    )


# ========== Ejecución ==========


def run_verify(
    tolerance: float = 1e-5,
    seed: int = 0,
    workers: int = 1,
    monte_carlo: bool = True,
) -> VerifyReport:
    """
    Ejecuta todos los chequeos.

    Args:
        tolerance: Error relativo admitido frente al oráculo
        seed: Semilla del chequeo Monte-Carlo
        workers: Procesos para los ensayos Monte-Carlo
        monte_carlo: Incluir el chequeo Monte-Carlo

    Returns:
        VerifyReport con un resultado por chequeo
    """
    checks: list[Callable[[], CheckResult]] = [
        lambda: check_single_separable(tolerance),
        lambda: check_single_entangled(tolerance),
        lambda: check_two_target(tolerance),
        check_single_commutators,
        check_single_zero_commutators,
        check_small_epsilon,
        lambda: check_two_target_commutators(tolerance),
        check_cfi_equals_qfi,
    ]
    if monte_carlo:
        checks.append(lambda: check_monte_carlo(seed=seed, workers=workers))

    results = []
    for check in checks:
        result = check()
        metrics.record_verify_check(result.name, result.passed)
        logger.info(
            "Chequeo completado",
            extra={
                "check": result.name,
                "passed": result.passed,
                "max_error": result.max_error,
                "points": result.points,
            },
        )
        results.append(result)
    return VerifyReport(checks=results)


def render_report(report: VerifyReport) -> str:
    """Tabla de texto: chequeo, puntos, error máximo, tolerancia, estado."""
    header = f"{'check':<28}{'points':>8}{'max_error':>14}{'tolerance':>12}  status"
    lines = [header, "-" * len(header)]
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        line = (
            f"{check.name:<28}{check.points:>8}{check.max_error:>14.3e}"
            f"{check.tolerance:>12.1e}  {status}"
        )
        if check.detail:
            line += f"  ({check.detail})"
        lines.append(line)
    if report.passed:
        summary = "all checks passed"
    else:
        summary = f"failed: {', '.join(report.failed())}"
    lines.append(summary)
    return "\n".join(lines) + "\n"
