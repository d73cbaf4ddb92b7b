"""
Controller de comandos de la CLI.
Carga la configuración, ejecuta el comando y traduce errores a códigos de
salida.
"""

from collections.abc import Callable
import logging
import sys
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict

from qlidar import metrics
from qlidar.config import load_config
from qlidar.infra.output import emit, emit_plot_data
from qlidar.orchestrator import Orchestrator
from qlidar.router import hadamard_records_table
from qlidar.schemas import MetrologyError, RunConfig
from qlidar.utils import RunLogger, generate_run_id, log_metrology_error
from qlidar.verification import render_report, run_verify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURE = 2
EXIT_DEGENERATE = 3

CONFIG_CODES = frozenset({"CONFIG_PARSE", "CONFIG_INVALID", "INVALID_PARAMETER"})


class CommandOptions(BaseModel):
    """Opciones de la CLI que no forman parte de RunConfig."""

    model_config = ConfigDict(frozen=True)

    records: bool = False
    plot_out: Optional[str] = None
    plot_x: Optional[str] = None
    plot_y: Optional[str] = None
    plot_group: Optional[str] = None
    monte_carlo: bool = True


def exit_code_for(error: MetrologyError) -> int:
    """
    Mapea un código de error a un código de salida.

    Returns:
        1 para errores de configuración o parámetros, 3 para puntos
        degenerados, 2 en el resto
    """
    if error.code in CONFIG_CODES:
        return EXIT_CONFIG
    if error.code in ("DEGENERATE_POINT", "NON_IDENTIFIABLE"):
        return EXIT_DEGENERATE
    return EXIT_FAILURE


# ========== Handlers ==========


def handle_run(
    config: RunConfig, options: CommandOptions, run_logger: RunLogger
) -> int:
    """
    single-target, two-target, simulate y sweep: evalúa la rejilla y emite.

    Returns:
        0, o 3 si alguna fila quedó marcada como degenerada
    """
    run_logger = run_logger.bind(mode=config.mode, seed=config.seed)
    if options.records and config.mode == "simulate-hadamard":
        point = {
            "sigma": config.sigma,
            "dt": config.dt,
            "domega": config.domega,
            "centroid_time": config.centroid_time,
        }
        table = hadamard_records_table(
            point,
            {
                "shots": config.shots,
                "seed": config.seed,
                "phase_calibration": config.phase_calibration,
            },
            {"seed": config.seed, "mode": config.mode},
        )
        metrics.record_shots("hadamard", config.shots)
    else:
        table = Orchestrator().run_sweep(config, run_logger.run_id)

    emit(table, config.format, config.out)
    if options.plot_out:
        if not (options.plot_x and options.plot_y and options.plot_group):
            raise MetrologyError(
                component="controller",
                code="CONFIG_INVALID",
                message="--plot-out requiere --plot-x, --plot-y y --plot-group",
            )
        emit_plot_data(
            table, options.plot_x, options.plot_y, options.plot_group, options.plot_out
        )

    run_logger.info(
        "Comando completado",
        rows=len(table.rows),
        degenerate_rows=table.degenerate_rows,
        elapsed=run_logger.elapsed(),
    )
    return EXIT_DEGENERATE if table.degenerate_rows else EXIT_OK


def handle_sweep(
    config: RunConfig, options: CommandOptions, run_logger: RunLogger
) -> int:
    """sweep: exige al menos un eje."""
    if not config.sweep:
        raise MetrologyError(
            component="controller",
            code="CONFIG_INVALID",
            message="sweep requiere al menos un eje (--axis clave=start:stop:count)",
        )
    return handle_run(config, options, run_logger)


def handle_verify(
    config: RunConfig, options: CommandOptions, run_logger: RunLogger
) -> int:
    """verify: imprime la tabla de chequeos; 0 si todo pasa, 2 si no."""
    report = run_verify(
        tolerance=config.tolerance,
        seed=config.seed,
        workers=config.workers or 1,
        monte_carlo=options.monte_carlo,
    )
    sys.stdout.write(render_report(report))
    run_logger.info(
        "Verificación completada",
        passed=report.passed,
        failed=report.failed(),
        elapsed=run_logger.elapsed(),
    )
    return EXIT_OK if report.passed else EXIT_FAILURE


HANDLERS: dict[str, Callable[[RunConfig, CommandOptions, RunLogger], int]] = {
    "run": handle_run,
    "sweep": handle_sweep,
    "verify": handle_verify,
}


def execute(
    command: str,
    overrides: dict[str, Any],
    config_path: Optional[str] = None,
    options: Optional[CommandOptions] = None,
) -> int:
    """
    Ejecuta un comando completo y devuelve el código de salida.

    Args:
        command: "run", "sweep" o "verify"
        overrides: Valores de flags (los None no sobrescriben el archivo)
        config_path: Ruta del JSON de configuración
        options: Opciones de salida adicionales

    Returns:
        Código de salida (0, 1, 2 o 3)
    """
    run_id = generate_run_id()
    run_logger = RunLogger(run_id, logger, command=command)
    run_logger.info("Comando recibido", config_path=config_path)

    try:
        config = load_config(config_path, overrides)
        return HANDLERS[command](config, options or CommandOptions(), run_logger)

    except MetrologyError as e:
        log_metrology_error(
            logger,
            component=e.component,
            error_code=e.code,
            run_id=run_id,
            exc=e,
        )
        sys.stderr.write(f"error: {e.code}: {e.message}\n")
        return exit_code_for(e)

    except Exception as e:
        log_metrology_error(
            logger,
            component="controller",
            error_code="INTERNAL_ERROR",
            run_id=run_id,
            exc=e,
        )
        sys.stderr.write(f"error: INTERNAL_ERROR: {e}\n")
        return EXIT_FAILURE
