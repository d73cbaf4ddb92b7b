"""
Orchestrator: coordina la ejecución de barridos.
Expande la rejilla cartesiana, reparte puntos entre procesos y reúne las
filas en orden determinista.
"""

from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
import itertools
import logging
from typing import Any, Optional, TypeVar

from pydantic import ValidationError

from qlidar import __version__, metrics
from qlidar.config import settings
from qlidar.router import Point, Router
from qlidar.schemas import MetrologyError, ResultTable, RunConfig

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Parámetros físicos de RunConfig que forman cada punto
POINT_KEYS = (
    "sigma",
    "kappa",
    "omega0",
    "c",
    "x",
    "beta",
    "dt",
    "domega",
    "centroid_time",
    "centroid_frequency",
)


def ordered_map(
    fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = 1
) -> list[R]:
    """
    map con resultados en el orden de entrada.

    Args:
        fn: Función de nivel de módulo (serializable con pickle)
        items: Entradas
        workers: Procesos; 1 ejecuta en el proceso actual

    Returns:
        Lista de resultados, independiente del número de procesos
    """
    tasks = list(items)
    count = workers or 1
    if count <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]

    count = min(count, len(tasks))
    metrics.set_active_workers(count)
    try:
        with ProcessPoolExecutor(max_workers=count) as pool:
            chunksize = max(1, len(tasks) // (4 * count))
            return list(pool.map(fn, tasks, chunksize=chunksize))
    finally:
        metrics.set_active_workers(0)


def expand_grid(config: RunConfig) -> list[Point]:
    """
    Producto cartesiano de los ejes en orden lexicográfico (el primer eje
    declarado varía más despacio).

    Returns:
        Lista de puntos; un único punto si no hay ejes
    """
    base = {key: float(getattr(config, key)) for key in POINT_KEYS}
    axes = config.axes()
    if not axes:
        return [base]
    keys = [key for key, _ in axes]
    return [
        {**base, **dict(zip(keys, combo))}
        for combo in itertools.product(*(values for _, values in axes))
    ]


def _evaluate_task(
    task: tuple[Router, str, Point, dict[str, Any], tuple[str, ...]],
) -> tuple[tuple[float, ...], str, float]:
    router, mode, point, options, axis_keys = task
    return router.evaluate(mode, point, options, axis_keys)


class Orchestrator:
    """
    Orchestrator que coordina la evaluación de una rejilla.

    Responsabilidades:
    - Expandir la rejilla de parámetros
    - Repartir puntos entre procesos (opt-in)
    - Reunir filas en orden determinista
    - Registrar métricas en el proceso padre
    """

    def __init__(self, router: Optional[Router] = None, workers: Optional[int] = None):
        """
        Args:
            router: Router de evaluadores
            workers: Procesos (por defecto settings.workers)
        """
        self.router = router or Router()
        self.workers = workers or settings.workers

    def metadata(self, config: RunConfig) -> dict[str, Any]:
        """Metadatos deterministas de la tabla (sin run id ni marcas de tiempo)."""
        echo = config.model_dump(mode="json", exclude={"workers", "out"})
        return {
            "tool": settings.app_name,
            "version": __version__,
            "seed": config.seed,
            "mode": config.mode,
            "config": echo,
        }

    def run_sweep(self, config: RunConfig, run_id: Optional[str] = None) -> ResultTable:
        """
        Evalúa la rejilla del config.

        Args:
            config: RunConfig validado (modo distinto de verify)
            run_id: ID de ejecución para logging

        Returns:
            ResultTable con una fila por punto

        Raises:
            MetrologyError: Errores de evaluación no degenerados, o
                NON_FINITE_RESULT si alguna fila contiene NaN/inf
        """
        points = expand_grid(config)
        axis_keys = tuple(key for key, _ in config.axes())
        workers = config.workers or self.workers
        options: dict[str, Any] = {
            "shots": config.shots,
            "trials": config.trials,
            "seed": config.seed,
            "phase_calibration": config.phase_calibration,
            "exact_doppler": config.exact_doppler,
            "trial_workers": workers if len(points) == 1 else 1,
        }
        logger.info(
            "Barrido iniciado",
            extra={
                "run_id": run_id,
                "mode": config.mode,
                "points": len(points),
                "workers": workers,
            },
        )

        tasks = [(self.router, config.mode, p, options, axis_keys) for p in points]
        results = ordered_map(_evaluate_task, tasks, workers if len(points) > 1 else 1)

        for _, status, latency in results:
            metrics.record_point(config.mode, status)
            metrics.record_latency(config.mode, latency)
        if config.mode.startswith("simulate-"):
            measurement_name = config.mode.removeprefix("simulate-")
            repeats = config.trials if measurement_name == "hadamard" else 1
            metrics.record_shots(measurement_name, config.shots * repeats * len(points))

        try:
            table = ResultTable(
                columns=self.router.columns(config.mode, axis_keys),
                rows=[row for row, _, _ in results],
                metadata=self.metadata(config),
            )
        except ValidationError as e:
            raise MetrologyError(
                component="orchestrator",
                code="NON_FINITE_RESULT",
                message=str(e.errors(include_url=False)[0].get("msg")),
                original_error=e,
            )

        logger.info(
            "Barrido completado",
            extra={
                "run_id": run_id,
                "rows": len(table.rows),
                "degenerate_rows": table.degenerate_rows,
            },
        )
        return table


def run_sweep(config: RunConfig, workers: Optional[int] = None) -> ResultTable:
    """Atajo: Orchestrator por defecto sobre un config."""
    return Orchestrator(workers=workers).run_sweep(config)

