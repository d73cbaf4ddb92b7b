"""
Utilidades comunes: logging JSON a stderr, IDs de ejecución y el logger
contextual que acompaña a cada comando.
"""

import logging
import sys
import time
import traceback
import uuid
from datetime import datetime, timezone
from typing import IO, Any, Optional

import numpy as np
from pythonjsonlogger import jsonlogger


def _json_default(value: Any) -> Any:
    """Serializa escalares y arrays de numpy y números complejos."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    if isinstance(value, (int, float, str, bool)):
        return value
    return repr(value)


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    """Una línea JSON por registro con timestamp UTC, nivel y logger."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        kwargs.setdefault("json_default", _json_default)
        super().__init__(*args, **kwargs)

    def add_fields(
        self,
        log_record: dict[str, Any],
        record: logging.LogRecord,
        message_dict: dict[str, Any],
    ) -> None:
        super().add_fields(log_record, record, message_dict)
        log_record["timestamp"] = (
            datetime.fromtimestamp(record.created, timezone.utc)
            .isoformat(timespec="milliseconds")
            .replace("+00:00", "Z")
        )
        log_record["level"] = record.levelname
        log_record["logger"] = record.name


def setup_logging(log_level: str = "INFO", stream: Optional[IO[str]] = None) -> None:
    """
    Configura el logging raíz con formato JSON estructurado.

    stdout queda reservado para las tablas; por defecto los logs van a stderr.

    Args:
        log_level: Nivel de logging (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        stream: Destino alternativo de los logs
    """
    root = logging.getLogger()
    root.setLevel(getattr(logging, log_level.upper()))
    root.handlers.clear()

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(CustomJsonFormatter("%(message)s"))
    root.addHandler(handler)


def generate_run_id() -> str:
    """UUID4 que identifica una invocación de la CLI en los logs."""
    return str(uuid.uuid4())


class RunLogger:
    """
    Logger contextual de una ejecución.

    Añade run_id y los campos fijados en el constructor (comando, modo...) a
    cada registro, y mide el tiempo desde su creación.
    """

    def __init__(self, run_id: str, logger: logging.Logger, **context: Any):
        self.run_id = run_id
        self.logger = logger
        self.context = context
        self.started_at = time.perf_counter()

    def elapsed(self) -> float:
        """Segundos desde la creación del logger."""
        return time.perf_counter() - self.started_at

    def bind(self, **context: Any) -> "RunLogger":
        """Copia con más campos de contexto; conserva el reloj."""
        bound = RunLogger(self.run_id, self.logger, **{**self.context, **context})
        bound.started_at = self.started_at
        return bound

    def _log(self, level: str, message: str, **fields: Any) -> None:
        getattr(self.logger, level)(
            message, extra={"run_id": self.run_id, **self.context, **fields}
        )

    def debug(self, message: str, **fields: Any) -> None:
        self._log("debug", message, **fields)

    def info(self, message: str, **fields: Any) -> None:
        self._log("info", message, **fields)

    def warning(self, message: str, **fields: Any) -> None:
        self._log("warning", message, **fields)

    def error(self, message: str, **fields: Any) -> None:
        self._log("error", message, **fields)


def log_metrology_error(
    logger: logging.Logger,
    component: str,
    error_code: str,
    run_id: Optional[str] = None,
    exc: Optional[Exception] = None,
) -> None:
    """
    Registra un fallo de cálculo o de configuración con su contexto.

    Los `details` de un MetrologyError (números de condición, valores
    singulares, parámetros rechazados) se adjuntan tal cual.
    """
    logger.error(
        "Metrology error",
        extra={
            "component": component,
            "error_code": error_code,
            "run_id": run_id,
            "error_message": str(exc) if exc else None,
            "details": getattr(exc, "details", None),
            "traceback": (
                "".join(traceback.format_exception(exc)) if exc else None
            ),
        },
    )
