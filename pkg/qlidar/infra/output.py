"""
Serialización de tablas de resultados: CSV (RFC 4180, 17 dígitos
significativos), JSON (records + metadata) y pares x/y para gráficas.
"""

from collections.abc import Iterator
from contextlib import contextmanager
import csv
import io
import json
import logging
import sys
from typing import Literal, Optional, TextIO

from qlidar.schemas import MetrologyError, ResultTable

logger = logging.getLogger(__name__)

OutputFormat = Literal["csv", "json"]


def format_number(value: float) -> str:
    """Decimal con '.' y 17 dígitos significativos (ida y vuelta sin pérdida)."""
    return format(float(value), ".17g")


@contextmanager
def _open_target(path: Optional[str]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle
    except OSError as e:
        raise MetrologyError(
            component="output",
            code="IO_ERROR",
            message=f"No se pudo escribir {path}: {e}",
            original_error=e,
        )


def render_csv(table: ResultTable) -> str:
    """Cabecera + una línea por fila, separador CRLF."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def render_json(table: ResultTable) -> str:
    """Objeto {"metadata": ..., "records": [...]} con claves por columna."""
    document = {
        "metadata": table.metadata,
        "records": [dict(zip(table.columns, row)) for row in table.rows],
    }
    return json.dumps(document, indent=2) + "\n"


def emit(
    table: ResultTable, output_format: OutputFormat = "csv", path: Optional[str] = None
) -> None:
    """
    Escribe la tabla en un archivo o en stdout.

    Args:
        table: Tabla validada
        output_format: "csv" o "json"
        path: Ruta de salida (None = stdout)

    Raises:
        MetrologyError: IO_ERROR si la escritura falla
    """
    if output_format == "csv":
        text = render_csv(table)
    elif output_format == "json":
        text = render_json(table)
    else:
        raise MetrologyError(
            component="output",
            code="INVALID_PARAMETER",
            message=f"Formato desconocido: {output_format}",
        )

    with _open_target(path) as handle:
        handle.write(text)
        handle.flush()
    logger.debug(
        "Tabla emitida",
        extra={"format": output_format, "rows": len(table.rows), "path": path},
    )


def emit_plot_data(
    table: ResultTable, x: str, y: str, group_by: str, path: Optional[str] = None
) -> None:
    """
    Pares de columnas x/y, uno por curva (valor distinto de group_by).

    Las curvas de distinta longitud se rellenan con celdas vacías.

    Raises:
        MetrologyError: INVALID_PARAMETER si falta una columna; IO_ERROR si la
            escritura falla
    """
    missing = [c for c in (x, y, group_by) if c not in table.columns]
    if missing:
        raise MetrologyError(
            component="output",
            code="INVALID_PARAMETER",
            message=f"Columnas inexistentes: {missing}",
        )

    curves: dict[float, list[tuple[float, float]]] = {}
    for gx, gy, key in zip(table.column(x), table.column(y), table.column(group_by)):
        curves.setdefault(key, []).append((gx, gy))

    header: list[str] = []
    for key in curves:
        label = f"{group_by}={format_number(key)}"
        header.extend([f"{x}@{label}", f"{y}@{label}"])
    length = max((len(points) for points in curves.values()), default=0)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    for i in range(length):
        line: list[str] = []
        for points in curves.values():
            if i < len(points):
                line.extend(format_number(v) for v in points[i])
            else:
                line.extend(["", ""])
        writer.writerow(line)

    with _open_target(path) as handle:
        handle.write(buffer.getvalue())
        handle.flush()
