"""
Métricas Prometheus para observabilidad de las ejecuciones.
"""

from prometheus_client import (
    REGISTRY,
    Counter,
    Gauge,
    Histogram,
    write_to_textfile,
)

# ========== Contadores ==========

# Puntos evaluados por modo y estado (ok / degenerate / error)
points_evaluated_total = Counter(
    "qlidar_points_evaluated_total",
    "Total de puntos de parámetros evaluados",
    ["mode", "status"],
)

# Fallos del oráculo por diferencias finitas
oracle_failures_total = Counter(
    "qlidar_oracle_failures_total",
    "Total de fallos del oráculo por familia",
    ["family", "reason"],
)

# Chequeos del comando verify
verify_checks_total = Counter(
    "qlidar_verify_checks_total",
    "Total de chequeos de verificación ejecutados",
    ["check", "status"],
)

# Disparos simulados
shots_simulated_total = Counter(
    "qlidar_shots_simulated_total",
    "Total de disparos Monte-Carlo simulados",
    ["measurement"],
)


# ========== Histogramas ==========

point_latency_seconds = Histogram(
    "qlidar_point_latency_seconds",
    "Latencia de evaluación por punto en segundos",
    ["mode"],
    buckets=(0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0),
)


# ========== Gauges ==========

active_workers = Gauge(
    "qlidar_active_workers", "Número de procesos de trabajo activos"
)


# ========== Funciones de ayuda ==========


def record_point(mode: str, status: str) -> None:
    """Registra un punto evaluado."""
    points_evaluated_total.labels(mode=mode, status=status).inc()


def record_oracle_failure(family: str, reason: str) -> None:
    """Registra un fallo del oráculo."""
    oracle_failures_total.labels(family=family, reason=reason).inc()


def record_verify_check(check: str, passed: bool) -> None:
    """Registra el resultado de un chequeo de verificación."""
    verify_checks_total.labels(
        check=check, status="pass" if passed else "fail"
    ).inc()


def record_shots(measurement: str, count: int) -> None:
    """Registra disparos simulados."""
    shots_simulated_total.labels(measurement=measurement).inc(count)


def record_latency(mode: str, duration: float) -> None:
    """Registra la latencia de un punto."""
    point_latency_seconds.labels(mode=mode).observe(duration)


def set_active_workers(count: int) -> None:
    """Actualiza el número de procesos de trabajo."""
    active_workers.set(count)


# ========== Exportación ==========


def write_metrics(path: str) -> None:
    """
    Escribe las métricas del registro por defecto en formato texto Prometheus.

    Args:
        path: Ruta del archivo (formato textfile collector)
    """
    write_to_textfile(path, REGISTRY)
