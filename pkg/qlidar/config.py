"""
Configuración de la aplicación usando Pydantic Settings.
Lee variables de entorno (prefijo QLIDAR_) y archivo .env.
"""

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any, Literal, Optional

from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

if TYPE_CHECKING:
    from qlidar.schemas import RunConfig

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class Settings(BaseSettings):
    """Configuración global de la herramienta."""

    # Aplicación
    app_env: str = "development"
    app_name: str = "qlidar"
    app_version: str = "0.1.0"
    log_level: LogLevel = "INFO"

    # Ruta por defecto del archivo de configuración JSON (QLIDAR_CONFIG_PATH)
    config_path: Optional[str] = None

    # Exportación de métricas Prometheus (formato texto)
    metrics_path: Optional[str] = None

    # Cuadratura Gauss-Hermite (nodos por eje)
    quadrature_order: int = Field(default=80, ge=8, le=200)

    # Motor SLD / QFI
    eig_cutoff: float = Field(default=1e-12, gt=0.0)
    saturability_threshold: float = Field(default=1e-3, gt=0.0)

    # Entrelazamiento: el estado no es físico en kappa = 1
    kappa_max: float = Field(default=1.0 - 1e-6, gt=0.0, lt=1.0)

    # Oráculo por diferencias finitas
    oracle_relative_step: float = Field(default=1e-4, gt=0.0)
    oracle_richardson: bool = False
    rank_tolerance: float = Field(default=1e-6, gt=0.0)
    max_condition_number: float = Field(default=1e12, gt=1.0)

    # Simulación Monte-Carlo
    shot_block_size: int = Field(default=65536, ge=1)
    mle_grid_points: int = Field(default=64, ge=8)

    # Paralelismo de barridos (1 = secuencial)
    workers: int = Field(default=1, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="QLIDAR_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v: Any) -> Any:
        return v.upper() if isinstance(v, str) else v

    def oracle_step(self, value: float) -> float:
        """
        Paso de diferencias centrales para un parámetro.

        Args:
            value: Valor actual del parámetro

        Returns:
            h = paso_relativo * max(1, |valor|)
        """
        return self.oracle_relative_step * max(1.0, abs(value))


# Instancia global de configuración
settings = Settings()


# ========== Archivo de configuración de ejecución ==========


def load_config(
    path: Optional[str] = None, overrides: Optional[dict[str, Any]] = None
) -> "RunConfig":
    """
    Carga un RunConfig desde JSON y aplica los flags de la CLI encima.

    Args:
        path: Ruta del JSON (por defecto QLIDAR_CONFIG_PATH; None = sin archivo)
        overrides: Valores de flags; los None se ignoran y "sweep" se fusiona
            por clave

    Returns:
        RunConfig validado

    Raises:
        MetrologyError: CONFIG_PARSE si el archivo no se puede leer o no es un
            objeto JSON; CONFIG_INVALID si algún campo es inválido
    """
    from qlidar.schemas import MetrologyError, RunConfig

    source = path or settings.config_path
    data: dict[str, Any] = {}
    if source:
        try:
            text = Path(source).read_text(encoding="utf-8")
            data = json.loads(text) if text.strip() else {}
        except (OSError, json.JSONDecodeError) as e:
            raise MetrologyError(
                component="config",
                code="CONFIG_PARSE",
                message=f"No se pudo leer {source}: {e}",
                original_error=e,
            )
        if not isinstance(data, dict):
            raise MetrologyError(
                component="config",
                code="CONFIG_PARSE",
                message=f"{source}: se esperaba un objeto JSON",
            )

    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    if "sweep" in flags:
        flags["sweep"] = {**data.get("sweep", {}), **flags["sweep"]}

    try:
        return RunConfig.model_validate({**data, **flags})
    except ValidationError as e:
        messages = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in e.errors(include_url=False)
        ]
        raise MetrologyError(
            component="config",
            code="CONFIG_INVALID",
            message="; ".join(messages),
            details={"errors": e.errors(include_url=False)},
            original_error=e,
        )


def save_config(config: "RunConfig", path: str) -> None:
    """
    Escribe un RunConfig con la misma forma JSON que acepta load_config.

    Raises:
        MetrologyError: IO_ERROR si no se puede escribir
    """
    from qlidar.schemas import MetrologyError

    try:
        Path(path).write_text(
            json.dumps(config.model_dump(mode="json"), indent=2) + "\n",
            encoding="utf-8",
        )
    except OSError as e:
        raise MetrologyError(
            component="config",
            code="IO_ERROR",
            message=f"No se pudo escribir {path}: {e}",
            original_error=e,
        )
