"""
Schemas y modelos de datos para qlidar.
Contratos internos usando Pydantic v2: pulsos, estados, operadores e informes.
"""

import math
from typing import Any, Literal, Optional, TypeVar

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from qlidar.config import settings

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIGEN_FLOOR = -1e-10
# Mayor ε con e^ε representable en float64
_EXP_OVERFLOW = math.log(np.finfo(float).max)


class MetrologyError(Exception):
    """Error de cálculo con código estable y contexto de diagnóstico."""

    def __init__(
        self,
        component: str,
        code: str,
        message: str,
        details: Optional[dict[str, Any]] = None,
        original_error: Optional[Exception] = None,
    ):
        self.component = component
        self.code = code
        self.message = message
        self.details = details or {}
        self.original_error = original_error
        super().__init__(f"[{component}] {code}: {message}")


ModelT = TypeVar("ModelT", bound=BaseModel)


def build(model_cls: type[ModelT], component: str, **fields: Any) -> ModelT:
    """
    Construye un modelo convirtiendo errores de validación en MetrologyError.

    Args:
        model_cls: Clase Pydantic a instanciar
        component: Componente que reporta el error
        **fields: Campos del modelo

    Returns:
        Instancia validada

    Raises:
        MetrologyError: Con código INVALID_PARAMETER si algún campo es inválido
    """
    try:
        return model_cls(**fields)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first.get("loc", ())) or model_cls.__name__
        raise MetrologyError(
            component=component,
            code="INVALID_PARAMETER",
            message=f"{field}: {first.get('msg')}",
            details={"errors": e.errors(include_url=False)},
            original_error=e,
        )


def check_kappa(kappa: float) -> float:
    """Valida 0 <= kappa <= kappa_max."""
    if not 0.0 <= kappa <= settings.kappa_max:
        raise ValueError(
            f"kappa debe estar en [0, {settings.kappa_max}], recibido {kappa}"
        )
    return kappa


# ========== Óptica gaussiana ==========


class GaussianPulse(BaseModel):
    """Paquete de onda gaussiano de un fotón (t̄, ω̄, σ)."""

    model_config = ConfigDict(frozen=True)

    central_time: float = Field(default=0.0, description="Tiempo central t̄")
    central_frequency: float = Field(
        default=0.0, description="Frecuencia angular central ω̄"
    )
    bandwidth: float = Field(default=1.0, gt=0.0, description="Ancho de banda σ")


class TargetKinematics(BaseModel):
    """Blanco en x (en el instante de emisión) con velocidad radial β = v/c."""

    model_config = ConfigDict(frozen=True)

    range_x: float = Field(default=0.0, description="Posición x del blanco")
    beta: float = Field(default=0.0, gt=-1.0, lt=1.0, description="β = v/c")
    light_speed: float = Field(default=1.0, gt=0.0, description="Velocidad c")


class TwoPhotonState(BaseModel):
    """Estado señal-idler gaussiano con parámetro de entrelazamiento κ."""

    model_config = ConfigDict(frozen=True)

    signal: GaussianPulse
    idler: GaussianPulse = Field(default_factory=GaussianPulse)
    kappa: float = Field(default=0.0)

    @field_validator("kappa")
    @classmethod
    def validate_kappa(cls, v: float) -> float:
        return check_kappa(v)


class TwoTargetScene(BaseModel):
    """Dos retornos incoherentes: centroides (T, Ω) y separaciones (Δt, Δω)."""

    model_config = ConfigDict(frozen=True)

    centroid_time: float = 0.0
    centroid_frequency: float = 0.0
    delta_time: float = 0.0
    delta_frequency: float = 0.0
    bandwidth: float = Field(default=1.0, gt=0.0)
    kappa: float = 0.0

    @field_validator("kappa")
    @classmethod
    def validate_kappa(cls, v: float) -> float:
        return check_kappa(v)

    def pulses(self) -> tuple[GaussianPulse, GaussianPulse]:
        """Retornos t̄_{1,2} = T ± Δt/2, ω̄_{1,2} = Ω ± Δω/2."""
        half_t = self.delta_time / 2.0
        half_w = self.delta_frequency / 2.0
        first = GaussianPulse(
            central_time=self.centroid_time + half_t,
            central_frequency=self.centroid_frequency + half_w,
            bandwidth=self.bandwidth,
        )
        second = GaussianPulse(
            central_time=self.centroid_time - half_t,
            central_frequency=self.centroid_frequency - half_w,
            bandwidth=self.bandwidth,
        )
        return first, second

    def states(self) -> tuple[TwoPhotonState, TwoPhotonState]:
        """Los dos retornos como estados de dos fotones con idler común."""
        idler = GaussianPulse(bandwidth=self.bandwidth)
        first, second = self.pulses()
        return (
            TwoPhotonState(signal=first, idler=idler, kappa=self.kappa),
            TwoPhotonState(signal=second, idler=idler, kappa=self.kappa),
        )


# ========== Operadores ==========


def _as_matrix(v: Any) -> np.ndarray:
    matrix = np.array(v, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Se esperaba una matriz cuadrada, forma {matrix.shape}")
    return matrix


def _hermitian_gap(matrix: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(matrix))))
    return float(np.max(np.abs(matrix - matrix.conj().T))) / scale


class HermitianOperator(BaseModel):
    """Operador hermítico d×d (p. ej. una SLD)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def validate_matrix(cls, v: Any) -> np.ndarray:
        matrix = _as_matrix(v)
        if _hermitian_gap(matrix) > HERMITIAN_TOL:
            raise ValueError("La matriz no es hermítica")
        return (matrix + matrix.conj().T) / 2.0

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


class DensityOperator(BaseModel):
    """Matriz densidad ρ en una base ortonormal finita."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    basis_labels: tuple[str, ...] = ()

    @field_validator("matrix", mode="before")
    @classmethod
    def validate_matrix(cls, v: Any) -> np.ndarray:
        matrix = _as_matrix(v)
        if _hermitian_gap(matrix) > HERMITIAN_TOL:
            raise ValueError("La matriz densidad no es hermítica")
        matrix = (matrix + matrix.conj().T) / 2.0
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"Tr(ρ) = {trace.real:.12g}, se esperaba 1")
        if float(np.min(np.linalg.eigvalsh(matrix))) < EIGEN_FLOOR:
            raise ValueError("ρ tiene autovalores negativos")
        return matrix

    @model_validator(mode="after")
    def validate_labels(self) -> "DensityOperator":
        if self.basis_labels and len(self.basis_labels) != self.dim:
            raise ValueError("basis_labels no coincide con la dimensión de ρ")
        return self

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def eigen(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Autovalores p_n (descendentes) y autovectores |e_n⟩ en columnas.
        """
        values, vectors = np.linalg.eigh(self.matrix)
        order = np.argsort(values)[::-1]
        return values[order], vectors[:, order]


class QfiReport(BaseModel):
    """Matriz QFI, trazas de conmutadores SLD y veredicto de saturabilidad."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    parameter_names: tuple[str, ...]
    qfi_matrix: np.ndarray
    commutator_traces: np.ndarray
    saturable: np.ndarray
    slds: Optional[tuple[HermitianOperator, ...]] = Field(default=None, repr=False)

    @model_validator(mode="after")
    def validate_shapes(self) -> "QfiReport":
        k = len(self.parameter_names)
        for name in ("qfi_matrix", "commutator_traces", "saturable"):
            if getattr(self, name).shape != (k, k):
                raise ValueError(f"{name} debe ser {k}x{k}")
        return self

    def entry(self, first: str, second: str) -> float:
        """Elemento J[first, second] por nombre de parámetro."""
        i = self.parameter_names.index(first)
        j = self.parameter_names.index(second)
        return float(self.qfi_matrix[i, j])

    def trace(self, first: str, second: str) -> complex:
        """Tr(ρ[L_first, L_second]) por nombre de parámetro."""
        i = self.parameter_names.index(first)
        j = self.parameter_names.index(second)
        return complex(self.commutator_traces[i, j])

    def cramer_rao_bound(self, n_probes: int = 1) -> np.ndarray:
        """
        Cota cuántica de Cramér-Rao: Cov ≥ J⁻¹ / N.

        Args:
            n_probes: Número N de sondas

        Returns:
            Matriz J⁻¹/N

        Raises:
            MetrologyError: Si J es singular o N < 1
        """
        if n_probes < 1:
            raise MetrologyError(
                component="schemas",
                code="INVALID_PARAMETER",
                message=f"n_probes debe ser >= 1, recibido {n_probes}",
            )
        try:
            inverse = np.linalg.inv(self.qfi_matrix)
        except np.linalg.LinAlgError as e:
            raise MetrologyError(
                component="schemas",
                code="SINGULAR_QFI",
                message="La matriz QFI es singular",
                original_error=e,
            )
        return inverse / n_probes


# ========== Problemas de estimación ==========


class SingleTargetProblem(BaseModel):
    """Un blanco: sonda σ, frecuencia saliente ω̄₀, κ y cinemática (x, β, c)."""

    model_config = ConfigDict(frozen=True)

    sigma: float = Field(default=1.0, gt=0.0)
    omega0: float = 0.0
    kappa: float = 0.0
    kinematics: TargetKinematics = Field(default_factory=TargetKinematics)

    @field_validator("kappa")
    @classmethod
    def validate_kappa(cls, v: float) -> float:
        return check_kappa(v)


class TwoTargetQfiInputs(BaseModel):
    """Entradas de la QFI de dos blancos (σ, κ, Δt, Δω)."""

    model_config = ConfigDict(frozen=True)

    sigma: float = Field(default=1.0, gt=0.0)
    kappa: float = 0.0
    delta_time: float = 0.0
    delta_frequency: float = 0.0

    @field_validator("kappa")
    @classmethod
    def validate_kappa(cls, v: float) -> float:
        return check_kappa(v)

    @property
    def epsilon(self) -> float:
        """ε = Δt²σ² + Δω²/(4(1−κ²)σ²)."""
        return self.delta_time**2 * self.sigma**2 + self.delta_frequency**2 / (
            4.0 * (1.0 - self.kappa**2) * self.sigma**2
        )

    @property
    def gap_factor(self) -> float:
        """4(e^ε − 1); se anula sólo en Δt = Δω = 0 y es inf si e^ε desborda."""
        if self.epsilon > _EXP_OVERFLOW:
            return math.inf
        return 4.0 * math.expm1(self.epsilon)

    @property
    def inverse_gap_factor(self) -> float:
        """1/(4(e^ε − 1)) = e^-ε/(4(1 − e^-ε)); tiende a 0 sin desbordar."""
        eps = self.epsilon
        if eps == 0.0:
            return math.inf
        return math.exp(-eps) / (-4.0 * math.expm1(-eps))

    @property
    def is_degenerate(self) -> bool:
        return self.delta_time == 0.0 and self.delta_frequency == 0.0


class RelativeKinematics(BaseModel):
    """Separaciones relativas Δx, Δβ con ω̄₀ y c."""

    model_config = ConfigDict(frozen=True)

    delta_x: float = 0.0
    delta_beta: float = 0.0
    omega0: float = 0.0
    light_speed: float = Field(default=1.0, gt=0.0)


# ========== Simulación de medidas ==========


class HadamardShotConfig(BaseModel):
    """Configuración de disparos de la medida Hadamard en frecuencia (Δω = 0)."""

    model_config = ConfigDict(frozen=True)

    scene: TwoTargetScene
    shots: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    phase_calibration: bool = True

    @field_validator("scene")
    @classmethod
    def validate_scene(cls, v: TwoTargetScene) -> TwoTargetScene:
        if v.delta_frequency != 0.0:
            raise ValueError("La medida Hadamard requiere Δω = 0")
        return v


class ShotRecord(BaseModel):
    """Un evento de medida: |ν₁−ν₂| muestreado y resultado del detector."""

    model_config = ConfigDict(frozen=True)

    nu_gap: float = Field(..., ge=0.0)
    outcome: int

    @field_validator("outcome")
    @classmethod
    def validate_outcome(cls, v: int) -> int:
        if v not in (1, 2):
            raise ValueError("El resultado debe ser 1 o 2")
        return v


class JointMeasureConfig(BaseModel):
    """Configuración de la medida conjunta ω₊ / t₋."""

    model_config = ConfigDict(frozen=True)

    state: TwoPhotonState
    shots: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)


# ========== Ejecución (CLI) ==========

RunMode = Literal[
    "single-target", "two-target", "simulate-hadamard", "simulate-joint", "verify"
]

# Claves barribles: parámetros físicos y ejes derivados Δt²σ², Δω²/σ²
SWEEPABLE = (
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
    "dt_sq_sigma_sq",
    "domega_sq_over_sigma_sq",
)


def parse_axis(spec: str) -> tuple[float, ...]:
    """
    Interpreta un eje de barrido.

    Args:
        spec: "start:stop:count" (lineal, extremos incluidos) o "a,b,c"

    Returns:
        Valores del eje en orden

    Raises:
        ValueError: Si el formato es inválido o count < 1
    """
    text = spec.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"Eje '{spec}': se esperaba start:stop:count")
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
        if count < 1:
            raise ValueError(f"Eje '{spec}': count debe ser >= 1")
        if count == 1:
            return (start,)
        return tuple(float(v) for v in np.linspace(start, stop, count))
    values = tuple(float(v) for v in text.split(",") if v.strip())
    if not values:
        raise ValueError(f"Eje '{spec}' vacío")
    return values


def _check_sweep_value(key: str, value: float) -> None:
    if not np.isfinite(value):
        raise ValueError(f"sweep.{key}: valor no finito {value}")
    if key in ("sigma", "c") and value <= 0.0:
        raise ValueError(f"sweep.{key} debe ser > 0, recibido {value}")
    if key == "beta" and not -1.0 < value < 1.0:
        raise ValueError(f"sweep.beta debe estar en (-1, 1), recibido {value}")
    if key == "kappa":
        check_kappa(value)
    if key in ("dt_sq_sigma_sq", "domega_sq_over_sigma_sq") and value < 0.0:
        raise ValueError(f"sweep.{key} debe ser >= 0, recibido {value}")


class RunConfig(BaseModel):
    """Parámetros de una ejecución de la CLI (claves planas snake_case)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: RunMode = "two-target"

    # Parámetros físicos
    sigma: float = Field(default=1.0, gt=0.0)
    kappa: float = 0.0
    omega0: float = 0.0
    c: float = Field(default=1.0, gt=0.0)
    x: float = 0.0
    beta: float = Field(default=0.0, gt=-1.0, lt=1.0)
    dt: float = 0.0
    domega: float = 0.0
    centroid_time: float = 0.0
    centroid_frequency: float = 0.0

    # Barrido: clave → "start:stop:count" o "a,b,c"
    sweep: dict[str, str] = Field(default_factory=dict)

    # Simulación
    shots: int = Field(default=1000, ge=1)
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    phase_calibration: bool = True
    exact_doppler: bool = False

    # Salida
    format: Literal["csv", "json"] = "csv"
    out: Optional[str] = None
    workers: Optional[int] = Field(default=None, ge=1)
    tolerance: float = Field(default=1e-5, gt=0.0)

    @field_validator("kappa")
    @classmethod
    def validate_kappa(cls, v: float) -> float:
        return check_kappa(v)

    @field_validator("sweep")
    @classmethod
    def validate_sweep(cls, v: dict[str, str]) -> dict[str, str]:
        for key, spec in v.items():
            if key not in SWEEPABLE:
                allowed = ", ".join(SWEEPABLE)
                raise ValueError(
                    f"sweep.{key}: clave no barrible (admitidas: {allowed})"
                )
            for value in parse_axis(spec):
                _check_sweep_value(key, value)
        if "dt" in v and "dt_sq_sigma_sq" in v:
            raise ValueError("sweep: dt y dt_sq_sigma_sq son excluyentes")
        if "domega" in v and "domega_sq_over_sigma_sq" in v:
            raise ValueError("sweep: domega y domega_sq_over_sigma_sq son excluyentes")
        return v

    def axes(self) -> list[tuple[str, tuple[float, ...]]]:
        """Ejes de barrido en el orden declarado."""
        return [(key, parse_axis(spec)) for key, spec in self.sweep.items()]


class ResultTable(BaseModel):
    """Tabla rectangular de resultados numéricos finitos."""

    model_config = ConfigDict(frozen=True)

    columns: tuple[str, ...]
    rows: list[tuple[float, ...]]
    metadata: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_rows(self) -> "ResultTable":
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"Fila {i}: {len(row)} valores, se esperaban {width}")
            if not all(np.isfinite(v) for v in row):
                bad = [c for c, v in zip(self.columns, row) if not np.isfinite(v)]
                raise ValueError(f"Fila {i}: valores no finitos en {bad}")
        return self

    def column(self, name: str) -> list[float]:
        """Valores de una columna."""
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    @property
    def degenerate_rows(self) -> int:
        """Filas marcadas como degeneradas."""
        if "degenerate" not in self.columns:
            return 0
        return int(sum(1 for v in self.column("degenerate") if v))
