"""
Motor de metrología: SLD, matriz QFI, trazas de conmutadores,
reparametrización y oráculo por diferencias finitas.
"""

from collections.abc import Sequence
import logging
import math
from typing import TYPE_CHECKING, Any, Optional

import numpy as np
from pydantic import ValidationError

from qlidar.config import settings
from qlidar.schemas import (
    TRACE_TOL,
    DensityOperator,
    HermitianOperator,
    MetrologyError,
    QfiReport,
)

if TYPE_CHECKING:
    from qlidar.families.base import StateFamily

logger = logging.getLogger(__name__)


# ========== Construcción validada de operadores ==========


def hermitian(matrix: Any) -> HermitianOperator:
    """
    Envuelve una matriz como HermitianOperator.

    Raises:
        MetrologyError: NOT_HERMITIAN si la matriz no es hermítica
    """
    try:
        return HermitianOperator(matrix=matrix)
    except ValidationError as e:
        raise MetrologyError(
            component="engine",
            code="NOT_HERMITIAN",
            message="El operador no es hermítico",
            original_error=e,
        )


def density(matrix: Any, basis_labels: Sequence[str] = ()) -> DensityOperator:
    """
    Envuelve una matriz como DensityOperator.

    Raises:
        MetrologyError: INVALID_STATE si no es una matriz densidad válida
    """
    try:
        return DensityOperator(matrix=matrix, basis_labels=tuple(basis_labels))
    except ValidationError as e:
        raise MetrologyError(
            component="engine",
            code="INVALID_STATE",
            message=str(e.errors()[0].get("msg")),
            original_error=e,
        )


def pure_density(vector: np.ndarray) -> DensityOperator:
    """|ψ⟩⟨ψ| de un vector de coeficientes (se normaliza)."""
    psi = np.asarray(vector, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return density(np.outer(psi, psi.conj()))


def _check_dims(rho: DensityOperator, *operators: HermitianOperator) -> None:
    for op in operators:
        if op.dim != rho.dim:
            raise MetrologyError(
                component="engine",
                code="DIMENSION_MISMATCH",
                message=f"Dimensión {op.dim} distinta de la de ρ ({rho.dim})",
            )


# ========== SLD y QFI ==========


def sld_from_state(
    rho: DensityOperator,
    drho: HermitianOperator,
    eig_cutoff: Optional[float] = None,
) -> HermitianOperator:
    """
    SLD por la fórmula espectral en la base propia de ρ.

    L'_mn = 2⟨e_m|∂ρ|e_n⟩ / (p_m + p_n) para p_m + p_n > eig_cutoff, y cero en
    el núcleo.

    Args:
        rho: Estado
        drho: Derivada ∂ρ (hermítica, de traza nula)
        eig_cutoff: Umbral sobre p_m + p_n (por defecto settings.eig_cutoff)

    Returns:
        HermitianOperator L con Tr(ρL) = 0

    Raises:
        MetrologyError: DIMENSION_MISMATCH, NOT_TRACELESS o DEGENERATE_FAMILY
    """
    cutoff = settings.eig_cutoff if eig_cutoff is None else eig_cutoff
    _check_dims(rho, drho)

    trace = complex(np.trace(drho.matrix))
    if abs(trace) > TRACE_TOL:
        raise MetrologyError(
            component="engine",
            code="NOT_TRACELESS",
            message=f"Tr(∂ρ) = {abs(trace):.3e} supera la tolerancia",
        )

    values, vectors = rho.eigen()
    rotated = vectors.conj().T @ drho.matrix @ vectors
    sums = values[:, None] + values[None, :]
    support = sums > cutoff
    if not support.any():
        raise MetrologyError(
            component="engine",
            code="DEGENERATE_FAMILY",
            message="Todas las sumas de autovalores están bajo el umbral",
            details={"eig_cutoff": cutoff},
        )

    sld = np.zeros_like(rotated)
    sld[support] = 2.0 * rotated[support] / sums[support]
    return hermitian(vectors @ sld @ vectors.conj().T)


def commutator_trace(
    rho: DensityOperator, first: HermitianOperator, second: HermitianOperator
) -> complex:
    """
    Tr(ρ[L_i, L_j]), puramente imaginaria.

    Raises:
        MetrologyError: DIMENSION_MISMATCH
    """
    _check_dims(rho, first, second)
    product = complex(np.trace(rho.matrix @ first.matrix @ second.matrix))
    return 2j * product.imag


def saturability(
    qfi: np.ndarray, traces: np.ndarray, threshold: Optional[float] = None
) -> np.ndarray:
    """
    Veredicto por pares: |Tr(ρ[L_i,L_j])| / sqrt(J_ii J_jj) < umbral.

    J_ii⁻¹ se lee como 1/J_ii, el recíproco del elemento diagonal, y no como
    (J⁻¹)_ii: el cociente no depende de los términos cruzados de J y sigue
    definido cuando J es singular. Ambas lecturas coinciden si J es diagonal.
    Si J_ii J_jj = 0 se compara la traza sin normalizar.
    """
    limit = settings.saturability_threshold if threshold is None else threshold
    diag = np.clip(np.diag(qfi), 0.0, None)
    scale = np.sqrt(np.outer(diag, diag))
    magnitude = np.abs(traces)
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = np.where(scale > 0.0, magnitude / scale, magnitude)
    return normalized < limit


def qfi_from_slds(
    rho: DensityOperator,
    slds: Sequence[HermitianOperator],
    parameter_names: Sequence[str],
    keep_slds: bool = True,
) -> QfiReport:
    """
    J_ij = ½Tr(ρ{L_i, L_j}) y Tr(ρ[L_i, L_j]) para SLDs dadas.

    Returns:
        QfiReport con matriz simétrica y trazas antisimétricas
    """
    names = tuple(parameter_names)
    if len(names) != len(slds):
        raise MetrologyError(
            component="engine",
            code="DIMENSION_MISMATCH",
            message=f"{len(slds)} SLDs para {len(names)} parámetros",
        )
    _check_dims(rho, *slds)

    k = len(slds)
    products = np.empty((k, k), dtype=complex)
    for i in range(k):
        left = rho.matrix @ slds[i].matrix
        for j in range(k):
            products[i, j] = np.trace(left @ slds[j].matrix)

    qfi = products.real
    qfi = 0.5 * (qfi + qfi.T)
    traces = 1j * (products.imag - products.imag.T)
    return QfiReport(
        parameter_names=names,
        qfi_matrix=qfi,
        commutator_traces=traces,
        saturable=saturability(qfi, traces),
        slds=tuple(slds) if keep_slds else None,
    )


def qfi_matrix(
    rho: DensityOperator,
    drhos: Sequence[HermitianOperator],
    parameter_names: Optional[Sequence[str]] = None,
    eig_cutoff: Optional[float] = None,
) -> QfiReport:
    """
    Matriz QFI a partir de ρ y sus derivadas.

    Args:
        rho: Estado
        drhos: Derivadas ∂_k ρ
        parameter_names: Nombres (por defecto p0, p1, ...)
        eig_cutoff: Umbral de la fórmula espectral

    Returns:
        QfiReport con SLDs adjuntas
    """
    names = tuple(parameter_names or (f"p{i}" for i in range(len(drhos))))
    slds = [sld_from_state(rho, d, eig_cutoff) for d in drhos]
    return qfi_from_slds(rho, slds, names)


def reparameterize(
    report: QfiReport,
    jacobian: Any,
    parameter_names: Optional[Sequence[str]] = None,
) -> QfiReport:
    """
    J(μ) = Jac · J(λ) · Jacᵀ, con filas μ y columnas λ.

    Las trazas de conmutadores se transforman igual; las SLDs adjuntas se
    combinan linealmente L_μi = Σ_k Jac_ik L_λk.

    Raises:
        MetrologyError: DIMENSION_MISMATCH o INVALID_PARAMETER
    """
    jac = np.asarray(jacobian, dtype=float)
    k = len(report.parameter_names)
    if jac.ndim != 2 or jac.shape[1] != k:
        raise MetrologyError(
            component="engine",
            code="DIMENSION_MISMATCH",
            message=f"Jacobiano de forma {jac.shape} para {k} parámetros",
        )
    if not np.all(np.isfinite(jac)):
        raise MetrologyError(
            component="engine",
            code="INVALID_PARAMETER",
            message="El jacobiano contiene valores no finitos",
        )

    names = tuple(parameter_names or (f"mu{i}" for i in range(jac.shape[0])))
    qfi = jac @ report.qfi_matrix @ jac.T
    qfi = 0.5 * (qfi + qfi.T)
    traces = jac @ report.commutator_traces @ jac.T

    slds = None
    if report.slds is not None:
        stacked = np.stack([op.matrix for op in report.slds])
        slds = tuple(
            hermitian(np.tensordot(row, stacked, axes=1)) for row in jac
        )

    return QfiReport(
        parameter_names=names,
        qfi_matrix=qfi,
        commutator_traces=traces,
        saturable=saturability(qfi, traces),
        slds=slds,
    )


# ========== Oráculo por diferencias finitas ==========


def orthonormal_basis(
    vectors: Sequence[np.ndarray],
    rank_tolerance: Optional[float] = None,
    max_condition_number: Optional[float] = None,
) -> np.ndarray:
    """
    Gram-Schmidt con reortogonalización (dos pasadas).

    Descarta los vectores cuyo residuo relativo cae bajo rank_tolerance y
    comprueba el número de condición de la matriz de Gram retenida.

    Returns:
        Matriz M×r con columnas ortonormales

    Raises:
        MetrologyError: ILL_CONDITIONED con diagnóstico
    """
    tol = settings.rank_tolerance if rank_tolerance is None else rank_tolerance
    max_cond = (
        settings.max_condition_number
        if max_condition_number is None
        else max_condition_number
    )

    columns: list[np.ndarray] = []
    kept: list[np.ndarray] = []
    for vector in vectors:
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            continue
        residual = vector / norm
        for _ in range(2):
            for q in columns:
                residual = residual - np.vdot(q, residual) * q
        remaining = float(np.linalg.norm(residual))
        if remaining < tol:
            continue
        columns.append(residual / remaining)
        kept.append(vector / norm)

    if not columns:
        raise MetrologyError(
            component="engine",
            code="ILL_CONDITIONED",
            message="El espacio generado es vacío",
        )

    retained = np.stack(kept, axis=1)
    singular = np.linalg.svd(retained, compute_uv=False)
    condition = float((singular[0] / singular[-1]) ** 2)
    if not math.isfinite(condition) or condition > max_cond:
        raise MetrologyError(
            component="engine",
            code="ILL_CONDITIONED",
            message=f"Número de condición de Gram {condition:.3e} supera el límite",
            details={
                "condition_number": condition,
                "rank": len(columns),
                "singular_values": singular.tolist(),
            },
        )
    return np.stack(columns, axis=1)


def _project_density(
    basis: np.ndarray, components: Sequence[tuple[float, np.ndarray]]
) -> np.ndarray:
    """ρ = Σ w_j |c_j⟩⟨c_j| con c_j la proyección normalizada en la base."""
    dim = basis.shape[1]
    rho = np.zeros((dim, dim), dtype=complex)
    for weight, vector in components:
        coeffs = basis.conj().T @ vector
        coeffs = coeffs / np.linalg.norm(coeffs)
        rho += weight * np.outer(coeffs, coeffs.conj())
    return rho


def oracle_qfi(
    family: "StateFamily",
    point: Sequence[float],
    step: Optional[float] = None,
    richardson: Optional[bool] = None,
) -> QfiReport:
    """
    QFI independiente de las formas cerradas.

    Construye la base ortonormal del espacio {ψ_j(λ), (ψ_j(λ+h) - ψ_j(λ-h))/2h},
    proyecta ρ(λ) y ρ(λ±h e_k), deriva por diferencias centrales y aplica
    qfi_matrix.

    Args:
        family: Familia de estados
        point: Valores de los parámetros libres de la familia
        step: Paso fijo h (por defecto relativo a cada parámetro)
        richardson: Combina los pasos h y h/2 como (4D(h/2) - D(h))/3
            (por defecto settings.oracle_richardson)

    Returns:
        QfiReport

    Raises:
        MetrologyError: ILL_CONDITIONED si la base está mal condicionada
    """
    lam = np.asarray(point, dtype=float)
    if lam.shape != (len(family.parameter_names),):
        raise MetrologyError(
            component="engine",
            code="DIMENSION_MISMATCH",
            message=f"Se esperaban {len(family.parameter_names)} parámetros",
        )
    if step is not None and step <= 0.0:
        raise MetrologyError(
            component="engine",
            code="INVALID_PARAMETER",
            message=f"El paso debe ser > 0, recibido {step}",
        )

    grid = family.grid(lam)
    base = family.components(lam, grid)

    shifted: list[tuple[list, list, float]] = []
    candidates = [vector for _, vector in base]
    for k in range(len(lam)):
        h = step if step is not None else settings.oracle_step(float(lam[k]))
        offset = np.zeros_like(lam)
        offset[k] = h
        plus = family.components(lam + offset, grid)
        minus = family.components(lam - offset, grid)
        shifted.append((plus, minus, h))
        candidates.extend(
            (p[1] - m[1]) / (2.0 * h) for p, m in zip(plus, minus)
        )

    try:
        basis = orthonormal_basis(candidates)
    except MetrologyError as e:
        e.details.setdefault("family", family.name)
        raise

    if basis.shape[1] != family.expected_dim:
        logger.warning(
            "Dimensión del oráculo inesperada",
            extra={
                "family": family.name,
                "dim": basis.shape[1],
                "expected_dim": family.expected_dim,
            },
        )

    if richardson is None:
        richardson = settings.oracle_richardson

    def central(plus: list, minus: list, h: float) -> np.ndarray:
        rho_plus = _project_density(basis, plus)
        rho_minus = _project_density(basis, minus)
        return (rho_plus - rho_minus) / (2.0 * h)

    rho = density(_project_density(basis, base))
    drhos = []
    for k, (plus, minus, h) in enumerate(shifted):
        derivative = central(plus, minus, h)
        if richardson:
            offset = np.zeros_like(lam)
            offset[k] = 0.5 * h
            half = central(
                family.components(lam + offset, grid),
                family.components(lam - offset, grid),
                0.5 * h,
            )
            derivative = (4.0 * half - derivative) / 3.0
        drhos.append(hermitian(0.5 * (derivative + derivative.conj().T)))

    logger.debug(
        "Oráculo evaluado",
        extra={"family": family.name, "dim": basis.shape[1], "point": lam.tolist()},
    )
    return qfi_matrix(rho, drhos, family.parameter_names)
