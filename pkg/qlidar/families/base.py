"""
Interfaz base abstracta para familias de estados parametrizadas.
Define el contrato que consume el oráculo QFI.
"""

from abc import ABC, abstractmethod
from collections.abc import Sequence
import logging
from typing import Optional

import numpy as np

from qlidar.infra.quadrature import QuadratureGrid
from qlidar.schemas import MetrologyError

logger = logging.getLogger(__name__)

# (peso, vector incrustado) de cada componente pura de ρ
Components = list[tuple[float, np.ndarray]]


class StateFamily(ABC):
    """
    Clase base abstracta para familias λ → ρ(λ).

    Cada familia expone sus parámetros libres, una malla de cuadratura fija
    para el punto base y las componentes puras de ρ incrustadas en esa malla.
    """

    # Nombre de la familia (debe ser definido por cada implementación)
    name: str = "base"

    # Parámetros admitidos, en orden canónico
    supported_parameters: tuple[str, ...] = ()

    def __init__(
        self,
        parameters: Optional[Sequence[str]] = None,
        order: Optional[int] = None,
    ):
        """
        Args:
            parameters: Subconjunto libre de supported_parameters
            order: Orden de cuadratura por eje (por defecto el de settings)
        """
        names = tuple(parameters or self.supported_parameters)
        unknown = [n for n in names if n not in self.supported_parameters]
        if unknown or not names:
            raise MetrologyError(
                component="families",
                code="INVALID_PARAMETER",
                message=f"Parámetros no soportados por {self.name}: {unknown}",
            )
        self.parameter_names = names
        self.order = order

    def values(self, point: Sequence[float]) -> dict[str, float]:
        """Asocia el vector λ a los nombres de parámetros."""
        return dict(zip(self.parameter_names, (float(v) for v in point)))

    @property
    @abstractmethod
    def expected_dim(self) -> int:
        """Dimensión del espacio local generado por la familia."""
        raise NotImplementedError

    @abstractmethod
    def grid(self, point: Sequence[float]) -> QuadratureGrid:
        """
        Malla de cuadratura adaptada al punto base.

        Args:
            point: Valores de los parámetros libres

        Returns:
            QuadratureGrid que se mantiene fija en los puntos desplazados
        """
        raise NotImplementedError

    @abstractmethod
    def components(self, point: Sequence[float], grid: QuadratureGrid) -> Components:
        """
        Componentes puras de ρ(λ) incrustadas en la malla.

        Args:
            point: Valores de los parámetros libres
            grid: Malla del punto base

        Returns:
            Lista de (peso, vector) con pesos que suman 1
        """
        raise NotImplementedError

    def gram_matrix(self, basis: np.ndarray) -> np.ndarray:
        """Matriz de Gram de las columnas de una base incrustada."""
        return basis.conj().T @ basis
