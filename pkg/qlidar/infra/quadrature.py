"""
Incrustación de funciones de onda en C^M mediante cuadratura Gauss-Hermite.

Cada función f se representa por el vector F_n = f(nodo_n) * sqrt(peso_n), de
modo que ⟨f|g⟩ = vdot(F, G). La malla se centra y escala a la envolvente
gaussiana del estado de referencia.
"""

from collections.abc import Callable
from functools import lru_cache
import logging
import math
from typing import Optional

import numpy as np
from scipy.special import roots_hermite

from qlidar.config import settings

logger = logging.getLogger(__name__)


@lru_cache(maxsize=16)
def _hermite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodos x_n y log(w_n) + x_n² de la regla ∫ e^{-x²} f(x) dx."""
    nodes, weights = roots_hermite(order)
    log_weights = np.log(weights) + nodes**2
    nodes.setflags(write=False)
    log_weights.setflags(write=False)
    return nodes, log_weights


class QuadratureGrid:
    """Malla de cuadratura 1-D o 2-D con pesos raíz precalculados."""

    def __init__(self, nodes: tuple[np.ndarray, ...], root_weights: np.ndarray):
        """
        Args:
            nodes: Coordenadas físicas por eje (arrays planos de igual longitud)
            root_weights: sqrt del peso efectivo de cada nodo
        """
        self.nodes = nodes
        self.root_weights = root_weights

    @classmethod
    def for_pulse(
        cls, center: float, bandwidth: float, order: Optional[int] = None
    ) -> "QuadratureGrid":
        """
        Malla 1-D para pulsos ψ(t) ∝ exp(-σ²(t - t̄)²).

        Args:
            center: Tiempo central t̄ de la envolvente
            bandwidth: Ancho de banda σ
            order: Número de nodos (por defecto settings.quadrature_order)

        Returns:
            QuadratureGrid con t_n = t̄ + x_n / (√2 σ)
        """
        x, log_w = _hermite_rule(order or settings.quadrature_order)
        scale = 1.0 / (math.sqrt(2.0) * bandwidth)
        times = center + scale * x
        root_weights = np.exp(0.5 * (log_w + math.log(scale)))
        return cls((times,), root_weights)

    @classmethod
    def for_two_photon(
        cls,
        signal_center: float,
        idler_center: float,
        bandwidth: float,
        idler_bandwidth: float,
        kappa: float,
        order: Optional[int] = None,
    ) -> "QuadratureGrid":
        """
        Malla 2-D rotada para Ψ(t, t_i) con correlación κ.

        Con S = σ(t - t̄), U = σ_i(t_i - t̄_i) y las coordenadas
        x = √(1-κ)(S+U), y = √(1+κ)(S-U) la envolvente es exp(-(x²+y²)/2).
        """
        x, log_w = _hermite_rule(order or settings.quadrature_order)
        xx, yy = np.meshgrid(x, x, indexing="ij")
        lw = (log_w[:, None] + log_w[None, :]).ravel()
        xx, yy = xx.ravel(), yy.ravel()

        a = math.sqrt(1.0 - kappa)
        b = math.sqrt(1.0 + kappa)
        s = 0.5 * (xx / a + yy / b)
        u = 0.5 * (xx / a - yy / b)
        times = signal_center + s / bandwidth
        idler_times = idler_center + u / idler_bandwidth

        jacobian = 1.0 / (2.0 * a * b * bandwidth * idler_bandwidth)
        root_weights = np.exp(0.5 * (lw + math.log(jacobian)))
        return cls((times, idler_times), root_weights)

    @property
    def size(self) -> int:
        return int(self.root_weights.shape[0])

    def embed(self, amplitude: Callable[..., np.ndarray]) -> np.ndarray:
        """
        Evalúa la amplitud en los nodos y la pondera.

        Args:
            amplitude: Función vectorizada de las coordenadas de la malla

        Returns:
            Vector complejo F con ⟨f|g⟩ = vdot(F, G)
        """
        values = np.asarray(amplitude(*self.nodes), dtype=complex)
        return values * self.root_weights

    @staticmethod
    def inner(first: np.ndarray, second: np.ndarray) -> complex:
        """Producto interno ⟨first|second⟩ (antilineal en el primero)."""
        return complex(np.vdot(first, second))

    def integrate(self, density: Callable[..., np.ndarray]) -> complex:
        """∫ density sobre la malla (density ya incluye el conjugado)."""
        values = np.asarray(density(*self.nodes), dtype=complex)
        return complex(np.sum(values * self.root_weights**2))
