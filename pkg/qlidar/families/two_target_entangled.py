"""
Familia de dos blancos con par entrelazado e idler común.
"""

from collections.abc import Sequence
from typing import Optional

from qlidar.families.base import Components
from qlidar.families.two_target_separable import TwoTargetSeparableFamily
from qlidar.infra.quadrature import QuadratureGrid
from qlidar.optics import two_photon_amplitude


class TwoTargetEntangledFamily(TwoTargetSeparableFamily):
    """ρ = ½|Ψ₁⟩⟨Ψ₁| + ½|Ψ₂⟩⟨Ψ₂|; espacio local de dimensión 6 para κ > 0."""

    name = "two-target-entangled"

    @property
    def expected_dim(self) -> int:
        return 6 if self.base.kappa > 0.0 else 4

    def grid(self, point: Sequence[float]) -> QuadratureGrid:
        scene = self.scene(point)
        return QuadratureGrid.for_two_photon(
            scene.centroid_time,
            0.0,
            scene.bandwidth,
            scene.bandwidth,
            scene.kappa,
            self.order,
        )

    def components(self, point: Sequence[float], grid: QuadratureGrid) -> Components:
        return [
            (0.5, grid.embed(lambda t, ti, s=state: two_photon_amplitude(s, t, ti)))
            for state in self.scene(point).states()
        ]
