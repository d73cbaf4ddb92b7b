"""
Familia de dos blancos con fotón separable: ρ = ½|ψ₁⟩⟨ψ₁| + ½|ψ₂⟩⟨ψ₂|.
"""

from collections.abc import Sequence
from typing import Optional

from qlidar.families.base import Components, StateFamily
from qlidar.infra.quadrature import QuadratureGrid
from qlidar.optics import time_amplitude
from qlidar.schemas import TwoTargetScene, build


class TwoTargetSeparableFamily(StateFamily):
    """Separaciones (Δt, Δω) con centroides fijos."""

    name = "two-target-separable"
    supported_parameters = ("delta_t", "delta_omega")

    def __init__(
        self,
        base: TwoTargetScene,
        parameters: Optional[Sequence[str]] = None,
        order: Optional[int] = None,
    ):
        super().__init__(parameters, order)
        self.base = base

    def scene(self, point: Sequence[float]) -> TwoTargetScene:
        values = self.values(point)
        return build(
            TwoTargetScene,
            "families",
            **{
                **self.base.model_dump(),
                "delta_time": values.get("delta_t", self.base.delta_time),
                "delta_frequency": values.get("delta_omega", self.base.delta_frequency),
            },
        )

    @property
    def expected_dim(self) -> int:
        return 4

    def grid(self, point: Sequence[float]) -> QuadratureGrid:
        scene = self.scene(point)
        return QuadratureGrid.for_pulse(
            scene.centroid_time, scene.bandwidth, self.order
        )

    def components(self, point: Sequence[float], grid: QuadratureGrid) -> Components:
        return [
            (0.5, grid.embed(lambda t, p=pulse: time_amplitude(p, t)))
            for pulse in self.scene(point).pulses()
        ]
