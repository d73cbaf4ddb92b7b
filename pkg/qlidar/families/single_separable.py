"""
Familia de un blanco con fotón separable: ψ(t; t̄, ω̄, σ).
"""

from collections.abc import Sequence
from typing import Optional

from qlidar.families.base import Components, StateFamily
from qlidar.infra.quadrature import QuadratureGrid
from qlidar.optics import time_amplitude
from qlidar.schemas import GaussianPulse, build


class SingleSeparableFamily(StateFamily):
    """Pulso gaussiano puro; espacio local de dimensión 3."""

    name = "single-separable"
    supported_parameters = ("t_bar", "omega_bar", "sigma")

    def __init__(
        self,
        base: Optional[GaussianPulse] = None,
        parameters: Optional[Sequence[str]] = None,
        order: Optional[int] = None,
    ):
        super().__init__(parameters, order)
        self.base = base or GaussianPulse()

    def pulse(self, point: Sequence[float]) -> GaussianPulse:
        """Pulso con los parámetros libres sustituidos."""
        values = self.values(point)
        return build(
            GaussianPulse,
            "families",
            central_time=values.get("t_bar", self.base.central_time),
            central_frequency=values.get("omega_bar", self.base.central_frequency),
            bandwidth=values.get("sigma", self.base.bandwidth),
        )

    @property
    def expected_dim(self) -> int:
        free = set(self.parameter_names)
        return 1 + int(bool(free & {"t_bar", "omega_bar"})) + int("sigma" in free)

    def grid(self, point: Sequence[float]) -> QuadratureGrid:
        pulse = self.pulse(point)
        return QuadratureGrid.for_pulse(pulse.central_time, pulse.bandwidth, self.order)

    def components(self, point: Sequence[float], grid: QuadratureGrid) -> Components:
        pulse = self.pulse(point)
        return [(1.0, grid.embed(lambda t: time_amplitude(pulse, t)))]
