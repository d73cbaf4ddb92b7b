"""
Familia de un blanco con par entrelazado: Ψ(t, t_i; t̄, ω̄, σ) con κ fijo.
"""

from collections.abc import Sequence
from typing import Optional

from qlidar.families.base import Components, StateFamily
from qlidar.infra.quadrature import QuadratureGrid
from qlidar.optics import two_photon_amplitude
from qlidar.schemas import GaussianPulse, TwoPhotonState, build


class SingleEntangledFamily(StateFamily):
    """Estado de dos fotones; los parámetros actúan sobre la señal."""

    name = "single-entangled"
    supported_parameters = ("t_bar", "omega_bar", "sigma")

    def __init__(
        self,
        base: TwoPhotonState,
        parameters: Optional[Sequence[str]] = None,
        order: Optional[int] = None,
    ):
        super().__init__(parameters, order)
        self.base = base

    def state(self, point: Sequence[float]) -> TwoPhotonState:
        values = self.values(point)
        signal = self.base.signal
        pulse = build(
            GaussianPulse,
            "families",
            central_time=values.get("t_bar", signal.central_time),
            central_frequency=values.get("omega_bar", signal.central_frequency),
            bandwidth=values.get("sigma", signal.bandwidth),
        )
        return TwoPhotonState(
            signal=pulse, idler=self.base.idler, kappa=self.base.kappa
        )

    @property
    def expected_dim(self) -> int:
        free = set(self.parameter_names)
        if self.base.kappa == 0.0:
            return 1 + int(bool(free & {"t_bar", "omega_bar"})) + int("sigma" in free)
        return 1 + len(free)

    def grid(self, point: Sequence[float]) -> QuadratureGrid:
        state = self.state(point)
        return QuadratureGrid.for_two_photon(
            state.signal.central_time,
            state.idler.central_time,
            state.signal.bandwidth,
            state.idler.bandwidth,
            state.kappa,
            self.order,
        )

    def components(self, point: Sequence[float], grid: QuadratureGrid) -> Components:
        state = self.state(point)
        return [(1.0, grid.embed(lambda t, ti: two_photon_amplitude(state, t, ti)))]
