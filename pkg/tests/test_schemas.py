"""
Tests para los schemas de dominio y de ejecución.
"""

import math

import numpy as np
from pydantic import ValidationError
import pytest

from qlidar.schemas import (
    DensityOperator,
    GaussianPulse,
    HadamardShotConfig,
    HermitianOperator,
    MetrologyError,
    QfiReport,
    ResultTable,
    RunConfig,
    ShotRecord,
    TwoPhotonState,
    TwoTargetQfiInputs,
    TwoTargetScene,
    build,
    parse_axis,
)


# ========== Tipos físicos ==========


def test_gaussian_pulse_rejects_non_positive_bandwidth():
    """Test: σ <= 0 no es un pulso válido."""
    with pytest.raises(ValidationError):
        GaussianPulse(bandwidth=0.0)


def test_two_photon_state_rejects_kappa_one():
    """Test: κ = 1 no es un estado físico."""
    with pytest.raises(ValidationError):
        TwoPhotonState(signal=GaussianPulse(), kappa=1.0)


def test_build_converts_validation_error():
    """Test: build traduce ValidationError a INVALID_PARAMETER con el campo."""
    with pytest.raises(MetrologyError) as exc_info:
        build(GaussianPulse, "test", bandwidth=-1.0)

    assert exc_info.value.code == "INVALID_PARAMETER"
    assert exc_info.value.component == "test"
    assert "bandwidth" in exc_info.value.message


def test_scene_pulses_are_centered_on_centroids():
    """Test: los retornos quedan en T ± Δt/2, Ω ± Δω/2."""
    scene = TwoTargetScene(
        centroid_time=1.0,
        centroid_frequency=2.0,
        delta_time=0.4,
        delta_frequency=0.6,
        bandwidth=1.5,
    )
    first, second = scene.pulses()

    assert first.central_time == pytest.approx(1.2)
    assert second.central_time == pytest.approx(0.8)
    assert first.central_frequency == pytest.approx(2.3)
    assert second.central_frequency == pytest.approx(1.7)
    assert first.bandwidth == second.bandwidth == 1.5


def test_scene_states_share_idler():
    """Test: los dos estados de dos fotones comparten idler y κ."""
    first, second = TwoTargetScene(delta_time=0.5, kappa=0.3).states()

    assert first.idler == second.idler
    assert first.kappa == second.kappa == 0.3


def test_two_target_inputs_epsilon():
    """Test: ε = Δt²σ² + Δω²/(4(1-κ²)σ²)."""
    inputs = TwoTargetQfiInputs(
        sigma=2.0, kappa=0.5, delta_time=0.3, delta_frequency=0.8
    )
    expected = 0.09 * 4.0 + 0.64 / (4.0 * 0.75 * 4.0)

    assert inputs.epsilon == pytest.approx(expected, rel=1e-15)
    assert inputs.gap_factor == pytest.approx(4.0 * math.expm1(expected), rel=1e-15)
    assert not inputs.is_degenerate
    assert TwoTargetQfiInputs().is_degenerate


# ========== Operadores ==========


def test_hermitian_operator_rejects_non_hermitian():
    """Test: una matriz no hermítica se rechaza."""
    with pytest.raises(ValidationError):
        HermitianOperator(matrix=[[0, 1], [0, 0]])


def test_hermitian_operator_rejects_non_square():
    """Test: sólo matrices cuadradas."""
    with pytest.raises(ValidationError):
        HermitianOperator(matrix=np.zeros((2, 3)))


def test_density_operator_checks_trace_and_positivity():
    """Test: ρ debe tener traza 1 y autovalores no negativos."""
    with pytest.raises(ValidationError):
        DensityOperator(matrix=np.eye(2))
    with pytest.raises(ValidationError):
        DensityOperator(matrix=np.diag([1.5, -0.5]))


def test_density_operator_eigen_descending():
    """Test: eigen devuelve autovalores en orden descendente."""
    rho = DensityOperator(matrix=np.diag([0.25, 0.75]), basis_labels=("a", "b"))
    values, vectors = rho.eigen()

    np.testing.assert_allclose(values, [0.75, 0.25])
    assert abs(vectors[1, 0]) == pytest.approx(1.0)


def test_density_operator_labels_must_match_dimension():
    """Test: basis_labels debe tener tantas etiquetas como la dimensión."""
    with pytest.raises(ValidationError):
        DensityOperator(matrix=np.diag([0.5, 0.5]), basis_labels=("a",))


def _report(qfi: np.ndarray) -> QfiReport:
    k = qfi.shape[0]
    return QfiReport(
        parameter_names=tuple(f"p{i}" for i in range(k)),
        qfi_matrix=qfi,
        commutator_traces=np.zeros((k, k), dtype=complex),
        saturable=np.ones((k, k), dtype=bool),
    )


def test_qfi_report_shape_validation():
    """Test: las matrices del informe deben ser k×k."""
    with pytest.raises(ValidationError):
        QfiReport(
            parameter_names=("a", "b"),
            qfi_matrix=np.eye(3),
            commutator_traces=np.zeros((2, 2)),
            saturable=np.ones((2, 2), dtype=bool),
        )


def test_cramer_rao_bound():
    """Test: cota J⁻¹/N."""
    report = _report(np.diag([4.0, 1.0, 2.0]))

    np.testing.assert_allclose(
        report.cramer_rao_bound(10), np.diag([0.025, 0.1, 0.05])
    )


def test_cramer_rao_bound_errors():
    """Test: J singular y N < 1 son errores."""
    with pytest.raises(MetrologyError) as exc_info:
        _report(np.zeros((2, 2))).cramer_rao_bound()
    assert exc_info.value.code == "SINGULAR_QFI"

    with pytest.raises(MetrologyError) as exc_info:
        _report(np.eye(2)).cramer_rao_bound(0)
    assert exc_info.value.code == "INVALID_PARAMETER"


# ========== Simulación ==========


def test_shot_record_invariants():
    """Test: outcome ∈ {1, 2} y nu_gap >= 0."""
    assert ShotRecord(nu_gap=0.0, outcome=2).outcome == 2
    with pytest.raises(ValidationError):
        ShotRecord(nu_gap=1.0, outcome=3)
    with pytest.raises(ValidationError):
        ShotRecord(nu_gap=-0.1, outcome=1)


def test_hadamard_config_requires_zero_frequency_separation():
    """Test: la medida Hadamard sólo admite Δω = 0."""
    with pytest.raises(ValidationError):
        HadamardShotConfig(scene=TwoTargetScene(delta_time=0.5, delta_frequency=0.1))


# ========== Ejecución ==========


def test_parse_axis_linear():
    """Test: start:stop:count incluye los extremos."""
    assert parse_axis("0:1:3") == (0.0, 0.5, 1.0)
    assert parse_axis("5:9:1") == (5.0,)


def test_parse_axis_list():
    """Test: lista explícita separada por comas."""
    assert parse_axis("0.1, 2,3") == (0.1, 2.0, 3.0)


@pytest.mark.parametrize("spec", ["0:1", "0:1:0", "", "a,b"])
def test_parse_axis_invalid(spec):
    """Test: formatos inválidos lanzan ValueError."""
    with pytest.raises(ValueError):
        parse_axis(spec)


def test_run_config_defaults():
    """Test: valores por defecto documentados."""
    config = RunConfig()

    assert config.sigma == 1.0
    assert config.kappa == 0.0
    assert config.c == 1.0
    assert config.seed == 0
    assert config.format == "csv"
    assert config.axes() == []


def test_run_config_rejects_unknown_keys():
    """Test: claves desconocidas se rechazan."""
    with pytest.raises(ValidationError):
        RunConfig(sigmaa=1.0)


def test_run_config_rejects_kappa_out_of_range():
    """Test: κ = 1.5 se rechaza nombrando el campo."""
    with pytest.raises(ValidationError) as exc_info:
        RunConfig(kappa=1.5)

    assert exc_info.value.errors()[0]["loc"] == ("kappa",)


def test_run_config_sweep_validation():
    """Test: claves no barribles, valores fuera de rango y ejes excluyentes."""
    with pytest.raises(ValidationError):
        RunConfig(sweep={"shots": "1:10:10"})
    with pytest.raises(ValidationError):
        RunConfig(sweep={"beta": "-1:0:3"})
    with pytest.raises(ValidationError):
        RunConfig(sweep={"dt": "0.1,0.2", "dt_sq_sigma_sq": "0.01"})


def test_run_config_axes_keep_declared_order():
    """Test: los ejes se devuelven en el orden declarado."""
    config = RunConfig(sweep={"kappa": "0,0.5", "sigma": "1:2:2"})

    assert config.axes() == [("kappa", (0.0, 0.5)), ("sigma", (1.0, 2.0))]


# ========== ResultTable ==========


def test_result_table_rejects_ragged_rows():
    """Test: todas las filas tienen el ancho de la cabecera."""
    with pytest.raises(ValidationError):
        ResultTable(columns=("a", "b"), rows=[(1.0,)])


def test_result_table_rejects_non_finite():
    """Test: NaN e inf no salen de la herramienta."""
    with pytest.raises(ValidationError):
        ResultTable(columns=("a",), rows=[(float("nan"),)])
    with pytest.raises(ValidationError):
        ResultTable(columns=("a",), rows=[(float("inf"),)])


def test_result_table_degenerate_rows():
    """Test: cuenta las filas marcadas."""
    table = ResultTable(
        columns=("a", "degenerate"), rows=[(1.0, 0.0), (2.0, 1.0), (3.0, 1.0)]
    )

    assert table.column("a") == [1.0, 2.0, 3.0]
    assert table.degenerate_rows == 2
    assert ResultTable(columns=("a",), rows=[(1.0,)]).degenerate_rows == 0
