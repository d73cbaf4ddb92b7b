"""
Tests para el motor de metrología: SLD, QFI, conmutadores y oráculo.
"""

import numpy as np
import pytest

from qlidar import engine, single_target
from qlidar.families import SingleSeparableFamily
from qlidar.schemas import GaussianPulse, MetrologyError


@pytest.fixture
def qubit():
    """Fixture de ρ = |0⟩⟨0| con ∂ρ de una rotación en θ."""
    rho = engine.pure_density(np.array([1.0, 0.0]))
    drho = engine.hermitian(np.array([[0.0, 1.0], [1.0, 0.0]]))
    return rho, drho


# ========== Construcción de operadores ==========


def test_hermitian_wraps_errors():
    """Test: matriz no hermítica es NOT_HERMITIAN."""
    with pytest.raises(MetrologyError) as exc_info:
        engine.hermitian([[0, 1], [2, 0]])

    assert exc_info.value.code == "NOT_HERMITIAN"


def test_density_wraps_errors():
    """Test: traza distinta de 1 es INVALID_STATE."""
    with pytest.raises(MetrologyError) as exc_info:
        engine.density(np.eye(3))

    assert exc_info.value.code == "INVALID_STATE"


def test_pure_density_normalizes():
    """Test: |ψ⟩⟨ψ| con ψ normalizado."""
    rho = engine.pure_density(np.array([3.0, 4.0j]))

    assert np.trace(rho.matrix).real == pytest.approx(1.0)
    assert rho.matrix[0, 0].real == pytest.approx(0.36)


# ========== SLD y QFI ==========


def test_sld_pure_qubit(qubit):
    """Test: SLD de una rotación pura y QFI = 4."""
    rho, drho = qubit

    sld = engine.sld_from_state(rho, drho)

    np.testing.assert_allclose(sld.matrix, [[0, 2], [2, 0]], atol=1e-12)
    report = engine.qfi_matrix(rho, [drho], ["theta"])
    assert report.entry("theta", "theta") == pytest.approx(4.0)


def test_sld_mixed_state_satisfies_definition():
    """Test: ∂ρ = ½(ρL + Lρ) en el soporte de un estado mixto."""
    rho = engine.density(np.array([[0.7, 0.1], [0.1, 0.3]]))
    drho = engine.hermitian(np.array([[0.2, 0.05j], [-0.05j, -0.2]]))

    sld = engine.sld_from_state(rho, drho).matrix

    np.testing.assert_allclose(
        0.5 * (rho.matrix @ sld + sld @ rho.matrix), drho.matrix, atol=1e-12
    )
    assert abs(np.trace(rho.matrix @ sld)) < 1e-12


def test_sld_requires_traceless_derivative(qubit):
    """Test: Tr(∂ρ) != 0 es NOT_TRACELESS."""
    rho, _ = qubit

    with pytest.raises(MetrologyError) as exc_info:
        engine.sld_from_state(rho, engine.hermitian(np.diag([1.0, 0.0])))

    assert exc_info.value.code == "NOT_TRACELESS"


def test_sld_dimension_mismatch(qubit):
    """Test: dimensiones distintas son DIMENSION_MISMATCH."""
    rho, _ = qubit

    with pytest.raises(MetrologyError) as exc_info:
        engine.sld_from_state(rho, engine.hermitian(np.zeros((3, 3))))

    assert exc_info.value.code == "DIMENSION_MISMATCH"


def test_sld_degenerate_family(qubit):
    """Test: todas las sumas bajo el umbral es DEGENERATE_FAMILY."""
    rho, drho = qubit

    with pytest.raises(MetrologyError) as exc_info:
        engine.sld_from_state(rho, drho, eig_cutoff=10.0)

    assert exc_info.value.code == "DEGENERATE_FAMILY"


def test_qfi_from_slds_name_count(qubit):
    """Test: tantos nombres como SLDs."""
    rho, drho = qubit

    with pytest.raises(MetrologyError) as exc_info:
        engine.qfi_from_slds(rho, [drho], ["a", "b"])

    assert exc_info.value.code == "DIMENSION_MISMATCH"


def test_qfi_matrix_default_names(qubit):
    """Test: nombres p0, p1, ... por defecto."""
    rho, drho = qubit

    report = engine.qfi_matrix(rho, [drho, drho])

    assert report.parameter_names == ("p0", "p1")
    np.testing.assert_allclose(report.qfi_matrix, 4.0 * np.ones((2, 2)), atol=1e-12)


# ========== Conmutadores y saturabilidad ==========


def test_commutator_trace_single_target():
    """Test: Tr(ρ[L_t̄, L_ω̄]) = -4i con las SLDs de forma cerrada."""
    l_time, l_freq, _ = single_target.sld_lambda(1.0)
    rho = engine.pure_density(np.eye(3)[0])

    trace = engine.commutator_trace(rho, l_time, l_freq)

    assert trace == pytest.approx(-4j, abs=1e-12)
    assert engine.commutator_trace(rho, l_freq, l_time) == pytest.approx(4j, abs=1e-12)


def test_saturability_verdicts():
    """Test: umbral sobre la traza normalizada por sqrt(J_ii J_jj)."""
    qfi = np.diag([4.0, 1.0])
    traces = np.array([[0.0, -4j], [4j, 0.0]])

    verdict = engine.saturability(qfi, traces)

    assert verdict.tolist() == [[True, False], [False, True]]
    assert engine.saturability(qfi, 1e-6 * traces).all()


def test_saturability_ignores_off_diagonal_information():
    """Test: con J no diagonal se normaliza por J_ii J_jj, no por (J⁻¹)_ii (J⁻¹)_jj."""
    qfi = np.array([[4.0, 1.9], [1.9, 1.0]])
    traces = np.array([[0.0, 0.0019j], [-0.0019j, 0.0]])

    verdict = engine.saturability(qfi, traces, threshold=1e-3)

    # por la inversa: 0.0019 * sqrt(1 * 4) / 0.39 ≈ 0.0097
    assert verdict[0, 1]
    assert verdict[1, 0]


def test_saturability_zero_information_uses_raw_trace():
    """Test: con J_ii J_jj = 0 se compara la traza sin normalizar."""
    qfi = np.diag([0.0, 1.0])
    traces = np.array([[0.0, 0.5j], [-0.5j, 0.0]])

    assert not engine.saturability(qfi, traces)[0, 1]


# ========== Reparametrización ==========


def test_reparameterize_matches_jacobian_product():
    """Test: J(μ) = Jac J(λ) Jacᵀ y SLDs combinadas linealmente."""
    report = single_target.lambda_report(1.0)
    jac = np.array([[2.0, 0.0, 0.0], [0.5, -2.0, -2.0]])

    mu = engine.reparameterize(report, jac, ["x", "beta"])

    np.testing.assert_allclose(mu.qfi_matrix, jac @ report.qfi_matrix @ jac.T)
    rho = engine.pure_density(np.eye(3)[0])
    direct = engine.qfi_from_slds(rho, mu.slds, ["x", "beta"])
    np.testing.assert_allclose(direct.qfi_matrix, mu.qfi_matrix, atol=1e-12)
    np.testing.assert_allclose(
        direct.commutator_traces, mu.commutator_traces, atol=1e-12
    )


def test_reparameterize_errors():
    """Test: forma inválida y valores no finitos."""
    report = single_target.lambda_report(1.0)

    with pytest.raises(MetrologyError) as exc_info:
        engine.reparameterize(report, np.ones((2, 2)))
    assert exc_info.value.code == "DIMENSION_MISMATCH"

    with pytest.raises(MetrologyError) as exc_info:
        engine.reparameterize(report, [[np.nan, 0.0, 0.0]])
    assert exc_info.value.code == "INVALID_PARAMETER"


# ========== Oráculo ==========


def test_orthonormal_basis_drops_dependent_vectors():
    """Test: e1, e2 y e1+e2 generan un espacio de dimensión 2."""
    vectors = [np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([1.0, 1.0, 0])]

    basis = engine.orthonormal_basis(vectors)

    assert basis.shape == (3, 2)
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(2), atol=1e-14)


def test_orthonormal_basis_empty_span():
    """Test: sólo vectores nulos es ILL_CONDITIONED."""
    with pytest.raises(MetrologyError) as exc_info:
        engine.orthonormal_basis([np.zeros(3)])

    assert exc_info.value.code == "ILL_CONDITIONED"


def test_orthonormal_basis_condition_diagnostics():
    """Test: el diagnóstico incluye número de condición y rango."""
    vectors = [np.array([1.0, 0.0]), np.array([1.0, 1e-5])]

    with pytest.raises(MetrologyError) as exc_info:
        engine.orthonormal_basis(vectors, max_condition_number=1e6)

    details = exc_info.value.details
    assert details["rank"] == 2
    assert details["condition_number"] > 1e6
    assert len(details["singular_values"]) == 2


def test_oracle_single_separable():
    """Test: oráculo frente a diag(4σ², 1/σ², 2/σ²)."""
    sigma = 1.0
    family = SingleSeparableFamily(GaussianPulse(bandwidth=sigma))

    report = engine.oracle_qfi(family, [0.0, 0.0, sigma])

    np.testing.assert_allclose(
        report.qfi_matrix, single_target.qfi_lambda_separable(sigma), atol=1e-6
    )


def test_oracle_richardson_matches_closed_form():
    """Test: con Richardson y paso grueso el oráculo sigue la forma cerrada."""
    family = SingleSeparableFamily(GaussianPulse(bandwidth=2.0))

    report = engine.oracle_qfi(family, [0.0, 0.0, 2.0], step=1e-2, richardson=True)

    np.testing.assert_allclose(
        report.qfi_matrix,
        single_target.qfi_lambda_separable(2.0),
        rtol=1e-5,
        atol=1e-6,
    )


def test_oracle_argument_errors():
    """Test: longitud del punto y paso inválidos."""
    family = SingleSeparableFamily()

    with pytest.raises(MetrologyError) as exc_info:
        engine.oracle_qfi(family, [0.0, 0.0])
    assert exc_info.value.code == "DIMENSION_MISMATCH"

    with pytest.raises(MetrologyError) as exc_info:
        engine.oracle_qfi(family, [0.0, 0.0, 1.0], step=0.0)
    assert exc_info.value.code == "INVALID_PARAMETER"
