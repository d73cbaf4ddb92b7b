"""
Tests para la simulación de medidas: Hadamard en frecuencia, MLE y medida conjunta.
"""

import math

import numpy as np
import pytest

from qlidar import measurement, optics
from qlidar.schemas import (
    GaussianPulse,
    HadamardShotConfig,
    JointMeasureConfig,
    MetrologyError,
    ShotRecord,
    TwoPhotonState,
    TwoTargetScene,
)


def _hadamard(
    dt=0.5, sigma=1.0, shots=2000, seed=11, **kwargs
) -> HadamardShotConfig:
    scene = TwoTargetScene(delta_time=dt, bandwidth=sigma, **kwargs)
    return HadamardShotConfig(scene=scene, shots=shots, seed=seed)


def _joint(kappa=0.9, shots=200_000, seed=5) -> JointMeasureConfig:
    state = TwoPhotonState(
        signal=GaussianPulse(central_time=0.4, central_frequency=2.0, bandwidth=1.0),
        idler=GaussianPulse(central_time=0.1, central_frequency=0.5, bandwidth=1.0),
        kappa=kappa,
    )
    return JointMeasureConfig(state=state, shots=shots, seed=seed)


# ========== Probabilidades y CFI ==========


def test_hadamard_probs_examples():
    """Test: p₁ = 1 sin separación espectral y p₁ = 0 en fase opuesta."""
    p1, p2 = measurement.hadamard_probs(0.0, 0.0, 0.7, -0.7)
    assert (float(p1), float(p2)) == (1.0, 0.0)

    p1, p2 = measurement.hadamard_probs(0.0, math.pi, 1.0, 1.0)
    assert float(p1) == pytest.approx(0.0, abs=1e-15)
    assert float(p2) == pytest.approx(1.0)


def test_hadamard_probs_vectorized():
    """Test: acepta arrays y p₁ + p₂ = 1."""
    gaps = np.linspace(0.0, 4.0, 9)

    p1, p2 = measurement.hadamard_probs(0.0, gaps, 0.3, -0.3)

    assert p1.shape == (9,)
    np.testing.assert_allclose(p1 + p2, 1.0)
    np.testing.assert_allclose(p1, np.cos(gaps * 0.6 / 4.0) ** 2, atol=1e-15)


def test_classical_fisher_skips_impossible_outcomes():
    """Test: resultados con p = 0 no contribuyen."""
    assert measurement.classical_fisher([0.5, 0.5], [0.1, -0.1]) == pytest.approx(0.04)
    assert measurement.classical_fisher([1.0, 0.0], [0.0, 0.3]) == 0.0


def test_postselected_cfi_calibrated():
    """Test: (ν₁-ν₂)²/4 independiente de Δt."""
    assert measurement.postselected_cfi(0.0, 2.0, 0.3) == 1.0
    assert measurement.postselected_cfi(1.0, -2.0, 5.0) == 2.25


@pytest.mark.parametrize("dt", [0.1, 0.3, 1.1])
def test_postselected_cfi_uncalibrated_zero_centroid(dt):
    """Test: sin calibrar con T = 0 coincide con el caso calibrado."""
    cfi = measurement.postselected_cfi(0.0, 2.0, dt, calibrated=False)

    assert cfi == pytest.approx(1.0, rel=1e-10)


def test_postselected_cfi_uncalibrated_blind_centroid():
    """Test: cos((ν₂-ν₁)T) = 0 anula la información."""
    cfi = measurement.postselected_cfi(
        0.0, 1.0, 0.4, calibrated=False, centroid_time=math.pi / 2
    )

    assert cfi == pytest.approx(0.0, abs=1e-20)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_averaged_cfi_equals_sigma_squared(sigma):
    """Test: el promedio de (ν₁-ν₂)²/4 es σ²."""
    assert measurement.averaged_cfi(sigma) == pytest.approx(sigma**2, rel=1e-12)


def test_averaged_cfi_rejects_nonpositive_sigma():
    """Test: σ <= 0 es INVALID_PARAMETER."""
    with pytest.raises(MetrologyError) as exc_info:
        measurement.averaged_cfi(0.0)

    assert exc_info.value.code == "INVALID_PARAMETER"


# ========== Muestreo ==========


def test_sample_hadamard_is_deterministic():
    """Test: misma semilla y ensayo, mismos disparos."""
    config = _hadamard()

    first = measurement.sample_hadamard(config)
    second = measurement.sample_hadamard(config)
    other = measurement.sample_hadamard(config, trial=1)

    np.testing.assert_array_equal(first.nu_gap, second.nu_gap)
    np.testing.assert_array_equal(first.outcome, second.outcome)
    assert not np.array_equal(first.nu_gap, other.nu_gap)
    assert len(first) == 2000
    assert set(np.unique(first.outcome)) <= {1, 2}
    assert np.all(first.nu_gap >= 0.0)


def test_sample_hadamard_outcome_frequency():
    """Test: E[p₂] = ½(1 - exp(-σ²Δt²/2))."""
    batch = measurement.sample_hadamard(_hadamard(dt=1.0, shots=20_000, seed=3))

    p2 = float(np.mean(batch.outcome == 2))

    assert p2 == pytest.approx(0.5 * (1.0 - math.exp(-0.5)), abs=0.015)


def test_sample_hadamard_gap_scale():
    """Test: E[(ν₁-ν₂)²] = 4σ²."""
    batch = measurement.sample_hadamard(_hadamard(sigma=0.5, shots=50_000, seed=9))

    assert float(np.mean(batch.nu_gap**2)) == pytest.approx(1.0, rel=0.03)


def test_sample_outcomes_chi_square():
    """Test: las frecuencias pasan el chi-cuadrado frente a p₁ verdadero."""
    outcomes = measurement.sample_outcomes(2.0, 1.0, 10_000, seed=3)
    p_first = math.cos(0.5) ** 2

    assert measurement.outcome_chi_square(outcomes, p_first) > 1e-4
    assert measurement.outcome_chi_square(outcomes, 0.5) < 1e-10


def test_outcome_chi_square_rejects_deterministic_probability():
    """Test: p₁ ∉ (0, 1) es INVALID_PARAMETER."""
    with pytest.raises(MetrologyError) as exc_info:
        measurement.outcome_chi_square(np.ones(10, dtype=np.int8), 1.0)

    assert exc_info.value.code == "INVALID_PARAMETER"


def test_shot_batch_records_roundtrip():
    """Test: ShotBatch ↔ ShotRecord conserva los valores."""
    batch = measurement.sample_hadamard(_hadamard(shots=5))

    records = batch.records()

    assert all(isinstance(r, ShotRecord) for r in records)
    rebuilt = measurement.ShotBatch.from_records(records)
    np.testing.assert_array_equal(rebuilt.nu_gap, batch.nu_gap)
    np.testing.assert_array_equal(rebuilt.outcome, batch.outcome)


# ========== Máxima verosimilitud ==========


def test_mle_single_record_at_zero():
    """Test: un solo resultado 1 da |Δt| = 0."""
    estimate = measurement.mle_delta_t([ShotRecord(nu_gap=1.0, outcome=1)], sigma=1.0)

    assert estimate.delta_t == 0.0
    assert estimate.shots == 1
    assert estimate.fisher_information == 0.25


def test_mle_recovers_separation():
    """Test: |Δt| estimado cerca del verdadero con N = 20000."""
    batch = measurement.sample_hadamard(_hadamard(dt=0.5, shots=20_000, seed=21))

    estimate = measurement.mle_delta_t(batch, sigma=1.0)

    assert estimate.delta_t == pytest.approx(0.5, abs=0.05)
    assert estimate.std_error == pytest.approx(
        1.0 / math.sqrt(estimate.fisher_information)
    )
    assert estimate.moment_start == pytest.approx(0.5, abs=0.1)


def test_mle_sign_is_not_identifiable():
    """Test: Δt y -Δt producen los mismos disparos y la misma estimación."""
    positive = measurement.sample_hadamard(_hadamard(dt=0.4))
    negative = measurement.sample_hadamard(_hadamard(dt=-0.4))

    np.testing.assert_array_equal(positive.outcome, negative.outcome)
    assert (
        measurement.mle_delta_t(positive, 1.0).delta_t
        == measurement.mle_delta_t(negative, 1.0).delta_t
    )


@pytest.mark.parametrize(
    "records",
    [[], [ShotRecord(nu_gap=0.0, outcome=1), ShotRecord(nu_gap=0.0, outcome=2)]],
)
def test_mle_non_identifiable(records):
    """Test: sin disparos o con |ν₁-ν₂| = 0 es NON_IDENTIFIABLE."""
    with pytest.raises(MetrologyError) as exc_info:
        measurement.mle_delta_t(records, sigma=1.0)

    assert exc_info.value.code == "NON_IDENTIFIABLE"


def test_mle_uncalibrated_model():
    """Test: el modelo sin calibrar usa el centroide T."""
    scene = TwoTargetScene(centroid_time=0.2, delta_time=0.6, bandwidth=1.0)
    config = HadamardShotConfig(
        scene=scene, shots=20_000, seed=4, phase_calibration=False
    )

    estimate = measurement.mle_delta_t(
        measurement.sample_hadamard(config), sigma=1.0, centroid_time=0.2
    )

    assert estimate.delta_t == pytest.approx(0.6, abs=0.08)


# ========== Ensayos repetidos ==========


def test_run_hadamard_trials_zero_separation():
    """Test: con Δt = 0 todas las estimaciones son 0."""
    result = measurement.run_hadamard_trials(_hadamard(dt=0.0, shots=200), trials=4)

    np.testing.assert_array_equal(result.estimates, np.zeros(4))
    assert result.cramer_rao == pytest.approx(1.0 / 200)


def test_run_hadamard_trials_workers_do_not_change_result():
    """Test: el número de procesos no altera las estimaciones."""
    config = _hadamard(dt=0.5, shots=500)

    serial = measurement.run_hadamard_trials(config, trials=4)
    parallel = measurement.run_hadamard_trials(config, trials=4, workers=2)

    np.testing.assert_array_equal(serial.estimates, parallel.estimates)


def test_run_hadamard_trials_requires_two():
    """Test: trials < 2 es INVALID_PARAMETER."""
    with pytest.raises(MetrologyError) as exc_info:
        measurement.run_hadamard_trials(_hadamard(), trials=1)

    assert exc_info.value.code == "INVALID_PARAMETER"


@pytest.mark.slow
def test_hadamard_efficiency_full_scale():
    """Test: N = 10^5, 200 ensayos en Δt = 0.5; varianza a ±10% de 1/(Nσ²)."""
    config = _hadamard(dt=0.5, shots=100_000, seed=2024)

    result = measurement.run_hadamard_trials(config, trials=200, workers=4)

    assert result.mean == pytest.approx(0.5, abs=0.01)
    assert result.cramer_rao == pytest.approx(1e-5)
    assert 0.9 <= result.efficiency <= 1.1


# ========== Medida conjunta ==========


def test_joint_measurement_errors():
    """Test: κ = 0.9 da δt² ≈ 0.263158, δω² = 0.2 y δtδω ≈ 0.229."""
    time_error, freq_error = measurement.joint_measurement_errors(1.0, 0.9)

    assert time_error == pytest.approx(0.263158, abs=1e-6)
    assert freq_error == pytest.approx(0.2)
    assert time_error * freq_error == pytest.approx(0.052632, abs=1e-6)
    assert math.sqrt(time_error * freq_error) == pytest.approx(0.229, abs=1e-3)


def test_joint_product_beats_separable_bound():
    """Test: δt²δω² = (1-κ)/(1+κ) < 1 para κ > 0."""
    for kappa in (0.3, 0.6, 0.9):
        time_error, freq_error = measurement.joint_measurement_errors(1.0, kappa)
        assert time_error * freq_error == pytest.approx((1 - kappa) / (1 + kappa))


def test_joint_errors_follow_two_photon_amplitude():
    """Test: δt² y δω² son los momentos de |Ψ|² en tiempo y en frecuencia."""
    state = _joint().state
    t = np.linspace(-20.0, 20.0, 512, endpoint=False)
    ts, ti = np.meshgrid(t, t, indexing="ij")
    psi = optics.two_photon_amplitude(state, ts, ti)

    density = np.abs(psi) ** 2
    density /= density.sum()
    t_minus = ts - ti
    t_mean = np.sum(density * t_minus)
    time_var = np.sum(density * (t_minus - t_mean) ** 2)

    # ω̂ = 2ω₊ - ω̄_i fluctúa como ω_s + ω_i
    spectrum = np.abs(np.fft.fft2(psi)) ** 2
    spectrum /= spectrum.sum()
    w = 2.0 * np.pi * np.fft.fftfreq(t.size, d=t[1] - t[0])
    ws, wi = np.meshgrid(w, w, indexing="ij")
    w_sum = ws + wi
    w_mean = np.sum(spectrum * w_sum)
    freq_var = np.sum(spectrum * (w_sum - w_mean) ** 2)

    time_error, freq_error = measurement.joint_measurement_errors(1.0, 0.9)
    assert time_var == pytest.approx(time_error, rel=1e-6)
    assert freq_var == pytest.approx(freq_error, rel=1e-6)


def test_joint_sampler_matches_its_variances():
    """Test: el muestreador reproduce sus propias varianzas al 3% con N = 200000."""
    config = _joint()

    estimate = measurement.estimate_joint(
        measurement.sample_joint_time_frequency(config), config
    )

    time_error, freq_error = measurement.joint_measurement_errors(1.0, 0.9)
    assert estimate.variance_time == pytest.approx(time_error, rel=0.03)
    assert estimate.variance_frequency == pytest.approx(freq_error, rel=0.03)
    assert estimate.t_hat == pytest.approx(0.4, abs=0.01)
    assert estimate.omega_hat == pytest.approx(2.0, abs=0.01)
    assert estimate.uncertainty_product == pytest.approx(0.229, rel=0.03)


def test_joint_samples_are_deterministic():
    """Test: misma semilla, mismas muestras."""
    config = _joint(shots=100)

    first = measurement.sample_joint_time_frequency(config)
    second = measurement.sample_joint_time_frequency(config)

    np.testing.assert_array_equal(first.t_minus, second.t_minus)
    np.testing.assert_array_equal(first.omega_plus, second.omega_plus)


def test_joint_requires_equal_bandwidths():
    """Test: σ_i distinto de σ es INVALID_PARAMETER."""
    state = TwoPhotonState(
        signal=GaussianPulse(bandwidth=1.0),
        idler=GaussianPulse(bandwidth=2.0),
        kappa=0.5,
    )

    with pytest.raises(MetrologyError) as exc_info:
        measurement.sample_joint_time_frequency(JointMeasureConfig(state=state))

    assert exc_info.value.code == "INVALID_PARAMETER"


@pytest.mark.slow
def test_joint_full_scale():
    """Test: N = 10^6 con κ = 0.9 reproduce δtδω ≈ 0.229."""
    config = _joint(shots=1_000_000, seed=99)

    estimate = measurement.estimate_joint(
        measurement.sample_joint_time_frequency(config), config
    )

    assert estimate.uncertainty_product == pytest.approx(0.229, abs=0.003)
