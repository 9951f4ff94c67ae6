"""Unit tests for the SPDC source model."""

import numpy as np
import pytest

from cpnli.core import ValidationError, concurrence, conditional_density, schmidt_decompose, trace_out_frequency
from cpnli.source import DispersionExpansion, SpdcParams, joint_amplitude, phase_mismatch, spdc_state


def test_phase_mismatch_at_center_is_constant_term():
    model = DispersionExpansion(k0=3.5, k1=1e-15, k2=2e-26, k3=0.0)
    assert phase_mismatch(model, 0.0) == pytest.approx(3.5, abs=0)


def test_phase_mismatch_single_quadratic_term():
    # k2 * x^2 / 2 with k2 = 1e-24 s^2/m at x = 1e12 rad/s.
    model = DispersionExpansion(k2=1e-24)
    assert phase_mismatch(model, 1e12) == pytest.approx(0.5, rel=1e-15)


def test_phase_mismatch_even_without_odd_terms():
    model = DispersionExpansion(k0=1.0, k2=3e-26)
    grid = np.linspace(1e11, 8e13, 50)
    np.testing.assert_allclose(phase_mismatch(model, grid), phase_mismatch(model, -grid), rtol=0)


def test_expansion_rejects_nonfinite():
    with pytest.raises(ValidationError, match="finite"):
        DispersionExpansion(k1=np.inf)


def test_spdc_params_validation():
    with pytest.raises(ValidationError, match="grid_points"):
        SpdcParams(grid_points=4)
    with pytest.raises(ValidationError, match="crystal_length"):
        SpdcParams(crystal_length=-1.0)


def test_joint_amplitude_sinc_values():
    length = 0.2
    params = SpdcParams(crystal_length=length, phase_mismatch_model=DispersionExpansion(k2=1e-24),
                        amplitude_scale=2.0)
    # mismatch * L = 0 at center: amplitude = A0 * L.
    assert joint_amplitude(params, 0.0) == pytest.approx(2.0 * length, rel=1e-15)
    # mismatch * L = 2*pi: sinc(pi) = 0.  k2 x^2/2 * L = 2*pi -> x = sqrt(4*pi/(k2 L)).
    x_zero = np.sqrt(4.0 * np.pi / (1e-24 * length))
    assert abs(joint_amplitude(params, x_zero)) < 1e-12


def test_joint_amplitude_symmetric_spectrum():
    params = SpdcParams()
    grid = params.detuning_grid()
    phi = np.asarray(joint_amplitude(params, grid))
    intensity = np.abs(phi) ** 2
    np.testing.assert_allclose(intensity, intensity[::-1], atol=1e-12 * intensity.max())


def test_spdc_state_polarization_structure():
    state = spdc_state(SpdcParams(grid_points=256))
    # c_HH and c_VV vanish exactly; HV and VH equal.
    assert np.all(state.amplitudes[:, 0] == 0)
    assert np.all(state.amplitudes[:, 3] == 0)
    np.testing.assert_array_equal(state.amplitudes[:, 1], state.amplitudes[:, 2])


def test_spdc_state_every_bin_maximally_entangled():
    state = spdc_state(SpdcParams(grid_points=64))
    for j in (0, 13, 40, 63):
        rho = conditional_density(state, j)
        assert concurrence(rho) == pytest.approx(1.0, abs=1e-12)
        expected = np.zeros((4, 4), dtype=complex)
        expected[1:3, 1:3] = 0.5
        np.testing.assert_allclose(rho.matrix, expected, atol=1e-12)
    assert concurrence(trace_out_frequency(state)) == pytest.approx(1.0, abs=1e-12)


def test_spdc_state_intensity_follows_sinc_squared():
    params = SpdcParams(grid_points=512)
    state = spdc_state(params)
    grid = state.detunings
    arg = phase_mismatch(params.phase_mismatch_model, grid) * params.crystal_length / 2.0
    envelope = (params.amplitude_scale * params.crystal_length * np.sinc(arg / np.pi)) ** 2
    np.testing.assert_allclose(state.bin_norms(), envelope, rtol=1e-12)


def test_spdc_state_schmidt_rank_one_any_dispersion():
    for model in (DispersionExpansion(), DispersionExpansion(k2=8e-26),
                  DispersionExpansion(k1=2e-14, k2=1e-26, k3=5e-40)):
        params = SpdcParams(grid_points=128, phase_mismatch_model=model)
        assert schmidt_decompose(spdc_state(params)).rank == 1


def test_amplitude_scale_changes_no_normalized_quantity():
    a = spdc_state(SpdcParams(grid_points=128, amplitude_scale=1.0))
    b = spdc_state(SpdcParams(grid_points=128, amplitude_scale=7.5))
    np.testing.assert_allclose(b.bin_norms(), 7.5**2 * a.bin_norms(), rtol=1e-12)
    np.testing.assert_allclose(
        schmidt_decompose(a).coefficients, schmidt_decompose(b).coefficients, atol=1e-12)
    assert concurrence(trace_out_frequency(b)) == pytest.approx(
        concurrence(trace_out_frequency(a)), abs=1e-12)
