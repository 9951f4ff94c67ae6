"""Simulator for a reflective common-path nonlinear interferometer coupling
the polarization and frequency degrees of freedom of broadband photon pairs."""

__version__ = "0.1.0"

from .core import (
    BASIS_LABELS,
    DensityMatrix4,
    JointState,
    PolarizationKet4,
    SchmidtResult,
    ValidationError,
    concurrence,
    conditional_density,
    fidelity,
    purity,
    schmidt_decompose,
    trace_out_frequency,
)
from .interferometer import (
    ImperfectionParams,
    LinearArm,
    PCUnitary,
    compose_nli,
    concurrence_spectrum,
    pc_unitary,
    relative_phase,
    spectral_intensity,
)
from .source import DispersionExpansion, SpdcParams, joint_amplitude, phase_mismatch, spdc_state
from .tomography import (
    CountRecord,
    DcmParams,
    ProjectorSet16,
    expected_rates,
    frequency_resolved_qst,
    mle_reconstruct,
    projector_set16,
    simulate_counts,
    wavelength_bins,
)

__all__ = [
    "BASIS_LABELS",
    "CountRecord",
    "DcmParams",
    "DensityMatrix4",
    "DispersionExpansion",
    "ImperfectionParams",
    "JointState",
    "LinearArm",
    "PCUnitary",
    "PolarizationKet4",
    "ProjectorSet16",
    "SchmidtResult",
    "SpdcParams",
    "ValidationError",
    "compose_nli",
    "concurrence",
    "concurrence_spectrum",
    "conditional_density",
    "expected_rates",
    "fidelity",
    "frequency_resolved_qst",
    "joint_amplitude",
    "mle_reconstruct",
    "pc_unitary",
    "phase_mismatch",
    "projector_set16",
    "purity",
    "relative_phase",
    "schmidt_decompose",
    "simulate_counts",
    "spdc_state",
    "spectral_intensity",
    "trace_out_frequency",
    "wavelength_bins",
]
