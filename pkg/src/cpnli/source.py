"""Type-II SPDC biphoton source model for a periodically poled fiber.

A monochromatic CW pump collapses energy conservation onto conjugate pairs
(pump/2 + detuning, pump/2 - detuning), so the joint spectral amplitude is a
function of the detuning alone.  The group-birefringence phase between the
HV and VH amplitudes is negligible for this fiber and fixed to zero, which
makes every emitted pair a (|HV> + |VH>)/sqrt(2) polarization state riding on
a sinc-shaped spectral envelope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .core import JointState, PSI_PLUS, ValidationError


@dataclass(frozen=True)
class DispersionExpansion:
    """Taylor coefficients of a phase-mismatch function about zero detuning.

    Evaluates k0 + k1 x + (k2/2) x^2 + (k3/6) x^3.  Odd coefficients cancel
    when signal and idler see identical dispersion, but they are kept for
    generality (and for media where the cancellation does not apply).
    """

    k0: float = 0.0   # rad/m
    k1: float = 0.0   # s/m
    k2: float = 0.0   # s^2/m
    k3: float = 0.0   # s^3/m

    def __post_init__(self):
        for name in ("k0", "k1", "k2", "k3"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"DispersionExpansion: finite: {name} must be finite")

    def __call__(self, detuning):
        x = np.asarray(detuning, dtype=float)
        out = self.k0 + x * (self.k1 + x * (self.k2 / 2.0 + x * (self.k3 / 6.0)))
        return out if out.ndim else float(out)


def phase_mismatch(model: DispersionExpansion, detuning):
    """Phase mismatch (rad/m) of the conjugate pair at the given detuning."""
    return model(detuning)


#: Default quadratic mismatch keeps the sinc^2 envelope flat-topped across the
#: measurement band, with its first zeros well outside +-30 nm of degeneracy.
DEFAULT_PHASE_MISMATCH = DispersionExpansion(k2=2e-26)

#: Half-width of the default detuning grid: +-12 THz of ordinary frequency.
DEFAULT_BANDWIDTH = 2.0 * np.pi * 12e12


@dataclass(frozen=True)
class SpdcParams:
    """Source geometry, phase matching, and simulation grid."""

    pump_wavelength: float = 780e-9          # m
    crystal_length: float = 0.20             # m
    phase_mismatch_model: DispersionExpansion = field(default_factory=lambda: DEFAULT_PHASE_MISMATCH)
    emission_bandwidth: float = DEFAULT_BANDWIDTH   # rad/s, grid half-width
    grid_points: int = 4096
    amplitude_scale: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.pump_wavelength) and self.pump_wavelength > 0):
            raise ValidationError("SpdcParams: pump_wavelength: must be positive")
        if not (np.isfinite(self.crystal_length) and self.crystal_length > 0):
            raise ValidationError("SpdcParams: crystal_length: must be positive")
        if not (np.isfinite(self.emission_bandwidth) and self.emission_bandwidth > 0):
            raise ValidationError("SpdcParams: emission_bandwidth: must be positive")
        if self.grid_points < 16:
            raise ValidationError("SpdcParams: grid_points: must be at least 16")

    @property
    def pump_frequency(self) -> float:
        """Pump angular frequency (rad/s)."""
        return 2.0 * np.pi * SPEED_OF_LIGHT / self.pump_wavelength

    def detuning_grid(self) -> np.ndarray:
        return np.linspace(-self.emission_bandwidth, self.emission_bandwidth, self.grid_points)


def joint_amplitude(params: SpdcParams, detuning):
    """Joint spectral amplitude A0 * L * sinc(mismatch * L / 2), sinc(0) = 1."""
    arg = phase_mismatch(params.phase_mismatch_model, detuning) * params.crystal_length / 2.0
    # np.sinc is sin(pi x)/(pi x); rescale to the unnormalized convention.
    amp = params.amplitude_scale * params.crystal_length * np.sinc(np.asarray(arg) / np.pi)
    return amp if amp.ndim else complex(amp)


def spdc_state(params: SpdcParams) -> JointState:
    """Emitted biphoton state: phi(detuning) times (|HV> + |VH>)/sqrt(2) per bin."""
    grid = params.detuning_grid()
    phi = np.asarray(joint_amplitude(params, grid), dtype=complex)
    amplitudes = np.outer(phi, PSI_PLUS)
    return JointState(detunings=grid, amplitudes=amplitudes, pump_frequency=params.pump_frequency)
