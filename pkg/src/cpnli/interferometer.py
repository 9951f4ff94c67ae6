"""Reflective common-path nonlinear interferometer composition.

The forward-generated biphoton amplitude picks up the round-trip dispersive
phase and the polarization-controller rotation (applied once per photon as a
lumped transformation); the backward amplitude leaves the device untouched.
Their unnormalized superposition is the interferometer output:

    out(detuning) = exp(2i alpha) (U x U) ket + r * ket

with alpha the relative phase from the linear and nonlinear media and r the
backward/forward amplitude ratio (1 for an ideal device).  The equivalent
convention that puts the phase on the untouched amplitude differs only by a
global phase and the sign of alpha, which no reported observable resolves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DensityMatrix4,
    JointState,
    ValidationError,
    _concurrence_many,
)
from .source import DispersionExpansion, SpdcParams

UNITARITY_TOL = 1e-12

#: Bins whose squared amplitude falls below this fraction of the busiest bin
#: are treated as empty by per-bin analyses.
EMPTY_BIN_FRACTION = 1e-30


@dataclass(frozen=True)
class PCUnitary:
    """Single-photon polarization-controller transformation.

    The realized matrix is
    [[exp(i phi1) cos(theta), -exp(i phi2) sin(theta)],
     [exp(-i phi2) sin(theta), exp(-i phi1) cos(theta)]].
    """

    theta: float
    phi1: float = 0.0
    phi2: float = 0.0
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("theta", "phi1", "phi2"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"PCUnitary: finite: {name} must be finite")
        ct, st = np.cos(self.theta), np.sin(self.theta)
        e1, e2 = np.exp(1j * self.phi1), np.exp(1j * self.phi2)
        m = np.array([[e1 * ct, -e2 * st], [np.conj(e2) * st, np.conj(e1) * ct]])
        defect = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if defect > UNITARITY_TOL:
            raise ValidationError(f"PCUnitary: unitarity: defect {defect:.3e} exceeds {UNITARITY_TOL:.0e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def pc_unitary(theta: float, phi1: float = 0.0, phi2: float = 0.0) -> PCUnitary:
    return PCUnitary(theta=theta, phi1=phi1, phi2=phi2)


@dataclass(frozen=True)
class LinearArm:
    """Dispersive arm of the interferometer.

    The relative phase combines the phase mismatch accumulated in the linear
    medium (round trip folded into the overall factor 2) with the mismatch of
    the nonlinear medium itself.
    """

    length: float = 5.0                                        # m
    phase_expansion: DispersionExpansion = field(default_factory=DispersionExpansion)
    nonlinear_length: float = 0.0                              # m
    nonlinear_expansion: DispersionExpansion = field(default_factory=DispersionExpansion)

    def __post_init__(self):
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValidationError("LinearArm: length: must be positive")
        if self.nonlinear_length < 0 or not np.isfinite(self.nonlinear_length):
            raise ValidationError("LinearArm: nonlinear_length: must be non-negative")

    @classmethod
    def for_source(cls, length: float, phase_expansion: DispersionExpansion,
                   source: SpdcParams) -> "LinearArm":
        """Arm that inherits the nonlinear-medium contribution from the source."""
        return cls(
            length=length,
            phase_expansion=phase_expansion,
            nonlinear_length=source.crystal_length,
            nonlinear_expansion=source.phase_mismatch_model,
        )


def relative_phase(arm: LinearArm, detuning):
    """Relative phase (rad) between the interfering amplitudes at a detuning."""
    out = arm.phase_expansion(detuning) * arm.length
    if arm.nonlinear_length > 0:
        out = out + arm.nonlinear_expansion(detuning) * arm.nonlinear_length
    return out


@dataclass(frozen=True)
class ImperfectionParams:
    """Minimal device-imperfection model.

    ``amplitude_ratio`` is the backward/forward amplitude ratio; ``theta_error``
    a residual rotation added to the controller setting.  Both default to the
    ideal device.  A zero ratio is the degenerate single-amplitude limit
    (forward path only, no interference).
    """

    amplitude_ratio: float = 1.0
    theta_error: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.amplitude_ratio) and self.amplitude_ratio >= 0):
            raise ValidationError("ImperfectionParams: amplitude_ratio: must be non-negative")
        if not np.isfinite(self.theta_error):
            raise ValidationError("ImperfectionParams: theta_error: must be finite")


IDEAL_DEVICE = ImperfectionParams()


def compose_nli(src: JointState, pc: PCUnitary, arm: LinearArm,
                imp: ImperfectionParams = IDEAL_DEVICE) -> JointState:
    """Superpose the transformed forward amplitude with the backward one.

    Per bin: out = exp(2i alpha) (U x U) ket + r ket, stored unnormalized.
    Bins are independent, so the composition is trivially parallel; the
    output preserves the input detuning ordering.
    """
    u = pc.matrix
    if imp.theta_error != 0.0:
        u = pc_unitary(pc.theta + imp.theta_error, pc.phi1, pc.phi2).matrix
    uu = np.kron(u, u)
    phases = np.exp(2j * np.asarray(relative_phase(arm, src.detunings), dtype=float))
    transformed = src.amplitudes @ uu.T
    out = phases[:, None] * transformed + imp.amplitude_ratio * src.amplitudes
    return JointState(src.detunings, out, src.pump_frequency)


def spectral_intensity(state: JointState) -> np.ndarray:
    """Per-bin spectral weight, as rows of (detuning rad/s, sum |c|^2)."""
    return np.column_stack([state.detunings, state.bin_norms()])


def concurrence_spectrum(state: JointState) -> np.ndarray:
    """Per-bin Wootters concurrence, as rows of (detuning rad/s, concurrence).

    Bins with (numerically) zero weight are skipped.  This is the batched
    equivalent of ``concurrence(conditional_density(state, j))`` per bin.
    """
    norms = state.bin_norms()
    keep = norms > np.max(norms) * EMPTY_BIN_FRACTION
    amps = state.amplitudes[keep]
    rhos = amps[:, :, None] * amps[:, None, :].conj() / norms[keep][:, None, None]
    values = _concurrence_many(rhos)
    return np.column_stack([state.detunings[keep], values])


def fringe_visibility(values: np.ndarray) -> float:
    """(max - min) / (max + min) of a sampled intensity pattern."""
    vmax, vmin = float(np.max(values)), float(np.min(values))
    if vmax + vmin == 0.0:
        return 0.0
    return (vmax - vmin) / (vmax + vmin)


# ---------------------------------------------------------------------------
# Closed-form conditional and reduced states of the two reference settings,
# used as oracles by tests and as ideal references by the tomography summary.
# ---------------------------------------------------------------------------

def decoupled_conditional_density() -> DensityMatrix4:
    """Conditional state with no controller rotation: |Psi+><Psi+| in every bin."""
    return DensityMatrix4(np.array(
        [
            [0, 0, 0, 0],
            [0, 1, 1, 0],
            [0, 1, 1, 0],
            [0, 0, 0, 0],
        ], dtype=complex) / 2.0)


def coupled_conditional_density(phase: float) -> DensityMatrix4:
    """Conditional state at a quarter rotation for a given relative phase.

    Matches this package's phase convention (phase rides on the transformed
    forward amplitude); the opposite convention conjugates the off-diagonals.
    """
    rho0 = np.exp(-2j * phase)
    r0c = np.conj(rho0)
    return DensityMatrix4(np.array(
        [
            [1, -r0c, -r0c, -1],
            [-rho0, 1, 1, rho0],
            [-rho0, 1, 1, rho0],
            [-1, r0c, r0c, 1],
        ], dtype=complex) / 4.0)


def coupled_reduced_density() -> DensityMatrix4:
    """Frequency-traced state at a quarter rotation over many fringe periods."""
    return DensityMatrix4(np.array(
        [
            [1, 0, 0, -1],
            [0, 1, 1, 0],
            [0, 1, 1, 0],
            [-1, 0, 0, 1],
        ], dtype=complex) / 4.0)
