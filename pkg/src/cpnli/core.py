"""State containers and two-qubit entanglement measures shared by all modules.

Every operation here is a pure function over immutable value objects, so the
whole module is safe to use from concurrently running workers.

The two-qubit polarization basis is ordered (HH, HV, VH, VV) everywhere in
this package; see ``BASIS_LABELS``.  Keeping the ordering in one place is the
defence against transposition bugs between modules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Fixed two-qubit polarization basis ordering.
BASIS_LABELS = ("HH", "HV", "VH", "VV")

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12

#: Relative floor under which eigenvalues of the Wootters product matrix are
#: treated as exact zeros (they are pure round-off for rank-deficient states).
EIG_FLOOR = 1e-12

#: Default squared-fraction threshold for counting Schmidt coefficients
#: toward the rank; genuine 0.5/0.5 splits sit five-plus orders above it.
SCHMIDT_RANK_THRESHOLD = 1e-6

# sigma_y (x) sigma_y, the spin-flip kernel of the Wootters construction.
_SPIN_FLIP = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=complex,
)


class ValidationError(ValueError):
    """Raised when an input violates a documented invariant (named in the message)."""


def _ket(values) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    arr.setflags(write=False)
    return arr


#: The four Bell states in the (HH, HV, VH, VV) ordering.
PHI_PLUS = _ket([1, 0, 0, 1]) / np.sqrt(2.0)
PHI_MINUS = _ket([1, 0, 0, -1]) / np.sqrt(2.0)
PSI_PLUS = _ket([0, 1, 1, 0]) / np.sqrt(2.0)
PSI_MINUS = _ket([0, 1, -1, 0]) / np.sqrt(2.0)


def _require_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr.view(float).reshape(-1))):
        raise ValidationError(f"{what}: finite: NaN or Inf component")


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Trapezoidal quadrature weights for a strictly increasing grid."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return np.ones_like(x)
    w = np.empty_like(x)
    w[1:-1] = (x[2:] - x[:-2]) / 2.0
    w[0] = (x[1] - x[0]) / 2.0
    w[-1] = (x[-1] - x[-2]) / 2.0
    return w


def hermitian_eig_descending(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with deterministic ordering.

    Eigenvalues come out descending; each eigenvector is phase-fixed so that
    its first component of non-negligible magnitude is real and positive.
    """
    vals, vecs = np.linalg.eigh(matrix)
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        idx = np.argmax(np.abs(col) > 1e-12)
        pivot = col[idx]
        if np.abs(pivot) > 0:
            vecs[:, k] = col * (np.abs(pivot) / pivot)
    return vals, vecs


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


@dataclass(frozen=True)
class PolarizationKet4:
    """Two-qubit polarization probability amplitudes over (HH, HV, VH, VV)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.amplitudes, dtype=complex)
        if arr.shape != (4,):
            raise ValidationError("PolarizationKet4: shape: expected 4 amplitudes")
        _require_finite(arr, "PolarizationKet4")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @classmethod
    def normalized(cls, amplitudes) -> "PolarizationKet4":
        """Construct a unit-norm ket; rejects the zero vector."""
        arr = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(arr)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValidationError("PolarizationKet4: norm: zero or non-finite amplitude vector")
        ket = cls(arr / norm)
        if abs(ket.norm_squared - 1.0) > NORM_TOL:
            raise ValidationError("PolarizationKet4: norm: |norm^2 - 1| exceeds 1e-12")
        return ket


@dataclass(frozen=True)
class DensityMatrix4:
    """4x4 Hermitian, unit-trace, positive-semidefinite polarization state."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValidationError("DensityMatrix4: shape: expected a 4x4 matrix")
        _require_finite(m, "DensityMatrix4")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise ValidationError(
                f"DensityMatrix4: hermitian: max |m - m^dagger| = {herm:.3e} exceeds {HERMITIAN_TOL:.0e}"
            )
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(
                f"DensityMatrix4: trace: |trace - 1| = {abs(tr - 1.0):.3e} exceeds {TRACE_TOL:.0e}"
            )
        smallest = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0)[0])
        if smallest < -PSD_TOL:
            raise ValidationError(
                f"DensityMatrix4: positive-semidefinite: smallest eigenvalue {smallest:.3e} below -{PSD_TOL:.0e}"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_ket(cls, ket) -> "DensityMatrix4":
        amps = ket.amplitudes if isinstance(ket, PolarizationKet4) else np.asarray(ket, dtype=complex)
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if norm_sq == 0.0:
            raise ValidationError("DensityMatrix4: trace: cannot build a state from the zero ket")
        return cls(np.outer(amps, amps.conj()) / norm_sq)

    @classmethod
    def from_unnormalized(cls, matrix) -> "DensityMatrix4":
        """Symmetrize and trace-normalize an accumulated Hermitian form."""
        m = np.asarray(matrix, dtype=complex)
        m = (m + m.conj().T) / 2.0
        tr = float(np.trace(m).real)
        if not np.isfinite(tr) or tr <= 0.0:
            raise ValidationError("DensityMatrix4: trace: accumulated weight is zero or non-finite")
        return cls(m / tr)


@dataclass(frozen=True)
class JointState:
    """Biphoton amplitude on a detuning grid.

    ``amplitudes[j]`` is the unnormalized polarization 4-vector for the
    frequency-conjugate pair (pump/2 + detuning_j, pump/2 - detuning_j); its
    squared magnitude carries the spectral weight of that bin.
    """

    detunings: np.ndarray          # rad/s, strictly increasing
    amplitudes: np.ndarray         # (N, 4) complex
    pump_frequency: float          # rad/s

    def __post_init__(self):
        det = np.asarray(self.detunings, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if det.ndim != 1 or amps.shape != (det.size, 4):
            raise ValidationError("JointState: shape: amplitudes must be (len(detunings), 4)")
        _require_finite(det, "JointState.detunings")
        _require_finite(amps, "JointState.amplitudes")
        if det.size >= 2 and not np.all(np.diff(det) > 0):
            raise ValidationError("JointState: grid: detunings must be strictly increasing")
        if not (np.isfinite(self.pump_frequency) and self.pump_frequency > 0):
            raise ValidationError("JointState: pump_frequency: must be finite and positive")
        det = det.copy()
        amps = amps.copy()
        det.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "detunings", det)
        object.__setattr__(self, "amplitudes", amps)
        if self.total_weight() <= 0.0:
            raise ValidationError("JointState: weight: total spectral weight must be positive")

    def quadrature_weights(self) -> np.ndarray:
        return trapezoid_weights(self.detunings)

    def bin_norms(self) -> np.ndarray:
        """Per-bin squared amplitude, without quadrature weights."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def total_weight(self) -> float:
        return float(np.sum(self.quadrature_weights() * self.bin_norms()))

    def rescaled(self, factor: complex) -> "JointState":
        return JointState(self.detunings, self.amplitudes * factor, self.pump_frequency)


@dataclass(frozen=True)
class SchmidtResult:
    """Polarization x frequency Schmidt decomposition of a JointState."""

    coefficients: np.ndarray       # descending, sum of squares = 1
    pol_vectors: np.ndarray        # (k, 4) orthonormal polarization kets
    freq_weights: np.ndarray       # (k, N) spectra, orthonormal under the grid inner product
    rank: int


def _concurrence_many(matrices: np.ndarray) -> np.ndarray:
    """Wootters concurrence for a stack of (already validated) 4x4 states."""
    m = matrices
    flipped = _SPIN_FLIP @ m.conj() @ _SPIN_FLIP
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    s = (vecs * np.sqrt(vals)[..., None, :]) @ np.swapaxes(vecs.conj(), -1, -2)
    product = s @ flipped @ s
    product = (product + np.swapaxes(product.conj(), -1, -2)) / 2.0
    pvals = np.linalg.eigvalsh(product)
    if np.min(pvals[..., 0]) < -1e-9:
        raise ValidationError(
            f"concurrence: positive-semidefinite: product eigenvalue {np.min(pvals):.3e} below -1e-9"
        )
    pvals = np.clip(pvals, 0.0, None)
    # Rank-deficient states leave pure round-off in the small eigenvalues;
    # flooring them keeps sqrt from amplifying noise into the result.  The
    # absolute floor is scale-correct because density matrices have trace 1.
    pvals[pvals < np.maximum(EIG_FLOOR * pvals[..., -1:], 1e-16)] = 0.0
    lam = np.sqrt(pvals)
    c = lam[..., 3] - lam[..., 2] - lam[..., 1] - lam[..., 0]
    return np.clip(c, 0.0, 1.0)


def concurrence(rho: DensityMatrix4) -> float:
    """Wootters concurrence of a two-qubit state, clamped to [0, 1].

    Uses the descending square roots of the eigenvalues of
    rho (sy x sy) rho* (sy x sy), evaluated through the Hermitian similarity
    sqrt(rho) . flip . sqrt(rho) for numerically stable, deterministic output.
    """
    return float(_concurrence_many(rho.matrix[None, :, :])[0])


def purity(rho: DensityMatrix4) -> float:
    """Tr(rho^2); 1 for pure states, 0.25 for the maximally mixed state."""
    return float(np.trace(rho.matrix @ rho.matrix).real)


def fidelity(rho: DensityMatrix4, sigma: DensityMatrix4) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 in [0, 1]."""
    s = _psd_sqrt(rho.matrix)
    inner = s @ sigma.matrix @ s
    inner = (inner + inner.conj().T) / 2.0
    vals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    if vals[-1] > 0:
        vals[vals < EIG_FLOOR * vals[-1]] = 0.0
    return float(np.clip(np.sum(np.sqrt(vals)) ** 2, 0.0, 1.0))


def schmidt_decompose(state: JointState, threshold: float = SCHMIDT_RANK_THRESHOLD) -> SchmidtResult:
    """Schmidt decomposition across the polarization x frequency bipartition.

    The 4 x N coefficient matrix (polarization index by frequency bin, with
    square-root trapezoid quadrature weights absorbed) is factored by SVD.
    ``rank`` counts coefficients whose squared fraction exceeds ``threshold``.
    """
    if state.detunings.size < 2:
        raise ValidationError("schmidt_decompose: grid: need at least 2 bins")
    w = state.quadrature_weights()
    total = state.total_weight()
    if total <= 0.0:
        raise ValidationError("schmidt_decompose: weight: zero-weight state")
    coeff = state.amplitudes.T * np.sqrt(w)    # (4, N)
    u, s, vh = np.linalg.svd(coeff, full_matrices=False)
    norm = np.linalg.norm(s)
    c = s / norm
    # Deterministic phases: leading component of each polarization vector
    # made real-positive, compensated on the frequency side.
    pol = u.T.copy()
    freq = vh / np.sqrt(w)
    for k in range(pol.shape[0]):
        idx = np.argmax(np.abs(pol[k]) > 1e-12)
        pivot = pol[k, idx]
        if np.abs(pivot) > 0:
            phase = np.abs(pivot) / pivot
            pol[k] *= phase
            freq[k] *= np.conj(phase)
    rank = int(np.sum(c**2 > threshold))
    return SchmidtResult(coefficients=c, pol_vectors=pol, freq_weights=freq, rank=rank)


def conditional_density(state: JointState, bin_index: int) -> DensityMatrix4:
    """Normalized polarization state of one frequency-conjugate pair."""
    ket = state.amplitudes[bin_index]
    weight = float(np.sum(np.abs(ket) ** 2))
    if weight <= 0.0:
        raise ValidationError(
            f"conditional_density: weight: bin {bin_index} has zero weight; skip this bin"
        )
    return DensityMatrix4(np.outer(ket, ket.conj()) / weight)


def trace_out_frequency(state: JointState) -> DensityMatrix4:
    """Frequency-traced polarization state: the quadrature-weighted bin average."""
    w = state.quadrature_weights()
    accum = np.einsum("j,ja,jb->ab", w, state.amplitudes, state.amplitudes.conj())
    return DensityMatrix4.from_unnormalized(accum)
