"""Simulated measurement chain: dispersive wavelength binning, 16-projector
polarization measurements with Poissonian counting, and maximum-likelihood
density-matrix reconstruction.

Randomness is fully seeded: one integer seed per count record, per-bin seeds
derived from a root seed through ``numpy.random.SeedSequence.generate_state``,
and bootstrap streams spawned from the record seed.  Results are therefore
independent of any parallel scheduling of bins.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .core import DensityMatrix4, JointState, ValidationError, concurrence, trapezoid_weights

log = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8
MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class DcmParams:
    """Dispersion compensating module used as a time-to-wavelength mapper.

    The detector jitter divided by the module dispersion sets the wavelength
    resolution; ``band_halfwidth`` models the module cut-off wavelengths that
    bound the usable spectrum around the degeneracy point.
    """

    dispersion: float = 707e-12 / 1e-9       # s per m of wavelength (707 ps/nm)
    detector_jitter: float = 256e-12         # s
    center_wavelength: float = 1560e-9       # m
    band_halfwidth: float = 30e-9            # m

    def __post_init__(self):
        if not (np.isfinite(self.dispersion) and self.dispersion > 0):
            raise ValidationError("DcmParams: dispersion: must be positive")
        if not (np.isfinite(self.detector_jitter) and self.detector_jitter > 0):
            raise ValidationError("DcmParams: detector_jitter: must be positive")
        if not (np.isfinite(self.center_wavelength) and self.center_wavelength > 0):
            raise ValidationError("DcmParams: center_wavelength: must be positive")
        if not (np.isfinite(self.band_halfwidth) and self.band_halfwidth > 0):
            raise ValidationError("DcmParams: band_halfwidth: must be positive")

    @property
    def bin_width_wavelength(self) -> float:
        """Wavelength bin width (m): detector jitter / dispersion."""
        return self.detector_jitter / self.dispersion

    @property
    def bin_width_frequency(self) -> float:
        """Bin width converted to ordinary frequency (Hz) at the band center."""
        return SPEED_OF_LIGHT * self.bin_width_wavelength / self.center_wavelength**2


@dataclass(frozen=True)
class WavelengthBin:
    low: float                 # m
    high: float                # m
    indices: np.ndarray        # grid indices whose mapped wavelength falls in the bin

    @property
    def center(self) -> float:
        return (self.low + self.high) / 2.0


def grid_wavelengths(detunings: np.ndarray, pump_frequency: float) -> np.ndarray:
    """Wavelength of the (pump/2 + detuning) photon for each grid bin."""
    return 2.0 * np.pi * SPEED_OF_LIGHT / (pump_frequency / 2.0 + np.asarray(detunings))


def wavelength_bins(dcm: DcmParams, state: JointState) -> list[WavelengthBin]:
    """Partition the detuning grid into DCM-resolution wavelength bins.

    Bins tile the module passband; each grid point joins the bin containing
    its mapped wavelength.  Bins with no grid points are dropped.
    """
    width = dcm.bin_width_wavelength
    lam = grid_wavelengths(state.detunings, state.pump_frequency)
    lam_lo = dcm.center_wavelength - dcm.band_halfwidth
    lam_hi = dcm.center_wavelength + dcm.band_halfwidth
    in_band = (lam >= lam_lo) & (lam < lam_hi)
    if not np.any(in_band):
        raise ValidationError("wavelength_bins: band: no grid point maps into the module passband")
    spacing = np.max(np.abs(np.diff(np.sort(lam[in_band]))))
    if width < spacing:
        raise ValidationError(
            f"wavelength_bins: resolution: bin width {width:.3e} m is below the grid spacing "
            f"{spacing:.3e} m; use a denser detuning grid"
        )
    n_bins = int(np.ceil((lam_hi - lam_lo) / width))
    edges = lam_lo + width * np.arange(n_bins + 1)
    which = np.digitize(lam, edges) - 1
    bins = []
    for b in range(n_bins):
        idx = np.nonzero(in_band & (which == b))[0]
        if idx.size == 0:
            continue
        bins.append(WavelengthBin(low=float(edges[b]), high=float(edges[b + 1]), indices=idx))
    return bins


# ---------------------------------------------------------------------------
# Projectors and count simulation
# ---------------------------------------------------------------------------

PROJECTOR_SETTINGS = ("H", "V", "D", "R")


@dataclass(frozen=True)
class ProjectorSet16:
    """The 16 rank-1 analyzer projectors {H, V, D, R} x {H, V, D, R}."""

    labels: tuple
    matrices: np.ndarray       # (16, 4, 4)


def projector_set16() -> ProjectorSet16:
    h = np.array([1, 0], dtype=complex)
    v = np.array([0, 1], dtype=complex)
    states = {
        "H": h,
        "V": v,
        "D": (h + v) / np.sqrt(2.0),
        "R": (h - 1j * v) / np.sqrt(2.0),
    }
    labels = []
    mats = []
    for a in PROJECTOR_SETTINGS:
        for b in PROJECTOR_SETTINGS:
            ket = np.kron(states[a], states[b])
            labels.append(a + b)
            mats.append(np.outer(ket, ket.conj()))
    matrices = np.array(mats)
    matrices.setflags(write=False)
    return ProjectorSet16(labels=tuple(labels), matrices=matrices)


def design_condition_number(projectors: ProjectorSet16) -> float:
    """Condition number of the linear-inversion design matrix.

    Rows are the projectors expanded in the 16-dimensional real space of
    Hermitian 4x4 matrices; a finite value certifies tomographic completeness.
    """
    paulis = [np.eye(2, dtype=complex),
              np.array([[0, 1], [1, 0]], dtype=complex),
              np.array([[0, -1j], [1j, 0]], dtype=complex),
              np.array([[1, 0], [0, -1]], dtype=complex)]
    basis = [np.kron(p, q) / 2.0 for p in paulis for q in paulis]
    design = np.array([[np.trace(pj @ bk).real for bk in basis] for pj in projectors.matrices])
    return float(np.linalg.cond(design))


def expected_rates(rho: DensityMatrix4, brightness: float, projectors: ProjectorSet16) -> np.ndarray:
    """Born-rule coincidence rates: brightness * Tr(P_j rho), counts/s."""
    if not (np.isfinite(brightness) and brightness > 0):
        raise ValidationError("expected_rates: brightness: must be positive")
    rates = brightness * np.einsum("jab,ba->j", projectors.matrices, rho.matrix).real
    return np.clip(rates, 0.0, None)


@dataclass(frozen=True)
class CountRecord:
    """Simulated counts for one tomography run (16 projectors)."""

    rates: np.ndarray            # counts/s per projector
    counts: np.ndarray           # sampled integer counts
    acquisition_time: float      # s
    seed: int

    def __post_init__(self):
        if np.any(np.asarray(self.counts) < 0):
            raise ValidationError("CountRecord: counts: negative count")


def simulate_counts(rates: np.ndarray, acquisition_time: float, seed: int) -> CountRecord:
    """Draw Poissonian counts from a deterministic, seeded generator."""
    rates = np.asarray(rates, dtype=float)
    if np.any(rates < 0) or not np.all(np.isfinite(rates)):
        raise ValidationError("simulate_counts: rates: must be finite and non-negative")
    if not (np.isfinite(acquisition_time) and acquisition_time > 0):
        raise ValidationError("simulate_counts: acquisition_time: must be positive")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(rates * acquisition_time)
    return CountRecord(rates=rates, counts=counts, acquisition_time=float(acquisition_time),
                       seed=int(seed))


# ---------------------------------------------------------------------------
# Maximum-likelihood reconstruction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MleResult:
    rho: DensityMatrix4
    log_likelihood: float
    converged: bool
    iterations: int


def _poisson_loglik(counts: np.ndarray, mu: np.ndarray) -> float:
    # Up to the count-factorial constant, which does not involve the state.
    mu = np.maximum(mu, 1e-300)
    terms = np.where(counts > 0, counts * np.log(mu), 0.0) - mu
    return float(np.sum(terms))


_TRIU_I, _TRIU_J = np.triu_indices(4)
_TRIU_OFF = _TRIU_I != _TRIU_J


def _pack_factor(t: np.ndarray) -> np.ndarray:
    """Upper-triangular factor -> 16 real parameters (real diagonal)."""
    return np.concatenate([t[_TRIU_I, _TRIU_J].real,
                           t[_TRIU_I[_TRIU_OFF], _TRIU_J[_TRIU_OFF]].imag])


def _unpack_factor(x: np.ndarray) -> np.ndarray:
    t = np.zeros((4, 4), dtype=complex)
    n = _TRIU_I.size
    t[_TRIU_I, _TRIU_J] = x[:n]
    t[_TRIU_I[_TRIU_OFF], _TRIU_J[_TRIU_OFF]] += 1j * x[n:]
    return t


def _linear_inversion_start(counts: np.ndarray, acquisition_time: float,
                            projectors: ProjectorSet16) -> np.ndarray:
    """Unnormalized positive matrix seeding the optimizer, from linear inversion."""
    labels = list(projectors.labels)
    ortho = [labels.index(k) for k in ("HH", "HV", "VH", "VV")]
    scale = float(np.sum(counts[ortho]))
    if scale <= 0:
        scale = float(np.sum(counts)) / 4.0
    design = projectors.matrices.transpose(0, 2, 1).reshape(16, 16)
    sol, *_ = np.linalg.lstsq(design, counts / scale, rcond=None)
    rho = sol.reshape(4, 4)
    rho = (rho + rho.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    rho = (vecs * vals) @ vecs.conj().T
    tr = np.trace(rho).real
    if tr <= 0:
        rho = np.eye(4, dtype=complex) / 4.0
        tr = 1.0
    rho = rho / tr
    # Tiny admixture keeps the start full rank so no predicted rate is zero.
    rho = (1.0 - 1e-8) * rho + 1e-8 * np.eye(4) / 4.0
    return (scale / acquisition_time) * rho


def mle_reconstruct(record: CountRecord, projectors: ProjectorSet16,
                    max_iterations: int = MAX_ITERATIONS,
                    gradient_tolerance: float = GRADIENT_TOLERANCE) -> MleResult:
    """Maximum-likelihood physical state for a Poissonian count record.

    The state is parameterized as rho = T^dagger T / Tr(T^dagger T) with T
    upper triangular (real diagonal); the overall scale of T doubles as the
    brightness estimate, so the optimization runs on the unnormalized
    likelihood.  L-BFGS with the analytic gradient drives the ascent, seeded
    by projected linear inversion.  Convergence means the dimensionless
    gradient norm |grad L| |T| / N^(3/2) (N = total counts) falls below
    ``gradient_tolerance`` within ``max_iterations`` iterations: the change
    of the per-count log-likelihood over a one-sigma parameter step, since
    the entries of T carry statistical uncertainty of order |T| / sqrt(N).
    """
    counts = np.asarray(record.counts, dtype=float)
    total = float(np.sum(counts))
    if total <= 0:
        raise ValidationError("mle_reconstruct: counts: all-zero record cannot be inverted")
    t_acq = record.acquisition_time
    design = projectors.matrices.transpose(0, 2, 1).reshape(16, 16)

    def likelihood_and_grad(t):
        g = t.conj().T @ t
        mu = t_acq * (design @ g.ravel()).real
        mu = np.maximum(mu, 1e-300)
        ll = _poisson_loglik(counts, mu)
        coeff = (counts / mu - 1.0) * t_acq
        a = (coeff @ design).reshape(4, 4).T
        grad = 2.0 * (t @ a)
        ii = np.diag_indices(4)
        grad[ii] = grad[ii].real
        return ll, grad

    def objective(x):
        t = _unpack_factor(x)
        ll, grad = likelihood_and_grad(t)
        if not np.isfinite(ll):
            return 1e300, np.zeros_like(x)
        return -ll / total, -_pack_factor(grad) / total

    g0 = _linear_inversion_start(counts, t_acq, projectors)
    t0 = np.linalg.cholesky(g0 + 1e-14 * np.trace(g0).real * np.eye(4)).conj().T

    from scipy.optimize import minimize

    def metric(t, grad):
        return np.linalg.norm(grad) * np.linalg.norm(t) / max(total, 1.0) ** 1.5

    # Restarting with a fresh Hessian memory recovers progress on boundary
    # (rank-deficient) optima where a single L-BFGS pass stalls early.
    x = _pack_factor(t0)
    iterations = 0
    gnorm = np.inf
    for _ in range(4):
        res = minimize(objective, x, jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iterations - iterations,
                                "maxfun": 10 * max_iterations,
                                "ftol": 1e-16, "gtol": 1e-16})
        x = res.x
        iterations += int(res.nit)
        t_mat = _unpack_factor(x)
        ll, grad = likelihood_and_grad(t_mat)
        previous, gnorm = gnorm, metric(t_mat, grad)
        if gnorm < gradient_tolerance or iterations >= max_iterations:
            break
        if previous / max(gnorm, 1e-300) < 3.0:
            break   # diminishing returns: stuck at the working-precision floor

    converged = bool(gnorm < gradient_tolerance)
    rho = DensityMatrix4.from_unnormalized(t_mat.conj().T @ t_mat)
    if not converged:
        log.info("mle_reconstruct: dimensionless gradient norm %.2e after %d iterations",
                 gnorm, iterations)
    return MleResult(rho=rho, log_likelihood=ll, converged=converged, iterations=iterations)


# ---------------------------------------------------------------------------
# Frequency-resolved tomography
# ---------------------------------------------------------------------------

def bin_density(state: JointState, indices: np.ndarray) -> DensityMatrix4:
    """Weight-averaged conditional state of the grid points in one bin.

    Averaging over a bin in which the relative phase varies produces a mixed
    state even though each constituent pair is pure.
    """
    w = trapezoid_weights(state.detunings)[indices]
    amps = state.amplitudes[indices]
    accum = np.einsum("j,ja,jb->ab", w, amps, amps.conj())
    return DensityMatrix4.from_unnormalized(accum)


def bootstrap_concurrence_error(record: CountRecord, projectors: ProjectorSet16,
                                resamples: int = 100) -> float:
    """Standard error of the concurrence estimate by count resampling."""
    if resamples <= 0:
        return float("nan")
    seeds = np.random.SeedSequence(record.seed, spawn_key=(1,)).generate_state(resamples)
    values = np.empty(resamples)
    for i, s in enumerate(seeds):
        rng = np.random.default_rng(int(s))
        resampled = CountRecord(
            rates=record.rates,
            counts=rng.poisson(np.maximum(record.counts, 0)),
            acquisition_time=record.acquisition_time,
            seed=int(s),
        )
        values[i] = concurrence(mle_reconstruct(resampled, projectors).rho)
    return float(np.std(values, ddof=1))


@dataclass(frozen=True)
class BinTomography:
    bin: WavelengthBin
    truth: DensityMatrix4          # the simulated bin state the counts came from
    result: MleResult
    record: CountRecord
    concurrence: float
    concurrence_error: float


def frequency_resolved_qst(state: JointState, dcm: DcmParams, brightness: float,
                           acquisition_time: float, seed: int,
                           resamples: int = 100,
                           projectors: ProjectorSet16 | None = None) -> list[BinTomography]:
    """Quantum state tomography per wavelength bin across the module passband."""
    if projectors is None:
        projectors = projector_set16()
    bins = wavelength_bins(dcm, state)
    bin_seeds = np.random.SeedSequence(seed).generate_state(len(bins), dtype=np.uint64)
    results = []
    for b, bin_seed in zip(bins, bin_seeds):
        try:
            rho_bin = bin_density(state, b.indices)
        except ValidationError:
            log.info("skipping empty wavelength bin at %.3f nm", b.center * 1e9)
            continue
        rates = expected_rates(rho_bin, brightness, projectors)
        record = simulate_counts(rates, acquisition_time, int(bin_seed))
        if np.sum(record.counts) == 0:
            log.info("skipping zero-count wavelength bin at %.3f nm", b.center * 1e9)
            continue
        est = mle_reconstruct(record, projectors)
        err = bootstrap_concurrence_error(record, projectors, resamples)
        results.append(BinTomography(
            bin=b,
            truth=rho_bin,
            result=est,
            record=record,
            concurrence=concurrence(est.rho),
            concurrence_error=err,
        ))
    return results


def state_tomography(rho: DensityMatrix4, brightness: float, acquisition_time: float,
                     seed: int, resamples: int = 100,
                     projectors: ProjectorSet16 | None = None) -> tuple[MleResult, CountRecord, float, float]:
    """Counts, reconstruction, concurrence and bootstrap error for one state."""
    if projectors is None:
        projectors = projector_set16()
    rates = expected_rates(rho, brightness, projectors)
    record = simulate_counts(rates, acquisition_time, seed)
    est = mle_reconstruct(record, projectors)
    err = bootstrap_concurrence_error(record, projectors, resamples)
    return est, record, concurrence(est.rho), err


def count_records_table(entries: list[tuple[int, float, CountRecord]],
                        projectors: ProjectorSet16) -> str:
    """Columnar text serialization: one row per (bin, projector) count.

    ``entries`` holds (bin_index, bin_center_wavelength_m, record) triples.
    """
    lines = ["bin_index,wavelength_nm,projector,counts,acquisition_time_s,seed"]
    for bin_index, lam, record in entries:
        for label, n in zip(projectors.labels, record.counts):
            lines.append(
                f"{bin_index},{lam * 1e9!r},{label},{int(n)},{record.acquisition_time!r},{record.seed}"
            )
    return "\n".join(lines) + "\n"
