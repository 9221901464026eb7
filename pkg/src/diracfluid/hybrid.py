"""Emulation of the per-mode quantum subroutine of the hybrid algorithm.

Each Fourier mode is a single qubit: the normalized pair (psi_L, psi_R)_k maps
to Bloch angles (alpha, phi_minus) while the amplitude n(k) and global phase
phi_plus are memorized classically.  Circuit (a) applies the T walk rotations
and measures in the x/y/z bases (rotations H, H*Sdg, identity); circuit (b) is
a Hadamard test whose ancilla x/y expectations equal Re/Im <k0|U_T|k0>, from
which the evolved global phase is recovered.

Sampling is emulated at the outcome-distribution level: a depolarizing channel
after each of the T rotations contracts the Bloch vector (or the Hadamard-test
coherence) by (1 - p_d)^T, and a symmetric readout flip maps each outcome
probability p to p*(1-p_r) + (1-p)*p_r, which is exactly the distribution of
independently flipped bits.  Counts are then binomial draws from a counter-based
(Philox) stream keyed by seed XOR mode index, so results do not depend on the
order in which modes are processed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import GridSpec, ModeSpectrum, SpinorField, dft_forward, dft_inverse
from .errors import ConsistencyError, DegenerateInputError
from .walk import WalkParams, mode_propagators

__all__ = [
    "ModeEncoding",
    "TomographyCounts",
    "HadamardCounts",
    "NoiseModel",
    "HybridConfig",
    "BlochEstimate",
    "decompose_mode",
    "bloch_state",
    "simulate_circuit_a",
    "estimate_bloch",
    "angle_stderrs",
    "simulate_circuit_b",
    "estimate_overlap",
    "recover_global_phase",
    "phase_stderr",
    "compress_spectrum",
    "run_hybrid",
]

_MASK64 = (1 << 64) - 1
# fixed stream salts so circuits a, b and the retry of b never share randomness
_SALT_CIRCUIT_A = 1
_SALT_CIRCUIT_B = 2
_SALT_CIRCUIT_B_RETRY = 3


def wrap_angle(a: float) -> float:
    """Wrap to the branch (-pi, pi]."""
    return float(-((-a + np.pi) % (2.0 * np.pi) - np.pi))


@dataclass(frozen=True)
class ModeEncoding:
    """One mode split into memorized (amp, phi_plus) and qubit (alpha, phi_minus)."""

    k: int
    amp: float
    phi_plus: float
    alpha: float
    phi_minus: float
    active: bool = True

    def state_vector(self) -> np.ndarray:
        """Reconstruct the original complex pair amp*e^{i*phi_plus}*|bloch>."""
        return self.amp * np.exp(1j * self.phi_plus) * bloch_state(self)


@dataclass(frozen=True)
class TomographyCounts:
    """Per-basis (count0, count1) for the x, y, z measurements of circuit (a)."""

    shots_per_basis: int
    counts: dict[str, tuple[int, int]]
    rng_seed: int

    def __post_init__(self):
        for b in ("x", "y", "z"):
            c0, c1 = self.counts[b]
            if c0 < 0 or c1 < 0 or c0 + c1 != self.shots_per_basis:
                raise ValueError(f"basis {b}: counts {self.counts[b]} do not sum to {self.shots_per_basis}")


@dataclass(frozen=True)
class HadamardCounts:
    """Ancilla (count0, count1) for the x and y readouts of circuit (b)."""

    shots_per_basis: int
    counts: dict[str, tuple[int, int]]

    def __post_init__(self):
        for b in ("x", "y"):
            c0, c1 = self.counts[b]
            if c0 < 0 or c1 < 0 or c0 + c1 != self.shots_per_basis:
                raise ValueError(f"basis {b}: counts {self.counts[b]} do not sum to {self.shots_per_basis}")


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing contraction per walk step plus symmetric readout flip."""

    depolarizing_per_gate: float = 0.0
    readout_flip: float = 0.0
    enabled: bool = False

    def __post_init__(self):
        for name in ("depolarizing_per_gate", "readout_flip"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")

    def contraction(self, T: int) -> float:
        if not self.enabled:
            return 1.0
        return (1.0 - self.depolarizing_per_gate) ** T

    def flip(self, p1: float) -> float:
        if not self.enabled:
            return p1
        r = self.readout_flip
        return p1 * (1.0 - r) + (1.0 - p1) * r


def nisq_like_noise() -> NoiseModel:
    """Effective noise preset for device-like error levels.

    Tuned, not calibrated: because the reconstruction uses only Bloch angles
    (the amplitude is memorized classically), isotropic contraction and
    symmetric readout flips leave the estimators unbiased, and errors enter
    only through the inflated shot variance ~1/((1-p_d)^T (1-2 p_r)).  The
    per-step rate stands in for the full transpiled controlled-rotation block.
    """
    return NoiseModel(depolarizing_per_gate=0.12, readout_flip=0.05, enabled=True)


@dataclass(frozen=True)
class HybridConfig:
    """Knobs of the emulated quantum backend."""

    shots_per_basis: int = 8096
    noise: NoiseModel = field(default_factory=NoiseModel)
    overlap_threshold: float = 0.1
    rng_seed: int = 0
    compression: bool = False
    compression_threshold: float = 1e-10
    backend: str = "sampled"

    def __post_init__(self):
        if self.shots_per_basis < 1:
            raise ValueError(f"shots_per_basis must be >= 1, got {self.shots_per_basis}")
        if self.compression_threshold < 0:
            raise ValueError("compression threshold must be >= 0")
        if self.backend not in ("ideal", "sampled"):
            raise ValueError(f"backend must be 'ideal' or 'sampled', got {self.backend!r}")


def decompose_mode(psi_hat_k: Sequence[complex], k: int = 0) -> ModeEncoding:
    """Split a complex pair into amplitude, global phase and Bloch angles.

    Conventions: alpha in [0, pi]; phases wrapped to (-pi, pi]; phi_plus is the
    argument of the L component (of R when L vanishes); phi_minus = 0 whenever
    the R component vanishes.  The zero pair yields the inactive encoding.
    """
    cl, cr = complex(psi_hat_k[0]), complex(psi_hat_k[1])
    al, ar = abs(cl), abs(cr)
    amp = float(np.hypot(al, ar))
    if amp == 0.0:
        return ModeEncoding(k=k, amp=0.0, phi_plus=0.0, alpha=0.0, phi_minus=0.0, active=False)
    phi_plus = float(np.angle(cl)) if al > 0.0 else float(np.angle(cr))
    alpha = 2.0 * float(np.arctan2(ar, al))
    phi_minus = wrap_angle(float(np.angle(cr)) - phi_plus) if ar > 0.0 else 0.0
    return ModeEncoding(k=k, amp=amp, phi_plus=wrap_angle(phi_plus), alpha=alpha, phi_minus=phi_minus)


def bloch_state(enc: ModeEncoding) -> np.ndarray:
    """Unit qubit state (cos(alpha/2), sin(alpha/2)*e^{i*phi_minus})."""
    return np.array(
        [np.cos(enc.alpha / 2.0), np.sin(enc.alpha / 2.0) * np.exp(1j * enc.phi_minus)],
        dtype=np.complex128,
    )


def _mode_rng(seed: int, k: int, salt: int) -> np.random.Generator:
    key = (seed ^ (int(k) & _MASK64)) & _MASK64
    return np.random.Generator(np.random.Philox(key=np.array([key, salt], dtype=np.uint64)))


def _bloch_vector(state: np.ndarray) -> np.ndarray:
    cross = np.conj(state[0]) * state[1]
    return np.array([2.0 * cross.real, 2.0 * cross.imag, abs(state[0]) ** 2 - abs(state[1]) ** 2])


def _checked_p1(expectation: float, noise: NoiseModel) -> float:
    p1 = noise.flip(0.5 * (1.0 - expectation))
    if p1 < -1e-9 or p1 > 1.0 + 1e-9:
        raise ConsistencyError(f"outcome probability {p1} drifted outside [0, 1]")
    return min(max(p1, 0.0), 1.0)


def simulate_circuit_a(
    enc: ModeEncoding,
    T: int,
    params: WalkParams,
    grid: GridSpec,
    cfg: HybridConfig,
) -> TomographyCounts:
    """Evolve the encoded qubit through T rotations and sample x/y/z readouts."""
    final = mode_propagators([enc.k], T, params, grid)[0] @ bloch_state(enc)
    r = _bloch_vector(final) * cfg.noise.contraction(T)
    rng = _mode_rng(cfg.rng_seed, enc.k, _SALT_CIRCUIT_A)
    M = cfg.shots_per_basis
    counts = {}
    for b, v in (("x", r[0]), ("y", r[1]), ("z", r[2])):
        c1 = int(rng.binomial(M, _checked_p1(v, cfg.noise)))
        counts[b] = (M - c1, c1)
    return TomographyCounts(shots_per_basis=M, counts=counts, rng_seed=(cfg.rng_seed ^ (int(enc.k) & _MASK64)))


@dataclass(frozen=True)
class BlochEstimate:
    """Tomography result: angles, per-component stderr and the raw Bloch vector."""

    alpha_hat: float
    phi_minus_hat: float
    stderr: tuple[float, float, float]
    bloch: tuple[float, float, float]
    degenerate: bool = False


def estimate_bloch(counts: TomographyCounts) -> BlochEstimate:
    """Angles from empirical Bloch components; stderr_i = sqrt((1-v_i^2)/M)."""
    M = counts.shots_per_basis
    v = {}
    err = {}
    for b in ("x", "y", "z"):
        c0, c1 = counts.counts[b]
        v[b] = (c0 - c1) / M
        err[b] = float(np.sqrt(max(0.0, 1.0 - v[b] ** 2) / M))
    rho = float(np.hypot(v["x"], v["y"]))
    if rho == 0.0 and v["z"] == 0.0:
        return BlochEstimate(
            alpha_hat=0.0,
            phi_minus_hat=0.0,
            stderr=(err["x"], err["y"], err["z"]),
            bloch=(0.0, 0.0, 0.0),
            degenerate=True,
        )
    alpha = float(np.arctan2(rho, v["z"]))
    phi = wrap_angle(float(np.arctan2(v["y"], v["x"]))) if rho > 0.0 else 0.0
    return BlochEstimate(
        alpha_hat=alpha,
        phi_minus_hat=phi,
        stderr=(err["x"], err["y"], err["z"]),
        bloch=(v["x"], v["y"], v["z"]),
        degenerate=False,
    )


def angle_stderrs(est: BlochEstimate) -> tuple[float, float]:
    """Propagate per-component stderr to (sigma_alpha, sigma_phi_minus).

    Near the poles the relative phase is unidentifiable and its uncertainty is
    capped at pi.
    """
    x, y, z = est.bloch
    sx, sy, sz = est.stderr
    rho2 = x * x + y * y
    r2 = rho2 + z * z
    if r2 == 0.0:
        return np.pi, np.pi
    rho = np.sqrt(rho2)
    if rho2 < 1e-300:
        sigma_alpha = np.sqrt(sx**2 + sy**2) / np.sqrt(r2)
        return float(sigma_alpha), float(np.pi)
    da_dx = x * z / (rho * r2)
    da_dy = y * z / (rho * r2)
    da_dz = -rho / r2
    sigma_alpha = np.sqrt((da_dx * sx) ** 2 + (da_dy * sy) ** 2 + (da_dz * sz) ** 2)
    sigma_phi = np.sqrt((y * sx) ** 2 + (x * sy) ** 2) / rho2
    return float(sigma_alpha), float(min(sigma_phi, np.pi))


def simulate_circuit_b(
    enc: ModeEncoding,
    T: int,
    params: WalkParams,
    grid: GridSpec,
    cfg: HybridConfig,
    shots: int | None = None,
    salt: int = _SALT_CIRCUIT_B,
) -> HadamardCounts:
    """Hadamard test against the controlled T-step rotation.

    The two-qubit state (|0>|k0> + |1>U_T|k0>)/sqrt(2) is marginalized over the
    system qubit; ancilla expectations are <x> = Re z, <y> = Im z with
    z = <k0|U_T|k0> (our basis rotations are H and H*Sdg, fixing the sign).
    """
    k0 = bloch_state(enc)
    z = complex(np.vdot(k0, mode_propagators([enc.k], T, params, grid)[0] @ k0))
    z *= cfg.noise.contraction(T)
    rng = _mode_rng(cfg.rng_seed, enc.k, salt)
    M = int(shots) if shots is not None else cfg.shots_per_basis
    counts = {}
    for b, v in (("x", z.real), ("y", z.imag)):
        c1 = int(rng.binomial(M, _checked_p1(v, cfg.noise)))
        counts[b] = (M - c1, c1)
    return HadamardCounts(shots_per_basis=M, counts=counts)


def estimate_overlap(hc: HadamardCounts) -> tuple[complex, tuple[float, float]]:
    """Empirical complex overlap and per-component stderr from circuit (b) counts."""
    M = hc.shots_per_basis
    comps = {}
    errs = {}
    for b in ("x", "y"):
        c0, c1 = hc.counts[b]
        comps[b] = (c0 - c1) / M
        errs[b] = float(np.sqrt(max(0.0, 1.0 - comps[b] ** 2) / M))
    return complex(comps["x"], comps["y"]), (errs["x"], errs["y"])


def recover_global_phase(
    hc: HadamardCounts,
    enc: ModeEncoding,
    alpha_hat: float,
    phi_minus_hat: float,
    cfg: HybridConfig,
) -> tuple[float, bool]:
    """Evolved global phase from the Hadamard-test overlap.

    The measured z equals e^{i*phi_plus_T} * <k0|psi_T> for the evolved Bloch
    state psi_T, so subtracting the argument of the overlap predicted from the
    estimated angles isolates phi_plus_T.  Small overlaps make arg(z) noisy;
    below cfg.overlap_threshold the value is returned flagged unreliable.
    """
    z, _ = estimate_overlap(hc)
    psi_t = np.array(
        [np.cos(alpha_hat / 2.0), np.sin(alpha_hat / 2.0) * np.exp(1j * phi_minus_hat)],
        dtype=np.complex128,
    )
    ovl = complex(np.vdot(bloch_state(enc), psi_t))
    reliable = abs(ovl) >= cfg.overlap_threshold and abs(z) > 0.0
    phi_plus = wrap_angle(float(np.angle(z) - np.angle(ovl)))
    return phi_plus, reliable


def phase_stderr(
    hc: HadamardCounts,
    enc: ModeEncoding,
    est: BlochEstimate,
) -> float:
    """Propagated stderr of the recovered global phase.

    Combines the angular noise of the measured overlap with the sensitivity of
    arg<k0|psi_T> to the circuit-(a) angle estimates (numerical partials).
    """
    z, (ex, ey) = estimate_overlap(hc)
    az = abs(z)
    if az == 0.0:
        return float(np.pi)
    var = (z.real * ey) ** 2 + (z.imag * ex) ** 2
    sigma_argz = np.sqrt(var) / (az * az)

    k0 = bloch_state(enc)

    def arg_ovl(a: float, p: float) -> float:
        psi = np.array([np.cos(a / 2.0), np.sin(a / 2.0) * np.exp(1j * p)], dtype=np.complex128)
        return float(np.angle(np.vdot(k0, psi)))

    sigma_a, sigma_p = angle_stderrs(est)
    h = 1e-6
    da = (arg_ovl(est.alpha_hat + h, est.phi_minus_hat) - arg_ovl(est.alpha_hat - h, est.phi_minus_hat)) / (2 * h)
    dp = (arg_ovl(est.alpha_hat, est.phi_minus_hat + h) - arg_ovl(est.alpha_hat, est.phi_minus_hat - h)) / (2 * h)
    total = np.sqrt(sigma_argz**2 + (da * sigma_a) ** 2 + (dp * sigma_p) ** 2)
    return float(min(total, np.pi))


def compress_spectrum(spec: ModeSpectrum, params: WalkParams, cfg: HybridConfig) -> np.ndarray:
    """Signed indices of modes above the relative amplitude threshold tau.

    The walk's momentum support is bounded by m*u_max, so for shock data the
    set is a narrow band around k = 0; modes left out are carried as exact
    zeros through the evolution.
    """
    amps = np.linalg.norm(spec.values, axis=1)
    peak = float(amps.max())
    if peak == 0.0:
        raise DegenerateInputError("all-zero spectrum: no active modes")
    mask = amps > cfg.compression_threshold * peak
    ks = spec.grid.signed_indices()[mask]
    return np.sort(ks)


def _reconstruct_pair(amp: float, phi_plus: float, alpha: float, phi_minus: float) -> np.ndarray:
    return amp * np.exp(1j * phi_plus) * np.array(
        [np.cos(alpha / 2.0), np.sin(alpha / 2.0) * np.exp(1j * phi_minus)],
        dtype=np.complex128,
    )


def run_hybrid(
    field: SpinorField,
    T: int,
    params: WalkParams,
    cfg: HybridConfig,
) -> tuple[SpinorField, list[dict]]:
    """Full pipeline: FFT, per-mode quantum subroutine (emulated), inverse FFT.

    Returns the evolved field and one JSON-ready diagnostics record per active
    mode.  With backend='ideal' the per-mode states are exact and the output
    matches the classical spectral evolution to roundoff.
    """
    grid = field.grid
    spec0 = dft_forward(field)
    amps = np.linalg.norm(spec0.values, axis=1)
    signed = grid.signed_indices()
    if cfg.compression:
        active = compress_spectrum(spec0, params, cfg)
    else:
        active = np.sort(signed[amps > 0.0])

    out = np.zeros_like(spec0.values)
    diagnostics: list[dict] = []

    if cfg.backend == "ideal":
        storage = np.array([grid.storage_index(int(k)) for k in active], dtype=np.int64)
        encs = [decompose_mode(spec0.values[s], k=int(k)) for s, k in zip(storage, active)]
        props = mode_propagators(active, T, params, grid)
        k0s = np.stack([bloch_state(e) for e in encs])
        finals = np.einsum("kij,kj->ki", props, k0s)
        for e, s, fin in zip(encs, storage, finals):
            out[s] = e.amp * np.exp(1j * e.phi_plus) * fin
            fenc = decompose_mode(fin)
            diagnostics.append(
                {
                    "k": e.k,
                    "amp": e.amp,
                    "alpha_hat": fenc.alpha,
                    "phi_minus_hat": fenc.phi_minus,
                    "phi_plus_hat": fenc.phi_plus,
                    "stderr": [0.0, 0.0, 0.0],
                    "reliable": True,
                    "shots": 0,
                }
            )
    else:
        for k in active:
            s = grid.storage_index(int(k))
            enc = decompose_mode(spec0.values[s], k=int(k))
            counts_a = simulate_circuit_a(enc, T, params, grid, cfg)
            est = estimate_bloch(counts_a)
            counts_b = simulate_circuit_b(enc, T, params, grid, cfg)
            phi_plus, reliable = recover_global_phase(counts_b, enc, est.alpha_hat, est.phi_minus_hat, cfg)
            shots = 3 * cfg.shots_per_basis + 2 * counts_b.shots_per_basis
            if not reliable:
                # one retry with a doubled budget before accepting the flagged value
                counts_b = simulate_circuit_b(
                    enc, T, params, grid, cfg, shots=2 * cfg.shots_per_basis, salt=_SALT_CIRCUIT_B_RETRY
                )
                phi_plus, reliable = recover_global_phase(counts_b, enc, est.alpha_hat, est.phi_minus_hat, cfg)
                shots += 2 * counts_b.shots_per_basis
            out[s] = _reconstruct_pair(enc.amp, enc.phi_plus + phi_plus, est.alpha_hat, est.phi_minus_hat)
            diagnostics.append(
                {
                    "k": enc.k,
                    "amp": enc.amp,
                    "alpha_hat": est.alpha_hat,
                    "phi_minus_hat": est.phi_minus_hat,
                    "phi_plus_hat": phi_plus,
                    "stderr": list(est.stderr),
                    "reliable": bool(reliable),
                    "shots": shots,
                }
            )

    evolved = dft_inverse(ModeSpectrum(grid=grid, values=out))
    return evolved, diagnostics
