"""Discrete-time quantum walk stepped in Fourier space.

One step applies, per mode k, the 2x2 unitary C_l * diag(e^{2i*pi*k/N},
e^{-2i*pi*k/N}): the diagonal factor encodes the coin-conditioned shift, the
coin is C_l = R_X(2*eps*m) * R_Z(-2*eps*q*A1(l)) in the fixed gauge A0 = 0,
A1(l) = E*l*eps.  The step from l to l+1 consumes A1 at the current index l,
so T = 0 means no field was ever applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GridSpec, ModeSpectrum, SpinorField, dft_forward, dft_inverse

__all__ = [
    "WalkParams",
    "coin_matrix",
    "shift_phases",
    "step_spectrum",
    "evolve_spectral",
    "mode_propagator",
    "mode_propagators",
    "steps_for_time",
]


@dataclass(frozen=True)
class WalkParams:
    """Mass, charge and constant electric field of the walk (c = hbar = 1)."""

    m: float = 0.0
    q: float = -1.0
    E: float = 0.0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"mass must be non-negative, got {self.m}")
        for name in ("m", "q", "E"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def vector_potential(self, l: int, eps: float) -> float:
        """A1 at step index l in the gauge A0 = 0, A1 = E*l*eps."""
        return self.E * l * eps


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def _rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-1j * theta / 2.0), 0.0], [0.0, np.exp(1j * theta / 2.0)]],
        dtype=np.complex128,
    )


def coin_matrix(l: int, params: WalkParams, grid: GridSpec) -> np.ndarray:
    """Coin unitary for the step starting at index l (A0 = 0 drops the scalar phase)."""
    if l < 0:
        raise ValueError(f"step index must be >= 0, got {l}")
    eps = grid.eps
    a1 = params.vector_potential(l, eps)
    return _rx(2.0 * eps * params.m) @ _rz(-2.0 * eps * params.q * a1)


def shift_phases(k: int, N: int) -> tuple[complex, complex]:
    """Fourier-space shift factors (e^{2i*pi*k/N}, e^{-2i*pi*k/N}) for mode k."""
    if not -N // 2 <= k < N // 2:
        raise IndexError(f"mode index {k} outside [-{N // 2}, {N // 2})")
    ph = np.exp(2j * np.pi * k / N)
    return complex(ph), complex(np.conj(ph))


def _step_angles(ks: np.ndarray, l: int, params: WalkParams, eps: float) -> np.ndarray:
    # Combined diagonal angle: shift phase eps*k plus R_Z(-2*eps*q*A1) phase
    # eps^2*q*E*l per component (equal and opposite on L and R).
    return eps * ks + (eps * eps) * params.q * params.E * l


def _apply_step(values: np.ndarray, ks: np.ndarray, l: int, params: WalkParams, eps: float) -> np.ndarray:
    """One walk step on an (n, 2) array of mode pairs with signed labels ks."""
    phase = np.exp(1j * _step_angles(ks, l, params, eps))
    v0 = values[:, 0] * phase
    v1 = values[:, 1] * np.conj(phase)
    c = np.cos(eps * params.m)
    s = np.sin(eps * params.m)
    out = np.empty_like(values)
    out[:, 0] = c * v0 - 1j * s * v1
    out[:, 1] = -1j * s * v0 + c * v1
    return out


def step_spectrum(spec: ModeSpectrum, l: int, params: WalkParams) -> ModeSpectrum:
    """Advance every mode by one step: psi_{l+1,k} = C_l * D_k * psi_{l,k}."""
    if l < 0:
        raise ValueError(f"step index must be >= 0, got {l}")
    grid = spec.grid
    ks = grid.signed_indices()
    out = _apply_step(spec.values, ks, l, params, grid.eps)
    return ModeSpectrum(grid=grid, values=out)


def evolve_spectral(field: SpinorField, T: int, params: WalkParams) -> SpinorField:
    """T-step evolution: FFT, per-mode stepping for l = 0..T-1, inverse FFT."""
    if T < 0:
        raise ValueError(f"step count must be >= 0, got {T}")
    if T == 0:
        return field
    grid = field.grid
    ks = grid.signed_indices()
    vals = np.fft.fft(field.values, axis=0, norm="ortho")
    for l in range(T):
        vals = _apply_step(vals, ks, l, params, grid.eps)
    return dft_inverse(ModeSpectrum(grid=grid, values=vals))


def mode_propagators(ks, T: int, params: WalkParams, grid: GridSpec) -> np.ndarray:
    """Ordered per-mode products prod_{l=T-1..0} C_l * D_k, shape (len(ks), 2, 2).

    The earliest step sits rightmost, i.e. it acts first on the mode state.
    """
    if T < 0:
        raise ValueError(f"step count must be >= 0, got {T}")
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    eps = grid.eps
    props = np.zeros((len(ks), 2, 2), dtype=np.complex128)
    props[:, 0, 0] = 1.0
    props[:, 1, 1] = 1.0
    c = np.cos(eps * params.m)
    s = np.sin(eps * params.m)
    coin = np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    for l in range(T):
        phase = np.exp(1j * _step_angles(ks, l, params, eps))
        props[:, 0, :] *= phase[:, None]
        props[:, 1, :] *= np.conj(phase)[:, None]
        props = np.einsum("ij,kjl->kil", coin, props)
    return props


def mode_propagator(k: int, T: int, params: WalkParams, grid: GridSpec) -> np.ndarray:
    """Single-mode propagator; see mode_propagators."""
    shift_phases(k, grid.N)  # range check
    return mode_propagators([k], T, params, grid)[0]


def steps_for_time(t: float, grid: GridSpec) -> int:
    """Nearest step count for a requested physical time (t = T*eps realized)."""
    if t < 0:
        raise ValueError(f"physical time must be >= 0, got {t}")
    return int(round(t / grid.eps))
