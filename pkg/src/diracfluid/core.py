"""Lattice geometry, two-component spinor fields, and the unitary DFT.

The spatial domain is the periodic interval [-pi, pi) sampled at N = 2**n_exp
points with spacing eps = 2*pi/N (units c = hbar = 1).  Signed labels live in
{-N/2, ..., N/2 - 1} for both positions p and wavenumbers k; arrays are stored
in standard FFT wraparound order (0, ..., N/2-1, -N/2, ..., -1), so storage
slot s holds the signed label s for s < N/2 and s - N otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "GridSpec",
    "SpinorField",
    "ModeSpectrum",
    "make_grid",
    "dft_forward",
    "dft_inverse",
    "l2_norm",
    "normalized",
]


@dataclass(frozen=True)
class GridSpec:
    """Periodic 1D lattice with N = 2**n_exp points and eps*N = 2*pi."""

    n_exp: int

    @property
    def N(self) -> int:
        return 1 << self.n_exp

    @property
    def eps(self) -> float:
        return 2.0 * np.pi / self.N

    def signed_indices(self) -> np.ndarray:
        """Signed labels in storage order: [0, 1, ..., N/2-1, -N/2, ..., -1]."""
        half = self.N // 2
        s = np.arange(self.N)
        return np.where(s < half, s, s - self.N)

    def positions(self) -> np.ndarray:
        """x_p = eps * p for each storage slot (wraparound order)."""
        return self.eps * self.signed_indices()

    def storage_index(self, signed: int) -> int:
        """Map a signed label in [-N/2, N/2) to its storage slot."""
        half = self.N // 2
        if not -half <= signed < half:
            raise IndexError(f"signed index {signed} outside [-{half}, {half})")
        return signed % self.N

    def signed_index(self, storage: int) -> int:
        """Inverse of storage_index."""
        if not 0 <= storage < self.N:
            raise IndexError(f"storage index {storage} outside [0, {self.N})")
        half = self.N // 2
        return storage if storage < half else storage - self.N


def make_grid(n_exp: int) -> GridSpec:
    if not isinstance(n_exp, (int, np.integer)) or isinstance(n_exp, bool):
        raise ConfigError(f"n_exp must be an integer, got {n_exp!r}")
    if not 2 <= n_exp <= 24:
        raise ConfigError(f"n_exp must lie in [2, 24], got {n_exp}")
    return GridSpec(n_exp=int(n_exp))


def _as_spinor_array(values: np.ndarray, N: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.shape != (N, 2):
        raise ValueError(f"expected spinor array of shape ({N}, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValueError("spinor array contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)  # value semantics: instances never mutate
    return arr


@dataclass(frozen=True)
class SpinorField:
    """Position-space walker state: one (psi_L, psi_R) pair per grid point."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_spinor_array(self.values, self.grid.N))

    @property
    def psi_l(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def psi_r(self) -> np.ndarray:
        return self.values[:, 1]


@dataclass(frozen=True)
class ModeSpectrum:
    """Fourier-space walker state: one (psi_L, psi_R) pair per wavenumber k."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_spinor_array(self.values, self.grid.N))


def dft_forward(field: SpinorField) -> ModeSpectrum:
    """Unitary DFT per spin component, kernel exp(-2i*pi*k*p/N) / sqrt(N).

    Mode k then carries spatial dependence exp(+2i*pi*k*p/N), and Parseval
    holds exactly up to roundoff.
    """
    hat = np.fft.fft(field.values, axis=0, norm="ortho")
    return ModeSpectrum(grid=field.grid, values=hat)


def dft_inverse(spec: ModeSpectrum) -> SpinorField:
    """Inverse of dft_forward (exact round-trip to machine precision)."""
    vals = np.fft.ifft(spec.values, axis=0, norm="ortho")
    return SpinorField(grid=spec.grid, values=vals)


def l2_norm(obj: SpinorField | ModeSpectrum) -> float:
    """sqrt(sum_p |psi_L|^2 + |psi_R|^2) over the whole lattice."""
    return float(np.linalg.norm(obj.values))


def normalized(field: SpinorField) -> SpinorField:
    """Rescale to unit L2 norm."""
    nrm = l2_norm(field)
    if nrm == 0.0:
        raise ValueError("cannot normalize an all-zero field")
    return SpinorField(grid=field.grid, values=field.values / nrm)
