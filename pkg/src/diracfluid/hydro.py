"""Madelung layer: fluid observables of the spinor field and shock setup.

The conserved current is j0 = |psi_R|^2 + |psi_L|^2, j1 = |psi_R|^2 - |psi_L|^2;
the scalar density n = sqrt(j0^2 - j1^2) = 2|psi_L||psi_R| and the velocity in
c units is u1/u0 = j1/j0.  With the phase split psi = e^{i*phi_plus/2}
(|psi_L| e^{i*phi_minus/2}, |psi_R| e^{-i*phi_minus/2}) the enthalpy density is
w = m*n*cos(phi_minus).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GridSpec, SpinorField, l2_norm
from .walk import WalkParams

__all__ = [
    "HydroFields",
    "ShockParams",
    "currents",
    "madelung_fields",
    "shock_initial_condition",
    "shock_amplitude",
    "bohm_potential",
    "nonrel_residuals",
]

# relative j0 level below which a point counts as vacuum (velocity undefined)
VACUUM_CUTOFF = 1e-14


@dataclass(frozen=True)
class HydroFields:
    """Per-point fluid observables in storage (wraparound) order."""

    grid: GridSpec
    j0: np.ndarray = field(repr=False)
    j1: np.ndarray = field(repr=False)
    n: np.ndarray = field(repr=False)
    u_ratio: np.ndarray = field(repr=False)
    phi_plus: np.ndarray = field(repr=False)
    phi_minus: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    vacuum: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ShockParams:
    """Constant-density, antisymmetric-velocity initial data."""

    u_max: float
    m: float
    n0: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.u_max < 1.0:
            raise ValueError(f"u_max must lie in [0, 1), got {self.u_max}")
        if self.n0 <= 0.0:
            raise ValueError(f"n0 must be positive, got {self.n0}")


def currents(field: SpinorField) -> tuple[np.ndarray, np.ndarray]:
    """Charge current components (j0, j1) per grid point."""
    l2 = np.abs(field.psi_l) ** 2
    r2 = np.abs(field.psi_r) ** 2
    return r2 + l2, r2 - l2


def madelung_fields(field: SpinorField, m: float, density_scale: float = 1.0) -> HydroFields:
    """All fluid observables of a spinor field.

    density_scale multiplies the quadratic observables (j0, j1, n, w); pass the
    squared normalization constant of the initial condition to report in the
    pre-normalization units where the background density is n0.  Points with
    j0 below VACUUM_CUTOFF * max(j0) are masked and report u_ratio = 0.
    """
    j0, j1 = currents(field)
    n = 2.0 * np.abs(field.psi_l) * np.abs(field.psi_r)
    vacuum = j0 <= VACUUM_CUTOFF * (j0.max() if j0.size else 0.0)
    u_ratio = np.zeros_like(j0)
    np.divide(j1, j0, out=u_ratio, where=~vacuum)
    arg_l = np.angle(field.psi_l)
    arg_r = np.angle(field.psi_r)
    phi_plus = arg_l + arg_r
    phi_minus = arg_l - arg_r
    w = m * n * np.cos(phi_minus)
    return HydroFields(
        grid=field.grid,
        j0=density_scale * j0,
        j1=density_scale * j1,
        n=density_scale * n,
        u_ratio=u_ratio,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
        w=density_scale * w,
        vacuum=vacuum,
    )


def _shock_raw_values(grid: GridSpec, sp: ShockParams) -> np.ndarray:
    x = grid.positions()
    j1 = -sp.n0 * sp.u_max * np.sin(x)
    j0 = sp.n0 * np.sqrt(1.0 + (sp.u_max * np.sin(x)) ** 2)
    phi_plus = 2.0 * sp.m * sp.u_max * np.cos(x)
    mod_l = np.sqrt(0.5 * (j0 - j1))
    mod_r = np.sqrt(0.5 * (j0 + j1))
    phase = np.exp(0.5j * phi_plus)  # phi_minus = 0
    vals = np.empty((grid.N, 2), dtype=np.complex128)
    vals[:, 0] = phase * mod_l
    vals[:, 1] = phase * mod_r
    return vals


def shock_initial_condition(grid: GridSpec, sp: ShockParams) -> SpinorField:
    """Unit-norm shock initial state.

    Built from constant density n0, relative phase 0, and the velocity
    potential phi_plus = 2*m*u_max*cos(x), which gives the antisymmetric
    velocity u1/u0 = -u_max*sin(x)/sqrt(1 + (u_max*sin(x))^2).  The raw field
    is globally rescaled to unit L2 norm; shock_amplitude returns the constant.
    """
    vals = _shock_raw_values(grid, sp)
    return SpinorField(grid=grid, values=vals / np.linalg.norm(vals))


def shock_amplitude(grid: GridSpec, sp: ShockParams) -> float:
    """L2 norm of the raw (unnormalized) shock state.

    Observables quadratic in psi regain the paper's units when multiplied by
    its square; see madelung_fields(density_scale=...).
    """
    return float(np.linalg.norm(_shock_raw_values(grid, sp)))


def spectral_derivative(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """d/dx on the 2*pi-periodic grid via FFT (wavenumbers are the signed k)."""
    ks = grid.signed_indices()
    out = np.fft.ifft(1j * ks * np.fft.fft(values))
    return out.real if np.isrealobj(values) else out


def bohm_potential(n: np.ndarray, m: float, grid: GridSpec) -> np.ndarray:
    """Quantum potential Q = -(1/2m) (d^2 sqrt(n)/dx^2) / sqrt(n), hbar = 1.

    Non-positive densities are masked to NaN and stay NaN in the output.
    """
    if m <= 0:
        raise ValueError("mass must be positive for the Bohm potential")
    n = np.asarray(n, dtype=np.float64)
    ok = n > 0.0
    root = np.sqrt(np.where(ok, n, 1.0))
    ks = grid.signed_indices()
    d2 = np.fft.ifft(-(ks.astype(np.float64) ** 2) * np.fft.fft(root)).real
    q = -d2 / (2.0 * m * root)
    return np.where(ok, q, np.nan)


def _l2(values: np.ndarray, grid: GridSpec) -> float:
    return float(np.sqrt(grid.eps * np.sum(values**2)))


def nonrel_residuals(
    history: list[HydroFields],
    params: WalkParams,
    grid: GridSpec,
) -> tuple[float, float]:
    """L2 residuals of the limit equations on a window of consecutive snapshots.

    history must hold >= 3 snapshots one walk step (eps) apart.  For each
    interior snapshot the residual fields are

        R_cont = D_t n + d_x(n v)
        R_burg = m*(D_t v + v d_x v) - q*E - F_Q,   F_Q = -d_x Q

    with centered D_t at spacing eps and spectral d_x.  The residual fields are
    averaged over the window before taking norms, which cancels the walk's
    rest-mass interference ripple (frequency ~ 2m) when the window spans a full
    period of it; a 3-snapshot history reduces to the single centered stencil.
    """
    if len(history) < 3:
        raise ValueError(f"need >= 3 consecutive snapshots, got {len(history)}")
    eps = grid.eps
    m, q, E = params.m, params.q, params.E
    cont = np.zeros(grid.N)
    burg = np.zeros(grid.N)
    n_stencils = len(history) - 2
    for i in range(1, len(history) - 1):
        prev_h, mid, next_h = history[i - 1], history[i], history[i + 1]
        dt_n = (next_h.n - prev_h.n) / (2.0 * eps)
        v = mid.u_ratio
        cont += dt_n + spectral_derivative(mid.n * v, grid)
        dt_v = (next_h.u_ratio - prev_h.u_ratio) / (2.0 * eps)
        f_q = -spectral_derivative(bohm_potential(mid.n, m, grid), grid)
        burg += m * (dt_v + v * spectral_derivative(v, grid)) - q * E - f_q
    cont /= n_stencils
    burg /= n_stencils
    return _l2(cont, grid), _l2(burg, grid)
