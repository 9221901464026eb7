"""Quantitative comparisons: error metrics, conservation, symmetry, convergence."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SpinorField, make_grid, normalized
from .hydro import HydroFields, ShockParams, madelung_fields, shock_amplitude, shock_initial_condition
from .walk import WalkParams, evolve_spectral, steps_for_time

__all__ = [
    "ErrorReport",
    "error_metrics",
    "charge_total",
    "symmetry_defect",
    "ConvergenceStudy",
    "convergence_study",
]


@dataclass(frozen=True)
class ErrorReport:
    """Pointwise relative (%) and absolute wavefunction errors plus aggregates.

    e1 = 100 * |psi_q - psi_c| / |psi_c| and e2 = |psi_q - psi_c| per point,
    with |.| the two-component Euclidean norm.  Points where the reference
    field vanishes are masked out of e1 and of the aggregates.
    """

    x: np.ndarray = field(repr=False)
    e1: np.ndarray = field(repr=False)
    e2: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    e1_mean: float = 0.0
    e1_max: float = 0.0
    e2_mean: float = 0.0
    e2_max: float = 0.0
    masked_points: int = 0
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "e1_mean": self.e1_mean,
            "e1_max": self.e1_max,
            "e2_mean": self.e2_mean,
            "e2_max": self.e2_max,
            "masked_points": self.masked_points,
            "metadata": self.metadata,
            "points": [
                {"x": float(x), "e1": (float(a) if m else None), "e2": float(b)}
                for x, a, b, m in zip(self.x, self.e1, self.e2, self.mask)
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def write_csv(self, path: str | Path) -> None:
        order = np.argsort(self.x)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "e1", "e2"])
            for i in order:
                e1 = f"{self.e1[i]:.17g}" if self.mask[i] else ""
                writer.writerow([f"{self.x[i]:.17g}", e1, f"{self.e2[i]:.17g}"])


def error_metrics(q_field: SpinorField, c_field: SpinorField, metadata: dict | None = None) -> ErrorReport:
    """Pointwise e1/e2 between a device-path field (q) and the classical reference (c)."""
    if q_field.grid != c_field.grid:
        raise ValueError("error metrics require fields on the same grid")
    diff = np.linalg.norm(q_field.values - c_field.values, axis=1)
    ref = np.linalg.norm(c_field.values, axis=1)
    mask = ref > 0.0
    e1 = np.zeros_like(diff)
    np.divide(diff, ref, out=e1, where=mask)
    e1 *= 100.0
    x = q_field.grid.positions()
    valid = e1[mask]
    return ErrorReport(
        x=x,
        e1=e1,
        e2=diff,
        mask=mask,
        e1_mean=float(valid.mean()) if valid.size else 0.0,
        e1_max=float(valid.max()) if valid.size else 0.0,
        e2_mean=float(diff.mean()),
        e2_max=float(diff.max()),
        masked_points=int(np.count_nonzero(~mask)),
        metadata=dict(metadata or {}),
    )


def charge_total(field: SpinorField) -> float:
    """Integrated charge density sum_p (|psi_L|^2 + |psi_R|^2)."""
    return float(np.sum(np.abs(field.values) ** 2))


def symmetry_defect(h: HydroFields) -> float:
    """max_p |n(x_p) - n(-x_p)| with periodic index reflection."""
    n = h.n
    reflected = np.roll(n[::-1], 1)  # storage slot s -> (-s) mod N
    return float(np.max(np.abs(n - reflected)))


@dataclass(frozen=True)
class ConvergenceStudy:
    """Pairwise grid differences and the estimated order of convergence."""

    resolutions: list[int]
    diffs: list[float]  # max-abs density difference of adjacent pairs on common points
    orders: list[float]  # log2(diffs[i] / diffs[i+1])

    def rows(self) -> list[dict]:
        out = []
        for i, d in enumerate(self.diffs):
            out.append(
                {
                    "N_coarse": self.resolutions[i],
                    "N_fine": self.resolutions[i + 1],
                    "max_abs_diff": d,
                    "order_vs_next": self.orders[i - 1] if i > 0 else None,
                }
            )
        return out


def convergence_study(
    params: WalkParams,
    sp: ShockParams,
    t: float,
    resolutions: list[int],
) -> ConvergenceStudy:
    """Shock-density self-convergence toward the continuum limit.

    Runs the same physics at each resolution (each N must double the previous)
    to the same physical time and compares the density, in pre-normalization
    units, on the shared grid points.
    """
    if len(resolutions) < 2:
        raise ValueError("need at least two resolutions")
    for a, b in zip(resolutions, resolutions[1:]):
        if b not in (a, 2 * a):
            raise ValueError(f"resolutions must be nested by doubling, got {a} -> {b}")
    densities = []
    for N in resolutions:
        n_exp = int(round(np.log2(N)))
        if (1 << n_exp) != N:
            raise ValueError(f"resolution {N} is not a power of two")
        grid = make_grid(n_exp)
        field0 = shock_initial_condition(grid, sp)
        scale = shock_amplitude(grid, sp) ** 2
        out = evolve_spectral(field0, steps_for_time(t, grid), params)
        densities.append(madelung_fields(out, sp.m, density_scale=scale).n)
    diffs = []
    for (n_c, coarse), (n_f, fine) in zip(
        zip(resolutions, densities), zip(resolutions[1:], densities[1:])
    ):
        # coarse storage slot s sits at fine storage slot (N_f/N_c)*s (same signed x)
        diffs.append(float(np.max(np.abs(fine[:: n_f // n_c] - coarse))))
    orders = [float(np.log2(a / b)) if b > 0 else np.inf for a, b in zip(diffs, diffs[1:])]
    return ConvergenceStudy(resolutions=list(resolutions), diffs=diffs, orders=orders)
