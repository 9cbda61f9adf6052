"""Capped-quadratic trap potentials and Boltzmann reconstruction.

The memory bit lives in a bistable landscape built from two laser traps at
-L and +L.  Each trap is a harmonic well of stiffness k that saturates at
its rim |x - c| = w, so the region between the basins is a flat plateau of
height k w^2 / 2 + U_r.  Time multiplexing of the laser with duty ratio d
(fraction of each period spent at the left location) yields, for a particle
much slower than the multiplexing period, the effective potential

    U_eff(x, d) = d * U_well(x; -L) + (1 - d) * U_well(x; +L),

whose well depths tilt linearly with d.  All functions accept scalars or
numpy arrays in x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .units import kbt


@dataclass(frozen=True)
class PotentialParams:
    """Trap geometry and stiffness.

    k: stiffness in pN/nm; w: well half-width in nm; L: half-separation of
    the two trap centers in nm; U_r: additive reference energy in pN nm.
    Requires L > w so the basins do not overlap.
    """

    k: float = 0.0045
    w: float = 175.0
    L: float = 550.0
    U_r: float = 0.0

    def __post_init__(self) -> None:
        if not (self.k > 0):
            raise ValueError(f"stiffness k must be > 0, got {self.k}")
        if not (self.w > 0):
            raise ValueError(f"well half-width w must be > 0, got {self.w}")
        if not (self.L > self.w):
            raise ValueError(
                f"trap half-separation L must exceed w (L={self.L}, w={self.w})"
            )

    @property
    def plateau(self) -> float:
        """Energy of the flat region between and outside the wells, pN nm."""
        return 0.5 * self.k * self.w**2 + self.U_r


def _check_finite(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("position x must be finite")
    return x


def _maybe_scalar(arr: np.ndarray, scalar_in: bool):
    return float(arr) if scalar_in else arr


def single_well_energy(x, params: PotentialParams):
    """Energy of one trap centered at the origin, pN nm.

    Quadratic k x^2 / 2 + U_r for |x| <= w, saturated at k w^2 / 2 + U_r
    outside.  Continuous at the rim.
    """
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = _check_finite(x)
    inside = np.abs(x) <= params.w
    u = np.where(inside, 0.5 * params.k * x**2, 0.5 * params.k * params.w**2)
    return _maybe_scalar(u + params.U_r, scalar)


def bistable_energy(x, r: int, params: PotentialParams):
    """Instantaneous energy with the laser parked at one trap location.

    r = 1 puts the active well at +L, r = 0 at -L; everywhere outside the
    active well (including inside the idle basin) the particle sees the
    plateau k w^2 / 2 + U_r.
    """
    if r not in (0, 1):
        raise ValueError(f"laser-location flag r must be 0 or 1, got {r}")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = _check_finite(x)
    center = params.L if r == 1 else -params.L
    dx = x - center
    inside = np.abs(dx) <= params.w
    u = np.where(inside, 0.5 * params.k * dx**2, 0.5 * params.k * params.w**2)
    return _maybe_scalar(u + params.U_r, scalar)


def bistable_force(x, r: int, params: PotentialParams):
    """Force -dU/dx of the instantaneous single-laser potential, pN."""
    if r not in (0, 1):
        raise ValueError(f"laser-location flag r must be 0 or 1, got {r}")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = _check_finite(x)
    center = params.L if r == 1 else -params.L
    dx = x - center
    f = np.where(np.abs(dx) <= params.w, -params.k * dx, 0.0)
    return _maybe_scalar(f, scalar)


def _check_duty(d: float) -> float:
    d = float(d)
    if not (0.0 < d < 1.0):
        raise ValueError(f"duty ratio d must lie in (0, 1), got {d}")
    return d


def effective_energy(x, d: float, params: PotentialParams):
    """Duty-averaged bistable energy d*U(-L well) + (1-d)*U(+L well), pN nm.

    The left well bottom sits at (1-d)*k w^2/2 + U_r and the right one at
    d*k w^2/2 + U_r, so increasing d deepens the left (reset) well.  The
    plateau height k w^2/2 + U_r is independent of d.
    """
    d = _check_duty(d)
    return d * bistable_energy(x, 0, params) + (1.0 - d) * bistable_energy(x, 1, params)


def effective_force(x, d: float, params: PotentialParams):
    """Force -dU_eff/dx of the duty-averaged potential, pN.

    Piecewise linear: -d*k*(x+L) in the left active region, -(1-d)*k*(x-L)
    in the right one, exactly zero on the plateau (L > w keeps the regions
    disjoint).
    """
    d = _check_duty(d)
    return d * bistable_force(x, 0, params) + (1.0 - d) * bistable_force(x, 1, params)


@dataclass(frozen=True)
class PotentialCurve:
    """Potential reconstructed from an equilibrium position histogram.

    Holds only bins that were actually visited: grid positions (nm) are
    strictly increasing and values (pN nm) are finite, shifted so the
    minimum sampled energy is zero.  normalization is the probability C of
    the most populated bin, i.e. the constant in U = -k_B T ln(P/C).
    """

    grid: np.ndarray
    values: np.ndarray
    normalization: float

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.shape != values.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if grid.size and not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("reconstructed energies must be finite")
        if not (self.normalization > 0):
            raise ValueError("normalization must be positive")

    def to_csv(self, path) -> None:
        """Write `x_nm,U_pNnm` rows; bins that were never visited are simply absent."""
        lines = ["x_nm,U_pNnm"]
        for x, u in zip(self.grid, self.values):
            lines.append(f"{x:.17g},{u:.17g}")
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def reconstruct_potential(centers, counts, T: float) -> PotentialCurve:
    """Invert an equilibrium histogram to a potential via U = -k_B T ln(P/C).

    centers are bin centers (nm, strictly increasing), counts the occupation
    numbers.  C is chosen as the modal bin probability so the reconstructed
    minimum is exactly zero.  Empty bins are dropped rather than assigned
    infinite energy.
    """
    centers = np.asarray(centers, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if centers.shape != counts.shape or centers.ndim != 1:
        raise ValueError("centers and counts must be 1-D arrays of equal length")
    if np.any(counts < 0):
        raise ValueError("histogram counts must be nonnegative")
    total = counts.sum()
    if total <= 0:
        raise ValueError("histogram is empty: all counts are zero")
    present = counts > 0
    p = counts[present] / total
    c = p.max()
    values = -kbt(T) * np.log(p / c)
    return PotentialCurve(grid=centers[present], values=values, normalization=float(c))
