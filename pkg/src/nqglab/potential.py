"""Softened Newtonian potentials of frozen classical point sources.

The heavy source never moves during a run, so a potential is sampled once
per source configuration and reused for every time step. The 1/r
singularity is regularized Plummer-style, V = -m*M/sqrt(r^2 + eps^2);
eps is a scenario parameter and must resolve on the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NqgError, NumericalCorruptionError
from .lattice import Grid


@dataclass(frozen=True)
class NewtonianSource:
    """Point mass M frozen at `position`, softened on the scale `softening_eps`."""

    position: tuple[float, ...]
    mass_M: float
    softening_eps: float

    def __post_init__(self):
        pos = tuple(float(p) for p in np.atleast_1d(self.position))
        object.__setattr__(self, "position", pos)
        if not self.mass_M > 0.0:
            raise NqgError(f"source mass must be positive, got {self.mass_M}")
        if not self.softening_eps > 0.0:
            raise NqgError(f"softening must be positive, got {self.softening_eps}")


@dataclass(frozen=True)
class PotentialField:
    """Real potential values sampled on a Grid. Immutable after construction."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise NqgError(
                f"potential shape {vals.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise NumericalCorruptionError("potential contains non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


def sample_potential(
    grid: Grid, sources: list[NewtonianSource], mass_m: float
) -> PotentialField:
    """Sum of softened attractive potentials, V(x) = sum_s -m M_s / sqrt(|x-x_s|^2 + eps_s^2).

    Distances use the minimum-image convention, so moving a source by a
    whole number of cells permutes the sampled values cyclically. Additive
    in the source list. An empty list is rejected: a free run must say so
    explicitly via zero_potential.
    """
    if not sources:
        raise NqgError("no sources given; use zero_potential for a free run")
    if not mass_m > 0.0:
        raise NqgError(f"test mass must be positive, got {mass_m}")
    mesh = grid.coordinate_mesh()
    length = grid.length
    values = np.zeros(grid.shape)
    for src in sources:
        if len(src.position) != grid.dim:
            raise NqgError(
                f"source position {src.position} has wrong dimension for dim={grid.dim}"
            )
        if src.softening_eps < grid.spacing:
            raise NqgError(
                f"softening {src.softening_eps} is below the lattice spacing "
                f"{grid.spacing:.6g} and cannot be resolved"
            )
        r2 = np.zeros(grid.shape)
        for axis in range(grid.dim):
            dx = mesh[axis] - src.position[axis]
            dx = dx - length * np.round(dx / length)
            r2 = r2 + dx * dx
        values = values - mass_m * src.mass_M / np.sqrt(r2 + src.softening_eps**2)
    return PotentialField(grid, values)


def zero_potential(grid: Grid) -> PotentialField:
    """All-zero potential: the explicit free-particle configuration."""
    return PotentialField(grid, np.zeros(grid.shape))
