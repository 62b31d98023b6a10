"""Uniform periodic lattice, wave functions on it, and their inner product.

Conventions fixed here and relied on by every other module:

* units with hbar = G = 1; every quantity is dimensionless,
* a fixed foliation: the lattice discretizes space only, time is a label,
* centered coordinates x_i = -length/2 + i * spacing per axis,
* row-major axis ordering of the amplitude array (axis 0 slowest),
* flat integration measure: sums are weighted by the cell volume.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    GridMismatchError,
    NqgError,
    NumericalCorruptionError,
    ResolutionError,
)

BINARY_MAGIC = b"NQGW"
# Header layout (16 bytes): magic (4s), dim (u8), log2(n) (u8), two zero pad
# bytes, axis length (little-endian f64).
_HEADER_STRUCT = struct.Struct("<4sBBxxd")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice with the same point count per axis.

    n must be a power of two (the propagator applies its kinetic factor
    spectrally) and dim in {1, 2, 3}.
    """

    dim: int
    n: int
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise NqgError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise NqgError(f"n must be a power of two >= 2, got {self.n}")
        if not (self.length > 0.0 and np.isfinite(self.length)):
            raise NqgError(f"length must be positive and finite, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    def axis_coordinates(self) -> np.ndarray:
        """Centered coordinates of one axis, shape (n,)."""
        return -0.5 * self.length + self.spacing * np.arange(self.n)

    def coordinate_mesh(self) -> list[np.ndarray]:
        """Open (broadcastable) coordinate arrays, one per axis."""
        x = self.axis_coordinates()
        return list(np.ix_(*([x] * self.dim)))

    def points(self) -> np.ndarray:
        """All grid points as a flat (size, dim) array, row-major order."""
        mesh = np.meshgrid(*([self.axis_coordinates()] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on a Grid. Immutable after construction."""

    grid: Grid
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != self.grid.shape:
            raise NqgError(
                f"amplitude shape {amps.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise NumericalCorruptionError("wave function contains non-finite amplitudes")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)


def _require_same_grid(a: WaveFunction, b) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(
            f"lattice mismatch: {a.grid} vs {b.grid}; fields on different "
            "lattices have no common overlap and are never resampled"
        )


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    """Riemann-sum scalar product sum(conj(a) * b) * cell_volume.

    Conjugate-symmetric; raises GridMismatchError for incompatible grids.
    """
    _require_same_grid(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.cell_volume)


def norm(a: WaveFunction) -> float:
    """sqrt of <a|a>; always real and non-negative."""
    return float(np.linalg.norm(a.amplitudes.ravel()) * np.sqrt(a.grid.cell_volume))


def gaussian_packet(
    grid: Grid,
    center,
    width: float,
    momentum=None,
) -> WaveFunction:
    """Normalized Gaussian packet exp(-|x-c|^2/(4 w^2) + i p.x).

    width must resolve on the lattice (>= 3 spacings) and the envelope must
    fall below 1e-10 of its peak at the periodic boundary.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if momentum is None:
        momentum = np.zeros(grid.dim)
    momentum = np.atleast_1d(np.asarray(momentum, dtype=float))
    if center.shape != (grid.dim,) or momentum.shape != (grid.dim,):
        raise NqgError(
            f"center/momentum must have {grid.dim} components, "
            f"got {center.shape} and {momentum.shape}"
        )
    if not width > 0.0:
        raise NqgError(f"width must be positive, got {width}")
    if width < 3.0 * grid.spacing:
        raise ResolutionError(
            f"width {width} is below 3 spacings; need spacing <= {width / 3.0:.6g} "
            f"(current {grid.spacing:.6g}) or width >= {3.0 * grid.spacing:.6g}"
        )
    half = 0.5 * grid.length
    margin = half - np.abs(center)
    if np.any(margin <= 0.0):
        raise NqgError(f"packet center {center} lies outside the grid interior")
    boundary_tail = float(np.exp(-np.min(margin) ** 2 / (4.0 * width**2)))
    if boundary_tail >= 1e-10:
        raise NqgError(
            f"packet tail at the periodic boundary is {boundary_tail:.3e} "
            "(>= 1e-10); enlarge the grid or shrink the width"
        )

    mesh = grid.coordinate_mesh()
    exponent = 0.0j
    for axis in range(grid.dim):
        dx = mesh[axis] - center[axis]
        exponent = exponent - dx * dx / (4.0 * width**2) + 1j * momentum[axis] * mesh[axis]
    amps = np.exp(exponent)
    amps = amps / (np.linalg.norm(amps.ravel()) * np.sqrt(grid.cell_volume))
    return WaveFunction(grid, amps)


def expectation_position(psi: WaveFunction) -> np.ndarray:
    """Position expectation <x> of |psi|^2, shape (dim,)."""
    density = np.abs(psi.amplitudes) ** 2 * psi.grid.cell_volume
    mesh = psi.grid.coordinate_mesh()
    return np.array([float(np.sum(density * mesh[a])) for a in range(psi.grid.dim)])


def free_dispersion_width(width0: float, t: float, mass_m: float) -> float:
    """Analytic width sigma(t) of a free Gaussian of initial width sigma_0."""
    return width0 * np.sqrt(1.0 + t**2 / (4.0 * mass_m**2 * width0**4))


# ---------------------------------------------------------------------------
# serialization


def save_wavefunction(psi: WaveFunction, path) -> None:
    """Write the binary dump: 16-byte header then (re, im) f64 pairs."""
    grid = psi.grid
    header = _HEADER_STRUCT.pack(
        BINARY_MAGIC, grid.dim, int(np.log2(grid.n)), float(grid.length)
    )
    flat = psi.amplitudes.ravel()
    payload = np.empty(2 * flat.size, dtype="<f8")
    payload[0::2] = flat.real
    payload[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def load_wavefunction(path) -> WaveFunction:
    """Read a binary dump written by save_wavefunction."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER_STRUCT.size:
        raise NqgError(f"{path}: truncated header")
    magic, dim, log2n, length = _HEADER_STRUCT.unpack_from(raw)
    if magic != BINARY_MAGIC:
        raise NqgError(f"{path}: bad magic {magic!r}, expected {BINARY_MAGIC!r}")
    grid = Grid(dim=dim, n=1 << log2n, length=length)
    expected = 2 * grid.size * 8
    body = raw[_HEADER_STRUCT.size :]
    if len(body) != expected:
        raise NqgError(f"{path}: payload is {len(body)} bytes, expected {expected}")
    pairs = np.frombuffer(body, dtype="<f8")
    amps = (pairs[0::2] + 1j * pairs[1::2]).reshape(grid.shape)
    return WaveFunction(grid, amps)


def slice_to_csv(psi: WaveFunction, path, axis: int = 0, index=None) -> None:
    """Export a 1D slice as CSV with columns x, re, im, abs2.

    For dim > 1 the slice runs along `axis` through `index` (defaults to the
    middle of every other axis).
    """
    grid = psi.grid
    if not 0 <= axis < grid.dim:
        raise NqgError(f"axis {axis} out of range for dim {grid.dim}")
    if index is None:
        index = (grid.n // 2,) * (grid.dim - 1)
    index = tuple(int(i) for i in np.atleast_1d(index)) if grid.dim > 1 else ()
    key = list(index[:axis]) + [slice(None)] + list(index[axis:])
    line = psi.amplitudes[tuple(key)]
    x = grid.axis_coordinates()
    with open(path, "w", newline="") as fh:
        fh.write("x,re,im,abs2\n")
        for xi, zi in zip(x, line):
            fh.write(
                f"{xi:.17g},{zi.real:.17g},{zi.imag:.17g},{abs(zi) ** 2:.17g}\n"
            )
