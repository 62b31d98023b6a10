"""Dense Crank-Nicolson reference solver (1D), the second-method oracle.

Deliberately shares no evolution machinery with the split-operator path:
the Hamiltonian is assembled as an explicit dense matrix whose kinetic
block comes from the closed-form trigonometric differentiation matrix of
the periodic grid (no FFT anywhere), and time stepping is the implicit
midpoint rational step

    (I + i dt/2 H) psi_{k+1} = (I - i dt/2 H) psi_k,

applied through one LU-precomputed dense propagator matrix. CN is exactly
unitary for Hermitian H, second order in dt, and approximates the full
exponential of H jointly instead of splitting it, so its time-stepping
errors are unrelated to Strang-splitting errors.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NqgError
from .lattice import Grid, WaveFunction
from .potential import PotentialField


def spectral_second_derivative_matrix(grid: Grid) -> np.ndarray:
    """Exact periodic second-derivative matrix in closed trigonometric form.

    Entries for the 2*pi-periodic unit grid (n even): diagonal
    -pi^2/(3 h^2) - 1/6, off-diagonal -(-1)^(i-j) / (2 sin^2((i-j) h/2)),
    rescaled by (2*pi/length)^2 for the physical domain.
    """
    if grid.dim != 1:
        raise NqgError("the dense reference solver is one-dimensional only")
    n = grid.n
    h = 2.0 * np.pi / n
    j = np.arange(1, n)
    col = np.empty(n)
    col[0] = -np.pi**2 / (3.0 * h**2) - 1.0 / 6.0
    col[1:] = -((-1.0) ** j) / (2.0 * np.sin(0.5 * j * h) ** 2)
    d2 = scipy.linalg.toeplitz(col)
    return d2 * (2.0 * np.pi / grid.length) ** 2


def dense_hamiltonian(V: PotentialField, mass_m: float) -> np.ndarray:
    """H = -(1/2m) D2 + diag(V) as a dense real symmetric matrix."""
    if not mass_m > 0.0:
        raise NqgError(f"mass must be positive, got {mass_m}")
    h = -spectral_second_derivative_matrix(V.grid) / (2.0 * mass_m)
    h[np.diag_indices_from(h)] += V.values
    return h


def _cn_propagator(hamiltonian: np.ndarray, dt: float) -> np.ndarray:
    n = hamiltonian.shape[0]
    a = np.eye(n, dtype=np.complex128) + 0.5j * dt * hamiltonian
    b = np.eye(n, dtype=np.complex128) - 0.5j * dt * hamiltonian
    return scipy.linalg.solve(a, b)


def crank_nicolson_evolve(
    psi0: WaveFunction,
    V: PotentialField,
    t_total: float,
    dt: float,
    mass_m: float,
) -> WaveFunction:
    """Evolve psi0 for t_total with CN steps of size dt (last step shortened)."""
    if psi0.grid != V.grid:
        raise NqgError("wave function and potential grids differ")
    if t_total < 0.0 or not dt > 0.0:
        raise NqgError(f"need t_total >= 0 and dt > 0, got {t_total}, {dt}")
    if t_total == 0.0:
        return psi0
    n_full = int(np.floor(t_total / dt + 1e-12))
    remainder = t_total - n_full * dt
    if remainder < 1e-12 * dt:
        remainder = 0.0

    hamiltonian = dense_hamiltonian(V, mass_m)
    amps = psi0.amplitudes.copy()
    if n_full > 0:
        propagator = _cn_propagator(hamiltonian, dt)
        for _ in range(n_full):
            amps = propagator @ amps
    if remainder > 0.0:
        amps = _cn_propagator(hamiltonian, remainder) @ amps
    return WaveFunction(psi0.grid, amps)
