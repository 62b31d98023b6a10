"""Pure-numpy (vectorized) implementations of the deformation kernels.

Reference semantics for the numba backend; selected with NQG_KERNELS=numpy.

The bump profile is B(x) = g(|x - c|^2 / r^2) with g(t) = exp(1 - 1/(1-t))
for t < 1 and 0 otherwise, so B(c) = 1, B vanishes with all derivatives on
the sphere |x - c| = r, and the gradient is grad B = w(x) (x - c) with
w = 2 g'(t)/r^2, g'(t) = -g(t)/(1-t)^2.
"""

from __future__ import annotations

import numpy as np


def bump_profile(points: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    t = np.sum((points - center) ** 2, axis=1) / radius**2
    vals = np.zeros(points.shape[0])
    inside = t < 1.0
    vals[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside]))
    return vals


def bump_grad_coeff(points: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """w(x) = 2 g'(t)/r^2 with grad B = w (x - c); zero outside the support."""
    t = np.sum((points - center) ** 2, axis=1) / radius**2
    coeff = np.zeros(points.shape[0])
    inside = t < 1.0
    ti = t[inside]
    coeff[inside] = -2.0 * np.exp(1.0 - 1.0 / (1.0 - ti)) / ((1.0 - ti) ** 2 * radius**2)
    return coeff


def det_jacobian(
    points: np.ndarray, center: np.ndarray, radius: float, amp: np.ndarray
) -> np.ndarray:
    """det(I + a outer grad B) = 1 + w(x) * dot(a, x - c) (rank-one update)."""
    w = bump_grad_coeff(points, center, radius)
    return 1.0 + w * np.sum((points - center) * amp, axis=1)


def invert_displacement(
    targets: np.ndarray,
    center: np.ndarray,
    radius: float,
    amp: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, bool]:
    """Solve x + a B((x-c)/r) = y per point by fixed-point x <- y - a B(x).

    A contraction whenever the deformation's Jacobian sup norm is below 1.
    Returns (points, converged_everywhere).
    """
    x = targets.copy()
    for _ in range(max_iter):
        x_new = targets - np.outer(bump_profile(x, center, radius), amp)
        delta = np.max(np.abs(x_new - x))
        x = x_new
        if delta < tol:
            return x, True
    return x, False


def _weights(t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    # 4-point Lagrange basis on the stencil offsets (-1, 0, 1, 2), t in [0,1)
    w0 = -t * (t - 1.0) * (t - 2.0) / 6.0
    w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
    w2 = -(t + 1.0) * t * (t - 2.0) / 2.0
    w3 = (t + 1.0) * t * (t - 1.0) / 6.0
    return w0, w1, w2, w3


def _axis_stencil(q: np.ndarray, x0: float, spacing: float, n: int):
    s = (q - x0) / spacing
    base = np.floor(s).astype(np.int64)
    t = s - base
    idx = [(base + off) % n for off in (-1, 0, 1, 2)]
    return idx, _weights(t)


def interp_periodic(
    values: np.ndarray,
    queries: np.ndarray,
    x0: float,
    spacing: float,
) -> np.ndarray:
    """Cubic-Lagrange (4-point per axis, O(h^4)) periodic interpolation.

    `values` has shape (n,)*dim, `queries` shape (N, dim); returns (N,).
    """
    dim = queries.shape[1]
    n = values.shape[0]
    stencils = [
        _axis_stencil(queries[:, axis], x0, spacing, n) for axis in range(dim)
    ]
    out = np.zeros(queries.shape[0], dtype=values.dtype)
    if dim == 1:
        idx, w = stencils[0]
        for a in range(4):
            out += w[a] * values[idx[a]]
    elif dim == 2:
        (ix, wx), (iy, wy) = stencils
        for a in range(4):
            for b in range(4):
                out += wx[a] * wy[b] * values[ix[a], iy[b]]
    else:
        (ix, wx), (iy, wy), (iz, wz) = stencils
        for a in range(4):
            for b in range(4):
                wab = wx[a] * wy[b]
                for c in range(4):
                    out += wab * wz[c] * values[ix[a], iy[b], iz[c]]
    return out
