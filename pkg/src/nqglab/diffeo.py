"""Compactly supported deformations of space and their action on wave functions.

A HoleDiffeomorphism is the map x -> x + a * B((x - c)/r) with B a smooth
bump supported in the unit ball: it is the identity outside the ball of
radius r around c (the "hole"), and a diffeomorphism whenever the sup norm
of the displacement Jacobian stays below 1. The closed-form family gives
exact Jacobians (the Jacobian is a rank-one update of the identity) and a
certifiable invertibility bound.

Wave functions transform by default as half-densities,
psi'(x') = psi(x) |det J(x)|^(-1/2), the unique weight for which the
flat-measure inner product of two commonly deformed fields is preserved.
The bare scalar composition (no Jacobian weight) is exposed as well so the
contrast between the two conventions is itself testable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels
from .errors import DeformationError, FixedPointError, NqgError
from .lattice import Grid, WaveFunction, inner_product

KAPPA_LIMIT = 0.9

# Largest value of |grad B| * r over the unit ball, sampled finely once; the
# Jacobian sup norm of the displacement is then |a| * KAPPA_FACTOR / r.
_q = np.linspace(0.0, 1.0, 200_001)[:-1]
_t = _q**2
_KAPPA_FACTOR = float(
    np.max(2.0 * _q * np.exp(1.0 - 1.0 / (1.0 - _t)) / (1.0 - _t) ** 2)
)
del _q, _t


def bump_value(q2: float) -> float:
    """Radial profile g(t) = exp(1 - 1/(1-t)) at t = (|x-c|/r)^2."""
    if q2 >= 1.0:
        return 0.0
    return float(np.exp(1.0 - 1.0 / (1.0 - q2)))


@dataclass(frozen=True)
class HoleDiffeomorphism:
    """x -> x + amplitude * B((x - center)/radius), identity outside the hole."""

    center: tuple[float, ...]
    radius: float
    amplitude: tuple[float, ...]

    def __post_init__(self):
        center = tuple(float(c) for c in np.atleast_1d(self.center))
        amplitude = tuple(float(a) for a in np.atleast_1d(self.amplitude))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "amplitude", amplitude)
        if len(center) != len(amplitude):
            raise DeformationError(
                f"center has {len(center)} components but amplitude has {len(amplitude)}"
            )
        if not self.radius > 0.0:
            raise DeformationError(f"hole radius must be positive, got {self.radius}")
        if self.kappa >= KAPPA_LIMIT:
            raise DeformationError(
                f"displacement Jacobian bound kappa = {self.kappa:.4f} >= "
                f"{KAPPA_LIMIT}; the map is not certifiably invertible"
            )

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def kappa(self) -> float:
        """Sup norm of the displacement Jacobian (fine-sampled profile max)."""
        return float(np.linalg.norm(self.amplitude)) * _KAPPA_FACTOR / self.radius

    def _center_arr(self) -> np.ndarray:
        return np.asarray(self.center)

    def _amp_arr(self) -> np.ndarray:
        return np.asarray(self.amplitude)

    def displacement(self, points: np.ndarray) -> np.ndarray:
        """u(x) = a * B((x-c)/r) for points of shape (N, dim)."""
        b = kernels.bump_profile(points, self._center_arr(), self.radius)
        return np.outer(b, self._amp_arr())

    def map_points(self, points: np.ndarray) -> np.ndarray:
        return points + self.displacement(points)

    def unmap_points(
        self, points: np.ndarray, tol: float, max_iter: int = 100
    ) -> np.ndarray:
        """Preimages via the contraction x <- y - u(x) (converges since kappa < 1)."""
        x, ok = kernels.invert_displacement(
            points, self._center_arr(), self.radius, self._amp_arr(), tol, max_iter
        )
        if not ok:
            raise FixedPointError(
                f"inverse map did not converge in {max_iter} iterations "
                f"(kappa = {self.kappa:.3f})"
            )
        return x

    def det_jacobian(self, points: np.ndarray) -> np.ndarray:
        """det(dx'/dx) at given domain points; exact rank-one formula."""
        return kernels.det_jacobian(
            points, self._center_arr(), self.radius, self._amp_arr()
        )

    def unmap_with_jacobian(self, points, tol, max_iter=100):
        x = self.unmap_points(points, tol, max_iter)
        return x, self.det_jacobian(x)

    def inverse(self) -> "InverseDiffeomorphism":
        return InverseDiffeomorphism(self)

    def check_inside(self, grid: Grid) -> None:
        """The hole must sit strictly inside the interior: no wrap at the seam."""
        half = 0.5 * grid.length
        worst = max(abs(c) for c in self.center) + self.radius
        if worst >= half:
            raise DeformationError(
                f"hole (center {self.center}, radius {self.radius}) reaches the "
                f"periodic seam of a grid with half-length {half}"
            )


@dataclass(frozen=True)
class InverseDiffeomorphism:
    """The inverse orientation of a HoleDiffeomorphism, applied lazily.

    Forward evaluation needs the base map's fixed-point inverse; inverse
    evaluation is the base map's closed form.
    """

    base: HoleDiffeomorphism

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def kappa(self) -> float:
        return self.base.kappa

    def map_points(self, points: np.ndarray, tol: float = 1e-13) -> np.ndarray:
        return self.base.unmap_points(points, tol)

    def unmap_points(self, points, tol, max_iter=100):
        return self.base.map_points(points)

    def unmap_with_jacobian(self, points, tol, max_iter=100):
        # det J_{d^-1}(d(p)) = 1 / det J_d(p); both factors evaluated at p.
        return self.base.map_points(points), 1.0 / self.base.det_jacobian(points)

    def inverse(self) -> HoleDiffeomorphism:
        return self.base

    def check_inside(self, grid: Grid) -> None:
        self.base.check_inside(grid)


Deformation = HoleDiffeomorphism | InverseDiffeomorphism


def _fixed_point_tol(grid: Grid) -> float:
    return 1e-13 * max(1.0, grid.length)


def push_forward(
    psi: WaveFunction,
    d: Deformation,
    weight: Literal["half_density", "scalar"] = "half_density",
) -> WaveFunction:
    """Transform psi by the deformation d.

    half_density (default): psi'(x') = psi(x) |det J(x)|^(-1/2); preserves
    the norm and all common-deformation overlaps up to interpolation error.
    scalar: bare composition psi'(x') = psi(x); does not preserve overlaps.

    Each grid point is pulled back through the inverse map and psi is
    interpolated there with the 4-point (O(h^4)) periodic Lagrange stencil.
    """
    if weight not in ("half_density", "scalar"):
        raise NqgError(f"unknown transformation weight {weight!r}")
    grid = psi.grid
    if d.dim != grid.dim:
        raise DeformationError(
            f"deformation dimension {d.dim} does not match grid dimension {grid.dim}"
        )
    d.check_inside(grid)
    tol = _fixed_point_tol(grid)
    preimages, det = d.unmap_with_jacobian(grid.points(), tol)
    vals = kernels.interp_periodic(
        psi.amplitudes, preimages, -0.5 * grid.length, grid.spacing
    )
    if weight == "half_density":
        vals = vals / np.sqrt(np.abs(det))
    return WaveFunction(grid, vals.reshape(grid.shape))


def reference_pullback(psi: WaveFunction, map_y: Deformation) -> WaveFunction:
    """Bare composition with the forward map: psi~(x) = psi(y(x)).

    This is the representation of a field on a fixed reference background
    through a plain point map, with no Jacobian weight; the norm is NOT
    preserved in general.
    """
    grid = psi.grid
    if map_y.dim != grid.dim:
        raise DeformationError(
            f"deformation dimension {map_y.dim} does not match grid dimension {grid.dim}"
        )
    map_y.check_inside(grid)
    if isinstance(map_y, InverseDiffeomorphism):
        targets = map_y.map_points(grid.points(), _fixed_point_tol(grid))
    else:
        targets = map_y.map_points(grid.points())
    vals = kernels.interp_periodic(
        psi.amplitudes, targets, -0.5 * grid.length, grid.spacing
    )
    return WaveFunction(grid, vals.reshape(grid.shape))


@dataclass(frozen=True)
class CovarianceReport:
    overlap_before: complex
    overlap_after: complex

    @property
    def deviation(self) -> float:
        return abs(self.overlap_after - self.overlap_before)


def weak_covariance_check(pair, d: Deformation, weight="half_density") -> CovarianceReport:
    """Apply the SAME deformation to both branches and compare overlaps.

    With the half-density weight the overlap is an invariant of the common
    deformation, so the deviation measures pure discretization error.
    """
    before = inner_product(pair.psi_l, pair.psi_r)
    after = inner_product(
        push_forward(pair.psi_l, d, weight), push_forward(pair.psi_r, d, weight)
    )
    return CovarianceReport(overlap_before=before, overlap_after=after)


def disjoint_deformation_pair(
    support_center,
    support_radius: float,
    grid: Grid,
    axis: int = 0,
    kappa_max: float = 0.7,
) -> tuple[HoleDiffeomorphism, HoleDiffeomorphism]:
    """Two opposite deformations whose images of the support ball are disjoint.

    Both displace along `axis`, one forward, one backward, far enough that
    the images of the ball (center, support_radius) clear the mid-plane
    through the center by a few cells in each direction. Raises
    DeformationError with the required grid size when the geometry does not
    fit at the requested invertibility margin.
    """
    center = np.atleast_1d(np.asarray(support_center, dtype=float))
    if center.shape != (grid.dim,):
        raise NqgError(f"support center must have {grid.dim} components")
    if not 0 <= axis < grid.dim:
        raise NqgError(f"axis {axis} out of range for dim {grid.dim}")
    if not support_radius > 0.0:
        raise NqgError("support radius must be positive")

    margin = 4.0 * grid.spacing
    clearance = 4.0 * grid.spacing
    half = 0.5 * grid.length
    radius_max = float(min(half - np.abs(center)) - margin)
    if radius_max <= support_radius:
        raise DeformationError(
            f"support of radius {support_radius} leaves no room for a hole "
            f"inside a grid of length {grid.length}"
        )

    shift_needed = support_radius + clearance
    q2 = (support_radius / radius_max) ** 2
    amp_needed = shift_needed / bump_value(q2)
    kappa = amp_needed * _KAPPA_FACTOR / radius_max
    if kappa > kappa_max:
        # invert kappa(r) = shift * K / (g((rho/r)^2) * r) for the needed length
        r_req = shift_needed * _KAPPA_FACTOR / kappa_max
        for _ in range(64):
            r_req = shift_needed * _KAPPA_FACTOR / (
                kappa_max * bump_value((support_radius / r_req) ** 2)
            )
        length_req = 2.0 * (r_req + float(np.max(np.abs(center))) + margin)
        raise DeformationError(
            f"cannot separate a support of radius {support_radius} on a grid "
            f"of length {grid.length} at kappa <= {kappa_max}; need length "
            f">= {length_req:.3g}"
        )

    direction = np.zeros(grid.dim)
    direction[axis] = 1.0
    d1 = HoleDiffeomorphism(
        center=tuple(center), radius=radius_max, amplitude=tuple(amp_needed * direction)
    )
    d2 = HoleDiffeomorphism(
        center=tuple(center), radius=radius_max, amplitude=tuple(-amp_needed * direction)
    )
    return d1, d2
