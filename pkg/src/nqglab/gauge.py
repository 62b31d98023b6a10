"""Preferred-coordinate machinery: harmonic-condition residuals and
branch realignment.

Metric families are analytic with exact evaluators (no numerically evolved
fields): the point-mass exterior field in two coordinate systems, flat
spacetime, and a linearized weak-field family. The harmonic-condition
residual d_mu(sqrt(-g) g^{mu nu}) is a *diagnostic* evaluated by central
differences on those evaluators; nothing here solves the coordinate
equation as a PDE.

A GaugePrescription records, per branch, which deformation must be undone
to land both branches on the common background; realign applies the
inverses and checks that the pre-interaction snapshots coincide afterwards.
Geometric units c = G = 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoherence import BranchPair, evolve_branch_pair, transition_probability
from .diffeo import Deformation, push_forward
from .errors import MetricDomainError, NqgError, PrescriptionMismatchError
from .lattice import inner_product

# Corruption gate for deformed branches: push_forward's interpolation error
# shows up in the norm, so deformed pairs cannot be held to the 1e-10
# normalization of freshly evolved pairs.
DEFORMED_NORM_TOL = 1e-5
REALIGN_OVERLAP_MIN = 1.0 - 1e-6


# ---------------------------------------------------------------------------
# metric families


class MetricField:
    """Analytic spacetime metric family; evaluators take (t, x, y, z)."""

    family = "abstract"

    def metric(self, point) -> np.ndarray:
        """g_{mu nu} as a symmetric 4x4 matrix at the given point."""
        raise NotImplementedError

    def densitized_inverse(self, point) -> np.ndarray:
        """sqrt(-g) g^{mu nu}; generic exact route via inverse and determinant."""
        g = self.metric(point)
        det = np.linalg.det(g)
        if not det < 0.0:
            raise MetricDomainError(
                f"{self.family}: determinant {det} is not negative at {point}"
            )
        return np.sqrt(-det) * np.linalg.inv(g)

    def _check_point(self, point) -> np.ndarray:
        pt = np.asarray(point, dtype=float)
        if pt.shape != (4,):
            raise NqgError(f"spacetime point needs 4 components, got {pt.shape}")
        if not np.all(np.isfinite(pt)):
            raise MetricDomainError(f"non-finite spacetime point {pt}")
        return pt


class MinkowskiCartesian(MetricField):
    family = "minkowski_cartesian"

    def metric(self, point):
        self._check_point(point)
        return np.diag([-1.0, 1.0, 1.0, 1.0])


class SchwarzschildStandard(MetricField):
    """Point-mass exterior field, standard (areal-radius) coordinates.

    Cartesianized: g_tt = -(1 - 2M/r), g_ij = delta_ij + (2M/r)/(1-2M/r) n_i n_j.
    These coordinates do NOT satisfy the harmonic condition.
    """

    family = "schwarzschild_standard"

    def __init__(self, mass: float):
        if not mass > 0.0:
            raise NqgError(f"mass must be positive, got {mass}")
        self.mass = mass

    def _radial(self, point):
        pt = self._check_point(point)
        x = pt[1:]
        r = float(np.linalg.norm(x))
        if r <= 2.0 * self.mass * (1.0 + 1e-6):
            raise MetricDomainError(
                f"{self.family}: point at r = {r} inside the excluded region "
                f"r <= 2M(1+1e-6) = {2.0 * self.mass * (1.0 + 1e-6)}"
            )
        return x, r

    def metric(self, point):
        x, r = self._radial(point)
        n = x / r
        f = 1.0 - 2.0 * self.mass / r
        g = np.zeros((4, 4))
        g[0, 0] = -f
        g[1:, 1:] = np.eye(3) + (2.0 * self.mass / r / f) * np.outer(n, n)
        return g


class SchwarzschildHarmonic(MetricField):
    """The same point-mass field in harmonic coordinates (R = r - M).

    g_tt = -(R-M)/(R+M),
    g_ij = (1+M/R)^2 (delta_ij - n_i n_j) + (1+M/R)/(1-M/R) n_i n_j.
    These coordinates satisfy the harmonic condition exactly.
    """

    family = "schwarzschild_harmonic"

    def __init__(self, mass: float):
        if not mass > 0.0:
            raise NqgError(f"mass must be positive, got {mass}")
        self.mass = mass

    def _radial(self, point):
        pt = self._check_point(point)
        x = pt[1:]
        big_r = float(np.linalg.norm(x))
        # R = r_standard - M, so the r <= 2M(1+1e-6) exclusion becomes this
        if big_r + self.mass <= 2.0 * self.mass * (1.0 + 1e-6):
            raise MetricDomainError(
                f"{self.family}: point at R = {big_r} maps to the excluded "
                "region r <= 2M(1+1e-6)"
            )
        return x, big_r

    def metric(self, point):
        x, big_r = self._radial(point)
        n = x / big_r
        plus = 1.0 + self.mass / big_r
        minus = 1.0 - self.mass / big_r
        g = np.zeros((4, 4))
        g[0, 0] = -minus / plus
        g[1:, 1:] = plus**2 * (np.eye(3) - np.outer(n, n)) + (
            plus / minus
        ) * np.outer(n, n)
        return g


class WeakFieldNewtonian(MetricField):
    """Linearized weak-field family for a potential Phi(t, x, y, z).

    Both the metric, g = eta - 2 Phi diag(1,1,1,1), and the densitized
    inverse, diag(-1 + 4 Phi, 1, 1, 1), are kept to first order in Phi, so
    every derived quantity (in particular the harmonic residual) is exactly
    linear in the potential.
    """

    family = "weak_field_newtonian"

    def __init__(self, phi):
        if not callable(phi):
            raise NqgError("weak_field_newtonian needs a callable potential phi(t,x,y,z)")
        self.phi = phi

    def _phi_at(self, point):
        pt = self._check_point(point)
        value = float(self.phi(*pt))
        if not np.isfinite(value):
            raise MetricDomainError(f"potential is not finite at {pt}")
        if abs(value) >= 0.25:
            raise MetricDomainError(
                f"|Phi| = {abs(value)} >= 0.25: outside the weak-field domain"
            )
        return value

    def metric(self, point):
        phi = self._phi_at(point)
        return np.diag([-1.0 - 2.0 * phi, 1.0 - 2.0 * phi, 1.0 - 2.0 * phi, 1.0 - 2.0 * phi])

    def densitized_inverse(self, point):
        phi = self._phi_at(point)
        return np.diag([-1.0 + 4.0 * phi, 1.0, 1.0, 1.0])


METRIC_FAMILIES = {
    "minkowski_cartesian": MinkowskiCartesian,
    "schwarzschild_standard": SchwarzschildStandard,
    "schwarzschild_harmonic": SchwarzschildHarmonic,
    "weak_field_newtonian": WeakFieldNewtonian,
}


def metric_field(family: str, **params) -> MetricField:
    try:
        cls = METRIC_FAMILIES[family]
    except KeyError:
        raise NqgError(
            f"unknown metric family {family!r}; known: {', '.join(sorted(METRIC_FAMILIES))}"
        ) from None
    return cls(**params)


def lorentzian_signature(g: np.ndarray) -> bool:
    """True when the symmetric matrix has signature (-,+,+,+)."""
    eigenvalues = np.linalg.eigvalsh(g)
    return int(np.sum(eigenvalues < 0.0)) == 1 and int(np.sum(eigenvalues > 0.0)) == 3


def harmonic_residual(metric: MetricField, point, h: float) -> np.ndarray:
    """Central-difference residual of d_mu(sqrt(-g) g^{mu nu}), one entry per nu.

    Vanishes as O(h^2) at points of an exactly harmonic chart; a clearly
    nonzero residual is the signature of a non-harmonic coordinate system.
    """
    if not h > 0.0:
        raise NqgError(f"finite-difference step must be positive, got {h}")
    pt = np.asarray(point, dtype=float)
    if pt.shape != (4,):
        raise NqgError(f"spacetime point needs 4 components, got {pt.shape}")
    residual = np.zeros(4)
    for mu in range(4):
        offset = np.zeros(4)
        offset[mu] = h
        plus = metric.densitized_inverse(pt + offset)
        minus = metric.densitized_inverse(pt - offset)
        if not (np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
            raise MetricDomainError(f"non-finite metric data near {pt}")
        residual += (plus[mu, :] - minus[mu, :]) / (2.0 * h)
    return residual


# ---------------------------------------------------------------------------
# realignment prescriptions


@dataclass(frozen=True)
class GaugePrescription:
    """Per-branch deformation to undo, plus the pre-interaction time t0."""

    deform_l: Deformation | None = None
    deform_r: Deformation | None = None
    t0: float = 0.0
    label: str = ""


def deform_pair(
    pair: BranchPair,
    d_l: Deformation | None,
    d_r: Deformation | None,
    weight: str = "half_density",
) -> BranchPair:
    """Apply independent deformations to the two branches (and snapshots).

    This is the strong-covariance experiment: the branches end up on
    differently deformed backgrounds, so downstream overlaps are only
    meaningful relative to a prescription that undoes the deformations.
    """
    psi_l = push_forward(pair.psi_l, d_l, weight) if d_l is not None else pair.psi_l
    psi_r = push_forward(pair.psi_r, d_r, weight) if d_r is not None else pair.psi_r
    pre_l = (
        push_forward(pair.pre_l, d_l, weight)
        if (d_l is not None and pair.pre_l is not None)
        else pair.pre_l
    )
    pre_r = (
        push_forward(pair.pre_r, d_r, weight)
        if (d_r is not None and pair.pre_r is not None)
        else pair.pre_r
    )
    return BranchPair(
        psi_l,
        psi_r,
        meta=dict(pair.meta),
        pre_l=pre_l,
        pre_r=pre_r,
        norm_tol=DEFORMED_NORM_TOL,
    )


def realign(pair: BranchPair, prescription: GaugePrescription) -> BranchPair:
    """Undo each branch's recorded deformation, landing on the common chart.

    When pre-interaction snapshots are present, their realigned overlap must
    come back to 1 (within 1e-6): the branches must agree before the
    interaction, or the prescription does not match the pair and the
    observable is ill-defined for it.
    """
    inv_l = prescription.deform_l.inverse() if prescription.deform_l else None
    inv_r = prescription.deform_r.inverse() if prescription.deform_r else None
    realigned = deform_pair(pair, inv_l, inv_r)
    if realigned.pre_l is not None and realigned.pre_r is not None:
        agreement = inner_product(realigned.pre_l, realigned.pre_r).real
        if agreement < REALIGN_OVERLAP_MIN:
            raise PrescriptionMismatchError(
                f"realigned pre-interaction overlap {agreement:.9f} < "
                f"{REALIGN_OVERLAP_MIN}: prescription "
                f"{prescription.label or '(unnamed)'} does not match this pair"
            )
    return realigned


def compare_gauges(
    scenario_or_pair, prescriptions: list[GaugePrescription]
) -> list[tuple[str, float]]:
    """rho_trans per prescription, each computed on the realigned pair.

    Prescriptions related by a common deformation give equal values (up to
    discretization); prescriptions differing where the branches differ give
    genuinely different values, which is what makes the prescription a
    physical choice rather than bookkeeping.
    """
    if isinstance(scenario_or_pair, BranchPair):
        pair = scenario_or_pair
    else:
        pair = evolve_branch_pair(scenario_or_pair)
    pair = pair.without_snapshots()
    rows: list[tuple[str, float]] = []
    for i, prescription in enumerate(prescriptions):
        label = prescription.label or f"prescription_{i}"
        realigned = realign(pair, prescription)
        result = transition_probability(realigned, norm_tol=DEFORMED_NORM_TOL)
        rows.append((label, result.rho_trans))
    return rows
