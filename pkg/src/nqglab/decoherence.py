"""The interference-loss observable of the two-branch experiment.

A heavy source particle sits in a superposition of two classical positions
x_l, x_r; a light test particle prepared in psi_0 evolves once under each
frozen source. The surviving interference of the source particle is
measured by the even/odd-basis transition probability

    rho_trans = (1 - Re <psi_l | psi_r>) / 2,

which is 0 for identical branches (no measurement happened) and 1/2 for
orthogonal branches (the test particle fully recorded the source position).
The source particle itself is never propagated: its two classical positions
enter only through the potentials, and the final even/odd measurement is
carried out analytically by the formula above.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonNormalizedError,
    NumericalCorruptionError,
    ScenarioError,
)
from .lattice import WaveFunction, inner_product, norm
from .propagator import evolve
from .scenario import SWEEP_PARAMETERS, ScenarioConfig, require_valid

RHO_CLAMP_TOL = 1e-9
BRANCH_NORM_TOL = 1e-10


@dataclass(frozen=True)
class BranchPair:
    """The two evolved branch wave functions plus their shared history.

    pre_l / pre_r are optional pre-interaction snapshots (the branch states
    at t < t0); gauge realignment validates against them when present.
    """

    psi_l: WaveFunction
    psi_r: WaveFunction
    meta: dict = field(default_factory=dict)
    pre_l: WaveFunction | None = None
    pre_r: WaveFunction | None = None
    norm_tol: float = BRANCH_NORM_TOL

    def __post_init__(self):
        if self.psi_l.grid != self.psi_r.grid:
            from .errors import GridMismatchError

            raise GridMismatchError("branch wave functions live on different grids")
        for label, psi in (("left", self.psi_l), ("right", self.psi_r)):
            drift = abs(norm(psi) - 1.0)
            if drift > self.norm_tol:
                raise NonNormalizedError(
                    f"{label} branch norm deviates from 1 by {drift:.3e} "
                    f"(tolerance {self.norm_tol:.1e})"
                )

    def without_snapshots(self) -> "BranchPair":
        return BranchPair(
            self.psi_l, self.psi_r, meta=self.meta, norm_tol=self.norm_tol
        )


@dataclass(frozen=True)
class DecoherenceResult:
    overlap: complex
    rho_trans: float
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SuperpositionState:
    """Descriptive record of c1 |g1, psi1> + c2 |g2, psi2>.

    The g_i entries are potential/metric descriptors (any hashable record of
    the gravitational configuration of that branch).
    """

    branches: tuple[tuple[object, WaveFunction], tuple[object, WaveFunction]]
    coefficients: tuple[complex, complex] = (
        1.0 / np.sqrt(2.0),
        1.0 / np.sqrt(2.0),
    )

    def __post_init__(self):
        c1, c2 = self.coefficients
        total = abs(c1) ** 2 + abs(c2) ** 2
        if abs(total - 1.0) > 1e-12:
            raise NumericalCorruptionError(
                f"superposition coefficients are not normalized: |c1|^2+|c2|^2 = {total}"
            )
        if self.branches[0][1].grid != self.branches[1][1].grid:
            from .errors import GridMismatchError

            raise GridMismatchError("superposition branches live on different grids")

    @classmethod
    def from_branch_pair(cls, pair: BranchPair, descriptor_l, descriptor_r):
        return cls(
            branches=((descriptor_l, pair.psi_l), (descriptor_r, pair.psi_r))
        )


def transition_probability(
    pair: BranchPair, norm_tol: float = BRANCH_NORM_TOL
) -> DecoherenceResult:
    """rho_trans = (1 - Re <psi_l|psi_r>)/2 from the lattice inner product.

    The result is clamped into [0, 1] only when the excess is below 1e-9
    (roundoff); anything larger is numerical corruption and raises.
    """
    for label, psi in (("left", pair.psi_l), ("right", pair.psi_r)):
        drift = abs(norm(psi) - 1.0)
        if drift > norm_tol:
            raise NonNormalizedError(
                f"{label} branch norm deviates from 1 by {drift:.3e} "
                f"(tolerance {norm_tol:.1e})"
            )
    overlap = inner_product(pair.psi_l, pair.psi_r)
    rho = 0.5 * (1.0 - overlap.real)
    if not -RHO_CLAMP_TOL <= rho <= 1.0 + RHO_CLAMP_TOL:
        raise NumericalCorruptionError(
            f"rho_trans = {rho} outside [0, 1] beyond the {RHO_CLAMP_TOL} clamp window"
        )
    rho = min(max(rho, 0.0), 1.0)
    return DecoherenceResult(overlap=overlap, rho_trans=rho, meta=dict(pair.meta))


def evolve_branch_pair(config: ScenarioConfig) -> BranchPair:
    """Prepare psi_0 once and evolve it under each branch potential.

    The two branch evolutions share nothing but the initial state, so they
    are independent (and may run concurrently); here they run sequentially
    for determinism of the simplest kind.
    """
    require_valid(config)
    grid = config.build_grid()
    psi0 = config.build_packet(grid)
    v_l, v_r = config.build_potentials(grid)
    dt = config.effective_dt(grid)
    psi_l = evolve(psi0, v_l, config.t_total, dt, config.mass_m)
    psi_r = evolve(psi0, v_r, config.t_total, dt, config.mass_m)
    meta = {
        "packet": {
            "center": tuple(config.packet_center),
            "width": config.packet_width,
            "momentum": tuple(config.packet_momentum),
        },
        "sources": {
            "x_l": tuple(config.x_l),
            "x_r": tuple(config.x_r),
            "mass_M": config.mass_M,
            "softening": config.softening,
        },
        "mass_m": config.mass_m,
        "t_total": config.t_total,
        "t0": config.t0,
        "dt": dt,
        "grid": {"dim": grid.dim, "n": grid.n, "length": grid.length},
    }
    return BranchPair(psi_l, psi_r, meta=meta, pre_l=psi0, pre_r=psi0)


def run_double_slit(config: ScenarioConfig) -> DecoherenceResult:
    """Full experiment: validate, evolve both branches, measure rho_trans."""
    return transition_probability(evolve_branch_pair(config))


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    rho_trans: float
    overlap: complex


def sweep(
    config: ScenarioConfig,
    parameter: str,
    values,
    threads: int = 1,
) -> list[SweepRow]:
    """One independent run_double_slit per value; rows ordered like `values`.

    Rows are assembled by index, never by completion order, so the output
    is identical for any thread count. A failing run aborts the whole sweep
    with the offending value named.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ScenarioError(
            f"unknown sweep parameter {parameter!r}; pick one of {SWEEP_PARAMETERS}"
        )
    values = [float(v) for v in values]
    for v in values:
        if not np.isfinite(v):
            raise ScenarioError(f"sweep value {v} is not finite")

    def one(value: float) -> SweepRow:
        try:
            result = run_double_slit(config.with_parameter(parameter, value))
        except Exception as exc:
            raise ScenarioError(
                f"sweep aborted at {parameter} = {value}: {exc}"
            ) from exc
        return SweepRow(
            parameter=parameter,
            value=value,
            rho_trans=result.rho_trans,
            overlap=result.overlap,
        )

    if threads <= 1 or len(values) <= 1:
        return [one(v) for v in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, values))


def sweep_rows_to_csv(rows: list[SweepRow], path) -> None:
    """CSV with header param,value,rho_trans,overlap_re,overlap_im (17 sig digits)."""
    with open(path, "w", newline="") as fh:
        fh.write("param,value,rho_trans,overlap_re,overlap_im\n")
        for row in rows:
            fh.write(
                f"{row.parameter},{row.value:.17g},{row.rho_trans:.17g},"
                f"{row.overlap.real:.17g},{row.overlap.imag:.17g}\n"
            )
