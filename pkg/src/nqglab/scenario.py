"""Scenario files: flat INI sections mirroring the module layout.

A scenario pins every knob of one experiment (grid, packet, sources,
masses, times, optional deformations and metric family) so that a run is
reproducible from the file alone; there is no randomness anywhere in a
scenario. Validation runs every module precondition statically before any
compute, returning findings that distinguish hard errors from warnings.
All quantities are dimensionless (hbar = G = 1).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .diffeo import (
    HoleDiffeomorphism,
    disjoint_deformation_pair,
)
from .errors import DeformationError, NqgError, ScenarioError
from .lattice import Grid, WaveFunction, free_dispersion_width, gaussian_packet
from .potential import NewtonianSource, PotentialField, sample_potential, zero_potential

BOUNDARY_TAIL_LIMIT = 1e-10
MASS_RATIO_WARN = 10.0


@dataclass(frozen=True)
class DeformationSpec:
    center: tuple[float, ...]
    radius: float
    amplitude: tuple[float, ...]
    profile: str = "bump"
    weight: str = "half_density"

    def build(self) -> HoleDiffeomorphism:
        if self.profile != "bump":
            raise ScenarioError(f"unknown deformation profile {self.profile!r}")
        return HoleDiffeomorphism(
            center=self.center, radius=self.radius, amplitude=self.amplitude
        )


@dataclass(frozen=True)
class SupportSpec:
    center: tuple[float, ...]
    radius: float


@dataclass(frozen=True)
class MetricSpec:
    family: str
    mass: float = 1.0
    fd_step: float = 1e-3
    points: tuple[tuple[float, float, float, float], ...] = ()


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    where: str
    message: str

    def __str__(self):
        return f"{self.severity}: [{self.where}] {self.message}"


@dataclass(frozen=True)
class ScenarioConfig:
    # grid
    dim: int = 1
    n: int = 1024
    length: float = 40.0
    # packet
    packet_center: tuple[float, ...] = (0.0,)
    packet_width: float = 1.0
    packet_momentum: tuple[float, ...] = (0.0,)
    # sources
    x_l: tuple[float, ...] = (-2.0,)
    x_r: tuple[float, ...] = (2.0,)
    mass_M: float = 50.0
    softening: float = 0.5
    # test particle
    mass_m: float = 1.0
    # times
    t_total: float = 2.0
    dt: float | None = None
    t0: float = 0.0
    # optional extras
    deformation: DeformationSpec | None = None
    support: SupportSpec | None = None
    metric: MetricSpec | None = None
    gauge_prescriptions: tuple[str, ...] = ()
    output_dir: str | None = None

    # ------------------------------------------------------------------
    # builders

    def build_grid(self) -> Grid:
        return Grid(dim=self.dim, n=self.n, length=self.length)

    def effective_dt(self, grid: Grid | None = None) -> float:
        if self.dt is not None:
            return self.dt
        grid = grid or self.build_grid()
        return 0.1 * self.mass_m * grid.spacing**2

    def build_packet(self, grid: Grid | None = None) -> WaveFunction:
        grid = grid or self.build_grid()
        return gaussian_packet(
            grid, self.packet_center, self.packet_width, self.packet_momentum
        )

    def source_at(self, position) -> NewtonianSource:
        return NewtonianSource(
            position=tuple(position), mass_M=self.mass_M, softening_eps=self.softening
        )

    def build_potentials(self, grid: Grid | None = None) -> tuple[PotentialField, PotentialField]:
        """One potential per branch; mass_M = 0 is the explicit free limit."""
        grid = grid or self.build_grid()
        if self.mass_M == 0.0:
            v0 = zero_potential(grid)
            return v0, v0
        v_l = sample_potential(grid, [self.source_at(self.x_l)], self.mass_m)
        v_r = sample_potential(grid, [self.source_at(self.x_r)], self.mass_m)
        return v_l, v_r

    def default_support(self) -> SupportSpec:
        """Ball holding the packet down to ~1e-12 of its peak amplitude."""
        if self.support is not None:
            return self.support
        return SupportSpec(center=self.packet_center, radius=10.5 * self.packet_width)

    def build_disjoint_pair(self, grid: Grid | None = None):
        grid = grid or self.build_grid()
        sup = self.default_support()
        return disjoint_deformation_pair(sup.center, sup.radius, grid)

    def with_parameter(self, name: str, value: float) -> "ScenarioConfig":
        """Derived scenario for sweeps over M, t_total, separation or eps."""
        if name == "M":
            return replace(self, mass_M=float(value))
        if name == "t_total":
            return replace(self, t_total=float(value))
        if name == "eps":
            return replace(self, softening=float(value))
        if name == "separation":
            xl = np.asarray(self.x_l)
            xr = np.asarray(self.x_r)
            mid = 0.5 * (xl + xr)
            gap = xr - xl
            gap_len = float(np.linalg.norm(gap))
            if gap_len == 0.0:
                raise ScenarioError("cannot sweep separation: x_l equals x_r")
            unit = gap / gap_len
            return replace(
                self,
                x_l=tuple(mid - 0.5 * float(value) * unit),
                x_r=tuple(mid + 0.5 * float(value) * unit),
            )
        raise ScenarioError(
            f"unknown sweep parameter {name!r}; pick one of M, t_total, separation, eps"
        )


SWEEP_PARAMETERS = ("M", "t_total", "separation", "eps")


# ---------------------------------------------------------------------------
# validation


def validate(config: ScenarioConfig) -> list[Finding]:
    """Statically check every module precondition; empty list means clean.

    Errors block a run; warnings do not. Everything checked here is
    detectable before any stepping, so a validated scenario can only fail
    at runtime through numerical corruption.
    """
    findings: list[Finding] = []
    err = lambda where, msg: findings.append(Finding("error", where, msg))
    warn = lambda where, msg: findings.append(Finding("warning", where, msg))

    try:
        grid = config.build_grid()
    except NqgError as exc:
        err("grid", str(exc))
        return findings

    dim = grid.dim
    for name, vec in (
        ("packet.center", config.packet_center),
        ("packet.momentum", config.packet_momentum),
        ("sources.x_l", config.x_l),
        ("sources.x_r", config.x_r),
    ):
        arr = np.atleast_1d(np.asarray(vec, dtype=float))
        if arr.shape != (dim,):
            err(name, f"needs {dim} components, got {len(arr)}")
        elif not np.all(np.isfinite(arr)):
            err(name, "contains non-finite values")
    if any(f.severity == "error" for f in findings):
        return findings

    # packet resolution and boundary tails, including free spreading and drift
    if not config.packet_width > 0.0:
        err("packet.width", f"must be positive, got {config.packet_width}")
    elif config.packet_width < 3.0 * grid.spacing:
        err(
            "packet.width",
            f"width {config.packet_width} < 3 spacings; need spacing <= "
            f"{config.packet_width / 3.0:.6g}, have {grid.spacing:.6g}",
        )
    if not config.mass_m > 0.0:
        err("particle.mass_m", f"must be positive, got {config.mass_m}")
    if config.t_total < 0.0:
        err("time.t_total", f"must be non-negative, got {config.t_total}")
    if not 0.0 <= config.t0 <= max(config.t_total, 0.0):
        err("time.t0", f"must lie in [0, t_total], got {config.t0}")

    if not any(f.severity == "error" for f in findings):
        width_t = free_dispersion_width(
            config.packet_width, config.t_total, config.mass_m
        )
        drift = np.abs(np.asarray(config.packet_momentum)) / config.mass_m * config.t_total
        margin = (
            0.5 * grid.length - np.abs(np.asarray(config.packet_center)) - drift
        )
        if np.any(margin <= 0.0):
            err("packet", "free drift carries the packet past the boundary")
        else:
            tail = float(np.exp(-np.min(margin) ** 2 / (4.0 * width_t**2)))
            if tail >= BOUNDARY_TAIL_LIMIT:
                err(
                    "packet",
                    f"free-dispersion bound puts {tail:.2e} of the envelope at "
                    f"the periodic boundary (limit {BOUNDARY_TAIL_LIMIT}); "
                    "enlarge the grid or shorten t_total",
                )

    # sources
    if config.mass_M < 0.0:
        err("sources.mass_M", f"must be >= 0, got {config.mass_M}")
    elif config.mass_M > 0.0:
        if config.softening < grid.spacing:
            err(
                "sources.softening",
                f"softening {config.softening} below lattice spacing {grid.spacing:.6g}",
            )
        if config.mass_M < MASS_RATIO_WARN * config.mass_m:
            warn(
                "sources.mass_M",
                f"M = {config.mass_M} is not much greater than m = {config.mass_m}; "
                "the frozen-source approximation degrades",
            )
    if tuple(config.x_l) == tuple(config.x_r):
        err("sources", "x_l equals x_r: degenerate scenario, no branch pair exists")
    for name, pos in (("x_l", config.x_l), ("x_r", config.x_r)):
        if np.any(np.abs(np.asarray(pos)) >= 0.5 * grid.length):
            err(f"sources.{name}", f"{pos} lies outside the grid interior")

    # time stepping
    dt = config.effective_dt(grid)
    if not dt > 0.0:
        err("time.dt", f"must be positive, got {dt}")
    elif config.t_total > 0.0:
        steps = int(np.ceil(config.t_total / dt))
        if steps > 1_000_000:
            err("time.dt", f"t_total/dt = {steps} exceeds the 1e6 step limit")
        if config.mass_M > 0.0 and config.softening > 0.0:
            vmax = config.mass_m * config.mass_M / config.softening
            if dt * vmax > 1.0:
                warn(
                    "time.dt",
                    f"dt*max|V| = {dt * vmax:.3g} > 1; potential phase advances "
                    "more than a radian per step",
                )

    # optional deformation
    if config.deformation is not None:
        try:
            d = config.deformation.build()
            d.check_inside(grid)
            if len(config.deformation.center) != dim:
                err("deformation", f"needs {dim} components")
        except (DeformationError, ScenarioError) as exc:
            err("deformation", str(exc))
        if config.deformation.weight not in ("half_density", "scalar"):
            err("deformation.weight", f"unknown weight {config.deformation.weight!r}")

    if config.support is not None:
        try:
            config.build_disjoint_pair(grid)
        except (DeformationError, NqgError) as exc:
            err("deformation_pair", str(exc))

    if config.metric is not None:
        from .gauge import METRIC_FAMILIES  # local import to avoid cycles

        if config.metric.family not in METRIC_FAMILIES:
            err(
                "metric.family",
                f"unknown family {config.metric.family!r}; "
                f"known: {', '.join(sorted(METRIC_FAMILIES))}",
            )
        if not config.metric.fd_step > 0.0:
            err("metric.fd_step", "finite-difference step must be positive")

    for name in config.gauge_prescriptions:
        if name not in ("identity", "common", "relative"):
            err("gauge.prescriptions", f"unknown prescription preset {name!r}")
        elif name in ("common", "relative") and config.deformation is None:
            err("gauge.prescriptions", f"{name!r} needs a [deformation] section")

    return findings


def require_valid(config: ScenarioConfig) -> list[Finding]:
    """Validate and raise ScenarioError on the first error finding."""
    findings = validate(config)
    errors = [f for f in findings if f.severity == "error"]
    if errors:
        raise ScenarioError("; ".join(str(f) for f in errors))
    return findings


# ---------------------------------------------------------------------------
# file loading


def _floats(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ScenarioError(f"cannot parse {raw!r} as numbers: {exc}") from exc


def _get(parser, section, option, cast, default=None, *, path=""):
    if not parser.has_option(section, option):
        if default is not None or (section, option) in _OPTIONAL:
            return default
        raise ScenarioError(f"{path}: missing [{section}] {option}")
    raw = parser.get(section, option)
    try:
        return cast(raw)
    except (ValueError, ScenarioError) as exc:
        raise ScenarioError(
            f"{path}: bad value for [{section}] {option}: {raw!r} ({exc})"
        ) from exc


_OPTIONAL = {
    ("time", "dt"),
    ("time", "t0"),
    ("output", "directory"),
}


def load_scenario(path) -> ScenarioConfig:
    """Parse one INI scenario file into a ScenarioConfig.

    Raises ScenarioError naming the section/option (and, for syntax errors,
    the line) of the first problem.
    """
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from exc

    p = str(path)
    kwargs = dict(
        dim=_get(parser, "grid", "dim", int, path=p),
        n=_get(parser, "grid", "n", int, path=p),
        length=_get(parser, "grid", "length", float, path=p),
        packet_center=_get(parser, "packet", "center", _floats, path=p),
        packet_width=_get(parser, "packet", "width", float, path=p),
        packet_momentum=_get(parser, "packet", "momentum", _floats, path=p),
        x_l=_get(parser, "sources", "x_l", _floats, path=p),
        x_r=_get(parser, "sources", "x_r", _floats, path=p),
        mass_M=_get(parser, "sources", "mass_M", float, path=p),
        softening=_get(parser, "sources", "softening", float, path=p),
        mass_m=_get(parser, "particle", "mass_m", float, path=p),
        t_total=_get(parser, "time", "t_total", float, path=p),
    )
    if parser.has_option("time", "dt"):
        kwargs["dt"] = _get(parser, "time", "dt", float, path=p)
    if parser.has_option("time", "t0"):
        kwargs["t0"] = _get(parser, "time", "t0", float, path=p)

    if parser.has_section("deformation"):
        kwargs["deformation"] = DeformationSpec(
            center=_get(parser, "deformation", "center", _floats, path=p),
            radius=_get(parser, "deformation", "radius", float, path=p),
            amplitude=_get(parser, "deformation", "amplitude", _floats, path=p),
            profile=parser.get("deformation", "profile", fallback="bump").strip(),
            weight=parser.get("deformation", "weight", fallback="half_density").strip(),
        )
    if parser.has_section("deformation_pair"):
        kwargs["support"] = SupportSpec(
            center=_get(parser, "deformation_pair", "support_center", _floats, path=p),
            radius=_get(parser, "deformation_pair", "support_radius", float, path=p),
        )
    if parser.has_section("metric"):
        # entries separated by "|" ( ";" would read as an inline comment)
        pts_raw = parser.get("metric", "points", fallback="").strip()
        points = tuple(
            tuple(_floats(chunk)) for chunk in pts_raw.split("|") if chunk.strip()
        )
        for pt in points:
            if len(pt) != 4:
                raise ScenarioError(
                    f"{p}: [metric] points entries need 4 numbers (t x y z), got {pt}"
                )
        kwargs["metric"] = MetricSpec(
            family=_get(parser, "metric", "family", str.strip, path=p),
            mass=_get(parser, "metric", "mass", float, default=1.0, path=p),
            fd_step=_get(parser, "metric", "fd_step", float, default=1e-3, path=p),
            points=points,
        )
    if parser.has_section("gauge"):
        raw = parser.get("gauge", "prescriptions", fallback="identity")
        kwargs["gauge_prescriptions"] = tuple(
            tok.strip() for tok in raw.replace(",", " ").split() if tok.strip()
        )
    if parser.has_option("output", "directory"):
        kwargs["output_dir"] = parser.get("output", "directory").strip()

    return ScenarioConfig(**kwargs)
