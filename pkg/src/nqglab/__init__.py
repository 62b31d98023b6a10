"""nqglab: a numerical laboratory for gravitational decoherence of
two-branch superpositions and its behaviour under spatial deformations.

Units: hbar = G = 1 everywhere; space is a uniform periodic lattice with a
fixed time foliation. See README.md for the experiment catalogue.
"""

__version__ = "0.1.0"

from .decoherence import (
    BranchPair,
    DecoherenceResult,
    SuperpositionState,
    evolve_branch_pair,
    run_double_slit,
    sweep,
    transition_probability,
)
from .diffeo import (
    HoleDiffeomorphism,
    disjoint_deformation_pair,
    push_forward,
    reference_pullback,
    weak_covariance_check,
)
from .gauge import (
    GaugePrescription,
    compare_gauges,
    deform_pair,
    harmonic_residual,
    metric_field,
    realign,
)
from .lattice import (
    Grid,
    WaveFunction,
    gaussian_packet,
    inner_product,
    load_wavefunction,
    norm,
    save_wavefunction,
)
from .potential import NewtonianSource, PotentialField, sample_potential, zero_potential
from .propagator import evolve, step
from .reference import crank_nicolson_evolve
from .scenario import ScenarioConfig, load_scenario, validate

__all__ = [
    "BranchPair",
    "DecoherenceResult",
    "GaugePrescription",
    "Grid",
    "HoleDiffeomorphism",
    "NewtonianSource",
    "PotentialField",
    "ScenarioConfig",
    "SuperpositionState",
    "WaveFunction",
    "compare_gauges",
    "crank_nicolson_evolve",
    "deform_pair",
    "disjoint_deformation_pair",
    "evolve",
    "evolve_branch_pair",
    "gaussian_packet",
    "harmonic_residual",
    "inner_product",
    "load_scenario",
    "load_wavefunction",
    "metric_field",
    "norm",
    "push_forward",
    "realign",
    "reference_pullback",
    "run_double_slit",
    "sample_potential",
    "save_wavefunction",
    "step",
    "sweep",
    "transition_probability",
    "validate",
    "zero_potential",
    "__version__",
]
