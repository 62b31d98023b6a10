"""Exception hierarchy shared by all nqglab modules.

Exit-code mapping used by the CLI: configuration / validation problems
(``ScenarioError`` and subclasses raised before any stepping) map to exit
code 1, numerical failures detected during a run map to exit code 2.
"""


class NqgError(Exception):
    """Base class for all package errors."""


class GridMismatchError(NqgError):
    """Two fields live on different lattices; overlaps/steps are undefined.

    Never resampled silently: an overlap across incompatible lattices is
    the discrete version of comparing functions on different manifolds.
    """


class ResolutionError(NqgError):
    """A requested feature is too fine for the lattice spacing."""


class ScenarioError(NqgError):
    """A scenario file or ScenarioConfig failed validation."""


class DegenerateScenarioError(ScenarioError):
    """The two source positions coincide; no branch pair exists."""


class DeformationError(NqgError):
    """A deformation violates its invertibility or support invariants."""


class FixedPointError(NqgError):
    """Inverse-map fixed-point iteration did not converge."""


class NumericalCorruptionError(NqgError):
    """A computed quantity left its mathematically guaranteed range."""


class NonNormalizedError(NumericalCorruptionError):
    """A branch wave function lost its unit normalization."""


class PrescriptionMismatchError(NqgError):
    """A gauge prescription failed to realign the pre-interaction states.

    Without the right common background the overlap observable is
    ill-defined; this error is the numerical symptom of that mismatch.
    """


class MetricDomainError(NqgError):
    """A metric family was evaluated outside its valid domain."""
