"""Exception hierarchy shared across the package.

Two roots: :class:`ContractError` for violated preconditions (bad inputs,
bad configuration), :class:`NumericalIntegrityError` for invariants that
drifted during a computation.  The CLI maps the former to exit code 2 and
the latter to exit code 3.
"""


class ContractError(ValueError):
    """A precondition or configuration contract was violated."""


class ConfigError(ContractError):
    """A configuration document failed validation; message carries the field path."""


class DegeneracyError(ContractError):
    """An eigenvalue sits too close to the chemical potential to decide occupation."""


class StructureError(ContractError):
    """An operator lacks the block structure the construction requires."""


class TruncationError(ContractError):
    """A function's support does not fit inside the discretisation window."""


class AccuracyError(ContractError):
    """A discretisation is too coarse for the requested tolerance."""


class DemoNotApplicableError(ContractError):
    """The scenario is too trivial for the requested demonstration."""


class NumericalIntegrityError(RuntimeError):
    """A numerical invariant drifted beyond its gate."""


class ConvergenceError(NumericalIntegrityError):
    """An iterative kernel (eigensolver, SVD) failed to converge."""


class DistributionIntegrityError(NumericalIntegrityError):
    """Recovered probabilities carry residues beyond the trusted gate."""


class HypothesisViolationError(ContractError):
    """Operators fail a commutation hypothesis the formulas rely on."""
