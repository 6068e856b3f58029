"""Exception types shared across the package."""


class SqgError(Exception):
    """Base class for all package errors."""


class ConfigError(SqgError):
    """Invalid configuration; message names the offending field or file."""


class NonFiniteFieldError(SqgError):
    """A field contains NaN or Inf where finite values are required."""


class SymmetryError(SqgError):
    """Hermitian symmetry of a spectral field is violated beyond tolerance."""


class MeanModeError(SqgError):
    """An operation requiring a zero-mean field got a nonzero mean."""


class SimulationDivergedError(SqgError):
    """The time integration produced NaN/Inf coefficients."""

    def __init__(self, message, step_count=None, t=None):
        super().__init__(message)
        self.step_count = step_count
        self.t = t


class HypothesisError(SqgError):
    """An inequality trial was requested with parameters violating the
    estimate's hypotheses.  Always raised, never silently skipped."""


class TrialSkipped(SqgError):
    """A trial is degenerate (e.g. the projected field vanishes) and carries
    no information; harness code may catch this and move on."""


class UnresolvedSpectrumError(SqgError):
    """The spectrum has no shells above the noise floor, so a decay-radius
    fit is impossible."""


class SnapshotError(SqgError):
    """Base class for binary snapshot format errors."""


class BadMagicError(SnapshotError):
    """Snapshot file does not start with the expected magic bytes."""


class VersionMismatchError(SnapshotError):
    """Snapshot format version is not supported."""


class TruncatedSnapshotError(SnapshotError):
    """Snapshot payload is shorter than the header promises."""
