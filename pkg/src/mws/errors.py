"""Exception hierarchy shared across the solver."""


class MwsError(Exception):
    """Base class for solver errors."""


class ConfigError(MwsError):
    """Invalid or malformed problem configuration."""


class SolverError(MwsError):
    """Numerical failure inside a solver stage."""


class PoleProximityError(SolverError):
    """An evaluation point fell within the merge tolerance of a pole."""


class BracketError(SolverError):
    """A sign-change bracket could not be established in an interval."""


class EigenSolveError(SolverError):
    """The dense eigenproblem failed to converge."""


class UnsupportedModeError(ConfigError):
    """Operation requested in a perturbation mode that does not support it."""
