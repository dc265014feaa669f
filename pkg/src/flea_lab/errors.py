"""Exception and warning types shared across the laboratory."""


class FleaLabError(Exception):
    """Base class for all numerical-laboratory failures."""


class ConfigError(FleaLabError):
    """Invalid run configuration. Carries a list of (json_pointer, message) pairs."""

    def __init__(self, issues):
        self.issues = list(issues)
        lines = "; ".join(f"{ptr}: {msg}" for ptr, msg in self.issues)
        super().__init__(lines or "invalid configuration")


class NegativePotentialRegion(FleaLabError):
    """V dips below zero on an interval where sqrt(V) is required."""


class FleaCoversMinimum(FleaLabError):
    """The flea support contains a potential minimum (+a or -a)."""


class ConvergenceFailure(FleaLabError):
    """Eigensolver failed to converge or a residual check failed."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class StepRejected(FleaLabError):
    """A propagation step violated the per-step norm-drift bound (dt too large)."""


class WrongTopology(FleaLabError):
    """Energy does not produce the four-turning-point double-well topology."""


class PoleProximity(FleaLabError):
    """Quantization residual evaluated too close to a cosine pole."""


class LevelAboveBarrier(FleaLabError):
    """Requested WKB level does not exist below the barrier top."""


class NoBracket(FleaLabError):
    """Root bracketing failed (e.g. quantization branches merge near a level crossing)."""


class OverlappingDisks(FleaLabError):
    """Phase-space disks around (0, +a) and (0, -a) overlap for the given radius."""


class NormBlowup(FleaLabError):
    """Stochastic step needed a norm correction beyond the allowed bound."""


class NoTransitions(FleaLabError):
    """Too few Langevin paths crossed the barrier within the time cap."""


class UnclassifiedOutcome(UserWarning):
    """No ensemble member crossed the mass-split classification threshold."""
