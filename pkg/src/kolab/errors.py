"""Exception hierarchy shared by all kolab modules."""


class KolabError(Exception):
    """Base class for every error raised by the package."""


class InvalidParams(KolabError, ValueError):
    """Parameters violate a structural bound (e.g. p <= 1 or delta <= 0)."""


class RegimeError(KolabError):
    """The requested construction does not exist for these parameters."""


class StepFailure(KolabError):
    """Adaptive step control could not reach the requested tolerance."""

    def __init__(self, message, last_radius=None):
        super().__init__(message)
        self.last_radius = last_radius


class DegenerateStart(KolabError):
    """Series startup requested for the zero initial datum."""


class NotBlownUp(KolabError):
    """A blow-up radius was requested from a solution that did not blow up."""


class OutOfRange(KolabError, ValueError):
    """Evaluation radius lies outside the sampled range."""


class DegenerateProfile(KolabError):
    """A phase-space denominator vanishes on the whole sampled range."""


class ZeroCoordinate(KolabError):
    """Reconstruction needs nonzero phase coordinates."""


class NonrealEigenvector(KolabError):
    """Shooting was requested along a complex or non-positive eigen-direction."""


class EscapeToInfinity(KolabError):
    def __init__(self, message, escape_time):
        super().__init__(message)
        self.escape_time = escape_time


class InsufficientRange(KolabError):
    """Fewer than one decade of radii available for an asymptotic fit."""


class NoBlowUp(KolabError):
    """A solution completed to r_max where blow-up was expected."""


class ZeroDenominator(KolabError):
    """The punctual ratio was requested where v vanishes."""


class RangeError(KolabError, ValueError):
    """Cutoff support is not contained in the solution range."""


class ZeroPotential(KolabError):
    """Wolff potential vanished while the oscillation did not."""


class HypothesisViolated(KolabError):
    def __init__(self, message, inequality, rho):
        super().__init__(message)
        self.inequality = inequality
        self.rho = rho


class ConfigError(KolabError):
    """Experiment configuration rejected (CLI exit code 2)."""
