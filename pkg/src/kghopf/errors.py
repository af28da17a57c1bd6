"""Exception hierarchy for kghopf.

The CLI maps these onto exit codes: configuration and wave-existence
problems exit 1, report inconsistencies exit 2, numerical failures exit 3.
"""


class KgHopfError(Exception):
    """Base class for all kghopf errors."""


class ConfigError(KgHopfError):
    """Invalid or incomplete run configuration."""


class EvaluationDomainError(KgHopfError):
    """A potential evaluation produced a non-finite value."""


class NoOrbitError(KgHopfError):
    """The requested energy admits no orbit of the profile equation."""


class NoPeriodicOrbitError(KgHopfError):
    """The requested energy sits on a separatrix: no periodic orbit."""


class TurningPointError(KgHopfError):
    """Turning points of the profile orbit could not be bracketed."""


class QuadratureError(KgHopfError):
    """Period quadrature failed to converge to the requested tolerance."""


class ProfileAccuracyError(KgHopfError):
    """Profile integration missed its accuracy target.

    Carries the achieved energy drift in ``drift``.
    """

    def __init__(self, message, drift):
        super().__init__(message)
        self.drift = drift


class IntegratorError(KgHopfError):
    """The monodromy integrator failed (step-count limit or non-finite state)."""


class DegenerateDiscriminantError(KgHopfError):
    """Both discriminant derivatives vanish at a critical point.

    Cannot occur for genuine Hill discriminants; signals numerical trouble.
    """


class NotAWaveCoefficientError(KgHopfError):
    """The coefficient is not the linearization of a periodic wave (Delta(0) != 2)."""


class InconsistentWithTheoryError(KgHopfError):
    """A computed quantity violates a structural fact about Hill discriminants."""


class ProbeRejectedError(KgHopfError):
    """An asymptotic probe was too close to a resonance to be meaningful."""
