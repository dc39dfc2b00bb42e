"""Exception hierarchy shared across the workbench.

The CLI maps these onto process exit codes; library callers catch them
directly.
"""


class CovercraftError(Exception):
    """Base class for all workbench errors."""


class ModelInvalidError(CovercraftError):
    """The model violates a structural invariant (disconnected quotient,
    non-isometric generator, inconsistent table, ...)."""


class PerturbRadiusError(ModelInvalidError):
    """A radius or threshold ties an attained distance exactly.

    Carries the offending value so the caller can move the threshold off
    the distance spectrum.
    """

    def __init__(self, message, attained):
        super().__init__(message)
        self.attained = attained


class CertificateError(CovercraftError):
    """A certificate check failed (rounding bound violated, separation
    witness found, sandwich broken beyond tolerance)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResourceBudgetError(CovercraftError):
    """An enumeration exceeded its configured node budget."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ScenarioParseError(CovercraftError):
    """The scenario file does not conform to the grammar."""
