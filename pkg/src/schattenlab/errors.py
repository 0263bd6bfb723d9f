"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can emit it
as JSON without string matching.
"""


class LabError(Exception):
    code = "error"

    def to_dict(self):
        return {"code": self.code, "message": str(self)}


class ConfigurationError(LabError):
    """Unsupported manifold or invalid run configuration."""

    code = "configuration"


class ContractError(LabError, ValueError):
    """A documented precondition was violated by the caller."""

    code = "contract"


class UnsupportedError(LabError):
    code = "unsupported"


class FitError(LabError, ValueError):
    """Power-law fit could not be formed (too few or degenerate points)."""

    code = "fit"


class DivergenceError(LabError):
    code = "divergence"


class ConsistencyError(LabError):
    """Two formulas that must agree on an overlap did not."""

    code = "consistency"


class SolverError(LabError):
    """A dense decomposition failed its residual check."""

    code = "solver"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual

    def to_dict(self):
        out = super().to_dict()
        out["residual"] = self.residual
        return out


class ThresholdViolation(LabError):
    """Refusal: an order condition required by a theorem does not hold."""

    code = "threshold"

    def __init__(self, message, inequality=None):
        super().__init__(message)
        self.inequality = inequality

    def to_dict(self):
        out = super().to_dict()
        out["inequality"] = self.inequality
        return out
