"""Exception types shared across the package."""


class DomainError(ValueError):
    """A variable shared by two factors has different domain sizes."""


class GraphError(ValueError):
    """A factor graph violates its structural invariants."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class QueryError(ValueError):
    """A query or elimination order is inconsistent with its graph."""


class MethodError(ValueError):
    """The requested inference method does not apply to the graph's semantics."""


class CapExceeded(RuntimeError):
    """A brute-force table would exceed the configured entry cap."""


class SpecError(ValueError):
    """A model specification (latent-sum, Gaussian, IF) is malformed."""


class HeuristicFailure(ArithmeticError):
    """The equal-split Gaussian decomposition produced a non-PSD clique covariance.

    This is a limitation of the heuristic, not evidence that no convolutional
    factorization exists.
    """


class ModelFormatError(ValueError):
    """A model/query file could not be parsed."""
