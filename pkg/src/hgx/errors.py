"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a structural or precondition requirement."""


class FormatError(ValueError):
    """A serialized file could not be parsed into the expected schema."""


class NumericalError(ArithmeticError):
    """A numerical routine failed (non-convergence, non-finite values)."""


class NotEquivalentError(ValidationError):
    """The hypergraph walk has no undirected clique-graph equivalent."""
