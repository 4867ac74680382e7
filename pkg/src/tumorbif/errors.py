"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class OrderRangeError(DomainError):
    """Mode index beyond the certified range."""


class DegenerateParameterError(ValueError):
    """Parameters make a closed form singular (e.g. vanishing denominator)."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to bracket or converge."""


class CertificateViolation(RuntimeError):
    """A certified sign or exact identity failed to hold."""
