"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an argument or input file violates a documented precondition."""


class BudgetError(RuntimeError):
    """Raised when a request exceeds a hard computational budget (e.g. exhaustive
    enumeration past the subset limit). The message names the cheaper alternative."""
