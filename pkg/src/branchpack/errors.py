"""Exception types shared across the package."""


class BranchpackError(Exception):
    pass


class InputError(BranchpackError, ValueError):
    """Malformed instance data: unknown ids, bad partitions, loops, ..."""


class ContractError(BranchpackError, RuntimeError):
    """A precondition or internal guarantee was violated.

    Raised by the solvers as a bug trap when a condition holds but no
    valid step can be found.
    """


class CapacityError(BranchpackError, RuntimeError):
    """Instance is beyond the exhaustive enumeration limits."""
