"""Shared exception types and the desk-scale enumeration budget."""

from __future__ import annotations

#: Default ceiling for every combinatorial enumeration (index functions,
#: formal word expansions, partition-tuple sweeps).  Overridable per call
#: and via the CLI ``--budget`` flag.
DEFAULT_BUDGET = 10_000_000


class SizeLimitError(ValueError):
    """An enumeration or expansion would exceed the configured budget."""


class KindError(TypeError):
    """An operator family of the wrong kind was supplied."""


class NotPOrthogonalError(ValueError):
    """Input family violates the p-orthogonality precondition.

    Carries the offending moment report in ``report``.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ConstructionError(ValueError):
    """A family could not be built; ``witness`` exhibits the violation."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def check_budget(count: int, budget: int, what: str) -> None:
    """Raise SizeLimitError when an enumeration of ``count`` items exceeds ``budget``."""
    if count > budget:
        raise SizeLimitError(
            f"{what} needs {count} items, exceeding the budget of {budget}"
        )
