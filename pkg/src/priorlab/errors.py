"""Shared exception types."""


class BudgetError(Exception):
    """An enumeration or experiment would exceed its configured budget."""


class AbsoluteContinuityError(ValueError):
    """A prior puts mass where its reference measure has none."""
