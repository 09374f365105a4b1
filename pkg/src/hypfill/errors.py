"""Exception taxonomy shared by all modules.

Exit-code mapping used by the CLI: FormatError and ValidationError are
user-input problems (exit 2), NumericGuardError is a tripped numeric
guard (exit 3).
"""


class HypfillError(Exception):
    pass


class FormatError(HypfillError, ValueError):
    """Malformed file, matrix, id, or argument."""


class ValidationError(HypfillError, ValueError):
    """Input is well-formed but violates a required invariant."""


class NumericGuardError(HypfillError, RuntimeError):
    """A numeric guard tripped (cap exceeded, inconsistent data, no bracket)."""
