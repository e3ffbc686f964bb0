"""Exception types raised by the library.

All of them subclass ValueError so callers that just want "bad input" can
catch one thing, while the CLI and tests can tell the categories apart.
"""


class ContractViolationError(ValueError):
    """An operation was called with arguments that break its preconditions."""


class ProfileError(ValueError):
    """A power-delay profile is unusable on the configured grid."""


class SupportError(ValueError):
    """Path delays or Dopplers fall outside the alias-free support region."""


class ConfigError(ValueError):
    """A config file failed to parse or validate.  Message lists every violation."""
