"""Exception hierarchy shared across the package.

Two branches matter operationally: `DataError` (bad inputs, never worth
retrying) and `ScorerTransportError` (the scorer service was unreachable
or timed out, safe to retry). The CLI maps them to distinct exit codes.
"""


class CqarankError(Exception):
    pass


class DataError(CqarankError, ValueError):
    pass


class ScorerTransportError(CqarankError):
    """Scorer service unreachable, timed out, or failed mid-request."""
