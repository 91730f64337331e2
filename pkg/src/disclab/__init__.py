"""Discrepancy laboratory for arithmetic sequences in progressions.

Counting modules (factorint, quadform, ktuples, sequences) supply exact
oracles; multfn holds the multiplicative local models; bias the closed-form
predictions; harness the empirical runs and identity checks; cli the
batch front-end.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DisclabError,
    DomainError,
    ModelError,
    OutOfRangeError,
    ResourceError,
    UnsupportedError,
)

__all__ = [
    "ConfigurationError",
    "DisclabError",
    "DomainError",
    "ModelError",
    "OutOfRangeError",
    "ResourceError",
    "UnsupportedError",
    "__version__",
]
