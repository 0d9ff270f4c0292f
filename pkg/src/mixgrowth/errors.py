"""Shared exception types.

Error taxonomy used across the package:

* configuration / argument problems -> ``InputError`` (a ``ValueError``)
* requested accuracy or depth not available -> ``PrecisionError``
* explicit budgets exceeded (bit sizes, grids, subset counts) -> ``ResourceError``
* a constructive search failed (e.g. no admissible partial quotient) -> ``ConstructionError``
* a quantity that must be certified stable is not -> ``CertificationError``
"""


class InputError(ValueError):
    """Invalid argument or configuration value."""


class PrecisionError(ValueError):
    """Stored precision/depth is insufficient for the request."""


class ResourceError(RuntimeError):
    """A configured budget (bits, grid points, subsets) would be exceeded."""


class ConstructionError(RuntimeError):
    """A constructive search failed; the message names the failing level."""


class CertificationError(RuntimeError):
    """A quantity that must be certified (stable under refinement) is not."""
