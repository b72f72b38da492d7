"""Exception hierarchy shared across the package."""


class AmcmcError(Exception):
    """Base class for all package errors."""


class DimensionError(AmcmcError, ValueError):
    """Mismatched shapes between distributions / kernels."""


class DomainError(AmcmcError, ValueError):
    """Value outside its mathematical domain (negative weight, zero density, ...)."""


class StateError(AmcmcError, RuntimeError):
    """Operation applied to an object in an unusable state (e.g. empty reservoir)."""


class StructureError(AmcmcError, ValueError):
    """Structural defect of a kernel (reducibility, degenerate spectrum)."""


class BudgetError(AmcmcError, RuntimeError):
    """Exact computation would exceed its enumeration / memory budget."""


class ConfigError(AmcmcError, ValueError):
    """Invalid experiment configuration."""
