"""Numerical laboratory for the elliptic quantum group E_{tau,eta}(sl2)."""

from .elliptic_core import EllipticParams, PoleError, theta

__all__ = ["EllipticParams", "PoleError", "theta"]
__version__ = "0.1.0"
